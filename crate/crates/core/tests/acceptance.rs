//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values (run with `--nocapture` to see them).

use phasekit::apps::{
    magnify, predict_next, predict_rollout, transfer_to_image, PredictionConfig, TransferConfig,
};
use phasekit::frame::Frame;
use phasekit::loss::{
    content_loss, correlation, optimize_transfer, style_loss, temporal_loss, weighted_gram,
    CorrelationMap, FeatureMap, LossWeights, OuterWeighting,
};
use phasekit::motion::{flow_from_phase, phase_delta, smooth_deltas, FlowField, FlowParams};
use phasekit::pyramid::{decompose, reconstruct, relative_l2, PyramidSpec};
use phasekit::synth::{
    flow_error_interior, fourier_shift, generate, psnr, Motion, SynthSpec, Texture,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: usize, name: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Uniform white noise in [0.05, 0.95]; spectrally flat, used where the
/// mask-centroid flow approximation must be unbiased.
fn white_noise(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Frame::new(
        w,
        h,
        1,
        (0..w * h).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect(),
    )
    .unwrap()
}

fn noise_sequence(motion: Motion, frames: usize, seed: u64) -> Vec<Frame> {
    let spec = SynthSpec {
        motion,
        texture: Texture::Noise { seed },
        width: 128,
        height: 128,
        frames,
    };
    generate(&spec).unwrap().0
}

/// Mean flow between `reference` (of known displacement) and `image`,
/// measured from smoothed phase deltas over the interior.
fn mean_residual_flow(reference: &Frame, image: &Frame) -> (f64, f64) {
    let spec = PyramidSpec::default();
    let pa = decompose(reference, &spec).unwrap();
    let pb = decompose(image, &spec).unwrap();
    let mut deltas = phase_delta(&pa, &pb).unwrap();
    smooth_deltas(&mut deltas, 3.0);
    let flow = flow_from_phase(&deltas, &FlowParams::default());
    let (w, h) = (reference.width(), reference.height());
    let (mut su, mut sv, mut n) = (0.0, 0.0, 0usize);
    for y in 8..h - 8 {
        for x in 8..w - 8 {
            let i = y * w + x;
            if flow.valid[i] {
                su += flow.u[i];
                sv += flow.v[i];
                n += 1;
            }
        }
    }
    (su / n as f64, sv / n as f64)
}

#[test]
fn criterion_1_tight_frame_reconstruction() {
    let frame = noise_sequence(Motion::Static, 1, 7).remove(0);
    let spec = PyramidSpec::default();

    // Single-threaded timing.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = std::time::Instant::now();
    let (pyr, recon) = pool.install(|| {
        let pyr = decompose(&frame, &spec).unwrap();
        let recon = reconstruct(&pyr).unwrap();
        (pyr, recon)
    });
    let elapsed = start.elapsed();
    assert_eq!(pyr.bands.len(), 16);

    let err = relative_l2(&recon, &frame);
    let ok = err < 1e-6 && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        "tight-frame reconstruction",
        ok,
        &format!(
            "rel L2 {err:.2e}, {:.1} ms single-threaded",
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

#[test]
fn criterion_2_fourier_shift_recovery() {
    let base = white_noise(128, 128, 42);
    let spec = PyramidSpec::default();
    let p0 = decompose(&base, &spec).unwrap();
    let mut detail = String::new();
    let mut ok = true;
    for &(dx, dy) in &[(1.0, 0.0), (0.0, 1.0), (0.25, -0.25), (0.5, 0.5)] {
        let shifted = fourier_shift(&base, dx, dy);
        let p1 = decompose(&shifted, &spec).unwrap();
        let mut deltas = phase_delta(&p0, &p1).unwrap();
        smooth_deltas(&mut deltas, 3.0);
        let flow = flow_from_phase(&deltas, &FlowParams::default());
        let mut gt = FlowField::zeros(128, 128);
        gt.u.fill(dx);
        gt.v.fill(dy);
        let stats = flow_error_interior(&flow, &gt, 8).unwrap();
        ok &= stats.mae < 0.05 && stats.valid_fraction > 0.9;
        detail.push_str(&format!(
            "({dx},{dy}): mae {:.4} valid {:.3}; ",
            stats.mae, stats.valid_fraction
        ));
    }
    report(2, "shift-theorem flow recovery", ok, detail.trim_end());
}

#[test]
fn criterion_3_prediction() {
    let spec = PyramidSpec::default();
    let cfg = PredictionConfig::default();

    // 1 px/frame translating noise: predict the third frame from the first two.
    let frames = noise_sequence(Motion::Translate { vx: 1.0, vy: 0.0 }, 3, 11);
    let pred = predict_next(&frames[0], &frames[1], &cfg, &spec).unwrap();
    let moving_psnr = psnr(&pred, &frames[2], 8).unwrap();

    // Static scene.
    let still = noise_sequence(Motion::Static, 2, 12);
    let pred_static = predict_next(&still[0], &still[1], &cfg, &spec).unwrap();
    let static_psnr = psnr(&pred_static, &still[1], 8).unwrap();

    // 3-step rollout at 0.3 px/frame: cumulative displacement vs 0.9 px,
    // measured as known reference displacement plus residual flow.
    let seq = noise_sequence(Motion::Translate { vx: 0.3, vy: 0.0 }, 2, 13);
    let rolled = predict_rollout(
        &seq[0],
        &seq[1],
        &PredictionConfig { steps: 3, ..cfg },
        &spec,
    )
    .unwrap();
    let reference = fourier_shift(&seq[1], 0.9, 0.0);
    let (ru, _) = mean_residual_flow(&reference, &rolled[2]);
    let cumulative = 0.9 + ru;

    let ok = moving_psnr > 30.0 && static_psnr > 50.0 && (cumulative - 0.9).abs() < 0.15;
    report(
        3,
        "phase-extrapolation prediction",
        ok,
        &format!(
            "moving {moving_psnr:.1} dB, static {static_psnr:.1} dB, rollout displacement {cumulative:.3} px vs 0.9"
        ),
    );
}

#[test]
fn criterion_4_magnification_linearity() {
    let spec = PyramidSpec::default();
    // 0.1 px oscillation, period 8: displacement peaks at frame 2.
    let frames = noise_sequence(
        Motion::Oscillate {
            ax: 0.1,
            ay: 0.0,
            period: 8.0,
        },
        4,
        21,
    );
    let out = magnify(&frames, 10.0, None, &spec).unwrap();
    // out[2] should sit 1.0 px from out[0]; measure against a 1 px reference.
    let reference = fourier_shift(&out[0], 1.0, 0.0);
    let (ru, _) = mean_residual_flow(&reference, &out[2]);
    let amplitude = 1.0 + ru;

    let identity = magnify(&frames, 1.0, None, &spec).unwrap();
    let ident_err = relative_l2(&identity[2], &frames[2]);

    let ok = (amplitude - 1.0).abs() <= 0.1 && ident_err < 1e-6;
    report(
        4,
        "magnification linearity",
        ok,
        &format!(
            "amplified 0.1 px -> {amplitude:.3} px at alpha=10; alpha=1 rel L2 {ident_err:.2e}"
        ),
    );
}

#[test]
fn criterion_5_self_transfer() {
    let spec = PyramidSpec::default();
    let frames = noise_sequence(
        Motion::Oscillate {
            ax: 0.5,
            ay: 0.0,
            period: 8.0,
        },
        6,
        31,
    );
    let target = frames[0].clone();
    let cfg = TransferConfig::default();
    let outputs = transfer_to_image(&target, &frames, &cfg, &spec).unwrap();
    let mut worst = f64::INFINITY;
    for (t, out) in outputs.iter().enumerate() {
        let p = psnr(out, &frames[t + 1], 8).unwrap();
        worst = worst.min(p);
    }

    let frozen = transfer_to_image(
        &target,
        &frames,
        &TransferConfig { alpha: 0.0, ..cfg },
        &spec,
    )
    .unwrap();
    let frozen_err = frozen
        .iter()
        .map(|f| relative_l2(f, &target))
        .fold(0.0, f64::max);

    let ok = worst > 25.0 && frozen_err < 1e-6;
    report(
        5,
        "self-transfer",
        ok,
        &format!("worst frame PSNR {worst:.1} dB; alpha=0 rel L2 {frozen_err:.2e}"),
    );
}

mod oracle {
    use super::FeatureMap;

    pub fn correlation(c: &FeatureMap, d: &FeatureMap) -> Vec<f64> {
        (0..c.positions)
            .map(|j| {
                let mut num = 0.0;
                let mut na = 0.0;
                let mut nb = 0.0;
                for i in 0..c.channels {
                    num += c.get(i, j) * d.get(i, j);
                    na += c.get(i, j) * c.get(i, j);
                    nb += d.get(i, j) * d.get(i, j);
                }
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    num / (na.sqrt() * nb.sqrt())
                }
            })
            .collect()
    }

    #[allow(clippy::needless_range_loop)] // literal index form, by design
    pub fn gram(f: &FeatureMap, k: &[f64]) -> Vec<f64> {
        let n = f.channels;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                for p in 0..f.positions {
                    g[i * n + j] += k[p] * f.get(i, p) * f.get(j, p);
                }
            }
        }
        g
    }

    pub fn style(f_scales: &[FeatureMap], p_scales: &[FeatureMap], k: &[f64]) -> f64 {
        let n = f_scales[0].channels;
        let m = f_scales[0].positions;
        let mut total = 0.0;
        for (f, p) in f_scales.iter().zip(p_scales) {
            let g = gram(f, k);
            let a = gram(p, k);
            let mut acc = 0.0;
            for i in 0..n * n {
                let e = g[i] - a[i];
                acc += e * e;
            }
            total += acc / ((n * n) as f64 * (m * m) as f64);
        }
        total
    }
}

fn random_map(layer: usize, n: usize, m: usize, rng: &mut ChaCha8Rng) -> FeatureMap {
    FeatureMap::new(
        layer,
        n,
        m,
        (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

#[test]
fn criterion_6_loss_stack_oracles_and_gradients() {
    let mut max_rel = 0.0f64;
    // Oracle equivalence over every shape with N <= 4, M <= 6, S <= 2.
    for n in 1..=4usize {
        for m in 1..=6usize {
            for s in 1..=2usize {
                let mut rng = ChaCha8Rng::seed_from_u64((n * 100 + m * 10 + s) as u64);
                let f: Vec<FeatureMap> = (0..s).map(|_| random_map(0, n, m, &mut rng)).collect();
                let p: Vec<FeatureMap> = (0..s).map(|_| random_map(0, n, m, &mut rng)).collect();
                let kvals: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let k = CorrelationMap {
                    layer: 0,
                    values: kvals.clone(),
                };

                let got = correlation(&f[0], &p[0]).unwrap().values;
                let want = oracle::correlation(&f[0], &p[0]);
                for (a, b) in got.iter().zip(&want) {
                    max_rel = max_rel.max((a - b).abs() / b.abs().max(1.0));
                }

                let got = weighted_gram(&f[0], &k).unwrap();
                let want = oracle::gram(&f[0], &kvals);
                for (a, b) in got.iter().zip(&want) {
                    max_rel = max_rel.max((a - b).abs() / b.abs().max(1.0));
                }

                let (got, _) = style_loss(&f, &p, &k, OuterWeighting::None).unwrap();
                let want = oracle::style(&f, &p, &kvals);
                max_rel = max_rel.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }

    // Gradient checks on 20 seeded random instances.
    let mut max_grad_rel = 0.0f64;
    let h = 1e-6;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(2..=6);
        let f = random_map(0, n, m, &mut rng);
        let p = random_map(0, n, m, &mut rng);
        let k = CorrelationMap {
            layer: 0,
            values: (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };

        type Check = (Vec<f64>, Box<dyn Fn(&[f64]) -> f64>);
        let checks: Vec<Check> = vec![
            (
                style_loss(
                    std::slice::from_ref(&f),
                    std::slice::from_ref(&p),
                    &k,
                    OuterWeighting::None,
                )
                .unwrap()
                .1
                .remove(0),
                {
                    let (p, k) = (p.clone(), k.clone());
                    Box::new(move |vals: &[f64]| {
                        let cand = FeatureMap::new(0, n, m, vals.to_vec()).unwrap();
                        style_loss(
                            std::slice::from_ref(&cand),
                            std::slice::from_ref(&p),
                            &k,
                            OuterWeighting::None,
                        )
                        .unwrap()
                        .0
                    })
                },
            ),
            (content_loss(&f, &p).unwrap().1, {
                let p = p.clone();
                Box::new(move |vals: &[f64]| {
                    content_loss(&FeatureMap::new(0, n, m, vals.to_vec()).unwrap(), &p)
                        .unwrap()
                        .0
                })
            }),
            (temporal_loss(&f, &p).unwrap().1, {
                let p = p.clone();
                Box::new(move |vals: &[f64]| {
                    temporal_loss(&FeatureMap::new(0, n, m, vals.to_vec()).unwrap(), &p)
                        .unwrap()
                        .0
                })
            }),
        ];

        for (analytic, loss_fn) in checks {
            let mut buf = f.values.clone();
            for i in 0..buf.len() {
                let orig = buf[i];
                buf[i] = orig + h;
                let fp = loss_fn(&buf);
                buf[i] = orig - h;
                let fm = loss_fn(&buf);
                buf[i] = orig;
                let numeric = (fp - fm) / (2.0 * h);
                let denom = numeric.abs().max(analytic[i].abs()).max(1e-6);
                max_grad_rel = max_grad_rel.max((numeric - analytic[i]).abs() / denom);
            }
        }
    }

    let ok = max_rel < 1e-12 && max_grad_rel < 1e-5;
    report(
        6,
        "loss stack",
        ok,
        &format!("oracle max rel {max_rel:.2e}; gradient max rel {max_grad_rel:.2e}"),
    );
}

#[test]
fn criterion_7_optimizer_sanity() {
    let spec = PyramidSpec::new(3, 4, 16).unwrap();
    let init = white_noise(64, 64, 5);
    let video = white_noise(64, 64, 6);
    let weights = LossWeights {
        style: 0.0,
        content: 1.0,
        temporal: 0.0,
    };
    let result = optimize_transfer(&init, &video, &weights, 200, 1e4, &spec).unwrap();
    let first = result.trace.first().unwrap().content;
    let last = result.trace.last().unwrap().content;
    let nonincreasing = result
        .trace
        .windows(2)
        .all(|w| w[1].total <= w[0].total + 1e-12);
    let ok = last < 0.01 * first && nonincreasing;
    report(
        7,
        "optimizer sanity",
        ok,
        &format!(
            "content loss {first:.3e} -> {last:.3e} ({:.4}%), monotone: {nonincreasing}",
            100.0 * last / first
        ),
    );
}
