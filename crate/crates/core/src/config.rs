//! Plain-text configuration: `key = value` lines under bracketed section
//! headers, `#` comments allowed. Unknown keys and out-of-range values are
//! rejected with the offending key and line named.

use crate::error::{Error, Result};
use crate::io::Precision;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidConfig {
    pub scales: usize,
    pub orientations: usize,
    pub min_band: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionConfig {
    pub eps_amp: f64,
    pub kappa_max: f64,
    pub smoothing_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSection {
    pub alpha: f64,
    pub amplitude_gate: f64,
    pub lambda_t: f64,
    /// None means "coarsest scale", resolved where the scale count is known.
    pub correlation_layer: Option<usize>,
    pub use_correlation_weighting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    pub iters: usize,
    pub step: f64,
    pub style_weight: f64,
    pub content_weight: f64,
    pub temporal_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoConfig {
    pub precision: Precision,
}

/// Every tunable the toolkit exposes, with documented defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub pyramid: PyramidConfig,
    pub motion: MotionConfig,
    pub transfer: TransferSection,
    pub optimize: OptimizeConfig,
    pub io: IoConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            pyramid: PyramidConfig {
                scales: 4,
                orientations: 4,
                min_band: 16,
            },
            motion: MotionConfig {
                eps_amp: 0.05,
                kappa_max: 1e4,
                smoothing_radius: 0.0,
            },
            transfer: TransferSection {
                alpha: 1.0,
                amplitude_gate: 0.05,
                lambda_t: 0.0,
                correlation_layer: None,
                use_correlation_weighting: false,
            },
            optimize: OptimizeConfig {
                iters: 200,
                step: 1e4,
                style_weight: 1.0,
                content_weight: 1.0,
                temporal_weight: 0.0,
            },
            io: IoConfig {
                precision: Precision::F64,
            },
        }
    }
}

impl Config {
    /// Parse a config file over the defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::Config(format!("line {lineno}: unterminated section header"))
                })?;
                section = name.trim().to_string();
                match section.as_str() {
                    "pyramid" | "motion" | "transfer" | "optimize" | "io" => continue,
                    other => {
                        return Err(Error::Config(format!(
                            "line {lineno}: unknown section '{other}'"
                        )))
                    }
                }
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {lineno}: expected 'key = value', got '{line}'"
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value, lineno)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str, lineno: usize) -> Result<()> {
        let unknown = || {
            Err(Error::Config(format!(
                "line {lineno}: unknown key '{key}' in section '[{section}]'"
            )))
        };
        match section {
            "pyramid" => match key {
                "scales" => self.pyramid.scales = parse_usize(key, value, lineno)?,
                "orientations" => self.pyramid.orientations = parse_usize(key, value, lineno)?,
                "min_band" => self.pyramid.min_band = parse_usize(key, value, lineno)?,
                _ => return unknown(),
            },
            "motion" => match key {
                "eps_amp" => self.motion.eps_amp = parse_float(key, value, lineno)?,
                "kappa_max" => self.motion.kappa_max = parse_float(key, value, lineno)?,
                "smoothing_radius" => {
                    self.motion.smoothing_radius = parse_float(key, value, lineno)?
                }
                _ => return unknown(),
            },
            "transfer" => match key {
                "alpha" => self.transfer.alpha = parse_float(key, value, lineno)?,
                "amplitude_gate" => self.transfer.amplitude_gate = parse_float(key, value, lineno)?,
                "lambda_t" => self.transfer.lambda_t = parse_float(key, value, lineno)?,
                "correlation_layer" => {
                    self.transfer.correlation_layer = Some(parse_usize(key, value, lineno)?)
                }
                "use_correlation_weighting" => {
                    self.transfer.use_correlation_weighting = parse_bool(key, value, lineno)?
                }
                _ => return unknown(),
            },
            "optimize" => match key {
                "iters" => self.optimize.iters = parse_usize(key, value, lineno)?,
                "step" => self.optimize.step = parse_float(key, value, lineno)?,
                "style_weight" => self.optimize.style_weight = parse_float(key, value, lineno)?,
                "content_weight" => self.optimize.content_weight = parse_float(key, value, lineno)?,
                "temporal_weight" => {
                    self.optimize.temporal_weight = parse_float(key, value, lineno)?
                }
                _ => return unknown(),
            },
            "io" => match key {
                "precision" => {
                    self.io.precision = match value {
                        "f64" => Precision::F64,
                        "f32" => Precision::F32,
                        other => {
                            return Err(Error::Config(format!(
                                "line {lineno}: precision must be f32 or f64, got '{other}'"
                            )))
                        }
                    }
                }
                _ => return unknown(),
            },
            "" => {
                return Err(Error::Config(format!(
                    "line {lineno}: key '{key}' appears before any [section] header"
                )))
            }
            _ => unreachable!("section names validated at the header"),
        }
        Ok(())
    }

    /// Range-check every field, naming the offender.
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &str, detail: String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{field}: {detail}")))
            }
        }
        check(
            self.pyramid.scales >= 1,
            "pyramid.scales",
            "must be >= 1".into(),
        )?;
        check(
            self.pyramid.orientations >= 2,
            "pyramid.orientations",
            "must be >= 2".into(),
        )?;
        check(
            self.pyramid.min_band >= 1,
            "pyramid.min_band",
            "must be >= 1".into(),
        )?;
        check(
            (0.0..=1.0).contains(&self.motion.eps_amp),
            "motion.eps_amp",
            format!("must lie in [0,1], got {}", self.motion.eps_amp),
        )?;
        check(
            self.motion.kappa_max >= 1.0 && self.motion.kappa_max.is_finite(),
            "motion.kappa_max",
            format!("must be finite and >= 1, got {}", self.motion.kappa_max),
        )?;
        check(
            self.motion.smoothing_radius >= 0.0 && self.motion.smoothing_radius.is_finite(),
            "motion.smoothing_radius",
            format!(
                "must be finite and >= 0, got {}",
                self.motion.smoothing_radius
            ),
        )?;
        check(
            self.transfer.alpha.is_finite(),
            "transfer.alpha",
            format!("must be finite, got {}", self.transfer.alpha),
        )?;
        check(
            (0.0..=1.0).contains(&self.transfer.amplitude_gate),
            "transfer.amplitude_gate",
            format!("must lie in [0,1], got {}", self.transfer.amplitude_gate),
        )?;
        check(
            self.transfer.lambda_t >= 0.0 && self.transfer.lambda_t.is_finite(),
            "transfer.lambda_t",
            format!("must be finite and >= 0, got {}", self.transfer.lambda_t),
        )?;
        if let Some(layer) = self.transfer.correlation_layer {
            check(
                layer < self.pyramid.scales,
                "transfer.correlation_layer",
                format!("must be below pyramid.scales ({})", self.pyramid.scales),
            )?;
        }
        check(
            self.optimize.step >= 0.0 && self.optimize.step.is_finite(),
            "optimize.step",
            format!("must be finite and >= 0, got {}", self.optimize.step),
        )?;
        for (name, v) in [
            ("optimize.style_weight", self.optimize.style_weight),
            ("optimize.content_weight", self.optimize.content_weight),
            ("optimize.temporal_weight", self.optimize.temporal_weight),
        ] {
            check(
                v >= 0.0 && v.is_finite(),
                name,
                format!("must be finite and >= 0, got {v}"),
            )?;
        }
        Ok(())
    }
}

fn parse_usize(key: &str, value: &str, lineno: usize) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "line {lineno}: {key} expects a non-negative integer, got '{value}'"
        ))
    })
}

fn parse_float(key: &str, value: &str, lineno: usize) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| {
        Error::Config(format!(
            "line {lineno}: {key} expects a number, got '{value}'"
        ))
    })?;
    if v.is_nan() {
        return Err(Error::Config(format!(
            "line {lineno}: {key} must not be NaN"
        )));
    }
    Ok(v)
}

fn parse_bool(key: &str, value: &str, lineno: usize) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!(
            "line {lineno}: {key} expects true or false, got '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_all_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(
            Config::parse("\n  # just a comment\n").unwrap(),
            Config::default()
        );
    }

    #[test]
    fn sections_and_overrides() {
        let cfg = Config::parse(
            "[pyramid]\nscales = 3\n[transfer]\nalpha = -1\nuse_correlation_weighting = true\n",
        )
        .unwrap();
        assert_eq!(cfg.pyramid.scales, 3);
        assert_eq!(cfg.transfer.alpha, -1.0);
        assert!(cfg.transfer.use_correlation_weighting);
    }

    #[test]
    fn negative_alpha_accepted_nan_rejected() {
        assert!(Config::parse("[transfer]\nalpha = -2.5\n").is_ok());
        let err = Config::parse("[transfer]\nalpha = nan\n").unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = Config::parse("[transfer]\nfoo = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("foo") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(Config::parse("[nope]\n").is_err());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = Config::parse("[motion]\neps_amp 0.2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn range_violation_names_field() {
        let err = Config::parse("[motion]\neps_amp = 3\n").unwrap_err();
        assert!(err.to_string().contains("motion.eps_amp"), "{err}");
        let err = Config::parse("[pyramid]\norientations = 1\n").unwrap_err();
        assert!(err.to_string().contains("pyramid.orientations"), "{err}");
    }

    #[test]
    fn precision_values() {
        let cfg = Config::parse("[io]\nprecision = f32\n").unwrap();
        assert_eq!(cfg.io.precision, Precision::F32);
        assert!(Config::parse("[io]\nprecision = f128\n").is_err());
    }
}
