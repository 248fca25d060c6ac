//! Eulerian (phase-based) motion analysis and synthesis.
//!
//! The toolkit decomposes images with a complex steerable pyramid, reads
//! motion out of temporal phase differences, and writes motion back in by
//! editing phase: frame prediction, motion magnification, and motion
//! transfer from video to images or other videos. A correlation-weighted
//! Gram loss stack with analytic gradients supports iterative transfer
//! optimization, and a synthetic-sequence generator provides ground truth
//! for all of it.

pub mod apps;
pub mod config;
pub mod error;
pub mod fft;
pub mod frame;
pub mod io;
pub mod loss;
pub mod motion;
pub mod pyramid;
pub mod synth;

pub use apps::{
    magnify, predict_next, predict_rollout, transfer_to_image, transfer_to_video, PredictionConfig,
    TemporalBand, TransferConfig,
};
pub use error::{Error, Result};
pub use frame::{merge_channels, split_channels, Frame};
pub use loss::{
    content_loss, correlation, optimize_transfer, phase_features, style_loss, temporal_loss,
    weighted_gram, CorrelationMap, FeatureMap, LossWeights, OptimizeResult, OuterWeighting,
    TraceRow,
};
pub use motion::{
    flow_from_phase, phase_delta, smooth_deltas, wrap_angle, FlowField, FlowParams, PhaseDelta,
};
pub use pyramid::{
    decompose, decompose_with_bank, reconstruct, reconstruct_with_bank, ComplexSubband, FilterBank,
    Pyramid, PyramidSpec, RealGrid,
};
pub use synth::{flow_error, fourier_shift, generate, psnr, Motion, SynthSpec, Texture};
