//! On-disk formats: pyramid dumps, flow fields, frame directories.

mod flow;
mod frames;
mod pyr;

pub use flow::{flow_to_rgb, read_flow, write_flow, write_flow_png};
pub use frames::{read_frame, read_frames, write_frame, write_frames, BitDepth};
pub use pyr::{read_pyramids, write_pyramids, Precision};
