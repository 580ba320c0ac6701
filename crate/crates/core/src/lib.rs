//! Condition codec for generative video compression.
//!
//! A video is cut into clips at keyframes. Each clip is transmitted as its
//! first and last keyframe, a caption, and three compact per-frame condition
//! streams: Bézier-coded segmentation contours, 2D pose joints and a
//! subsampled optical-flow grid. The decoder turns the conditions back into
//! dense visual modalities for a downstream generative model.
//!
//! Module map:
//!
//! * [`model`]: shared types, compression levels, condition roles, dropout plans.
//! * [`segmenter`]: keyframe selection and clip partitioning.
//! * [`seg`]: contour tracing, Bézier fitting, segmentation frame coding.
//! * [`motion`]: joint projection, pose filtering and coding.
//! * [`flow`]: flow grid sampling, coding and arrow rendering.
//! * [`bitstream`]: bfloat16 scalars, the clip package container, the rate model.
//! * [`pipeline`]: end-to-end encode/decode over extractor outputs.

pub mod bitstream;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod io;
pub mod model;
pub mod motion;
pub mod pipeline;
pub mod raster;
pub mod seg;
pub mod segmenter;

pub use error::{Error, Result};
