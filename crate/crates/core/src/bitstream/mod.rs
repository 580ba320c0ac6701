//! Wire formats and the rate model.
//!
//! All multi-byte fields are little-endian. Condition numerics travel as
//! bfloat16.

pub mod bf16;
mod cursor;
pub mod package;
pub mod rate;

pub use bf16::{bf16_decode, bf16_encode, quantize};
pub(crate) use cursor::{ByteReader, ByteWriter};
pub use package::{
    audit_rate, read_clip_package, read_stream, write_clip_package, write_stream, ClipPackage,
    RateAudit, PACKAGE_MAGIC, PACKAGE_VERSION, STREAM_MAGIC,
};
pub use rate::{compute_bpp, compute_rate, condition_bracket, RateParams};
