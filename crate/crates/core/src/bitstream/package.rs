//! Clip package and stream container.
//!
//! Package layout, little-endian:
//!
//! ```text
//! magic "CVC1"  version u8 = 1
//! H u16  W u16  fps u16  start u32  end u32
//! level u8  flags u8  l u16  N u16  n u8
//! first_kf  u32 length + bytes
//! last_kf   u32 length + bytes
//! caption   u16 length + UTF-8
//! per intermediate frame (start+1 .. end-1), for each Present modality:
//!   seg    u16 curve count + N·(n+1)·2 bf16, zero-padded
//!   motion u8 person count + k·21·2 bf16
//!   flow   ⌊H/l⌋·⌊W/l⌋·2 bf16
//! ```
//!
//! A stream is `"CVCS"`, a u16 clip count, then the packages back to back.

use serde::Serialize;

use super::cursor::{ByteReader, ByteWriter};
use super::rate::{compute_rate, RateParams};
use crate::flow::{read_flow_block, write_flow_block, FlowGrid};
use crate::model::{ConditionFlags, ModalityRole};
use crate::motion::{read_motion_block, write_motion_block, PoseFrame, JOINT_COUNT};
use crate::seg::{read_seg_block, write_seg_block, SegFrameCode};
use crate::segmenter::Clip;
use crate::{Error, Result};

pub const PACKAGE_MAGIC: &[u8; 4] = b"CVC1";
pub const PACKAGE_VERSION: u8 = 1;
pub const STREAM_MAGIC: &[u8; 4] = b"CVCS";

/// Fixed header size up to and including `n`.
pub const HEADER_LEN: usize = 4 + 1 + 2 * 3 + 4 * 2 + 1 + 1 + 2 + 2 + 1;

/// One encoded clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipPackage {
    pub width: u16,
    pub height: u16,
    pub fps: u16,
    pub clip: Clip,
    pub level_id: u8,
    pub flags: ConditionFlags,
    /// Flow stride `l`; 0 when the level has no flow.
    pub stride: u16,
    /// Curves per frame `N`; 0 when the level has no segmentation.
    pub n_contours: u16,
    /// Curve order `n`; 0 when the level has no segmentation.
    pub order: u8,
    pub first_kf: Vec<u8>,
    pub last_kf: Vec<u8>,
    pub caption: String,
    pub seg: Vec<SegFrameCode>,
    pub motion: Vec<PoseFrame>,
    pub flow: Vec<FlowGrid>,
}

impl ClipPackage {
    pub fn intermediate_count(&self) -> usize {
        self.clip.intermediate_count() as usize
    }

    /// Keyframe and caption size in KB.
    pub fn q_kb(&self) -> f64 {
        (self.first_kf.len() + self.last_kf.len() + self.caption.len()) as f64 / 1024.0
    }

    /// Checks everything `write_clip_package` relies on.
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.fps == 0 {
            return Err(Error::invalid("H, W and fps must be positive"));
        }
        if self.clip.end < self.clip.start {
            return Err(Error::invalid(format!(
                "clip end {} precedes start {}",
                self.clip.end, self.clip.start
            )));
        }
        if self.level_id > 3 {
            return Err(Error::invalid(format!("level {} out of range", self.level_id)));
        }
        self.check_params().map_err(Error::InvalidArgument)?;
        if u32::try_from(self.first_kf.len()).is_err() || u32::try_from(self.last_kf.len()).is_err() {
            return Err(Error::invalid("keyframe blob exceeds 4 GiB"));
        }
        if self.caption.len() > usize::from(u16::MAX) {
            return Err(Error::invalid(format!(
                "caption is {} bytes, limit is 65535",
                self.caption.len()
            )));
        }
        let frames = self.intermediate_count();
        let check_len = |name: &str, role: ModalityRole, len: usize| {
            let expected = if role.is_present() { frames } else { 0 };
            if len != expected {
                return Err(Error::invalid(format!(
                    "{name} has {len} frame codes, expected {expected} for role {role:?}"
                )));
            }
            Ok(())
        };
        check_len("seg", self.flags.seg, self.seg.len())?;
        check_len("motion", self.flags.motion, self.motion.len())?;
        check_len("flow", self.flags.flow, self.flow.len())?;
        for code in &self.seg {
            if code.n_contours != self.n_contours || code.order != self.order {
                return Err(Error::invalid("seg frame parameters differ from the package's N, n"));
            }
        }
        let (rows, cols) = FlowGrid::dims(u32::from(self.width), u32::from(self.height), self.stride);
        for g in &self.flow {
            if g.stride != self.stride || g.rows != rows || g.cols != cols {
                return Err(Error::invalid("flow grid shape differs from the package's stride"));
            }
        }
        Ok(())
    }

    /// Consistency of level, flags and condition parameters; shared by the
    /// writer and reader.
    fn check_params(&self) -> std::result::Result<(), String> {
        let f = self.flags;
        if self.level_id == 0 && [f.seg, f.motion, f.flow].iter().any(|r| r.is_present()) {
            return Err("level 0 cannot carry Present conditions".into());
        }
        if f.seg.is_present() && (self.n_contours == 0 || self.order == 0) {
            return Err("seg Present requires N ≥ 1 and n ≥ 1".into());
        }
        if f.flow.is_present() && (self.stride == 0 || self.stride > self.width.min(self.height)) {
            return Err(format!(
                "flow Present requires 1 ≤ l ≤ min(H, W), got l = {}",
                self.stride
            ));
        }
        Ok(())
    }

    /// Bytes of condition numbers, excluding count fields.
    pub fn condition_payload_bytes(&self) -> usize {
        let seg = self.seg.len() * SegFrameCode::payload_len(self.n_contours, self.order);
        let motion: usize = self.motion.iter().map(|f| f.wire_len() - 1).sum();
        let flow: usize = self.flow.iter().map(FlowGrid::wire_len).sum();
        seg + motion + flow
    }

    /// Count fields (seg curve counts, person counts).
    pub fn container_overhead_bytes(&self) -> usize {
        2 * self.seg.len() + self.motion.len()
    }
}

pub fn write_clip_package(pkg: &ClipPackage) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new();
    write_into(&mut w, pkg)?;
    Ok(w.into_inner())
}

fn write_into(w: &mut ByteWriter, pkg: &ClipPackage) -> Result<()> {
    pkg.validate()?;
    w.bytes(PACKAGE_MAGIC);
    w.u8(PACKAGE_VERSION);
    w.u16(pkg.height);
    w.u16(pkg.width);
    w.u16(pkg.fps);
    w.u32(pkg.clip.start);
    w.u32(pkg.clip.end);
    w.u8(pkg.level_id);
    w.u8(pkg.flags.to_byte());
    w.u16(pkg.stride);
    w.u16(pkg.n_contours);
    w.u8(pkg.order);
    w.u32(pkg.first_kf.len() as u32);
    w.bytes(&pkg.first_kf);
    w.u32(pkg.last_kf.len() as u32);
    w.bytes(&pkg.last_kf);
    w.u16(pkg.caption.len() as u16);
    w.bytes(pkg.caption.as_bytes());
    let frames = pkg.seg.len().max(pkg.motion.len()).max(pkg.flow.len());
    for f in 0..frames {
        if pkg.flags.seg.is_present() {
            write_seg_block(w, &pkg.seg[f])?;
        }
        if pkg.flags.motion.is_present() {
            write_motion_block(w, &pkg.motion[f])?;
        }
        if pkg.flags.flow.is_present() {
            write_flow_block(w, &pkg.flow[f])?;
        }
    }
    Ok(())
}

/// Parses exactly one package; trailing bytes are an error.
pub fn read_clip_package(bytes: &[u8]) -> Result<ClipPackage> {
    let mut r = ByteReader::new(bytes);
    let pkg = read_from(&mut r)?;
    r.expect_end()?;
    Ok(pkg)
}

fn read_from(r: &mut ByteReader<'_>) -> Result<ClipPackage> {
    let base = r.position();
    let magic = r.take(4, "package magic")?;
    if magic != PACKAGE_MAGIC {
        return Err(Error::format(base, format!("bad package magic {magic:02x?}")));
    }
    let at = r.position();
    let version = r.u8("version")?;
    if version != PACKAGE_VERSION {
        return Err(Error::format(at, format!("unsupported version {version}")));
    }
    let at = r.position();
    let height = r.u16("height")?;
    let width = r.u16("width")?;
    let fps = r.u16("fps")?;
    if height == 0 || width == 0 || fps == 0 {
        return Err(Error::format(at, "H, W and fps must be positive"));
    }
    let at = r.position();
    let start = r.u32("clip start")?;
    let end = r.u32("clip end")?;
    if end < start {
        return Err(Error::format(at, format!("clip end {end} precedes start {start}")));
    }
    let at = r.position();
    let level_id = r.u8("level")?;
    if level_id > 3 {
        return Err(Error::format(at, format!("level {level_id} out of range")));
    }
    let flags_at = r.position();
    let flags_byte = r.u8("flags")?;
    let flags = ConditionFlags::from_byte(flags_byte)
        .ok_or_else(|| Error::format(flags_at, format!("invalid flags byte {flags_byte:#04x}")))?;
    let stride = r.u16("flow stride")?;
    let n_contours = r.u16("curve count N")?;
    let order = r.u8("curve order n")?;

    let kf_len = r.u32("first keyframe length")? as usize;
    let first_kf = r.take(kf_len, "first keyframe")?.to_vec();
    let kf_len = r.u32("last keyframe length")? as usize;
    let last_kf = r.take(kf_len, "last keyframe")?.to_vec();
    let cap_len = r.u16("caption length")? as usize;
    let cap_at = r.position();
    let caption = std::str::from_utf8(r.take(cap_len, "caption")?)
        .map_err(|e| Error::format(cap_at + e.valid_up_to(), "caption is not UTF-8"))?
        .to_owned();

    let clip = Clip { start, end };
    let mut pkg = ClipPackage {
        width,
        height,
        fps,
        clip,
        level_id,
        flags,
        stride,
        n_contours,
        order,
        first_kf,
        last_kf,
        caption,
        seg: Vec::new(),
        motion: Vec::new(),
        flow: Vec::new(),
    };
    pkg.check_params().map_err(|msg| Error::format(flags_at, msg))?;

    // Without a Present modality there is nothing per frame to read.
    let frames = if [flags.seg, flags.motion, flags.flow].iter().any(|r| r.is_present()) {
        pkg.intermediate_count()
    } else {
        0
    };
    for _ in 0..frames {
        if flags.seg.is_present() {
            pkg.seg.push(read_seg_block(r, n_contours, order)?);
        }
        if flags.motion.is_present() {
            pkg.motion.push(read_motion_block(r)?);
        }
        if flags.flow.is_present() {
            pkg.flow.push(read_flow_block(r, u32::from(width), u32::from(height), stride)?);
        }
    }
    Ok(pkg)
}

pub fn write_stream(packages: &[ClipPackage]) -> Result<Vec<u8>> {
    let count = u16::try_from(packages.len())
        .map_err(|_| Error::invalid(format!("{} clips exceed the 65535 per stream", packages.len())))?;
    let mut w = ByteWriter::new();
    w.bytes(STREAM_MAGIC);
    w.u16(count);
    for (i, p) in packages.iter().enumerate() {
        write_into(&mut w, p).map_err(|e| Error::Clip {
            index: i,
            source: Box::new(e),
        })?;
    }
    Ok(w.into_inner())
}

/// Parses a whole stream. Errors carry the clip index and the absolute
/// byte offset.
pub fn read_stream(bytes: &[u8]) -> Result<Vec<ClipPackage>> {
    let mut r = ByteReader::new(bytes);
    let magic = r.take(4, "stream magic")?;
    if magic != STREAM_MAGIC {
        return Err(Error::format(0, format!("bad stream magic {magic:02x?}")));
    }
    let count = r.u16("clip count")?;
    let mut out = Vec::with_capacity(usize::from(count));
    for i in 0..usize::from(count) {
        out.push(read_from(&mut r).map_err(|e| Error::Clip {
            index: i,
            source: Box::new(e),
        })?);
    }
    r.expect_end()?;
    Ok(out)
}

/// Formula rate versus the rate implied by the bytes actually carried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateAudit {
    /// Clip length used for both rates: frames carrying conditions.
    pub frames: u32,
    pub persons: u32,
    pub q_kb: f64,
    pub r_formula: f64,
    pub r_measured: f64,
    pub matches: bool,
    pub condition_bytes: usize,
    pub overhead_bytes: usize,
}

/// Compares the closed-form rate for `persons` retained people with the
/// rate of the package's condition payload.
///
/// Both use the intermediate-frame count as clip length (at least 1), the
/// frames that actually carry conditions. The formula's flow and seg terms
/// follow the package parameters whatever the flags say, so a dropped or
/// absent modality shows up as a shortfall.
pub fn audit_rate(pkg: &ClipPackage, persons: u32) -> Result<RateAudit> {
    let frames = (pkg.intermediate_count() as u32).max(1);
    let params = RateParams {
        q_kb: pkg.q_kb(),
        clip_frames: frames,
        fps: pkg.fps,
        persons,
        height: u32::from(pkg.height),
        width: u32::from(pkg.width),
        stride: (pkg.stride > 0).then_some(u32::from(pkg.stride)),
        n_contours: u32::from(pkg.n_contours),
        order: u32::from(pkg.order),
    };
    let r_formula = compute_rate(&params)?;
    let fps = f64::from(pkg.fps);
    let condition_bytes = pkg.condition_payload_bytes();
    let r_measured =
        condition_bytes as f64 / 1024.0 * fps / f64::from(frames) + params.q_kb * fps / f64::from(frames);
    let matches = (r_formula - r_measured).abs() <= 1e-9 * r_formula.abs().max(1.0);
    Ok(RateAudit {
        frames,
        persons,
        q_kb: params.q_kb,
        r_formula,
        r_measured,
        matches,
        condition_bytes,
        overhead_bytes: pkg.container_overhead_bytes(),
    })
}

/// Largest person count in any frame, 0 when motion is not Present.
pub fn max_persons(pkg: &ClipPackage) -> u32 {
    pkg.motion.iter().map(|f| f.persons() as u32).max().unwrap_or(0)
}

/// Per-frame condition bytes including count fields, all modalities present.
pub fn frame_condition_bytes(persons: usize, rows: u32, cols: u32, n_contours: u16, order: u8) -> usize {
    2 * (persons * JOINT_COUNT * 2 + 2 * (rows * cols) as usize + 2 * usize::from(n_contours) * (usize::from(order) + 1))
        + 3
}
