//! Shared domain types: video metadata, compression levels, condition roles
//! and the dropout plan.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Basic properties of the source video.
///
/// Frames are indexed `0..=frame_count`: frame 0 is the initial keyframe and
/// `frame_count` is the terminal keyframe, so a video carries
/// `frame_count + 1` frames in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub width: u32,
    pub height: u32,
    pub fps: u16,
    pub frame_count: u32,
}

impl VideoMeta {
    pub fn new(width: u32, height: u32, fps: u16, frame_count: u32) -> Result<Self> {
        let meta = VideoMeta {
            width,
            height,
            fps,
            frame_count,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid(format!(
                "frame dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.fps == 0 {
            return Err(Error::invalid("fps must be at least 1"));
        }
        if self.frame_count < 2 {
            return Err(Error::invalid(format!(
                "frame_count must be at least 2, got {}",
                self.frame_count
            )));
        }
        Ok(())
    }

    pub fn pixels(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

/// One row of the compression settings table.
///
/// Level 0 transmits keyframes and text only; every condition parameter is
/// absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionLevel {
    pub level_id: u8,
    /// Number of Bézier curves kept per frame.
    pub n_contours: Option<u16>,
    /// Minimum fraction of the image a pose's joints must cover.
    pub pose_area_threshold: Option<f64>,
    /// Flow sampling stride in pixels.
    pub flow_stride: Option<u16>,
}

/// Returns the preset for `level_id` in `0..=3`.
pub fn level_preset(level_id: u8) -> Result<CompressionLevel> {
    let (n, xi, l) = match level_id {
        0 => {
            return Ok(CompressionLevel {
                level_id,
                n_contours: None,
                pose_area_threshold: None,
                flow_stride: None,
            })
        }
        1 => (10, 1.0 / 5.0, 128),
        2 => (20, 1.0 / 8.0, 96),
        3 => (30, 1.0 / 10.0, 64),
        _ => {
            return Err(Error::invalid(format!(
                "compression level must be in 0..=3, got {level_id}"
            )))
        }
    };
    Ok(CompressionLevel {
        level_id,
        n_contours: Some(n),
        pose_area_threshold: Some(xi),
        flow_stride: Some(l),
    })
}

/// The three condition modalities, in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Seg,
    Motion,
    Flow,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Seg, Modality::Motion, Modality::Flow];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Seg => "seg",
            Modality::Motion => "motion",
            Modality::Flow => "flow",
        }
    }
}

/// How a modality reached the decoder.
///
/// `DroppedOut` is a deliberate zeroing by the encoder; `Absent` means the
/// encoder never had the signal. Decoders render both as black frames but
/// keep the distinction for the generative model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModalityRole {
    Absent,
    Present,
    DroppedOut,
}

impl ModalityRole {
    fn bits(self) -> u8 {
        match self {
            ModalityRole::Absent => 0,
            ModalityRole::Present => 1,
            ModalityRole::DroppedOut => 2,
        }
    }

    fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            0 => Some(ModalityRole::Absent),
            1 => Some(ModalityRole::Present),
            2 => Some(ModalityRole::DroppedOut),
            _ => None,
        }
    }

    pub fn is_present(self) -> bool {
        self == ModalityRole::Present
    }
}

/// Per-clip roles for all three modalities. Wire form is one byte:
/// bits 0-1 seg, 2-3 motion, 4-5 flow, 6-7 reserved (zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConditionFlags {
    pub seg: ModalityRole,
    pub motion: ModalityRole,
    pub flow: ModalityRole,
}

impl ConditionFlags {
    pub const fn uniform(role: ModalityRole) -> Self {
        ConditionFlags {
            seg: role,
            motion: role,
            flow: role,
        }
    }

    pub fn get(&self, m: Modality) -> ModalityRole {
        match m {
            Modality::Seg => self.seg,
            Modality::Motion => self.motion,
            Modality::Flow => self.flow,
        }
    }

    pub fn set(&mut self, m: Modality, role: ModalityRole) {
        match m {
            Modality::Seg => self.seg = role,
            Modality::Motion => self.motion = role,
            Modality::Flow => self.flow = role,
        }
    }

    pub fn to_byte(self) -> u8 {
        self.seg.bits() | (self.motion.bits() << 2) | (self.flow.bits() << 4)
    }

    /// Parses the wire byte. Returns `None` for the unused role code 3 or
    /// nonzero reserved bits.
    pub fn from_byte(b: u8) -> Option<Self> {
        if b & 0xC0 != 0 {
            return None;
        }
        Some(ConditionFlags {
            seg: ModalityRole::from_bits(b & 0b11)?,
            motion: ModalityRole::from_bits((b >> 2) & 0b11)?,
            flow: ModalityRole::from_bits((b >> 4) & 0b11)?,
        })
    }
}

impl Default for ConditionFlags {
    fn default() -> Self {
        ConditionFlags::uniform(ModalityRole::Present)
    }
}

/// splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Draws per-clip flags where each modality is independently dropped with
/// probability `ratio`. Draw order is seg, motion, flow for clip 0, then
/// clip 1, and so on; a draw `u` drops iff `u / 2^64 < ratio`.
pub fn make_dropout_plan(seed: u64, ratio: f64, clip_count: usize) -> Vec<ConditionFlags> {
    let mut rng = SplitMix64::new(seed);
    let scale = 1.0 / 18_446_744_073_709_551_616.0; // 2^-64
    (0..clip_count)
        .map(|_| {
            let mut flags = ConditionFlags::default();
            for m in Modality::ALL {
                let u = rng.next_u64();
                // (2^64 - 1) as f64 rounds up to 2^64, so ratio 1 needs its own case.
                if ratio >= 1.0 || (u as f64) * scale < ratio {
                    flags.set(m, ModalityRole::DroppedOut);
                }
            }
            flags
        })
        .collect()
}
