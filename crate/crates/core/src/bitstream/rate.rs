//! Closed-form per-clip bitrate model.
//!
//! ```text
//! R = Q·fps/T + (2·fps/1024)·[k·21·2 + 2⌊H/l⌋⌊W/l⌋ + 2N(n+1)]   (KB/s)
//! ```
//!
//! The bracket counts bfloat16 numbers sent per frame; each costs two bytes.

use serde::{Deserialize, Serialize};

use crate::motion::JOINT_COUNT;
use crate::model::VideoMeta;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Keyframe blobs plus caption, in KB.
    pub q_kb: f64,
    /// Clip length in frames.
    pub clip_frames: u32,
    pub fps: u16,
    /// Persons retained after area filtering.
    pub persons: u32,
    pub height: u32,
    pub width: u32,
    /// Flow stride; `None` drops the flow term.
    pub stride: Option<u32>,
    /// Bézier curves per frame; 0 drops the segmentation term.
    pub n_contours: u32,
    pub order: u32,
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_kb.is_finite() && self.q_kb >= 0.0) {
            return Err(Error::invalid(format!("Q must be non-negative, got {}", self.q_kb)));
        }
        if self.clip_frames < 1 {
            return Err(Error::invalid("clip length must be at least 1 frame"));
        }
        if self.fps == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::invalid("fps, H and W must be positive"));
        }
        if self.stride == Some(0) {
            return Err(Error::invalid("flow stride must be at least 1"));
        }
        if self.n_contours > 0 && self.order == 0 {
            return Err(Error::invalid("Bézier order must be at least 1"));
        }
        Ok(())
    }
}

/// Number of bfloat16 values transmitted per frame.
pub fn condition_bracket(p: &RateParams) -> u64 {
    let motion = u64::from(p.persons) * JOINT_COUNT as u64 * 2;
    let flow = p.stride.map_or(0, |l| {
        2 * u64::from(p.height / l) * u64::from(p.width / l)
    });
    let seg = if p.n_contours == 0 {
        0
    } else {
        2 * u64::from(p.n_contours) * (u64::from(p.order) + 1)
    };
    motion + flow + seg
}

/// Bitrate in KB/s.
pub fn compute_rate(p: &RateParams) -> Result<f64> {
    p.validate()?;
    let fps = f64::from(p.fps);
    let keyframes = p.q_kb * fps / f64::from(p.clip_frames);
    let conditions = 2.0 * fps / 1024.0 * condition_bracket(p) as f64;
    Ok(keyframes + conditions)
}

/// Bits per pixel for a rate in KB/s.
pub fn compute_bpp(rate_kbps: f64, meta: &VideoMeta) -> f64 {
    rate_kbps * 1024.0 * 8.0 / (f64::from(meta.fps) * meta.pixels() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::level_preset;

    fn worked_example() -> RateParams {
        RateParams {
            q_kb: 20.0,
            clip_frames: 81,
            fps: 16,
            persons: 1,
            height: 480,
            width: 832,
            stride: Some(128),
            n_contours: 10,
            order: 8,
        }
    }

    #[test]
    fn worked_example_rate() {
        let p = worked_example();
        assert_eq!(condition_bracket(&p), 258);
        let r = compute_rate(&p).unwrap();
        // 20·16/81 + 32/1024·258
        let expected = 320.0 / 81.0 + 8.0625;
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 12.0131).abs() < 1e-4, "{r}");
    }

    #[test]
    fn flow_term_only() {
        let p = RateParams {
            q_kb: 0.0,
            persons: 0,
            n_contours: 0,
            stride: Some(480),
            ..worked_example()
        };
        let r = compute_rate(&p).unwrap();
        assert_eq!(r, 2.0 * 16.0 / 1024.0 * 2.0 * (832 / 480) as f64);
    }

    #[test]
    fn level_sweep_at_1080p() {
        let brackets: Vec<u64> = (1..=3)
            .map(|id| {
                let lv = level_preset(id).unwrap();
                condition_bracket(&RateParams {
                    q_kb: 0.0,
                    clip_frames: 81,
                    fps: 16,
                    persons: 1,
                    height: 1080,
                    width: 1920,
                    stride: lv.flow_stride.map(u32::from),
                    n_contours: u32::from(lv.n_contours.unwrap()),
                    order: 8,
                })
            })
            .collect();
        assert_eq!(brackets, [462, 842, 1542]);
    }

    #[test]
    fn bpp() {
        let meta = VideoMeta::new(832, 480, 16, 81).unwrap();
        let unit = 16.0 * 480.0 * 832.0 / 8192.0;
        assert!((compute_bpp(unit, &meta) - 1.0).abs() < 1e-15);
        let b = compute_bpp(12.0131, &meta);
        assert!((b - 0.015_40).abs() < 5e-6, "{b}");
        let tall = VideoMeta::new(832, 960, 16, 81).unwrap();
        assert!((compute_bpp(12.0131, &tall) * 2.0 - b).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = worked_example();
        p.stride = Some(0);
        assert!(compute_rate(&p).is_err());
        let mut p = worked_example();
        p.clip_frames = 0;
        assert!(compute_rate(&p).is_err());
    }
}
