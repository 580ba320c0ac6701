//! Keyframe selection and clip partitioning.
//!
//! A frame becomes a keyframe when at least `w` frames have passed since the
//! previous keyframe, or when its shot transition probability exceeds the
//! threshold. Consecutive keyframes then bound the clips. A clip that starts
//! at a shot keyframe begins one frame later, since the shot keyframe belongs
//! to the previous scene's cut.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_SHOT_THRESHOLD: f64 = 0.5;

/// Per-frame shot transition probabilities. `probs[i - 1]` is the
/// probability for frame `i`, `i` in `1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotProbSeries {
    probs: Vec<f64>,
}

impl ShotProbSeries {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("shot probability series is empty"));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::invalid(format!(
                "shot probability for frame {} is {p}, expected [0, 1]",
                i + 1
            )));
        }
        Ok(ShotProbSeries { probs })
    }

    /// All-zero series for a video without shot information.
    pub fn zeros(frame_count: usize) -> Self {
        ShotProbSeries {
            probs: vec![0.0; frame_count.max(1)],
        }
    }

    /// Number of frames `T`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability for frame `i` in `1..=T`.
    pub fn get(&self, i: usize) -> f64 {
        self.probs[i - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyframeKind {
    /// Frame 0.
    Init,
    Interval,
    Shot,
    /// Frame `T`.
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyframeMark {
    pub index: u32,
    pub kind: KeyframeKind,
}

/// Inclusive frame range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clip {
    pub start: u32,
    pub end: u32,
}

impl Clip {
    /// Frames strictly between the two keyframes.
    pub fn intermediate_frames(&self) -> std::ops::Range<u32> {
        (self.start + 1).min(self.end)..self.end
    }

    pub fn intermediate_count(&self) -> u32 {
        self.end.saturating_sub(self.start).saturating_sub(1)
    }
}

/// Keyframe selection with the default 0.5 shot threshold.
pub fn select_keyframes(probs: &ShotProbSeries, w: u32) -> Result<Vec<KeyframeMark>> {
    select_keyframes_with_threshold(probs, w, DEFAULT_SHOT_THRESHOLD)
}

pub fn select_keyframes_with_threshold(
    probs: &ShotProbSeries,
    w: u32,
    threshold: f64,
) -> Result<Vec<KeyframeMark>> {
    if w == 0 {
        return Err(Error::invalid("keyframe interval w must be at least 1"));
    }
    if probs.is_empty() {
        return Err(Error::invalid("shot probability series is empty"));
    }
    let t = u32::try_from(probs.len())
        .map_err(|_| Error::invalid("too many frames for a u32 frame index"))?;

    let mut marks = vec![KeyframeMark {
        index: 0,
        kind: KeyframeKind::Init,
    }];
    let mut last_key = 0u32;
    for i in 1..=t {
        let interval = i - last_key >= w;
        if interval || probs.get(i as usize) > threshold {
            let kind = if interval {
                KeyframeKind::Interval
            } else {
                KeyframeKind::Shot
            };
            marks.push(KeyframeMark { index: i, kind });
            last_key = i;
        }
    }
    // Frame T may already be marked by a criterion; it stays a single mark
    // and keeps its criterion kind.
    if last_key != t {
        marks.push(KeyframeMark {
            index: t,
            kind: KeyframeKind::Terminal,
        });
    }
    Ok(marks)
}

/// Converts keyframe marks into consecutive clips.
pub fn segment_clips(marks: &[KeyframeMark]) -> Result<Vec<Clip>> {
    if marks.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 keyframe marks, got {}",
            marks.len()
        )));
    }
    if marks[0].index != 0 {
        return Err(Error::invalid("first keyframe mark must be frame 0"));
    }
    marks
        .windows(2)
        .map(|pair| {
            let (prev, next) = (pair[0], pair[1]);
            if next.index <= prev.index {
                return Err(Error::invalid(format!(
                    "keyframe marks not strictly increasing at {}",
                    next.index
                )));
            }
            let start = if prev.kind == KeyframeKind::Shot {
                prev.index + 1
            } else {
                prev.index
            };
            Ok(Clip {
                start,
                end: next.index,
            })
        })
        .collect()
}

/// Clip starts shifted past a shot keyframe. These frames are neither a
/// keyframe mark nor an intermediate frame, so for a valid mark list
/// `intermediates + marks + offset starts = T + 1`.
pub fn shot_offset_starts(marks: &[KeyframeMark], clips: &[Clip]) -> Vec<u32> {
    clips
        .iter()
        .map(|c| c.start)
        .filter(|s| marks.binary_search_by_key(s, |m| m.index).is_err())
        .collect()
}
