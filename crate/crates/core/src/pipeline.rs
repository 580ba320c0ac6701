//! End-to-end encode and decode.
//!
//! Encoding segments the video into clips, codes every intermediate frame's
//! conditions at the chosen level, and concatenates the clip packages into
//! a stream. Decoding renders the three condition modalities per clip and
//! reports the role of each, which is what a generative decoder consumes.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::package::max_persons;
use crate::bitstream::{audit_rate, read_stream, write_stream, ClipPackage, RateAudit};
use crate::flow::{quantize_grid, render_flow_arrows, sample_flow_grid, FlowField};
use crate::io;
use crate::model::{
    level_preset, make_dropout_plan, ConditionFlags, Modality, ModalityRole, VideoMeta,
};
use crate::motion::{filter_poses, quantize_frame, render_motion_frame, PoseFrame};
use crate::raster::RgbImage;
use crate::seg::{encode_seg_frame_with, render_seg_frame, LabelMap, DEFAULT_ORDER};
use crate::segmenter::{
    segment_clips, select_keyframes_with_threshold, shot_offset_starts, Clip, KeyframeMark,
    ShotProbSeries, DEFAULT_SHOT_THRESHOLD,
};
use crate::{Error, Result};

pub const DEFAULT_INTERVAL: u32 = 32;

/// Compresses a keyframe image into an opaque blob.
pub trait KeyframeCodec: Sync {
    fn encode(&self, image: &[u8]) -> Result<Vec<u8>>;
}

/// Passes image files through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullCodec;

impl KeyframeCodec for NullCodec {
    fn encode(&self, image: &[u8]) -> Result<Vec<u8>> {
        Ok(image.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropoutConfig {
    pub seed: u64,
    pub ratio: f64,
}

/// JSON manifest describing extractor outputs. Paths are relative to the
/// manifest's directory. Per-frame lists cover frames `0..=frame_count`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeManifest {
    pub width: u32,
    pub height: u32,
    pub fps: u16,
    pub frame_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_maps: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flows: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_probs_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyframes: Option<Vec<PathBuf>>,
    /// One caption per clip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub captions: Option<Vec<String>>,
    /// One caption for the whole video.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    /// Caption files: one per clip, or a single file for the whole video.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_files: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bezier_order: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout: Option<DropoutConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Captions {
    None,
    PerVideo(String),
    PerClip(Vec<String>),
}

/// Everything the encoder needs, in memory.
#[derive(Debug, Clone)]
pub struct EncodeInputs {
    pub meta: VideoMeta,
    pub label_maps: Option<Vec<LabelMap>>,
    pub flows: Option<Vec<FlowField>>,
    pub poses: Option<Vec<PoseFrame>>,
    pub shot_probs: ShotProbSeries,
    /// Keyframe images indexed by frame; empty blobs when absent.
    pub keyframes: Option<Vec<Vec<u8>>>,
    pub captions: Captions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodeSettings {
    pub level: u8,
    pub interval: u32,
    pub order: u8,
    pub dropout: Option<DropoutConfig>,
    pub shot_threshold: f64,
}

impl Default for EncodeSettings {
    fn default() -> Self {
        EncodeSettings {
            level: 1,
            interval: DEFAULT_INTERVAL,
            order: DEFAULT_ORDER,
            dropout: None,
            shot_threshold: DEFAULT_SHOT_THRESHOLD,
        }
    }
}

impl EncodeManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
    }

    /// Settings from the manifest, falling back to defaults.
    pub fn settings(&self) -> EncodeSettings {
        let d = EncodeSettings::default();
        EncodeSettings {
            level: self.level.unwrap_or(d.level),
            interval: self.interval.unwrap_or(d.interval),
            order: self.bezier_order.unwrap_or(d.order),
            dropout: self.dropout,
            shot_threshold: d.shot_threshold,
        }
    }

    /// Reads every referenced file. `base` resolves relative paths.
    pub fn load_inputs(&self, base: &Path) -> Result<EncodeInputs> {
        let meta = VideoMeta::new(self.width, self.height, self.fps, self.frame_count)?;
        let resolve = |p: &Path| base.join(p);
        let frames = meta.frame_count as usize + 1;
        let check_len = |stream: &str, n: usize| {
            if n != frames {
                return Err(Error::input(
                    stream,
                    format!("{n} entries, expected {frames} (frames 0..={})", meta.frame_count),
                ));
            }
            Ok(())
        };

        let label_maps = self
            .label_maps
            .as_ref()
            .map(|paths| {
                check_len("label_maps", paths.len())?;
                paths.iter().map(|p| io::read_label_map(&resolve(p))).collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let flows = self
            .flows
            .as_ref()
            .map(|paths| {
                check_len("flows", paths.len())?;
                paths.iter().map(|p| io::read_flo(&resolve(p))).collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let poses = self
            .joints
            .as_ref()
            .map(|p| io::read_joints_jsonl(&resolve(p)))
            .transpose()?;
        let shot_probs = match (&self.shot_probs, &self.shot_probs_file) {
            (Some(_), Some(_)) => {
                return Err(Error::input("shot_probs", "give either shot_probs or shot_probs_file"))
            }
            (Some(p), None) => ShotProbSeries::new(p.clone())?,
            (None, Some(f)) => io::read_shot_probs(&resolve(f))?,
            (None, None) => ShotProbSeries::zeros(meta.frame_count as usize),
        };
        let keyframes = self
            .keyframes
            .as_ref()
            .map(|paths| {
                check_len("keyframes", paths.len())?;
                paths
                    .iter()
                    .map(|p| {
                        let p = resolve(p);
                        fs::read(&p).map_err(|e| Error::from(e).in_file(p))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let captions = match (&self.captions, &self.caption, &self.caption_files) {
            (None, None, None) => Captions::None,
            (Some(c), None, None) => Captions::PerClip(c.clone()),
            (None, Some(c), None) => Captions::PerVideo(c.clone()),
            (None, None, Some(files)) => {
                let texts = files
                    .iter()
                    .map(|p| {
                        let p = resolve(p);
                        fs::read_to_string(&p)
                            .map(|s| s.trim_end_matches('\n').to_owned())
                            .map_err(|e| Error::from(e).in_file(p))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if texts.len() == 1 {
                    Captions::PerVideo(texts.into_iter().next().unwrap_or_default())
                } else {
                    Captions::PerClip(texts)
                }
            }
            _ => {
                return Err(Error::input(
                    "captions",
                    "give only one of captions, caption, caption_files",
                ))
            }
        };
        let inputs = EncodeInputs {
            meta,
            label_maps,
            flows,
            poses,
            shot_probs,
            keyframes,
            captions,
        };
        inputs.validate()?;
        Ok(inputs)
    }
}

impl EncodeInputs {
    /// Length and dimension consistency of every stream.
    pub fn validate(&self) -> Result<()> {
        let meta = self.meta;
        meta.validate()?;
        let frames = meta.frame_count as usize + 1;
        let check_len = |stream: &str, n: usize| {
            if n != frames {
                return Err(Error::input(stream, format!("{n} entries, expected {frames}")));
            }
            Ok(())
        };
        if let Some(maps) = &self.label_maps {
            check_len("label_maps", maps.len())?;
            if let Some((i, m)) = maps
                .iter()
                .enumerate()
                .find(|(_, m)| (m.width(), m.height()) != (meta.width, meta.height))
            {
                return Err(Error::input(
                    "label_maps",
                    format!("frame {i} is {}x{}, video is {}x{}", m.width(), m.height(), meta.width, meta.height),
                ));
            }
        }
        if let Some(flows) = &self.flows {
            check_len("flows", flows.len())?;
            if let Some((i, f)) = flows
                .iter()
                .enumerate()
                .find(|(_, f)| (f.width(), f.height()) != (meta.width, meta.height))
            {
                return Err(Error::input(
                    "flows",
                    format!("frame {i} is {}x{}, video is {}x{}", f.width(), f.height(), meta.width, meta.height),
                ));
            }
        }
        if let Some(poses) = &self.poses {
            check_len("joints", poses.len())?;
        }
        if let Some(kf) = &self.keyframes {
            check_len("keyframes", kf.len())?;
        }
        if self.shot_probs.len() != meta.frame_count as usize {
            return Err(Error::input(
                "shot_probs",
                format!("{} entries, expected {}", self.shot_probs.len(), meta.frame_count),
            ));
        }
        if meta.width > u32::from(u16::MAX) || meta.height > u32::from(u16::MAX) {
            return Err(Error::input("meta", "frame dimensions exceed 65535"));
        }
        Ok(())
    }

    fn has_signal(&self, m: Modality) -> bool {
        match m {
            Modality::Seg => self.label_maps.is_some(),
            Modality::Motion => self.poses.is_some(),
            Modality::Flow => self.flows.is_some(),
        }
    }
}

/// Result of [`encode_video`].
#[derive(Debug, Clone)]
pub struct EncodedVideo {
    pub stream: Vec<u8>,
    pub marks: Vec<KeyframeMark>,
    pub packages: Vec<ClipPackage>,
    pub report: EncodeReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeReport {
    pub level: u8,
    pub interval: u32,
    pub frame_count: u32,
    pub keyframes: Vec<u32>,
    pub shot_offset_starts: Vec<u32>,
    pub intermediate_frames: u32,
    pub stream_bytes: usize,
    pub clips: Vec<ClipReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClipReport {
    pub index: usize,
    pub start: u32,
    pub end: u32,
    pub roles: ConditionFlags,
    pub audit: RateAudit,
    pub bpp: f64,
}

/// Per-clip roles before any coding happens.
fn plan_flags(inputs: &EncodeInputs, settings: &EncodeSettings, clip_count: usize) -> Vec<ConditionFlags> {
    let mut base = ConditionFlags::uniform(ModalityRole::Absent);
    if settings.level > 0 {
        for m in Modality::ALL {
            if inputs.has_signal(m) {
                base.set(m, ModalityRole::Present);
            }
        }
    }
    let drops = settings
        .dropout
        .map(|d| make_dropout_plan(d.seed, d.ratio, clip_count));
    (0..clip_count)
        .map(|i| {
            let mut f = base;
            if let Some(plan) = &drops {
                for m in Modality::ALL {
                    if f.get(m).is_present() && plan[i].get(m) == ModalityRole::DroppedOut {
                        f.set(m, ModalityRole::DroppedOut);
                    }
                }
            }
            f
        })
        .collect()
}

pub fn encode_video(inputs: &EncodeInputs, settings: &EncodeSettings) -> Result<EncodedVideo> {
    encode_video_with(inputs, settings, &NullCodec)
}

pub fn encode_video_with(
    inputs: &EncodeInputs,
    settings: &EncodeSettings,
    codec: &dyn KeyframeCodec,
) -> Result<EncodedVideo> {
    inputs.validate()?;
    let level = level_preset(settings.level)?;
    if let Some(d) = settings.dropout {
        if !(0.0..=1.0).contains(&d.ratio) {
            return Err(Error::invalid(format!("dropout ratio must be in [0, 1], got {}", d.ratio)));
        }
    }
    if settings.order == 0 {
        return Err(Error::invalid("Bézier order must be at least 1"));
    }
    let meta = inputs.meta;
    let marks = select_keyframes_with_threshold(&inputs.shot_probs, settings.interval, settings.shot_threshold)?;
    let clips = segment_clips(&marks)?;
    if let Captions::PerClip(c) = &inputs.captions {
        if c.len() != clips.len() {
            return Err(Error::input(
                "captions",
                format!("{} per-clip captions for {} clips", c.len(), clips.len()),
            ));
        }
    }
    let flags = plan_flags(inputs, settings, clips.len());
    log::debug!("{} keyframes, {} clips at level {}", marks.len(), clips.len(), settings.level);

    let packages = clips
        .par_iter()
        .zip(flags.par_iter())
        .enumerate()
        .map(|(i, (&clip, &flags))| {
            encode_clip(inputs, settings, &level, codec, i, clip, flags).map_err(|e| Error::Clip {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stream = write_stream(&packages)?;

    let clip_reports = packages
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let audit = audit_rate(p, max_persons(p))?;
            Ok(ClipReport {
                index,
                start: p.clip.start,
                end: p.clip.end,
                roles: p.flags,
                bpp: crate::bitstream::compute_bpp(audit.r_measured, &meta),
                audit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EncodeReport {
        level: settings.level,
        interval: settings.interval,
        frame_count: meta.frame_count,
        keyframes: marks.iter().map(|m| m.index).collect(),
        shot_offset_starts: shot_offset_starts(&marks, &clips),
        intermediate_frames: clips.iter().map(Clip::intermediate_count).sum(),
        stream_bytes: stream.len(),
        clips: clip_reports,
    };
    Ok(EncodedVideo {
        stream,
        marks,
        packages,
        report,
    })
}

fn encode_clip(
    inputs: &EncodeInputs,
    settings: &EncodeSettings,
    level: &crate::model::CompressionLevel,
    codec: &dyn KeyframeCodec,
    index: usize,
    clip: Clip,
    flags: ConditionFlags,
) -> Result<ClipPackage> {
    let meta = inputs.meta;
    let blob = |frame: u32| -> Result<Vec<u8>> {
        match &inputs.keyframes {
            Some(k) => codec.encode(&k[frame as usize]),
            None => Ok(Vec::new()),
        }
    };
    let caption = match &inputs.captions {
        Captions::None => String::new(),
        Captions::PerVideo(c) => c.clone(),
        Captions::PerClip(c) => c[index].clone(),
    };
    let stride = level.flow_stride.unwrap_or(0);
    let n_contours = level.n_contours.unwrap_or(0);
    let order = if level.n_contours.is_some() { settings.order } else { 0 };

    let frames = clip.intermediate_frames();
    let seg = match (&inputs.label_maps, flags.seg.is_present()) {
        (Some(maps), true) => frames
            .clone()
            .map(|f| encode_seg_frame_with(&maps[f as usize], n_contours, order))
            .collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    let motion = match (&inputs.poses, flags.motion.is_present(), level.pose_area_threshold) {
        (Some(poses), true, Some(xi)) => frames
            .clone()
            .map(|f| quantize_frame(&filter_poses(&poses[f as usize], xi, &meta)?))
            .collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    let flow = match (&inputs.flows, flags.flow.is_present()) {
        (Some(flows), true) => frames
            .clone()
            .map(|f| quantize_grid(&sample_flow_grid(&flows[f as usize], stride)?))
            .collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    Ok(ClipPackage {
        width: meta.width as u16,
        height: meta.height as u16,
        fps: meta.fps,
        clip,
        level_id: level.level_id,
        flags,
        stride,
        n_contours,
        order,
        first_kf: blob(clip.start)?,
        last_kf: blob(clip.end)?,
        caption,
        seg,
        motion,
        flow,
    })
}

/// One dense condition video for a clip's intermediate frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityVideo {
    pub modality: Modality,
    pub role: ModalityRole,
    pub frames: Vec<RgbImage>,
}

#[derive(Debug, Clone)]
pub struct DecodedClip {
    pub index: usize,
    pub clip: Clip,
    pub level_id: u8,
    pub flags: ConditionFlags,
    pub first_kf: Vec<u8>,
    pub last_kf: Vec<u8>,
    pub caption: String,
    pub seg: ModalityVideo,
    pub motion: ModalityVideo,
    pub flow: ModalityVideo,
    pub audit: RateAudit,
}

impl DecodedClip {
    pub fn modalities(&self) -> [&ModalityVideo; 3] {
        [&self.seg, &self.motion, &self.flow]
    }
}

/// Parses a stream and renders every clip.
pub fn decode_video(stream: &[u8]) -> Result<Vec<DecodedClip>> {
    let packages = read_stream(stream)?;
    log::debug!("decoding {} clips from {} bytes", packages.len(), stream.len());
    packages
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            decode_clip(i, p).map_err(|e| Error::Clip {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

fn decode_clip(index: usize, p: ClipPackage) -> Result<DecodedClip> {
    let meta = VideoMeta {
        width: u32::from(p.width),
        height: u32::from(p.height),
        fps: p.fps,
        frame_count: p.clip.end.max(2),
    };
    let n = p.intermediate_count();
    let black = || vec![RgbImage::black(meta.width, meta.height); n];
    let video = |modality, role: ModalityRole, render: &dyn Fn(usize) -> RgbImage| ModalityVideo {
        modality,
        role,
        frames: if role.is_present() {
            (0..n).map(render).collect()
        } else {
            black()
        },
    };
    let seg = video(Modality::Seg, p.flags.seg, &|f| render_seg_frame(&p.seg[f], &meta));
    let motion = video(Modality::Motion, p.flags.motion, &|f| render_motion_frame(&p.motion[f], &meta));
    let flow = video(Modality::Flow, p.flags.flow, &|f| render_flow_arrows(&p.flow[f], &meta));
    let audit = audit_rate(&p, max_persons(&p))?;
    Ok(DecodedClip {
        index,
        clip: p.clip,
        level_id: p.level_id,
        flags: p.flags,
        first_kf: p.first_kf,
        last_kf: p.last_kf,
        caption: p.caption,
        seg,
        motion,
        flow,
        audit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Png,
    Ppm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Ppm => "ppm",
        }
    }

    pub fn write(self, img: &RgbImage, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::from(e).in_file(path))?;
        let out = std::io::BufWriter::new(file);
        match self {
            ImageFormat::Png => img.write_png(out),
            ImageFormat::Ppm => img.write_ppm(out),
        }
        .map_err(|e| e.in_file(path))
    }
}

/// Reconstruction manifest handed to the generative decoder.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionManifest {
    pub format: ImageFormat,
    pub clips: Vec<ClipManifest>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClipManifest {
    pub index: usize,
    pub start: u32,
    pub end: u32,
    pub level: u8,
    pub roles: ConditionFlags,
    pub frames: Vec<u32>,
    pub first_keyframe: String,
    pub last_keyframe: String,
    pub caption: String,
    /// Directory of each modality's frames, relative to the output root.
    pub modalities: Vec<ModalityEntry>,
    pub audit: RateAudit,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModalityEntry {
    pub modality: Modality,
    pub role: ModalityRole,
    pub dir: String,
}

/// Directory of clip `index` under the output root.
pub fn clip_dir_name(index: usize) -> String {
    format!("clip_{index:04}")
}

/// Writes decoded clips:
///
/// ```text
/// <out>/manifest.json
/// <out>/clip_NNNN/first_kf.bin, last_kf.bin, caption.txt
/// <out>/clip_NNNN/{seg,motion,flow}/frame_FFFFFF.<png|ppm>
/// ```
///
/// `FFFFFF` is the absolute frame index.
pub fn write_decoded(out: &Path, clips: &[DecodedClip], format: ImageFormat) -> Result<ReconstructionManifest> {
    fs::create_dir_all(out).map_err(|e| Error::from(e).in_file(out))?;
    let entries = clips
        .par_iter()
        .map(|c| write_clip(out, c, format))
        .collect::<Result<Vec<_>>>()?;
    let manifest = ReconstructionManifest {
        format,
        clips: entries,
    };
    let path = out.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest)?;
    fs::write(&path, json).map_err(|e| Error::from(e).in_file(path))?;
    Ok(manifest)
}

fn write_clip(out: &Path, c: &DecodedClip, format: ImageFormat) -> Result<ClipManifest> {
    let name = clip_dir_name(c.index);
    let dir = out.join(&name);
    let write = |file: &str, bytes: &[u8]| -> Result<()> {
        let p = dir.join(file);
        fs::write(&p, bytes).map_err(|e| Error::from(e).in_file(p))
    };
    fs::create_dir_all(&dir).map_err(|e| Error::from(e).in_file(&dir))?;
    write("first_kf.bin", &c.first_kf)?;
    write("last_kf.bin", &c.last_kf)?;
    write("caption.txt", c.caption.as_bytes())?;
    let frames: Vec<u32> = c.clip.intermediate_frames().collect();
    let mut modalities = Vec::new();
    for v in c.modalities() {
        let mdir = dir.join(v.modality.name());
        fs::create_dir_all(&mdir).map_err(|e| Error::from(e).in_file(&mdir))?;
        for (img, &f) in v.frames.iter().zip(&frames) {
            format.write(img, &mdir.join(format!("frame_{f:06}.{}", format.extension())))?;
        }
        modalities.push(ModalityEntry {
            modality: v.modality,
            role: v.role,
            dir: format!("{name}/{}", v.modality.name()),
        });
    }
    Ok(ClipManifest {
        index: c.index,
        start: c.clip.start,
        end: c.clip.end,
        level: c.level_id,
        roles: c.flags,
        frames,
        first_keyframe: format!("{name}/first_kf.bin"),
        last_keyframe: format!("{name}/last_kf.bin"),
        caption: c.caption.clone(),
        modalities,
        audit: c.audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_inputs(frame_count: u32) -> EncodeInputs {
        let meta = VideoMeta::new(16, 16, 8, frame_count).unwrap();
        let n = frame_count as usize + 1;
        EncodeInputs {
            meta,
            label_maps: None,
            flows: None,
            poses: None,
            shot_probs: ShotProbSeries::zeros(frame_count as usize),
            keyframes: Some((0..n).map(|i| vec![i as u8; 3]).collect()),
            captions: Captions::PerVideo("tiny".into()),
        }
    }

    #[test]
    fn level_zero_has_three_keyframe_only_clips() {
        let inputs = tiny_inputs(10);
        let settings = EncodeSettings { level: 0, interval: 4, ..Default::default() };
        let enc = encode_video(&inputs, &settings).unwrap();
        assert_eq!(enc.packages.len(), 3);
        for p in &enc.packages {
            assert_eq!(p.flags, ConditionFlags::uniform(ModalityRole::Absent));
            assert_eq!(p.first_kf, vec![p.clip.start as u8; 3]);
            assert_eq!(p.last_kf, vec![p.clip.end as u8; 3]);
        }
        let dec = decode_video(&enc.stream).unwrap();
        assert_eq!(dec[1].clip, Clip { start: 4, end: 8 });
        for v in dec[1].modalities() {
            assert_eq!(v.frames.len(), 3);
            assert!(v.frames.iter().all(RgbImage::is_black));
            assert_eq!(v.role, ModalityRole::Absent);
        }
    }

    #[test]
    fn missing_inputs_are_absent_not_errors() {
        let inputs = tiny_inputs(6);
        let enc = encode_video(&inputs, &EncodeSettings { level: 1, interval: 3, ..Default::default() });
        // 16x16 frames cannot host stride 128, but flow is absent so no error.
        let enc = enc.unwrap();
        assert!(enc.packages.iter().all(|p| p.flags == ConditionFlags::uniform(ModalityRole::Absent)));
    }

    #[test]
    fn length_mismatch_names_stream() {
        let mut inputs = tiny_inputs(6);
        inputs.keyframes.as_mut().unwrap().pop();
        match encode_video(&inputs, &EncodeSettings::default()).unwrap_err() {
            Error::Input { stream, .. } => assert_eq!(stream, "keyframes"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn per_clip_caption_count_checked() {
        let mut inputs = tiny_inputs(10);
        inputs.captions = Captions::PerClip(vec!["a".into(), "b".into()]);
        let s = EncodeSettings { level: 0, interval: 4, ..Default::default() };
        assert!(matches!(encode_video(&inputs, &s), Err(Error::Input { .. })));
        inputs.captions = Captions::PerClip(vec!["a".into(), "b".into(), "c".into()]);
        let enc = encode_video(&inputs, &s).unwrap();
        assert_eq!(enc.packages[2].caption, "c");
    }
}
