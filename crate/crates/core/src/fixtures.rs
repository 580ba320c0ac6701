//! Deterministic synthetic extractor outputs for tests and demos: moving
//! labeled shapes with their flow, three stick-figure people of different
//! sizes, one shot cut, keyframe images and a caption.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bitstream::{quantize, ClipPackage};
use crate::flow::{FlowField, FlowGrid};
use crate::io::{encode_flo, encode_pgm16, encode_png16, JointsRecord};
use crate::model::{ConditionFlags, ModalityRole, SplitMix64, VideoMeta};
use crate::motion::{Camera, Pose, PoseFrame, JOINT_COUNT};
use crate::pipeline::{Captions, EncodeInputs, EncodeManifest};
use crate::raster::{hue_to_rgb, RgbImage};
use crate::seg::{BezierCurve, LabelMap, Point, SegFrameCode};
use crate::segmenter::{Clip, ShotProbSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    pub width: u32,
    pub height: u32,
    pub fps: u16,
    pub frame_count: u32,
    /// Frame with a shot transition, if any.
    pub shot_at: Option<u32>,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            width: 192,
            height: 128,
            fps: 16,
            frame_count: 40,
            shot_at: Some(20),
        }
    }
}

/// Joint positions of a standing figure, normalized to its bounding box.
const FIGURE: [[f32; 2]; JOINT_COUNT] = [
    [0.5, 0.55],
    [0.4, 0.57],
    [0.6, 0.57],
    [0.5, 0.48],
    [0.38, 0.75],
    [0.62, 0.75],
    [0.5, 0.4],
    [0.36, 0.93],
    [0.64, 0.93],
    [0.5, 0.33],
    [0.3, 1.0],
    [0.7, 1.0],
    [0.5, 0.18],
    [0.5, 0.0],
    [0.35, 0.22],
    [0.65, 0.22],
    [0.2, 0.32],
    [0.8, 0.32],
    [0.0, 0.42],
    [1.0, 0.42],
    [0.5, 0.26],
];

const CAMERA: Camera = Camera {
    fx: 200.0,
    fy: 200.0,
    cx: 96.0,
    cy: 64.0,
};

#[derive(Clone, Copy)]
enum Shape {
    Rect { w: f32, h: f32 },
    Disc { r: f32 },
}

struct Body {
    id: u16,
    shape: Shape,
    origin: [f32; 2],
    velocity: [f32; 2],
}

impl FixtureSpec {
    pub fn meta(&self) -> VideoMeta {
        VideoMeta {
            width: self.width,
            height: self.height,
            fps: self.fps,
            frame_count: self.frame_count,
        }
    }

    fn scene(&self, t: u32) -> (Vec<Body>, f32) {
        let (w, h) = (self.width as f32, self.height as f32);
        let cut = self.shot_at.is_some_and(|s| t >= s);
        let local = match self.shot_at {
            Some(s) if t >= s => (t - s) as f32,
            _ => t as f32,
        };
        let bodies = if !cut {
            vec![
                Body { id: 1, shape: Shape::Rect { w: w * 0.25, h: h * 0.3 }, origin: [w * 0.05, h * 0.1], velocity: [1.5, 0.5] },
                Body { id: 2, shape: Shape::Disc { r: h * 0.15 }, origin: [w * 0.7, h * 0.3], velocity: [-1.0, 0.75] },
                Body { id: 3, shape: Shape::Rect { w: w * 0.1, h: h * 0.12 }, origin: [w * 0.45, h * 0.7], velocity: [0.5, -0.5] },
                Body { id: 4, shape: Shape::Disc { r: 3.0 }, origin: [w * 0.9, h * 0.85], velocity: [-0.5, 0.0] },
            ]
        } else {
            vec![
                Body { id: 5, shape: Shape::Disc { r: h * 0.22 }, origin: [w * 0.3, h * 0.45], velocity: [1.0, 0.0] },
                Body { id: 6, shape: Shape::Rect { w: w * 0.2, h: h * 0.2 }, origin: [w * 0.65, h * 0.15], velocity: [-0.5, 1.0] },
                Body { id: 7, shape: Shape::Rect { w: w * 0.08, h: h * 0.3 }, origin: [w * 0.05, h * 0.6], velocity: [0.25, -0.5] },
            ]
        };
        (bodies, local)
    }

    fn body_at(&self, b: &Body, t: f32, x: f32, y: f32) -> bool {
        let ox = b.origin[0] + b.velocity[0] * t;
        let oy = b.origin[1] + b.velocity[1] * t;
        match b.shape {
            Shape::Rect { w, h } => x >= ox && x < ox + w && y >= oy && y < oy + h,
            Shape::Disc { r } => (x - ox).powi(2) + (y - oy).powi(2) <= r * r,
        }
    }

    pub fn label_map(&self, t: u32) -> LabelMap {
        let (bodies, local) = self.scene(t);
        let mut labels = vec![0u16; (self.width * self.height) as usize];
        for y in 0..self.height {
            for x in 0..self.width {
                let (fx, fy) = (x as f32 + 0.5, y as f32 + 0.5);
                if let Some(b) = bodies.iter().rev().find(|b| self.body_at(b, local, fx, fy)) {
                    labels[(y * self.width + x) as usize] = b.id;
                }
            }
        }
        LabelMap::new(self.width, self.height, labels).expect("fixture dims")
    }

    pub fn flow(&self, t: u32) -> FlowField {
        let (bodies, local) = self.scene(t);
        FlowField::from_fn(self.width, self.height, |x, y| {
            let (fx, fy) = (x as f32 + 0.5, y as f32 + 0.5);
            bodies
                .iter()
                .rev()
                .find(|b| self.body_at(b, local, fx, fy))
                .map_or([0.25, 0.0], |b| b.velocity)
        })
        .expect("fixture dims")
    }

    /// Boxes of the three figures: large, medium and small relative to
    /// the frame.
    fn figure_boxes(&self, t: u32) -> [[f32; 4]; 3] {
        let (w, h) = (self.width as f32, self.height as f32);
        let t = t as f32;
        let drift = |range: f32, speed: f32| (t * speed) % range;
        [
            [w * 0.03 + drift(w * 0.5, 1.0), h * 0.1, w * 0.42, h * 0.78],
            [w * 0.6 + drift(w * 0.08, 0.3), h * 0.05, w * 0.26, h * 0.51],
            [w * 0.02, h * 0.45 + drift(h * 0.05, 0.2), w * 0.234, h * 0.47],
        ]
    }

    pub fn poses(&self, t: u32) -> PoseFrame {
        PoseFrame::new(
            self.figure_boxes(t)
                .iter()
                .map(|&[x, y, bw, bh]| {
                    let mut pose: Pose = [[0.0; 2]; JOINT_COUNT];
                    for (p, n) in pose.iter_mut().zip(FIGURE) {
                        *p = [x + n[0] * bw, y + n[1] * bh];
                    }
                    pose
                })
                .collect(),
        )
    }

    pub fn shot_probs(&self) -> ShotProbSeries {
        let probs = (1..=self.frame_count)
            .map(|i| if Some(i) == self.shot_at { 0.95 } else { 0.02 })
            .collect();
        ShotProbSeries::new(probs).expect("valid probabilities")
    }

    /// Keyframe image: label map colored by segment id, as PNG bytes.
    pub fn keyframe_png(&self, t: u32) -> Vec<u8> {
        let map = self.label_map(t);
        let mut img = RgbImage::black(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let id = map.get(x, y);
                let c = if id == 0 { [40, 40, 40] } else { hue_to_rgb(f64::from(id) * 47.0) };
                img.put(i64::from(x), i64::from(y), c);
            }
        }
        let mut out = Vec::new();
        img.write_png(&mut out).expect("in-memory png");
        out
    }

    pub fn caption(&self) -> String {
        "shapes drift across a gray floor while three people walk".into()
    }

    /// The fixture as in-memory encoder inputs.
    pub fn inputs(&self) -> EncodeInputs {
        let frames = 0..=self.frame_count;
        EncodeInputs {
            meta: self.meta(),
            label_maps: Some(frames.clone().map(|t| self.label_map(t)).collect()),
            flows: Some(frames.clone().map(|t| self.flow(t)).collect()),
            poses: Some(frames.clone().map(|t| self.poses(t)).collect()),
            shot_probs: self.shot_probs(),
            keyframes: Some(frames.map(|t| self.keyframe_png(t)).collect()),
            captions: Captions::PerVideo(self.caption()),
        }
    }

    /// Writes the fixture files and a manifest under `dir`; returns the
    /// manifest path.
    ///
    /// Label maps alternate between 16-bit PGM and PNG, joints between
    /// camera-space and pixel coordinates.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|e| Error::from(e).in_file(p));
        let put = |p: &Path, bytes: &[u8]| fs::write(p, bytes).map_err(|e| Error::from(e).in_file(p));
        for sub in ["seg", "flow", "frames"] {
            mkdir(&dir.join(sub))?;
        }
        let mut manifest = EncodeManifest {
            width: self.width,
            height: self.height,
            fps: self.fps,
            frame_count: self.frame_count,
            ..Default::default()
        };
        let mut maps = Vec::new();
        let mut flows = Vec::new();
        let mut keys = Vec::new();
        let mut joints = String::new();
        for t in 0..=self.frame_count {
            let map = self.label_map(t);
            let (name, bytes) = if t % 2 == 0 {
                (format!("seg/frame_{t:06}.pgm"), encode_pgm16(&map))
            } else {
                (format!("seg/frame_{t:06}.png"), encode_png16(&map)?)
            };
            put(&dir.join(&name), &bytes)?;
            maps.push(PathBuf::from(name));

            let name = format!("flow/frame_{t:06}.flo");
            put(&dir.join(&name), &encode_flo(&self.flow(t)))?;
            flows.push(PathBuf::from(name));

            let name = format!("frames/frame_{t:06}.png");
            put(&dir.join(&name), &self.keyframe_png(t))?;
            keys.push(PathBuf::from(name));

            joints.push_str(&serde_json::to_string(&self.joints_record(t))?);
            joints.push('\n');
        }
        put(&dir.join("joints.jsonl"), joints.as_bytes())?;
        let shots: String = self
            .shot_probs()
            .as_slice()
            .iter()
            .map(|p| format!("{p}\n"))
            .collect();
        put(&dir.join("shots.txt"), shots.as_bytes())?;
        put(&dir.join("caption.txt"), self.caption().as_bytes())?;

        manifest.label_maps = Some(maps);
        manifest.flows = Some(flows);
        manifest.keyframes = Some(keys);
        manifest.joints = Some("joints.jsonl".into());
        manifest.shot_probs_file = Some("shots.txt".into());
        manifest.caption_files = Some(vec!["caption.txt".into()]);
        let path = dir.join("manifest.json");
        put(&path, &serde_json::to_vec_pretty(&manifest)?)?;
        Ok(path)
    }

    fn joints_record(&self, t: u32) -> JointsRecord {
        let frame = self.poses(t);
        if t % 2 == 1 {
            return JointsRecord {
                camera: None,
                people: frame
                    .poses
                    .iter()
                    .map(|p| p.iter().map(|j| vec![f64::from(j[0]), f64::from(j[1])]).collect())
                    .collect(),
            };
        }
        // Back-project at a per-person depth; projection recovers the pixels
        // up to f32 rounding.
        JointsRecord {
            camera: Some(CAMERA),
            people: frame
                .poses
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let z = 2.0 + i as f64;
                    p.iter()
                        .map(|j| {
                            vec![
                                (f64::from(j[0]) - CAMERA.cx) * z / CAMERA.fx,
                                (f64::from(j[1]) - CAMERA.cy) * z / CAMERA.fy,
                                z,
                            ]
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn below(rng: &mut SplitMix64, n: u64) -> u64 {
    rng.next_u64() % n
}

fn unit(rng: &mut SplitMix64) -> f32 {
    (rng.next_u64() >> 40) as f32 / (1u64 << 24) as f32
}

/// Random bfloat16-representable value in `[lo, hi)`.
fn coord(rng: &mut SplitMix64, lo: f32, hi: f32) -> f32 {
    quantize(lo + (hi - lo) * unit(rng)).expect("finite")
}

/// Random valid clip package. With `all_present` every modality is Present
/// at a level between 1 and 3 and the clip has at least two intermediate
/// frames; otherwise levels, roles and clip lengths vary freely.
pub fn random_package(rng: &mut SplitMix64, all_present: bool) -> ClipPackage {
    let width = 16 + below(rng, 300) as u16;
    let height = 16 + below(rng, 300) as u16;
    let fps = 1 + below(rng, 60) as u16;
    let start = below(rng, 1000) as u32;
    let min_frames = if all_present { 2 } else { 0 };
    let end = start + 1 + min_frames + below(rng, 6) as u32;
    let level_id = if all_present { 1 + below(rng, 3) as u8 } else { below(rng, 4) as u8 };
    let role = |rng: &mut SplitMix64| {
        if all_present {
            ModalityRole::Present
        } else if level_id == 0 {
            [ModalityRole::Absent, ModalityRole::DroppedOut][below(rng, 2) as usize]
        } else {
            [ModalityRole::Absent, ModalityRole::Present, ModalityRole::DroppedOut][below(rng, 3) as usize]
        }
    };
    let flags = ConditionFlags {
        seg: role(rng),
        motion: role(rng),
        flow: role(rng),
    };
    let min_side = width.min(height);
    let (stride, n_contours, order) = if level_id == 0 {
        (0, 0, 0)
    } else {
        (
            (min_side / 8).max(1) + below(rng, u64::from(min_side - min_side / 8)) as u16,
            1 + below(rng, 12) as u16,
            1 + below(rng, 10) as u8,
        )
    };
    let blob = |rng: &mut SplitMix64| (0..below(rng, 64)).map(|_| rng.next_u64() as u8).collect::<Vec<u8>>();
    let first_kf = blob(rng);
    let last_kf = blob(rng);
    let words = ["a", "dog", "läuft", "über", "the", "草地", "slowly"];
    let caption = (0..below(rng, 6))
        .map(|_| words[below(rng, words.len() as u64) as usize])
        .collect::<Vec<_>>()
        .join(" ");

    let clip = Clip { start, end };
    let frames = clip.intermediate_count() as usize;
    let (w, h) = (f32::from(width), f32::from(height));
    let mut seg = Vec::new();
    let mut motion = Vec::new();
    let mut flow = Vec::new();
    for _ in 0..frames {
        if flags.seg.is_present() {
            let count = below(rng, u64::from(n_contours) + 1) as usize;
            let curves = (0..count)
                .map(|_| {
                    let pts = (0..=order)
                        .map(|_| Point::new(f64::from(coord(rng, -4.0, w + 4.0)), f64::from(coord(rng, -4.0, h + 4.0))))
                        .collect();
                    BezierCurve::new(pts).expect("order >= 1")
                })
                .collect();
            seg.push(SegFrameCode { n_contours, order, curves });
        }
        if flags.motion.is_present() {
            let poses = (0..below(rng, 4))
                .map(|_| {
                    let mut p: Pose = [[0.0; 2]; JOINT_COUNT];
                    for j in p.iter_mut() {
                        *j = [coord(rng, 0.0, w), coord(rng, 0.0, h)];
                    }
                    p
                })
                .collect();
            motion.push(PoseFrame::new(poses));
        }
        if flags.flow.is_present() {
            let (rows, cols) = FlowGrid::dims(u32::from(width), u32::from(height), stride);
            let vectors = (0..rows * cols)
                .map(|_| [coord(rng, -20.0, 20.0), coord(rng, -20.0, 20.0)])
                .collect();
            flow.push(FlowGrid { stride, rows, cols, vectors });
        }
    }
    ClipPackage {
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
        seg,
        motion,
        flow,
    }
}
