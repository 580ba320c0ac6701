//! Human motion condition: 21 body joints per person, projected to the
//! image, filtered by the area they cover, and sent as bfloat16 pairs.
//!
//! Joint order:
//!
//! | idx | joint       | idx | joint       | idx | joint       |
//! |-----|-------------|-----|-------------|-----|-------------|
//! | 0   | pelvis      | 7   | l_ankle     | 14  | l_shoulder  |
//! | 1   | l_hip       | 8   | r_ankle     | 15  | r_shoulder  |
//! | 2   | r_hip       | 9   | spine3      | 16  | l_elbow     |
//! | 3   | spine1      | 10  | l_foot      | 17  | r_elbow     |
//! | 4   | l_knee      | 11  | r_foot      | 18  | l_wrist     |
//! | 5   | r_knee      | 12  | neck        | 19  | r_wrist     |
//! | 6   | spine2      | 13  | head        | 20  | chest       |
//!
//! The skeleton is the tree in [`SKELETON_EDGES`].

use serde::{Deserialize, Serialize};

use crate::bitstream::{quantize, ByteReader, ByteWriter};
use crate::model::VideoMeta;
use crate::raster::{hue_to_rgb, RgbImage, WHITE};
use crate::{Error, Result};

pub const JOINT_COUNT: usize = 21;

pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "pelvis",
    "l_hip",
    "r_hip",
    "spine1",
    "l_knee",
    "r_knee",
    "spine2",
    "l_ankle",
    "r_ankle",
    "spine3",
    "l_foot",
    "r_foot",
    "neck",
    "head",
    "l_shoulder",
    "r_shoulder",
    "l_elbow",
    "r_elbow",
    "l_wrist",
    "r_wrist",
    "chest",
];

/// Kinematic tree over the 21 joints (parent, child).
pub const SKELETON_EDGES: [(usize, usize); 20] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 7),
    (5, 8),
    (6, 9),
    (7, 10),
    (8, 11),
    (9, 20),
    (20, 12),
    (12, 13),
    (20, 14),
    (20, 15),
    (14, 16),
    (15, 17),
    (16, 18),
    (17, 19),
];

/// Image-space joints of one person, `[x, y]` in pixels.
pub type Pose = [[f32; 2]; JOINT_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

/// Camera-space joints (meters) for every person in a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Joints3D {
    pub camera: Camera,
    pub people: Vec<[[f64; 3]; JOINT_COUNT]>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseFrame {
    pub poses: Vec<Pose>,
}

impl PoseFrame {
    pub fn new(poses: Vec<Pose>) -> Self {
        PoseFrame { poses }
    }

    pub fn persons(&self) -> usize {
        self.poses.len()
    }

    pub fn wire_len(&self) -> usize {
        1 + self.poses.len() * JOINT_COUNT * 4
    }
}

/// Pinhole projection `x = fx·X/Z + cx`, `y = fy·Y/Z + cy`.
pub fn project_joints(j: &Joints3D) -> Result<Vec<Pose>> {
    let cam = j.camera;
    j.people
        .iter()
        .enumerate()
        .map(|(person, joints)| {
            let mut pose = [[0f32; 2]; JOINT_COUNT];
            for (k, &[x, y, z]) in joints.iter().enumerate() {
                if z.is_nan() || z <= 0.0 {
                    return Err(Error::invalid(format!(
                        "person {person} joint {k} ({}) has depth {z}, must be in front of the camera",
                        JOINT_NAMES[k]
                    )));
                }
                pose[k] = [(cam.fx * x / z + cam.cx) as f32, (cam.fy * y / z + cam.cy) as f32];
            }
            Ok(pose)
        })
        .collect()
}

/// Fraction of the image covered by the pose's joint bounding box, after
/// clipping the box to the image.
pub fn pose_area_fraction(pose: &Pose, meta: &VideoMeta) -> f64 {
    let (w, h) = (f64::from(meta.width), f64::from(meta.height));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &[x, y] in pose {
        let (x, y) = (f64::from(x), f64::from(y));
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let bw = (x1.min(w) - x0.max(0.0)).max(0.0);
    let bh = (y1.min(h) - y0.max(0.0)).max(0.0);
    bw * bh / (w * h)
}

/// Keeps poses whose area fraction is at least `xi`.
pub fn filter_poses(frame: &PoseFrame, xi: f64, meta: &VideoMeta) -> Result<PoseFrame> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::invalid(format!("area threshold must be in (0, 1], got {xi}")));
    }
    Ok(PoseFrame {
        poses: frame
            .poses
            .iter()
            .filter(|p| pose_area_fraction(p, meta) >= xi)
            .copied()
            .collect(),
    })
}

/// Rounds every coordinate to the nearest bfloat16.
pub fn quantize_frame(frame: &PoseFrame) -> Result<PoseFrame> {
    let mut out = frame.clone();
    for pose in &mut out.poses {
        for j in pose.iter_mut() {
            *j = [quantize(j[0])?, quantize(j[1])?];
        }
    }
    Ok(out)
}

pub(crate) fn write_motion_block(w: &mut ByteWriter, frame: &PoseFrame) -> Result<()> {
    let k = u8::try_from(frame.poses.len()).map_err(|_| {
        Error::invalid(format!("{} persons exceed the 255 per frame", frame.poses.len()))
    })?;
    w.u8(k);
    for pose in &frame.poses {
        for &[x, y] in pose {
            w.bf16(x)?;
            w.bf16(y)?;
        }
    }
    Ok(())
}

pub(crate) fn read_motion_block(r: &mut ByteReader<'_>) -> Result<PoseFrame> {
    let k = r.u8("person count")?;
    let mut poses = Vec::with_capacity(usize::from(k));
    for _ in 0..k {
        let mut pose = [[0f32; 2]; JOINT_COUNT];
        for j in pose.iter_mut() {
            *j = [r.bf16("joint x")?, r.bf16("joint y")?];
        }
        poses.push(pose);
    }
    Ok(PoseFrame { poses })
}

/// Person count (u8) followed by `k·21·2` bfloat16 coordinates.
pub fn encode_motion_frame(frame: &PoseFrame) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new();
    write_motion_block(&mut w, frame)?;
    Ok(w.into_inner())
}

pub fn decode_motion_frame(bytes: &[u8]) -> Result<PoseFrame> {
    let mut r = ByteReader::new(bytes);
    let frame = read_motion_block(&mut r)?;
    r.expect_end()?;
    Ok(frame)
}

/// Limb color for edge `i` of [`SKELETON_EDGES`].
pub fn limb_color(i: usize) -> [u8; 3] {
    hue_to_rgb(i as f64 * 360.0 / SKELETON_EDGES.len() as f64)
}

/// Draws each pose's skeleton with per-limb colors and white 3-pixel joint
/// discs on black.
pub fn render_motion_frame(frame: &PoseFrame, meta: &VideoMeta) -> RgbImage {
    let mut img = RgbImage::black(meta.width, meta.height);
    let px = |j: [f32; 2]| (f64::from(j[0]).round() as i64, f64::from(j[1]).round() as i64);
    for pose in &frame.poses {
        for (i, &(a, b)) in SKELETON_EDGES.iter().enumerate() {
            img.draw_line(px(pose[a]), px(pose[b]), limb_color(i));
        }
        for &j in pose {
            img.fill_disc(px(j), 1.5, WHITE);
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(w: u32, h: u32) -> VideoMeta {
        VideoMeta::new(w, h, 16, 10).unwrap()
    }

    /// A pose whose joints span exactly the box `[x0, x0+bw] × [y0, y0+bh]`.
    fn box_pose(x0: f32, y0: f32, bw: f32, bh: f32) -> Pose {
        let mut p = [[x0 + bw / 2.0, y0 + bh / 2.0]; JOINT_COUNT];
        p[0] = [x0, y0];
        p[1] = [x0 + bw, y0 + bh];
        p
    }

    #[test]
    fn skeleton_is_a_spanning_tree() {
        let mut parent: Vec<Option<usize>> = vec![None; JOINT_COUNT];
        for &(a, b) in &SKELETON_EDGES {
            assert!(parent[b].is_none(), "joint {b} has two parents");
            parent[b] = Some(a);
        }
        assert_eq!(parent.iter().filter(|p| p.is_none()).count(), 1);
        assert!(parent[0].is_none());
    }

    #[test]
    fn projection_cases() {
        let cam = Camera { fx: 100.0, fy: 100.0, cx: 50.0, cy: 50.0 };
        let mut joints = [[0.0, 0.0, 2.0]; JOINT_COUNT];
        joints[1] = [1.0, 0.0, 2.0];
        let out = project_joints(&Joints3D { camera: cam, people: vec![joints] }).unwrap();
        assert_eq!(out[0][0], [50.0, 50.0]);
        assert_eq!(out[0][1], [100.0, 50.0]);

        joints[5] = [0.0, 0.0, 0.0];
        let err = project_joints(&Joints3D { camera: cam, people: vec![joints] }).unwrap_err();
        assert!(err.to_string().contains("joint 5"));
    }

    #[test]
    fn filter_threshold_examples() {
        let m = meta(100, 100);
        let frame = PoseFrame::new(vec![box_pose(10.0, 10.0, 20.0, 30.0)]);
        assert!((pose_area_fraction(&frame.poses[0], &m) - 0.06).abs() < 1e-12);
        assert_eq!(filter_poses(&frame, 0.1, &m).unwrap().persons(), 0);
        assert_eq!(filter_poses(&frame, 0.05, &m).unwrap().persons(), 1);
        assert_eq!(filter_poses(&frame, 1e-12, &m).unwrap().persons(), 1);
        assert!(filter_poses(&frame, 0.0, &m).is_err());
        assert!(filter_poses(&frame, 1.5, &m).is_err());
    }

    #[test]
    fn bbox_is_clipped_to_image() {
        let m = meta(100, 100);
        let p = box_pose(-50.0, 0.0, 100.0, 100.0);
        assert!((pose_area_fraction(&p, &m) - 0.5).abs() < 1e-12);
        let outside = box_pose(200.0, 200.0, 10.0, 10.0);
        assert_eq!(pose_area_fraction(&outside, &m), 0.0);
    }

    #[test]
    fn wire_sizes_and_round_trip() {
        assert_eq!(encode_motion_frame(&PoseFrame::default()).unwrap(), [0]);
        let frame = quantize_frame(&PoseFrame::new(vec![box_pose(1.3, 2.7, 40.1, 50.9)])).unwrap();
        let bytes = encode_motion_frame(&frame).unwrap();
        assert_eq!(bytes.len(), 1 + 84);
        assert_eq!(decode_motion_frame(&bytes).unwrap(), frame);
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let frame = PoseFrame::new(vec![box_pose(1.0, 2.0, 4.0, 8.0)]);
        let bytes = encode_motion_frame(&frame).unwrap();
        let err = decode_motion_frame(&bytes[..50]).unwrap_err();
        assert_eq!(err.offset(), Some(49));
    }

    #[test]
    fn rendering() {
        let m = meta(64, 64);
        assert!(render_motion_frame(&PoseFrame::default(), &m).is_black());
        let outside = PoseFrame::new(vec![box_pose(500.0, 500.0, 30.0, 30.0)]);
        assert!(render_motion_frame(&outside, &m).is_black());

        let mut pose = [[0f32; 2]; JOINT_COUNT];
        for (i, j) in pose.iter_mut().enumerate() {
            *j = [12.0 + (i % 7) as f32 * 6.0, 10.0 + (i / 7) as f32 * 15.0];
        }
        let img = render_motion_frame(&PoseFrame::new(vec![pose]), &m);
        assert!(img.count_nonblack() >= 20);
    }
}
