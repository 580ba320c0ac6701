//! Readers and writers for extractor outputs: label maps (PGM or PNG,
//! 8/16-bit gray), Middlebury `.flo` flow, JSON-lines joints and
//! shot-probability text files.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::flow::FlowField;
use crate::motion::{project_joints, Camera, Joints3D, Pose, PoseFrame, JOINT_COUNT};
use crate::seg::LabelMap;
use crate::segmenter::ShotProbSeries;
use crate::{Error, Result};

pub const FLO_MAGIC: f32 = 202021.25;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::from(e).in_file(path))
}

/// Loads a label map, choosing the decoder by magic bytes.
pub fn read_label_map(path: &Path) -> Result<LabelMap> {
    let bytes = read_file(path)?;
    let parsed = if bytes.starts_with(b"\x89PNG") {
        parse_png_gray(&bytes)
    } else {
        parse_pgm(&bytes)
    };
    parsed.map_err(|e| e.in_file(path))
}

fn parse_png_gray(bytes: &[u8]) -> Result<LabelMap> {
    let png_err = |e: png::DecodingError| Error::format(0, format!("png: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(0, "png image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::format(0, format!("expected a grayscale png, got {:?}", info.color_type)));
    }
    let labels = match info.bit_depth {
        png::BitDepth::Eight => buf[..info.buffer_size()].iter().map(|&v| u16::from(v)).collect(),
        png::BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
        d => return Err(Error::format(0, format!("unsupported png bit depth {d:?}"))),
    };
    LabelMap::new(info.width, info.height, labels)
}

/// Splits the PGM header into tokens, skipping `#` comments. Returns the
/// tokens and the offset just past the single whitespace after the last.
fn pgm_header(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::format(i, "truncated pgm header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

fn parse_pgm(bytes: &[u8]) -> Result<LabelMap> {
    let (tokens, data_at) = pgm_header(bytes, 4)?;
    let num = |i: usize| {
        tokens[i]
            .parse::<u32>()
            .map_err(|_| Error::format(0, format!("bad pgm header field {:?}", tokens[i])))
    };
    let (w, h, maxval) = (num(1)?, num(2)?, num(3)?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(0, format!("pgm maxval {maxval} out of range")));
    }
    let n = w as usize * h as usize;
    let labels: Vec<u16> = match tokens[0].as_str() {
        "P5" => {
            let wide = maxval > 255;
            let need = n * if wide { 2 } else { 1 };
            let data = bytes
                .get(data_at..data_at + need)
                .ok_or_else(|| Error::format(bytes.len(), "truncated pgm raster"))?;
            if wide {
                data.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]))
                    .collect()
            } else {
                data.iter().map(|&v| u16::from(v)).collect()
            }
        }
        "P2" => {
            let text = std::str::from_utf8(bytes.get(data_at..).unwrap_or_default())
                .map_err(|_| Error::format(data_at, "pgm text raster is not ASCII"))?;
            text.split_ascii_whitespace()
                .take(n)
                .map(|t| {
                    t.parse::<u16>()
                        .map_err(|_| Error::format(data_at, format!("bad pgm value {t:?}")))
                })
                .collect::<Result<_>>()?
        }
        m => return Err(Error::format(0, format!("unsupported pgm magic {m:?}"))),
    };
    LabelMap::new(w, h, labels)
}

/// Binary PGM with maxval 65535.
pub fn encode_pgm16(map: &LabelMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", map.width(), map.height()).into_bytes();
    for &v in map.labels() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

/// 16-bit grayscale PNG.
pub fn encode_png16(map: &LabelMap) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, map.width(), map.height());
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let err = |e: png::EncodingError| Error::invalid(format!("png encode: {e}"));
        let mut w = enc.write_header().map_err(err)?;
        let data: Vec<u8> = map.labels().iter().flat_map(|v| v.to_be_bytes()).collect();
        w.write_image_data(&data).map_err(err)?;
        w.finish().map_err(err)?;
    }
    Ok(out)
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    parse_flo(&read_file(path)?).map_err(|e| e.in_file(path))
}

/// Middlebury `.flo`: magic 202021.25, width, height (i32), then
/// interleaved `u, v` f32, all little-endian.
pub fn parse_flo(bytes: &[u8]) -> Result<FlowField> {
    let word = |i: usize| -> Result<[u8; 4]> {
        bytes
            .get(i..i + 4)
            .map(|s| [s[0], s[1], s[2], s[3]])
            .ok_or_else(|| Error::format(i, "truncated .flo"))
    };
    if f32::from_le_bytes(word(0)?) != FLO_MAGIC {
        return Err(Error::format(0, "bad .flo magic"));
    }
    let w = i32::from_le_bytes(word(4)?);
    let h = i32::from_le_bytes(word(8)?);
    if w <= 0 || h <= 0 {
        return Err(Error::format(4, format!("bad .flo dimensions {w}x{h}")));
    }
    let n = w as usize * h as usize;
    let data = bytes
        .get(12..12 + n * 8)
        .ok_or_else(|| Error::format(bytes.len(), "truncated .flo data"))?;
    let vectors = data
        .chunks_exact(8)
        .map(|c| {
            [
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            ]
        })
        .collect();
    FlowField::new(w as u32, h as u32, vectors)
}

pub fn encode_flo(field: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + field.vectors().len() * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(field.width() as i32).to_le_bytes());
    out.extend_from_slice(&(field.height() as i32).to_le_bytes());
    for &[u, v] in field.vectors() {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// One line of a joints file. Each person is 21 joints of either
/// `[x, y, z]` camera coordinates (needs `camera`) or `[x, y]` pixels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointsRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<Camera>,
    pub people: Vec<Vec<Vec<f64>>>,
}

impl JointsRecord {
    pub fn to_poses(&self) -> Result<Vec<Pose>> {
        let Some(first) = self.people.first() else {
            return Ok(Vec::new());
        };
        let dim = first.first().map_or(0, Vec::len);
        for (p, person) in self.people.iter().enumerate() {
            if person.len() != JOINT_COUNT {
                return Err(Error::invalid(format!(
                    "person {p} has {} joints, expected {JOINT_COUNT}",
                    person.len()
                )));
            }
            if let Some(j) = person.iter().position(|j| j.len() != dim || !(dim == 2 || dim == 3)) {
                return Err(Error::invalid(format!(
                    "person {p} joint {j}: joints must all be [x, y] or all [x, y, z]"
                )));
            }
        }
        if dim == 2 {
            return Ok(self
                .people
                .iter()
                .map(|person| {
                    let mut pose = [[0f32; 2]; JOINT_COUNT];
                    for (k, j) in person.iter().enumerate() {
                        pose[k] = [j[0] as f32, j[1] as f32];
                    }
                    pose
                })
                .collect());
        }
        let camera = self
            .camera
            .ok_or_else(|| Error::invalid("3D joints need camera intrinsics"))?;
        let people = self
            .people
            .iter()
            .map(|person| {
                let mut a = [[0f64; 3]; JOINT_COUNT];
                for (k, j) in person.iter().enumerate() {
                    a[k] = [j[0], j[1], j[2]];
                }
                a
            })
            .collect();
        project_joints(&Joints3D { camera, people })
    }
}

/// One pose frame per non-empty line.
pub fn parse_joints_jsonl(text: &str) -> Result<Vec<PoseFrame>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let rec: JointsRecord = serde_json::from_str(line)
                .map_err(|e| Error::input("joints", format!("line {}: {e}", i + 1)))?;
            rec.to_poses()
                .map(PoseFrame::new)
                .map_err(|e| Error::input("joints", format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn read_joints_jsonl(path: &Path) -> Result<Vec<PoseFrame>> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_joints_jsonl(&text).map_err(|e| e.in_file(path))
}

/// One probability per line, line `i` is frame `i` (1-based).
pub fn parse_shot_probs(text: &str) -> Result<ShotProbSeries> {
    let probs = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| Error::input("shot probabilities", format!("line {}: {:?}", i + 1, l.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    ShotProbSeries::new(probs)
}

pub fn read_shot_probs(path: &Path) -> Result<ShotProbSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_shot_probs(&text).map_err(|e| e.in_file(path))
}
