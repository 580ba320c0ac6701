//! Optical-flow condition: the dense field is sampled on a stride-`l` grid
//! and the decoder draws one arrow per sample instead of interpolating a
//! dense field back.

use crate::bitstream::{quantize, ByteReader, ByteWriter};
use crate::model::VideoMeta;
use crate::raster::{hue_to_rgb, RgbImage, WHITE};
use crate::{Error, Result};

/// Arrow length in pixels per pixel of flow.
pub const ARROW_GAIN: f64 = 1.0;
/// Angle between each head stroke and the shaft.
pub const ARROW_HEAD_ANGLE_DEG: f64 = 30.0;

/// Dense per-pixel flow `(u, v)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: u32,
    height: u32,
    vectors: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn new(width: u32, height: u32, vectors: Vec<[f32; 2]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("flow field must be non-empty"));
        }
        if vectors.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "flow field has {} vectors, expected {width}x{height}",
                vectors.len()
            )));
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("flow field contains non-finite values"));
        }
        Ok(FlowField {
            width,
            height,
            vectors,
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [f32; 2]) -> Result<Self> {
        let vectors = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, vectors)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn vectors(&self) -> &[[f32; 2]] {
        &self.vectors
    }

    pub fn at(&self, x: u32, y: u32) -> [f32; 2] {
        self.vectors[(y * self.width + x) as usize]
    }
}

/// Flow sampled at `(row, col) = (min(i·l, H−1), min(j·l, W−1))` for
/// `i = 1..=⌊H/l⌋`, `j = 1..=⌊W/l⌋`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGrid {
    pub stride: u16,
    pub rows: u32,
    pub cols: u32,
    pub vectors: Vec<[f32; 2]>,
}

impl FlowGrid {
    /// Grid dimensions for an `H×W` frame.
    pub fn dims(width: u32, height: u32, stride: u16) -> (u32, u32) {
        let l = u32::from(stride.max(1));
        (height / l, width / l)
    }

    /// Pixel position `(x, y)` of sample `(i, j)`, both zero-based.
    pub fn anchor(&self, i: u32, j: u32, width: u32, height: u32) -> (u32, u32) {
        let l = u32::from(self.stride);
        (((j + 1) * l).min(width - 1), ((i + 1) * l).min(height - 1))
    }

    pub fn wire_len(&self) -> usize {
        self.vectors.len() * 4
    }
}

pub fn sample_flow_grid(field: &FlowField, stride: u16) -> Result<FlowGrid> {
    let l = u32::from(stride);
    if l == 0 || l > field.width.min(field.height) {
        return Err(Error::invalid(format!(
            "flow stride must be in 1..={}, got {stride}",
            field.width.min(field.height)
        )));
    }
    let (rows, cols) = FlowGrid::dims(field.width, field.height, stride);
    let mut grid = FlowGrid {
        stride,
        rows,
        cols,
        vectors: Vec::with_capacity((rows * cols) as usize),
    };
    for i in 0..rows {
        for j in 0..cols {
            let (x, y) = grid.anchor(i, j, field.width, field.height);
            grid.vectors.push(field.at(x, y));
        }
    }
    Ok(grid)
}

pub fn quantize_grid(grid: &FlowGrid) -> Result<FlowGrid> {
    let mut out = grid.clone();
    for v in &mut out.vectors {
        *v = [quantize(v[0])?, quantize(v[1])?];
    }
    Ok(out)
}

pub(crate) fn write_flow_block(w: &mut ByteWriter, grid: &FlowGrid) -> Result<()> {
    if grid.vectors.len() != (grid.rows * grid.cols) as usize {
        return Err(Error::invalid(format!(
            "flow grid has {} vectors, expected {}x{}",
            grid.vectors.len(),
            grid.rows,
            grid.cols
        )));
    }
    for &[u, v] in &grid.vectors {
        w.bf16(u)?;
        w.bf16(v)?;
    }
    Ok(())
}

pub(crate) fn read_flow_block(
    r: &mut ByteReader<'_>,
    width: u32,
    height: u32,
    stride: u16,
) -> Result<FlowGrid> {
    let (rows, cols) = FlowGrid::dims(width, height, stride);
    let n = (rows * cols) as usize;
    let mut vectors = Vec::with_capacity(n.min(r.remaining() / 4));
    for _ in 0..n {
        vectors.push([r.bf16("flow u")?, r.bf16("flow v")?]);
    }
    Ok(FlowGrid {
        stride,
        rows,
        cols,
        vectors,
    })
}

/// `2·rows·cols` bfloat16 values, `u` then `v` per sample, row-major.
pub fn encode_flow_grid(grid: &FlowGrid) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new();
    write_flow_block(&mut w, grid)?;
    Ok(w.into_inner())
}

pub fn decode_flow_grid(bytes: &[u8], meta: &VideoMeta, stride: u16) -> Result<FlowGrid> {
    if stride == 0 {
        return Err(Error::invalid("flow stride must be at least 1"));
    }
    let (rows, cols) = FlowGrid::dims(meta.width, meta.height, stride);
    let expected = (rows * cols) as usize * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            bytes.len().min(expected),
            format!("flow payload is {} bytes, expected {expected}", bytes.len()),
        ));
    }
    read_flow_block(&mut ByteReader::new(bytes), meta.width, meta.height, stride)
}

/// Direction color: hue is `atan2(v, u)` in degrees on the standard wheel
/// (0° = rightward = red).
pub fn flow_color(u: f64, v: f64) -> [u8; 3] {
    hue_to_rgb(v.atan2(u).to_degrees())
}

/// Arrow per sample: shaft of length `min(‖(u,v)‖·gain, l−2)` from the
/// sample position, two 30° head strokes of length `max(3, shaft/4)`.
/// Zero-length samples draw a single white dot.
pub fn render_flow_arrows(grid: &FlowGrid, meta: &VideoMeta) -> RgbImage {
    let mut img = RgbImage::black(meta.width, meta.height);
    let max_shaft = (f64::from(grid.stride) - 2.0).max(0.0);
    let px = |x: f64, y: f64| (x.round() as i64, y.round() as i64);
    for i in 0..grid.rows {
        for j in 0..grid.cols {
            let [u, v] = grid.vectors[(i * grid.cols + j) as usize];
            let (u, v) = (f64::from(u), f64::from(v));
            let (ax, ay) = grid.anchor(i, j, meta.width, meta.height);
            let (ax, ay) = (f64::from(ax), f64::from(ay));
            let mag = u.hypot(v);
            let shaft = (mag * ARROW_GAIN).min(max_shaft);
            if mag == 0.0 || shaft.round() == 0.0 {
                img.put(ax as i64, ay as i64, if mag == 0.0 { WHITE } else { flow_color(u, v) });
                continue;
            }
            let color = flow_color(u, v);
            let (dx, dy) = (u / mag, v / mag);
            let tip = (ax + dx * shaft, ay + dy * shaft);
            img.draw_line(px(ax, ay), px(tip.0, tip.1), color);
            let head = (shaft / 4.0).max(3.0);
            let back = v.atan2(u) + std::f64::consts::PI;
            for side in [-1.0, 1.0] {
                let a = back + side * ARROW_HEAD_ANGLE_DEG.to_radians();
                let end = (tip.0 + head * a.cos(), tip.1 + head * a.sin());
                img.draw_line(px(tip.0, tip.1), px(end.0, end.1), color);
            }
        }
    }
    img
}
