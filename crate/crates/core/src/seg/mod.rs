//! Segmentation condition: label maps are reduced to the `N` longest
//! external contours per frame, each approximated by one order-`n` Bézier
//! curve.

mod bezier;
mod trace;

pub use bezier::{
    chord_length_params, fit_points, fit_points_with_params, BezierCurve, BezierFit, Point,
};
pub use trace::trace_external_contours;

use crate::bitstream::{quantize, ByteReader, ByteWriter};
use crate::model::{CompressionLevel, VideoMeta};
use crate::raster::{RgbImage, WHITE};
use crate::{Error, Result};

pub const DEFAULT_ORDER: u8 = 8;

/// Per-pixel segment ids, row-major; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<u16>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("label map must be non-empty"));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "label map has {} values, expected {width}x{height}",
                labels.len()
            )));
        }
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.labels[(y * self.width + x) as usize]
    }
}

/// Ordered boundary pixels of one connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub segment_id: u16,
    pub points: Vec<(u32, u32)>,
    pub closed: bool,
}

impl Contour {
    /// Points used for fitting: closed contours get their start appended so
    /// the curve begins and ends at the same pixel.
    pub fn fit_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self
            .points
            .iter()
            .map(|&(x, y)| Point::new(f64::from(x), f64::from(y)))
            .collect();
        if self.closed && pts.len() > 1 && pts.first() != pts.last() {
            pts.push(pts[0]);
        }
        pts
    }
}

/// Fits one curve to a contour. Closed contours are fit as a single curve
/// that starts and ends at the first point.
pub fn fit_bezier(contour: &Contour, order: usize) -> Result<BezierFit> {
    if contour.points.len() < 2 {
        return Err(Error::invalid(format!(
            "contour of segment {} has {} point(s), need at least 2",
            contour.segment_id,
            contour.points.len()
        )));
    }
    fit_points(&contour.fit_points(), order)
}

/// Coded segmentation for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SegFrameCode {
    /// Curve slots per frame (`N`); unused slots are zero-padded on the wire.
    pub n_contours: u16,
    pub order: u8,
    /// At most `n_contours` curves, each of exactly `order`.
    pub curves: Vec<BezierCurve>,
}

impl SegFrameCode {
    pub fn empty(n_contours: u16, order: u8) -> Self {
        SegFrameCode {
            n_contours,
            order,
            curves: Vec::new(),
        }
    }

    /// Wire size including the 2-byte curve count.
    pub fn wire_len(n_contours: u16, order: u8) -> usize {
        2 + Self::payload_len(n_contours, order)
    }

    /// Wire size of the curve numbers alone.
    pub fn payload_len(n_contours: u16, order: u8) -> usize {
        2 * usize::from(n_contours) * (usize::from(order) + 1) * 2
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::invalid("Bézier order must be at least 1"));
        }
        if self.curves.len() > usize::from(self.n_contours) {
            return Err(Error::invalid(format!(
                "{} curves exceed the {} slots",
                self.curves.len(),
                self.n_contours
            )));
        }
        if let Some(c) = self
            .curves
            .iter()
            .find(|c| c.order() != usize::from(self.order))
        {
            return Err(Error::invalid(format!(
                "curve of order {} in a frame of order {}",
                c.order(),
                self.order
            )));
        }
        Ok(())
    }
}

/// Encodes a frame with the level's curve budget.
pub fn encode_seg_frame(map: &LabelMap, level: &CompressionLevel, order: u8) -> Result<SegFrameCode> {
    let n = level.n_contours.ok_or_else(|| {
        Error::invalid(format!(
            "level {} carries no segmentation condition",
            level.level_id
        ))
    })?;
    encode_seg_frame_with(map, n, order)
}

/// Traces all contours, keeps the `n_contours` longest (by point count;
/// ties go to the smaller segment id, then discovery order), and fits each
/// with an order-`order` curve quantized to bfloat16.
pub fn encode_seg_frame_with(map: &LabelMap, n_contours: u16, order: u8) -> Result<SegFrameCode> {
    if n_contours == 0 {
        return Err(Error::invalid("curve budget N must be positive"));
    }
    if order == 0 {
        return Err(Error::invalid("Bézier order must be at least 1"));
    }
    let mut contours = trace_external_contours(map);
    // Stable sort keeps discovery order among equal keys.
    contours.sort_by(|a, b| {
        b.points
            .len()
            .cmp(&a.points.len())
            .then(a.segment_id.cmp(&b.segment_id))
    });
    contours.truncate(usize::from(n_contours));

    let n = usize::from(order);
    let curves = contours
        .iter()
        .map(|c| {
            let curve = if c.points.len() < 2 {
                let (x, y) = c.points[0];
                BezierCurve::constant(Point::new(f64::from(x), f64::from(y)), n)
            } else {
                fit_bezier(c, n)?.curve.elevate_to(n)?
            };
            quantize_curve(&curve)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SegFrameCode {
        n_contours,
        order,
        curves,
    })
}

fn quantize_curve(c: &BezierCurve) -> Result<BezierCurve> {
    let pts = c
        .control_points()
        .iter()
        .map(|p| {
            Ok(Point::new(
                f64::from(quantize(p.x as f32)?),
                f64::from(quantize(p.y as f32)?),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    BezierCurve::new(pts)
}

/// Number of uniform parameter samples used to draw a curve of `order`.
pub fn render_samples(order: usize) -> usize {
    64.max(4 * (order + 1))
}

/// Draws every curve as a white polyline on black.
pub fn render_seg_frame(code: &SegFrameCode, meta: &VideoMeta) -> RgbImage {
    let mut img = RgbImage::black(meta.width, meta.height);
    for curve in &code.curves {
        draw_curve(&mut img, curve);
    }
    img
}

fn draw_curve(img: &mut RgbImage, curve: &BezierCurve) {
    let samples = render_samples(curve.order());
    let pixel = |p: Point| (p.x.round() as i64, p.y.round() as i64);
    let mut prev = pixel(curve.eval(0.0));
    img.put(prev.0, prev.1, WHITE);
    for k in 1..samples {
        let cur = pixel(curve.eval(k as f64 / (samples - 1) as f64));
        img.draw_line(prev, cur, WHITE);
        prev = cur;
    }
}

pub(crate) fn write_seg_block(w: &mut ByteWriter, code: &SegFrameCode) -> Result<()> {
    code.validate()?;
    w.u16(code.curves.len() as u16);
    for curve in &code.curves {
        for p in curve.control_points() {
            w.bf16(p.x as f32)?;
            w.bf16(p.y as f32)?;
        }
    }
    let pad = usize::from(code.n_contours) - code.curves.len();
    w.bytes(&vec![0; pad * (usize::from(code.order) + 1) * 4]);
    Ok(())
}

pub(crate) fn read_seg_block(r: &mut ByteReader<'_>, n_contours: u16, order: u8) -> Result<SegFrameCode> {
    let at = r.position();
    let count = r.u16("seg curve count")?;
    if count > n_contours {
        return Err(Error::format(
            at,
            format!("{count} curves exceed the {n_contours} slots"),
        ));
    }
    let per_curve = usize::from(order) + 1;
    let mut curves = Vec::with_capacity(usize::from(count));
    for _ in 0..count {
        let mut pts = Vec::with_capacity(per_curve);
        for _ in 0..per_curve {
            let x = r.bf16("control point x")?;
            let y = r.bf16("control point y")?;
            pts.push(Point::new(f64::from(x), f64::from(y)));
        }
        curves.push(BezierCurve::new(pts).map_err(|e| Error::format(at, e.to_string()))?);
    }
    let pad_at = r.position();
    let pad = r.take(
        usize::from(n_contours - count) * per_curve * 4,
        "seg padding",
    )?;
    if let Some(i) = pad.iter().position(|&b| b != 0) {
        return Err(Error::format(pad_at + i, "nonzero seg padding"));
    }
    Ok(SegFrameCode {
        n_contours,
        order,
        curves,
    })
}

/// Standalone wire form of one frame: curve count then padded curves.
pub fn encode_seg_block(code: &SegFrameCode) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new();
    write_seg_block(&mut w, code)?;
    Ok(w.into_inner())
}

pub fn decode_seg_block(bytes: &[u8], n_contours: u16, order: u8) -> Result<SegFrameCode> {
    if order == 0 {
        return Err(Error::invalid("Bézier order must be at least 1"));
    }
    let mut r = ByteReader::new(bytes);
    let code = read_seg_block(&mut r, n_contours, order)?;
    r.expect_end()?;
    Ok(code)
}
