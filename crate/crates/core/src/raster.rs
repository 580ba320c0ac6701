//! RGB frame buffers, line and disc drawing, PNG/PPM output.

use std::io::Write;

use crate::{Error, Result};

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];
pub const WHITE: Rgb = [255, 255, 255];

/// Row-major 8-bit RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RgbImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("nonblack", &self.count_nonblack())
            .finish()
    }
}

impl RgbImage {
    pub fn black(width: u32, height: u32) -> Self {
        RgbImage {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    fn offset(&self, x: i64, y: i64) -> Option<usize> {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            return None;
        }
        Some((y as usize * self.width as usize + x as usize) * 3)
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let o = self
            .offset(i64::from(x), i64::from(y))
            .expect("pixel out of bounds");
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    /// Sets a pixel; coordinates outside the image are ignored.
    pub fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if let Some(o) = self.offset(x, y) {
            self.data[o..o + 3].copy_from_slice(&c);
        }
    }

    /// Bresenham line between two pixel centers, clipped per pixel.
    pub fn draw_line(&mut self, from: (i64, i64), to: (i64, i64), c: Rgb) {
        let (mut x, mut y) = from;
        let dx = (to.0 - x).abs();
        let dy = -(to.1 - y).abs();
        let sx = if x < to.0 { 1 } else { -1 };
        let sy = if y < to.1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.put(x, y, c);
            if (x, y) == to {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Filled disc: all pixels within `radius` of the center.
    pub fn fill_disc(&mut self, center: (i64, i64), radius: f64, c: Rgb) {
        let r = radius.ceil() as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                if ((dx * dx + dy * dy) as f64) <= radius * radius {
                    self.put(center.0 + dx, center.1 + dy, c);
                }
            }
        }
    }

    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32, Rgb)> + '_ {
        let w = self.width as usize;
        self.data.chunks_exact(3).enumerate().map(move |(i, p)| {
            ((i % w) as u32, (i / w) as u32, [p[0], p[1], p[2]])
        })
    }

    pub fn count_nonblack(&self) -> usize {
        self.data
            .chunks_exact(3)
            .filter(|p| p.iter().any(|&v| v != 0))
            .count()
    }

    pub fn is_black(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.data)?;
        Ok(())
    }

    pub fn write_png<W: Write>(&self, out: W) -> Result<()> {
        let mut enc = png::Encoder::new(out, self.width, self.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
        writer
            .write_image_data(&self.data)
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
        writer
            .finish()
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
        Ok(())
    }
}

/// HSV (hue in degrees, full saturation and value) to RGB.
pub fn hue_to_rgb(hue_deg: f64) -> Rgb {
    let h = hue_deg.rem_euclid(360.0) / 60.0;
    let sector = h.floor() as u32 % 6;
    let f = h - h.floor();
    let up = (255.0 * f).round() as u8;
    let down = (255.0 * (1.0 - f)).round() as u8;
    match sector {
        0 => [255, up, 0],
        1 => [down, 255, 0],
        2 => [0, 255, up],
        3 => [0, down, 255],
        4 => [up, 0, 255],
        _ => [255, 0, down],
    }
}
