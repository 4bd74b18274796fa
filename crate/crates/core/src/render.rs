//! Deterministic PNG heatmaps of wavelet power.
//!
//! Layout: one pixel column block per time index (left to right), one row
//! block per scale with the smallest scale at the top. Because the scale
//! grid is log-uniform, the vertical axis is linear in log2(scale). Colour
//! comes from a piecewise-linear gradient applied to log10 power, normalised
//! per image. Cells on the edge of a significant region are painted black;
//! cells outside the cone of influence are paled toward white.

use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::significance::SignificanceResult;
use crate::wavelet::PowerSpectrum;
use crate::{Error, Matrix, Result};

/// Colour stops of the default gradient, cold to hot: navy, blue, teal,
/// yellow, red. Positions are in normalised log-power units.
pub const DEFAULT_STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [16, 24, 112]),
    (0.25, [32, 112, 224]),
    (0.5, [64, 192, 160]),
    (0.75, [248, 208, 56]),
    (1.0, [200, 16, 16]),
];

/// Outside the cone of influence, colours keep this fraction of their
/// distance from white.
pub const COI_SATURATION: f64 = 0.4;

/// Orders of magnitude of power shown below the image maximum.
pub const DEFAULT_DECADES: f64 = 6.0;

const BOUNDARY: [u8; 3] = [0, 0, 0];

/// Piecewise-linear colour map over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub stops: Vec<(f64, [u8; 3])>,
}

impl Default for Gradient {
    fn default() -> Self {
        Self {
            stops: DEFAULT_STOPS.to_vec(),
        }
    }
}

impl Gradient {
    pub fn new(stops: Vec<(f64, [u8; 3])>) -> Result<Self> {
        let ordered = stops.windows(2).all(|w| w[0].0 < w[1].0);
        if stops.len() < 2 || !ordered || stops[0].0 != 0.0 || stops[stops.len() - 1].0 != 1.0 {
            return Err(Error::Render(
                "gradient needs at least two stops, strictly increasing from 0 to 1".into(),
            ));
        }
        Ok(Self { stops })
    }

    pub fn coldest(&self) -> [u8; 3] {
        self.stops[0].1
    }

    pub fn hottest(&self) -> [u8; 3] {
        self.stops[self.stops.len() - 1].1
    }

    /// Colour at `v`, clamped to [0, 1].
    pub fn color(&self, v: f64) -> [u8; 3] {
        let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        let k = self
            .stops
            .windows(2)
            .position(|w| v <= w[1].0)
            .unwrap_or(self.stops.len() - 2);
        let (a, ca) = self.stops[k];
        let (b, cb) = self.stops[k + 1];
        let f = (v - a) / (b - a);
        let mut out = [0u8; 3];
        for i in 0..3 {
            let x = ca[i] as f64 + f * (cb[i] as f64 - ca[i] as f64);
            out[i] = x.round() as u8;
        }
        out
    }
}

/// Pales a colour toward white, keeping `COI_SATURATION` of it.
pub fn pale(c: [u8; 3]) -> [u8; 3] {
    c.map(|x| (255.0 - COI_SATURATION * (255.0 - x as f64)).round() as u8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Pixels per time index.
    pub cell_width: u32,
    /// Pixels per scale.
    pub cell_height: u32,
    pub gradient: Gradient,
    /// Dynamic range shown, in decades below the maximum power.
    pub decades: f64,
    pub draw_contour: bool,
    pub shade_coi: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            cell_width: 1,
            cell_height: 4,
            gradient: Gradient::default(),
            decades: DEFAULT_DECADES,
            draw_contour: true,
            shade_coi: true,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        if self.cell_width == 0 || self.cell_height == 0 {
            return Err(Error::Render("cell size must be at least one pixel".into()));
        }
        if !(self.decades.is_finite() && self.decades > 0.0) {
            return Err(Error::Render(format!(
                "dynamic range must be positive, got {}",
                self.decades
            )));
        }
        Ok(())
    }
}

/// Normalised log power per cell in [0, 1]. All-zero power maps to 0.
pub fn normalized_log_power(power: &Matrix<f64>, decades: f64) -> Matrix<f64> {
    let max = power.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return power.map(|_| 0.0);
    }
    let min_pos = power
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let hi = max.log10();
    let lo = min_pos.log10().max(hi - decades);
    if hi <= lo {
        return power.map(|&p| if p > 0.0 { 1.0 } else { 0.0 });
    }
    power.map(|&p| {
        if p <= 0.0 {
            0.0
        } else {
            ((p.log10() - lo) / (hi - lo)).clamp(0.0, 1.0)
        }
    })
}

/// Significant cells with at least one 4-neighbour that is not significant
/// or lies off the grid.
pub fn boundary_cells(mask: &Matrix<bool>) -> Matrix<bool> {
    let (rows, cols) = (mask.rows(), mask.cols());
    let sig = |t: isize, j: isize| {
        t >= 0
            && j >= 0
            && (t as usize) < rows
            && (j as usize) < cols
            && mask[(t as usize, j as usize)]
    };
    let data = mask
        .indexed()
        .map(|((t, j), &m)| {
            let (t, j) = (t as isize, j as isize);
            m && !(sig(t - 1, j) && sig(t + 1, j) && sig(t, j - 1) && sig(t, j + 1))
        })
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// Per-cell colours before pixel expansion, indexed (time, scale).
pub fn cell_colors(
    spectrum: &PowerSpectrum,
    result: &SignificanceResult,
    options: &RenderOptions,
) -> Result<Matrix<[u8; 3]>> {
    options.validate()?;
    let (rows, cols) = (spectrum.n_times(), spectrum.n_scales());
    if result.mask.rows() != rows || result.mask.cols() != cols {
        return Err(Error::Render(format!(
            "dimension mismatch: spectrum {}x{}, mask {}x{}",
            rows,
            cols,
            result.mask.rows(),
            result.mask.cols()
        )));
    }
    let level = normalized_log_power(spectrum.power(), options.decades);
    let edge = boundary_cells(&result.mask);
    let data = level
        .indexed()
        .map(|((t, j), &v)| {
            let base = if options.draw_contour && edge[(t, j)] {
                BOUNDARY
            } else {
                options.gradient.color(v)
            };
            if options.shade_coi && !spectrum.is_reliable(t, j) {
                pale(base)
            } else {
                base
            }
        })
        .collect();
    Ok(Matrix::from_vec(rows, cols, data))
}

/// Pixel rectangle (x0, y0, width, height) covered by cell (t, j).
pub fn cell_rect(t: usize, j: usize, options: &RenderOptions) -> (u32, u32, u32, u32) {
    (
        t as u32 * options.cell_width,
        j as u32 * options.cell_height,
        options.cell_width,
        options.cell_height,
    )
}

/// Raster image of the spectrum.
pub fn render_image(
    spectrum: &PowerSpectrum,
    result: &SignificanceResult,
    options: &RenderOptions,
) -> Result<RgbImage> {
    let colors = cell_colors(spectrum, result, options)?;
    let width = colors.rows() as u32 * options.cell_width;
    let height = colors.cols() as u32 * options.cell_height;
    Ok(RgbImage::from_fn(width, height, |x, y| {
        let t = (x / options.cell_width) as usize;
        let j = (y / options.cell_height) as usize;
        Rgb(colors[(t, j)])
    }))
}

/// PNG bytes of [`render_image`]. Identical input yields identical bytes.
pub fn render_heatmap(
    spectrum: &PowerSpectrum,
    result: &SignificanceResult,
    options: &RenderOptions,
) -> Result<Vec<u8>> {
    encode_png(&render_image(spectrum, result, options)?)
}

pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    image.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn decode_png(bytes: &[u8]) -> Result<RgbImage> {
    Ok(image::load_from_memory_with_format(bytes, ImageFormat::Png)?.to_rgb8())
}

/// Pixels not reachable from the image border through 4-connected
/// non-black pixels, i.e. black pixels and everything they enclose.
pub fn enclosed_pixels(image: &RgbImage) -> Vec<bool> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let black = |x: usize, y: usize| image.get_pixel(x as u32, y as u32).0 == BOUNDARY;
    let mut reached = vec![false; w * h];
    let mut stack = Vec::new();
    for x in 0..w {
        stack.push((x, 0));
        stack.push((x, h - 1));
    }
    for y in 0..h {
        stack.push((0, y));
        stack.push((w - 1, y));
    }
    while let Some((x, y)) = stack.pop() {
        let i = y * w + x;
        if reached[i] || black(x, y) {
            continue;
        }
        reached[i] = true;
        if x > 0 {
            stack.push((x - 1, y));
        }
        if x + 1 < w {
            stack.push((x + 1, y));
        }
        if y > 0 {
            stack.push((x, y - 1));
        }
        if y + 1 < h {
            stack.push((x, y + 1));
        }
    }
    reached.iter().map(|r| !r).collect()
}
