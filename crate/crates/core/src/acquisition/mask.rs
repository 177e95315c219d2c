use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{config_err, shape_err, Result};
use crate::rng::{self, Stream};

/// Binary k-space sampling pattern in natural (unshifted) FFT order, so the
/// low-frequency "center" sits at index 0 and wraps around to the far edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    height: usize,
    width: usize,
    kept: Vec<bool>,
}

impl SamplingMask {
    pub fn new(height: usize, width: usize, kept: Vec<bool>) -> Result<Self> {
        if kept.len() != height * width {
            return Err(shape_err!("{} mask entries for {height}x{width}", kept.len()));
        }
        if !kept.iter().any(|&k| k) {
            return Err(config_err!("sampling mask keeps no k-space location"));
        }
        Ok(Self { height, width, kept })
    }

    pub fn full(height: usize, width: usize) -> Self {
        Self { height, width, kept: vec![true; height * width] }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    #[inline]
    pub fn is_kept(&self, y: usize, x: usize) -> bool {
        self.kept[y * self.width + x]
    }

    pub fn kept_fraction(&self) -> f64 {
        self.kept.iter().filter(|&&k| k).count() as f64 / self.kept.len() as f64
    }

    /// Column-wise view; every row of a Cartesian column mask is identical.
    pub fn kept_columns(&self) -> Vec<bool> {
        (0..self.width).map(|x| (0..self.height).any(|y| self.is_kept(y, x))).collect()
    }
}

/// Columns ordered by increasing |frequency| in natural FFT order.
fn columns_by_frequency(width: usize) -> Vec<usize> {
    let mut cols: Vec<usize> = (0..width).collect();
    cols.sort_by_key(|&c| {
        let f = if c <= width / 2 { c } else { width - c };
        // ties: positive frequency first
        (f, c > width / 2)
    });
    cols
}

/// Random Cartesian column mask with a fully sampled low-frequency band.
///
/// The band holds `ceil(center_fraction * width)` columns; every other column is
/// kept with the probability that makes the expected kept fraction `1/R`.
pub fn make_mask(
    height: usize,
    width: usize,
    acceleration: f64,
    center_fraction: f64,
    seed: u64,
) -> Result<SamplingMask> {
    if height == 0 || width == 0 {
        return Err(shape_err!("mask needs non-empty dimensions"));
    }
    if !(acceleration >= 1.0) {
        return Err(config_err!("acceleration must be >= 1, got {acceleration}"));
    }
    if !(0.0..1.0).contains(&center_fraction) {
        return Err(config_err!("center_fraction must lie in [0, 1), got {center_fraction}"));
    }
    if acceleration == 1.0 {
        return Ok(SamplingMask::full(height, width));
    }
    // tolerance keeps e.g. (1 - 1/w) * w from rounding up past w - 1
    let n_center = libm::ceil(center_fraction * width as f64 - 1e-9).max(0.0) as usize;
    let n_center = n_center.min(width);
    let order = columns_by_frequency(width);
    let mut cols = vec![false; width];
    for &c in &order[..n_center] {
        cols[c] = true;
    }
    let remaining = width - n_center;
    let target = width as f64 / acceleration;
    let p = if remaining == 0 { 0.0 } else { ((target - n_center as f64) / remaining as f64).clamp(0.0, 1.0) };
    if p == 0.0 {
        log::warn!("acceleration {acceleration} leaves only the {n_center}-column center band");
    }
    let mut rng = rng::stream(seed, Stream::Mask, &[]);
    for &c in &order[n_center..] {
        // draw for every column so the stream layout is independent of p
        let u: f64 = rng.random();
        if u < p {
            cols[c] = true;
        }
    }
    if !cols.iter().any(|&k| k) {
        cols[0] = true;
    }
    let kept = (0..height).flat_map(|_| cols.iter().copied()).collect();
    SamplingMask::new(height, width, kept)
}
