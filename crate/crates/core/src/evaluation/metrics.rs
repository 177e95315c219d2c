use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config_err, Error, Result};
use crate::tensor::{ComplexImage, RealImage};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

/// `||x_hat - x||^2 / ||x||^2` over complex samples.
pub fn nmse(x_hat: &ComplexImage, x_ref: &ComplexImage) -> Result<f64> {
    let denom = x_ref.norm_sqr();
    if !(denom > 0.0) {
        return Err(Error::DegenerateReference);
    }
    Ok(x_hat.sub(x_ref)?.norm_sqr() / denom)
}

/// Normalized 1-D Gaussian taps of length `len` centered on `(len - 1) / 2`.
pub fn gaussian_window(len: usize, sigma: f64) -> Vec<f64> {
    let c = (len as f64 - 1.0) / 2.0;
    let taps: Vec<f64> =
        (0..len).map(|i| libm::exp(-((i as f64 - c) * (i as f64 - c)) / (2.0 * sigma * sigma))).collect();
    let s: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / s).collect()
}

/// Separable valid-mode filtering: output is `(h - wy + 1) x (w - wx + 1)`.
fn filter_valid(data: &[f64], h: usize, w: usize, wy: &[f64], wx: &[f64]) -> Vec<f64> {
    let ow = w - wx.len() + 1;
    let oh = h - wy.len() + 1;
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        let src = &data[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = wx.iter().zip(&src[x..]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for (t, k) in wy.iter().enumerate() {
            let src = &rows[(y + t) * ow..(y + t + 1) * ow];
            for (o, v) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *o += k * v;
            }
        }
    }
    out
}

/// Mean SSIM over every position of an 11x11 Gaussian window (sigma 1.5)
/// that fits inside the image, with `C1 = (0.01 L)^2`, `C2 = (0.03 L)^2`.
/// Images smaller than the window shrink it to the image extent and
/// renormalize the weights.
pub fn ssim(a: &RealImage, b: &RealImage, data_range: f64) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(crate::error::shape_err!("{:?} vs {:?}", a.shape(), b.shape()));
    }
    if !(data_range > 0.0) || !data_range.is_finite() {
        return Err(config_err!("data_range must be positive, got {data_range}"));
    }
    let (h, w) = a.shape();
    if h == 0 || w == 0 {
        return Err(crate::error::shape_err!("empty image"));
    }
    let wy = gaussian_window(SSIM_WINDOW.min(h), SSIM_SIGMA);
    let wx = gaussian_window(SSIM_WINDOW.min(w), SSIM_SIGMA);
    let c1 = (0.01 * data_range) * (0.01 * data_range);
    let c2 = (0.03 * data_range) * (0.03 * data_range);
    let (pa, pb) = (a.data(), b.data());
    let aa: Vec<f64> = pa.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = pb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(pa, h, w, &wy, &wx);
    let mu_b = filter_valid(pb, h, w, &wy, &wx);
    let e_aa = filter_valid(&aa, h, w, &wy, &wx);
    let e_bb = filter_valid(&bb, h, w, &wy, &wx);
    let e_ab = filter_valid(&ab, h, w, &wy, &wx);
    let values: Vec<f64> = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .collect();
    Ok(crate::tensor::pairwise_sum(&values) / values.len() as f64)
}
