//! Image and feature-map containers plus the reductions built on them.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{shape_err, Result};

/// Complex image stored row-major; each sample is an interleaved `(re, im)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self { height, width, data: vec![Complex64::new(0.0, 0.0); height * width] }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(shape_err!("{} samples for a {height}x{width} image", data.len()));
        }
        Ok(Self { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: Complex64) {
        self.data[y * self.width + x] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(shape_err!("{}x{} vs {}x{}", self.height, self.width, other.height, other.width));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { height: self.height, width: self.width, data: self.data.iter().map(|&c| f(c)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { height: self.height, width: self.width, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Elementwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c * s)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
        Ok(())
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Sum of complex magnitudes.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).sum()
    }

    /// Largest absolute value over the real and imaginary planes.
    pub fn linf_norm_planes(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.re.abs()).max(c.im.abs()))
    }

    /// `<a, b> = sum conj(a_i) * b_i`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// Real inner product of the two-plane views; equals `Re <a, b>`.
    pub fn real_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.re * b.re + a.im * b.im).sum())
    }

    pub fn magnitude(&self) -> RealImage {
        RealImage { height: self.height, width: self.width, data: self.data.iter().map(|c| c.norm()).collect() }
    }

    /// Two-channel real view: channel 0 holds real parts, channel 1 imaginary parts.
    pub fn to_planes(&self) -> RealTensor {
        let n = self.data.len();
        let mut data = vec![0.0; 2 * n];
        let (re, im) = data.split_at_mut(n);
        for (i, c) in self.data.iter().enumerate() {
            re[i] = c.re;
            im[i] = c.im;
        }
        RealTensor { channels: 2, height: self.height, width: self.width, data }
    }

    pub fn from_planes(t: &RealTensor) -> Result<Self> {
        if t.channels != 2 {
            return Err(shape_err!("expected 2 planes, got {}", t.channels));
        }
        let n = t.height * t.width;
        let (re, im) = t.data.split_at(n);
        let data = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Ok(Self { height: t.height, width: t.width, data })
    }
}

/// Real image, e.g. a magnitude image fed to SSIM or PGM export.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RealImage {
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(shape_err!("{} samples for a {height}x{width} image", data.len()));
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self { height, width, data: vec![value; height * width] }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Real feature map of shape channels x height x width.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor {
    pub(crate) channels: usize,
    pub(crate) height: usize,
    pub(crate) width: usize,
    pub(crate) data: Vec<f64>,
}

impl RealTensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self { channels, height, width, data: vec![0.0; channels * height * width] }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(shape_err!("{} values for a {channels}x{height}x{width} tensor", data.len()));
        }
        Ok(Self { channels, height, width, data })
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }
}

/// Pairwise (cascade) summation in fixed index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn random(n: usize, seed: u64) -> ComplexImage {
        let mut rng = crate::rng::Rng::seed_from_u64(seed);
        ComplexImage::from_fn(1, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn single_entry_norms() {
        let x = ComplexImage::from_vec(1, 1, alloc::vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert_eq!(x.l2_norm(), 5.0);
        assert_eq!(x.l1_norm(), 5.0);
        assert_eq!(ComplexImage::zeros(3, 3).l1_norm(), 0.0);
    }

    #[test]
    fn inner_product_matches_naive_sum() {
        let a = random(100, 1);
        let b = random(100, 2);
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..100 {
            let (p, q) = (a.data()[i], b.data()[i]);
            // conj(p) * q
            re += p.re * q.re + p.im * q.im;
            im += p.re * q.im - p.im * q.re;
        }
        let got = a.inner(&b).unwrap();
        assert!((got.re - re).abs() < 1e-12 && (got.im - im).abs() < 1e-12);
        assert!((a.real_inner(&b).unwrap() - re).abs() < 1e-12);
    }

    #[test]
    fn plane_view_round_trips() {
        let a = random(12, 3);
        let planes = a.to_planes();
        assert_eq!(planes.shape(), (2, 1, 12));
        assert_eq!(ComplexImage::from_planes(&planes).unwrap(), a);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        assert!(ComplexImage::zeros(2, 3).add(&ComplexImage::zeros(3, 2)).is_err());
        assert!(ComplexImage::from_vec(2, 2, alloc::vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
