use alloc::vec::Vec;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::{CoilSensitivities, SamplingMask};
use crate::error::{config_err, shape_err, Result};
use crate::fft::Fft2Plan;
use crate::rng::{self, Stream};
use crate::tensor::ComplexImage;

/// Masked multi-coil k-space data. Entries off the mask are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceMeasurement {
    coils: Vec<ComplexImage>,
    mask: SamplingMask,
}

impl KSpaceMeasurement {
    /// Zeroes every entry outside the mask.
    pub fn new(mut coils: Vec<ComplexImage>, mask: SamplingMask) -> Result<Self> {
        for c in &mut coils {
            if c.shape() != mask.shape() {
                return Err(shape_err!("coil k-space {:?} vs mask {:?}", c.shape(), mask.shape()));
            }
            for (v, &k) in c.data_mut().iter_mut().zip(mask.kept()) {
                if !k {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(Self { coils, mask })
    }

    pub fn n_coils(&self) -> usize {
        self.coils.len()
    }

    pub fn coils(&self) -> &[ComplexImage] {
        &self.coils
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.coils.len() != other.coils.len() {
            return Err(shape_err!("{} vs {} coils", self.coils.len(), other.coils.len()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.coils.iter().zip(&other.coils) {
            acc += a.inner(b)?;
        }
        Ok(acc)
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.coils.iter().map(|c| c.norm_sqr()).sum())
    }
}

/// The encoding operator `A` (mask, coils, FFT) and the measurement noise level.
#[derive(Debug, Clone)]
pub struct AcquisitionSystem {
    mask: SamplingMask,
    coils: CoilSensitivities,
    noise_sigma: f64,
    plan: Fft2Plan,
}

impl AcquisitionSystem {
    pub fn new(mask: SamplingMask, coils: CoilSensitivities, noise_sigma: f64) -> Result<Self> {
        if mask.shape() != coils.shape() {
            return Err(shape_err!("mask {:?} vs coils {:?}", mask.shape(), coils.shape()));
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(config_err!("noise_sigma must be finite and >= 0, got {noise_sigma}"));
        }
        let (h, w) = mask.shape();
        let plan = Fft2Plan::new(h, w)?;
        Ok(Self { mask, coils, noise_sigma, plan })
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn coils(&self) -> &CoilSensitivities {
        &self.coils
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }

    /// Same operator with a different noise level.
    pub fn with_noise_sigma(&self, noise_sigma: f64) -> Result<Self> {
        Self::new(self.mask.clone(), self.coils.clone(), noise_sigma)
    }

    fn check_image(&self, x: &ComplexImage) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(shape_err!("image {:?} vs acquisition {:?}", x.shape(), self.shape()));
        }
        Ok(())
    }

    fn apply_mask(&self, k: &mut ComplexImage) {
        for (v, &kept) in k.data_mut().iter_mut().zip(self.mask.kept()) {
            if !kept {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `y_i = P F (S_i x) + n_i`, with complex Gaussian noise of standard
    /// deviation `noise_sigma` (variance split evenly between real and
    /// imaginary parts) drawn from a stream keyed by `seed`.
    pub fn forward(&self, x: &ComplexImage, seed: u64) -> Result<KSpaceMeasurement> {
        self.check_image(x)?;
        let mut rng = rng::stream(seed, Stream::Noise, &[]);
        let component_std = self.noise_sigma / core::f64::consts::SQRT_2;
        let mut coils = Vec::with_capacity(self.coils.n_coils());
        for s in self.coils.maps() {
            let mut k = x.mul(s)?;
            self.plan.fft2_in_place(&mut k)?;
            self.apply_mask(&mut k);
            if self.noise_sigma > 0.0 {
                for (v, &kept) in k.data_mut().iter_mut().zip(self.mask.kept()) {
                    if kept {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        *v += Complex64::new(re, im) * component_std;
                    }
                }
            }
            coils.push(k);
        }
        Ok(KSpaceMeasurement { coils, mask: self.mask.clone() })
    }

    /// Noiseless forward operator `A x`.
    pub fn forward_noiseless(&self, x: &ComplexImage) -> Result<KSpaceMeasurement> {
        self.check_image(x)?;
        let mut coils = Vec::with_capacity(self.coils.n_coils());
        for s in self.coils.maps() {
            let mut k = x.mul(s)?;
            self.plan.fft2_in_place(&mut k)?;
            self.apply_mask(&mut k);
            coils.push(k);
        }
        Ok(KSpaceMeasurement { coils, mask: self.mask.clone() })
    }

    /// `A^H y = sum_i conj(S_i) F^-1 (P y_i)`.
    pub fn adjoint(&self, y: &KSpaceMeasurement) -> Result<ComplexImage> {
        if y.n_coils() != self.coils.n_coils() {
            return Err(shape_err!("{} measured coils vs {} in the system", y.n_coils(), self.coils.n_coils()));
        }
        let (h, w) = self.shape();
        let mut out = ComplexImage::zeros(h, w);
        for (k, s) in y.coils.iter().zip(self.coils.maps()) {
            self.check_image(k)?;
            let mut tmp = k.clone();
            self.apply_mask(&mut tmp);
            self.plan.ifft2_in_place(&mut tmp)?;
            for ((o, t), sv) in out.data_mut().iter_mut().zip(tmp.data()).zip(s.data()) {
                *o += sv.conj() * t;
            }
        }
        Ok(out)
    }

    /// Zero-filled image `A^H y` of noisy data simulated from `x`.
    pub fn zero_filled(&self, x: &ComplexImage, seed: u64) -> Result<ComplexImage> {
        self.adjoint(&self.forward(x, seed)?)
    }

    /// Normal operator `A^H A x` (noiseless), fused without materializing `y`.
    pub fn normal(&self, x: &ComplexImage) -> Result<ComplexImage> {
        self.check_image(x)?;
        let (h, w) = self.shape();
        let mut out = ComplexImage::zeros(h, w);
        let mut tmp = ComplexImage::zeros(h, w);
        for s in self.coils.maps() {
            for ((t, xv), sv) in tmp.data_mut().iter_mut().zip(x.data()).zip(s.data()) {
                *t = xv * sv;
            }
            self.plan.fft2_in_place(&mut tmp)?;
            self.apply_mask(&mut tmp);
            self.plan.ifft2_in_place(&mut tmp)?;
            for ((o, t), sv) in out.data_mut().iter_mut().zip(tmp.data()).zip(s.data()) {
                *o += sv.conj() * t;
            }
        }
        Ok(out)
    }
}
