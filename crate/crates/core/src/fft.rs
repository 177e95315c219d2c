//! Unitary two-dimensional DFT.
//!
//! Power-of-two lengths use an iterative radix-2 transform; every other length
//! goes through Bluestein's chirp-z reduction onto a power-of-two convolution.
//! Both directions are scaled by `1/sqrt(n)` per axis, so `fft2` is unitary and
//! `ifft2` is simultaneously its inverse and its adjoint.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{shape_err, Result};
use crate::tensor::ComplexImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    /// exp(-2 pi i k / n) for k < n/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2).map(|k| expi(-2.0 * PI * k as f64 / n as f64)).collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect();
        Self { n, twiddles, bitrev }
    }

    /// Unnormalized in-place transform.
    fn process(&self, buf: &mut [Complex64], dir: Direction) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if dir == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    /// exp(-i pi k^2 / n)
    chirp: Vec<Complex64>,
    /// Transformed conjugate chirp (forward direction) for the convolution.
    kernel_fwd: Vec<Complex64>,
    kernel_inv: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128) % two_n;
                expi(-PI * k2 as f64 / n as f64)
            })
            .collect();
        let build = |conj_chirp: bool| {
            let mut b = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..n {
                let c = if conj_chirp { chirp[k].conj() } else { chirp[k] };
                b[k] = c;
                if k > 0 {
                    b[m - k] = c;
                }
            }
            inner.process(&mut b, Direction::Forward);
            b
        };
        let kernel_fwd = build(true);
        let kernel_inv = build(false);
        Self { n, inner, chirp, kernel_fwd, kernel_inv }
    }

    fn process(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>, dir: Direction) {
        let m = self.inner.n;
        scratch.clear();
        scratch.resize(m, Complex64::new(0.0, 0.0));
        let chirp = |k: usize| if dir == Direction::Forward { self.chirp[k] } else { self.chirp[k].conj() };
        for k in 0..self.n {
            scratch[k] = buf[k] * chirp(k);
        }
        self.inner.process(scratch, Direction::Forward);
        let kernel = if dir == Direction::Forward { &self.kernel_fwd } else { &self.kernel_inv };
        for (s, k) in scratch.iter_mut().zip(kernel) {
            *s *= k;
        }
        self.inner.process(scratch, Direction::Inverse);
        let inv_m = 1.0 / m as f64;
        for k in 0..self.n {
            buf[k] = scratch[k] * chirp(k) * inv_m;
        }
    }
}

#[derive(Debug, Clone)]
enum Fft1d {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

impl Fft1d {
    fn new(n: usize) -> Self {
        if n.is_power_of_two() {
            Fft1d::Radix2(Radix2::new(n))
        } else {
            Fft1d::Bluestein(Bluestein::new(n))
        }
    }

    fn process(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>, dir: Direction) {
        match self {
            Fft1d::Radix2(p) => p.process(buf, dir),
            Fft1d::Bluestein(p) => p.process(buf, scratch, dir),
        }
    }
}

fn expi(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Precomputed plan for unitary 2-D transforms of one image shape.
#[derive(Debug, Clone)]
pub struct Fft2Plan {
    height: usize,
    width: usize,
    rows: Fft1d,
    cols: Fft1d,
    scale: f64,
}

impl Fft2Plan {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(shape_err!("FFT plan needs non-empty dimensions, got {height}x{width}"));
        }
        Ok(Self {
            height,
            width,
            rows: Fft1d::new(width),
            cols: Fft1d::new(height),
            scale: 1.0 / libm::sqrt((height * width) as f64),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn fft2(&self, img: &ComplexImage) -> Result<ComplexImage> {
        let mut out = img.clone();
        self.fft2_in_place(&mut out)?;
        Ok(out)
    }

    pub fn ifft2(&self, img: &ComplexImage) -> Result<ComplexImage> {
        let mut out = img.clone();
        self.ifft2_in_place(&mut out)?;
        Ok(out)
    }

    pub fn fft2_in_place(&self, img: &mut ComplexImage) -> Result<()> {
        self.transform(img, Direction::Forward)
    }

    pub fn ifft2_in_place(&self, img: &mut ComplexImage) -> Result<()> {
        self.transform(img, Direction::Inverse)
    }

    fn transform(&self, img: &mut ComplexImage, dir: Direction) -> Result<()> {
        if img.shape() != (self.height, self.width) {
            return Err(shape_err!(
                "image is {}x{} but the FFT plan is {}x{}",
                img.height(),
                img.width(),
                self.height,
                self.width
            ));
        }
        let (h, w) = (self.height, self.width);
        let data = img.data_mut();
        let mut scratch = Vec::new();
        for row in data.chunks_exact_mut(w) {
            self.rows.process(row, &mut scratch, dir);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); h];
        for x in 0..w {
            for y in 0..h {
                col[y] = data[y * w + x];
            }
            self.cols.process(&mut col, &mut scratch, dir);
            for y in 0..h {
                data[y * w + x] = col[y] * self.scale;
            }
        }
        Ok(())
    }
}

/// One-shot unitary forward transform (builds a plan internally).
pub fn fft2(img: &ComplexImage) -> Result<ComplexImage> {
    Fft2Plan::new(img.height(), img.width())?.fft2(img)
}

/// One-shot unitary inverse transform (builds a plan internally).
pub fn ifft2(img: &ComplexImage) -> Result<ComplexImage> {
    Fft2Plan::new(img.height(), img.width())?.ifft2(img)
}
