#![allow(dead_code)]
//! Dense reference constructions shared by the integration oracles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rrwb_core::acquisition::AcquisitionSystem;
use rrwb_core::conv::ConvKernel;
use rrwb_core::{Complex64, ComplexImage};

pub type Rng64 = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

pub fn random_image(h: usize, w: usize, rng: &mut Rng64) -> ComplexImage {
    ComplexImage::from_fn(h, w, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub type Matrix = Vec<Vec<Complex64>>;

/// Orthonormal 2-D DFT matrix acting on row-major vectorised images.
pub fn dft_matrix(h: usize, w: usize) -> Matrix {
    let n = h * w;
    (0..n)
        .map(|row| {
            let (ky, kx) = (row / w, row % w);
            (0..n)
                .map(|col| {
                    let (py, px) = (col / w, col % w);
                    let phase = -2.0 * PI * ((ky * py) as f64 / h as f64 + (kx * px) as f64 / w as f64);
                    Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
                })
                .collect()
        })
        .collect()
}

/// Dense encoding matrix: rows are (coil, k-space index), columns pixels.
pub fn dense_encoding(sys: &AcquisitionSystem) -> Matrix {
    let (h, w) = sys.shape();
    let n = h * w;
    let f = dft_matrix(h, w);
    let mut a = Vec::new();
    for s in sys.coils().maps() {
        for k in 0..n {
            let kept = sys.mask().kept()[k];
            a.push((0..n).map(|p| if kept { f[k][p] * s.data()[p] } else { Complex64::new(0.0, 0.0) }).collect());
        }
    }
    a
}

pub fn matvec(a: &Matrix, x: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum()).collect()
}

pub fn adjoint(a: &Matrix) -> Matrix {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r).map(|i| (0..c).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bv)| {
            let mut r = row.clone();
            r.push(bv);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().partial_cmp(&m[j][col].norm()).unwrap()).unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n];
        for k in i + 1..n {
            acc -= m[i][k] * x[k];
        }
        x[i] = acc / m[i][i];
    }
    x
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Naive zero-padded cross-correlation over a real (channels, h, w) buffer.
pub fn naive_conv(input: &[f64], c_in: usize, h: usize, w: usize, k: &ConvKernel) -> Vec<f64> {
    let mut out = vec![0.0; k.out_channels * h * w];
    for o in 0..k.out_channels {
        for y in 0..h {
            for x in 0..w {
                let mut acc = k.bias[o];
                for i in 0..c_in {
                    for ky in 0..k.kh {
                        for kx in 0..k.kw {
                            let sy = y as isize + ky as isize - (k.kh / 2) as isize;
                            let sx = x as isize + kx as isize - (k.kw / 2) as isize;
                            if sy >= 0 && sx >= 0 && (sy as usize) < h && (sx as usize) < w {
                                acc += k.weights[((o * c_in + i) * k.kh + ky) * k.kw + kx]
                                    * input[(i * h + sy as usize) * w + sx as usize];
                            }
                        }
                    }
                }
                out[(o * h + y) * w + x] = acc;
            }
        }
    }
    out
}
