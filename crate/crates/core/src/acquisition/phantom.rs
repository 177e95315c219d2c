use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{config_err, Result};
use crate::rng::{self, Stream};
use crate::tensor::ComplexImage;

/// Filled ellipse in pixel coordinates; `semi_x`/`semi_y` are the semi-axes
/// before rotation by `angle` (radians, counter-clockwise from the x axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center_y: f64,
    pub center_x: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub angle: f64,
    pub intensity: f64,
}

impl Ellipse {
    pub fn contains(&self, y: f64, x: f64) -> bool {
        let (s, c) = (libm::sin(self.angle), libm::cos(self.angle));
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.semi_x) * (u / self.semi_x) + (v / self.semi_y) * (v / self.semi_y) <= 1.0
    }
}

/// The random ellipses of the phantom with this seed.
pub fn phantom_ellipses(height: usize, width: usize, n_ellipses: usize, seed: u64) -> Vec<Ellipse> {
    let mut rng = rng::stream(seed, Stream::Phantom, &[0]);
    let (h, w) = (height as f64, width as f64);
    (0..n_ellipses)
        .map(|_| {
            // centers on pixel sites so every ellipse covers at least its center pixel
            let center_y = libm::round(rng.random_range(0.2..=0.8) * (h - 1.0));
            let center_x = libm::round(rng.random_range(0.2..=0.8) * (w - 1.0));
            Ellipse {
                center_y,
                center_x,
                semi_x: (rng.random_range(0.08..=0.35) * w).max(0.5),
                semi_y: (rng.random_range(0.08..=0.35) * h).max(0.5),
                angle: rng.random_range(0.0..PI),
                intensity: rng.random_range(0.2..=1.0),
            }
        })
        .collect()
}

/// Sum of random ellipses times a smooth random phase field, scaled to peak
/// magnitude 1.
pub fn generate_phantom(height: usize, width: usize, n_ellipses: usize, seed: u64) -> Result<ComplexImage> {
    if n_ellipses == 0 {
        return Err(config_err!("n_ellipses must be >= 1"));
    }
    if height == 0 || width == 0 {
        return Err(config_err!("phantom needs non-empty dimensions"));
    }
    let ellipses = phantom_ellipses(height, width, n_ellipses, seed);
    let mut rng = rng::stream(seed, Stream::Phantom, &[1]);
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..=PI / 6.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let mut magnitude = Vec::with_capacity(height * width);
    let mut peak: f64 = 0.0;
    for y in 0..height {
        for x in 0..width {
            let m: f64 = ellipses.iter().filter(|e| e.contains(y as f64, x as f64)).map(|e| e.intensity).sum();
            peak = peak.max(m);
            magnitude.push(m);
        }
    }
    let mut k = 0;
    Ok(ComplexImage::from_fn(height, width, |y, x| {
        let v = y as f64 / height as f64;
        let u = x as f64 / width as f64;
        let phase: f64 =
            waves.iter().map(|&(amp, fy, fx, off)| amp * libm::cos(2.0 * PI * (fy * v + fx * u) + off)).sum();
        let m = magnitude[k] / peak;
        k += 1;
        Complex64::from_polar(m, phase)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_magnitude_is_one() {
        for seed in 0..10 {
            let p = generate_phantom(32, 24, 6, seed).unwrap();
            let peak = p.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!((peak - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_phantom() {
        let a = generate_phantom(16, 16, 5, 42).unwrap();
        let b = generate_phantom(16, 16, 5, 42).unwrap();
        assert!(a
            .data()
            .iter()
            .zip(b.data())
            .all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()));
        assert_ne!(a, generate_phantom(16, 16, 5, 43).unwrap());
    }

    #[test]
    fn ellipse_membership_matches_analytic_inequality() {
        // axis-aligned: x^2/a^2 + y^2/b^2 <= 1
        let e = Ellipse { center_y: 10.0, center_x: 20.0, semi_x: 6.0, semi_y: 3.0, angle: 0.0, intensity: 1.0 };
        assert!(e.contains(10.0, 25.9));
        assert!(!e.contains(10.0, 26.1));
        assert!(e.contains(12.9, 20.0));
        assert!(!e.contains(13.1, 20.0));
        // rotated by 90 degrees the axes swap
        let r = Ellipse { angle: PI / 2.0, ..e };
        assert!(r.contains(15.9, 20.0));
        assert!(!r.contains(10.0, 23.5));
        // 45 degrees: point along the major axis direction
        let d = Ellipse { angle: PI / 4.0, ..e };
        let t = 5.9 / 2f64.sqrt();
        assert!(d.contains(10.0 + t, 20.0 + t));
        let t = 6.1 / 2f64.sqrt();
        assert!(!d.contains(10.0 + t, 20.0 + t));
    }

    #[test]
    fn phantom_support_follows_its_ellipses() {
        let (h, w) = (24, 24);
        let ellipses = phantom_ellipses(h, w, 3, 7);
        let p = generate_phantom(h, w, 3, 7).unwrap();
        for y in 0..h {
            for x in 0..w {
                let inside = ellipses.iter().any(|e| {
                    // independent evaluation of the rotated-ellipse inequality
                    let (dx, dy) = (x as f64 - e.center_x, y as f64 - e.center_y);
                    let u = dx * e.angle.cos() + dy * e.angle.sin();
                    let v = -dx * e.angle.sin() + dy * e.angle.cos();
                    (u * u) / (e.semi_x * e.semi_x) + (v * v) / (e.semi_y * e.semi_y) <= 1.0
                });
                assert_eq!(inside, p.get(y, x).norm() > 0.0, "({y},{x})");
            }
        }
    }

    #[test]
    fn intensities_in_range() {
        for e in phantom_ellipses(32, 32, 50, 1) {
            assert!((0.2..=1.0).contains(&e.intensity));
        }
        assert!(generate_phantom(8, 8, 0, 0).is_err());
    }
}
