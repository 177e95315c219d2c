use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{config_err, shape_err, Result};
use crate::tensor::ComplexImage;

/// Width of the Gaussian bump in units of the image extent.
const BUMP_WIDTH: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct CoilSensitivities {
    maps: Vec<ComplexImage>,
}

impl CoilSensitivities {
    /// Validates shape agreement and the absence of dead pixels.
    pub fn new(maps: Vec<ComplexImage>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| config_err!("at least one coil is required"))?;
        let shape = first.shape();
        if maps.iter().any(|m| m.shape() != shape) {
            return Err(shape_err!("coil maps disagree in shape"));
        }
        for p in 0..first.len() {
            let energy: f64 = maps.iter().map(|m| m.data()[p].norm_sqr()).sum();
            if !(energy > 0.0) || !energy.is_finite() {
                return Err(config_err!("coil maps have no sensitivity at pixel {p}"));
            }
        }
        Ok(Self { maps })
    }

    pub fn n_coils(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[ComplexImage] {
        &self.maps
    }

    pub fn shape(&self) -> (usize, usize) {
        self.maps[0].shape()
    }
}

/// Unnormalized sensitivity of coil `coil` (of `n_coils`) at pixel `(y, x)`.
///
/// Coil centers sit on the ellipse inscribed in the image border at angles
/// `2 pi i / n`; each profile is a Gaussian bump around its center with a
/// linear phase ramp pointing along the same angle.
pub fn raw_coil_profile(height: usize, width: usize, n_coils: usize, coil: usize, y: usize, x: usize) -> Complex64 {
    let angle = 2.0 * PI * coil as f64 / n_coils as f64;
    let (sin, cos) = (libm::sin(angle), libm::cos(angle));
    let cy = (height as f64 - 1.0) / 2.0 + height as f64 / 2.0 * sin;
    let cx = (width as f64 - 1.0) / 2.0 + width as f64 / 2.0 * cos;
    let dy = (y as f64 - cy) / height as f64;
    let dx = (x as f64 - cx) / width as f64;
    let magnitude = libm::exp(-(dx * dx + dy * dy) / (2.0 * BUMP_WIDTH * BUMP_WIDTH));
    let phase = PI * (dx * cos + dy * sin);
    Complex64::from_polar(magnitude, phase)
}

/// Smooth synthetic coil maps normalized so that `sum_i |S_i|^2 = 1` pixelwise.
pub fn simulate_coils(height: usize, width: usize, n_coils: usize) -> Result<CoilSensitivities> {
    if n_coils == 0 {
        return Err(config_err!("n_coils must be >= 1"));
    }
    if height == 0 || width == 0 {
        return Err(shape_err!("coil maps need non-empty dimensions"));
    }
    let mut maps: Vec<ComplexImage> = (0..n_coils)
        .map(|c| ComplexImage::from_fn(height, width, |y, x| raw_coil_profile(height, width, n_coils, c, y, x)))
        .collect();
    for p in 0..height * width {
        let energy: f64 = maps.iter().map(|m| m.data()[p].norm_sqr()).sum();
        let inv = 1.0 / libm::sqrt(energy);
        for m in &mut maps {
            m.data_mut()[p] *= inv;
        }
    }
    CoilSensitivities::new(maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_coil_has_unit_magnitude() {
        let c = simulate_coils(8, 12, 1).unwrap();
        assert!(c.maps()[0].data().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sum_of_squares_is_one() {
        for n in 1..=6 {
            let c = simulate_coils(16, 10, n).unwrap();
            for p in 0..160 {
                let s: f64 = c.maps().iter().map(|m| m.data()[p].norm_sqr()).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn raw_profile_matches_closed_form() {
        // coil 1 of 4 sits at angle pi/2: bottom-center of a 20x30 image
        let (h, w) = (20usize, 30usize);
        for &(y, x) in &[(0usize, 0usize), (19, 14), (10, 29), (5, 7)] {
            let cy = 9.5 + 10.0;
            let cx = 14.5;
            let dy = (y as f64 - cy) / 20.0;
            let dx = (x as f64 - cx) / 30.0;
            let mag = (-(dx * dx + dy * dy) / (2.0 * 0.16)).exp();
            let phase = PI * dy;
            let want = Complex64::new(mag * phase.cos(), mag * phase.sin());
            let got = raw_coil_profile(h, w, 4, 1, y, x);
            assert!((got - want).norm() < 1e-12, "({y},{x})");
        }
    }

    #[test]
    fn coils_see_different_regions() {
        let c = simulate_coils(32, 32, 4).unwrap();
        // coil 0 sits on the right edge, coil 2 on the left edge
        assert!(c.maps()[0].get(16, 31).norm() > c.maps()[0].get(16, 0).norm());
        assert!(c.maps()[2].get(16, 0).norm() > c.maps()[2].get(16, 31).norm());
    }

    #[test]
    fn rejects_dead_pixels() {
        assert!(CoilSensitivities::new(alloc::vec![ComplexImage::zeros(2, 2)]).is_err());
        assert!(simulate_coils(4, 4, 0).is_err());
    }
}
