use crate::error::{Error, Result};
use crate::tensor::ComplexImage;

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: ComplexImage,
    pub iterations: usize,
    /// Final `||b - M x|| / ||b||` as tracked by the recurrence.
    pub relative_residual: f64,
}

/// Conjugate gradients for a Hermitian positive-definite operator, started from
/// zero. Stops once the relative residual drops to `tol` or after `max_iters`.
pub fn cg_solve(
    mut apply: impl FnMut(&ComplexImage) -> Result<ComplexImage>,
    rhs: &ComplexImage,
    max_iters: usize,
    tol: f64,
) -> Result<CgSolution> {
    let (h, w) = rhs.shape();
    let mut x = ComplexImage::zeros(h, w);
    let b_norm = rhs.l2_norm();
    if !b_norm.is_finite() {
        return Err(Error::NumericalFailure("non-finite CG right-hand side".into()));
    }
    if b_norm == 0.0 {
        return Ok(CgSolution { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = rhs.clone();
    let mut p = rhs.clone();
    let mut rs = r.norm_sqr();
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iters {
        let ap = apply(&p)?;
        let curvature = p.real_inner(&ap)?;
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(Error::NumericalFailure(alloc::format!("CG curvature {curvature} at iteration {iterations}")));
        }
        let alpha = rs / curvature;
        for ((xv, rv), (pv, av)) in x.data_mut().iter_mut().zip(r.data_mut()).zip(p.data().iter().zip(ap.data())) {
            *xv += pv * alpha;
            *rv -= av * alpha;
        }
        iterations += 1;
        let rs_new = r.norm_sqr();
        rel = libm::sqrt(rs_new) / b_norm;
        if !rel.is_finite() {
            return Err(Error::NumericalFailure(alloc::format!("non-finite CG residual at iteration {iterations}")));
        }
        if rel <= tol {
            break;
        }
        let beta = rs_new / rs;
        for (pv, rv) in p.data_mut().iter_mut().zip(r.data()) {
            *pv = rv + *pv * beta;
        }
        rs = rs_new;
    }
    Ok(CgSolution { x, iterations, relative_residual: rel })
}
