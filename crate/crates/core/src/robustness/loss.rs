use crate::error::{Error, Result};
use crate::tensor::ComplexImage;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub value: f64,
    pub grad: ComplexImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrads {
    pub value: f64,
    pub grad_output: ComplexImage,
    pub grad_reference: ComplexImage,
}

/// Normalized l1-l2 loss `||a - b||_2 / ||b||_2 + ||a - b||_1 / ||b||_1` and
/// its gradient in `a`. Subgradients at zero residual entries are zero.
pub fn loss_l12(x_hat: &ComplexImage, x_ref: &ComplexImage) -> Result<LossGrad> {
    let (value, grad, _) = eval(x_hat, x_ref, false)?;
    Ok(LossGrad { value, grad })
}

/// Same loss with gradients in both arguments, for targets that are
/// themselves network outputs.
pub fn loss_l12_both(x_hat: &ComplexImage, x_ref: &ComplexImage) -> Result<LossGrads> {
    let (value, grad_output, grad_reference) = eval(x_hat, x_ref, true)?;
    Ok(LossGrads { value, grad_output, grad_reference: grad_reference.expect("requested") })
}

fn unit(c: Complex64) -> Complex64 {
    let n = c.norm();
    if n > 0.0 {
        c / n
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn eval(a: &ComplexImage, b: &ComplexImage, with_ref: bool) -> Result<(f64, ComplexImage, Option<ComplexImage>)> {
    let r = a.sub(b)?;
    let b2 = b.l2_norm();
    let b1 = b.l1_norm();
    if !(b2 > 0.0) || !(b1 > 0.0) {
        return Err(Error::DegenerateReference);
    }
    let r2 = r.l2_norm();
    let r1 = r.l1_norm();
    let value = r2 / b2 + r1 / b1;
    let c2 = if r2 > 0.0 { 1.0 / (r2 * b2) } else { 0.0 };
    let grad = r.map(|v| v * c2 + unit(v) / b1);
    let grad_ref = with_ref.then(|| {
        let k2 = r2 / (b2 * b2 * b2);
        let k1 = r1 / (b1 * b1);
        grad.zip_map(b, |g, bv| -g - bv * k2 - unit(bv) * k1).expect("same shape")
    });
    Ok((value, grad, grad_ref))
}
