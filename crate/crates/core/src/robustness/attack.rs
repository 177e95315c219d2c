use num_complex::Complex64;
use rand::Rng;

use super::loss::loss_l12;
use crate::error::{config_err, Error, Result};
use crate::model::{ForwardTape, Modl};
use crate::rng::{self, Stream};
use crate::tensor::ComplexImage;

/// A reconstruction map whose input gradient can be pulled back.
pub trait InputDifferentiable {
    type Tape;

    fn apply(&self, z: &ComplexImage) -> Result<ComplexImage>;

    fn forward_taped(&self, z: &ComplexImage) -> Result<(ComplexImage, Self::Tape)>;

    /// Gradient of `<grad_out, f(z)>` w.r.t. `z` at the taped input.
    fn input_vjp(&self, tape: &Self::Tape, grad_out: &ComplexImage) -> Result<ComplexImage>;
}

impl InputDifferentiable for Modl<'_> {
    type Tape = ForwardTape;

    fn apply(&self, z: &ComplexImage) -> Result<ComplexImage> {
        self.reconstruct(z)
    }

    fn forward_taped(&self, z: &ComplexImage) -> Result<(ComplexImage, ForwardTape)> {
        self.forward(z)
    }

    fn input_vjp(&self, tape: &ForwardTape, grad_out: &ComplexImage) -> Result<ComplexImage> {
        self.input_gradient(tape, grad_out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackInit {
    Zero,
    /// Each real and imaginary component uniform in `[-eps, eps]`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    /// l-infinity radius, applied to the real and imaginary planes separately.
    pub epsilon: f64,
    pub n_steps: usize,
    pub step_size: f64,
    pub init: AttackInit,
    pub seed: u64,
}

impl AttackConfig {
    /// Step size `2.5 eps / n_steps` and uniform random start.
    pub fn new(epsilon: f64, n_steps: usize, seed: u64) -> Self {
        let step_size = if n_steps == 0 { 0.0 } else { 2.5 * epsilon / n_steps as f64 };
        Self { epsilon, n_steps, step_size, init: AttackInit::Uniform, seed }
    }

    pub fn with_init(self, init: AttackInit) -> Self {
        Self { init, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(config_err!("epsilon must be finite and >= 0, got {}", self.epsilon));
        }
        if self.n_steps > 0 && self.epsilon > 0.0 && !(self.step_size > 0.0) {
            return Err(config_err!("step_size must be positive when n_steps > 0, got {}", self.step_size));
        }
        Ok(())
    }

    /// True when the attack can only ever return `delta = 0`.
    pub fn is_trivial(&self) -> bool {
        self.epsilon == 0.0 || (self.n_steps == 0 && self.init == AttackInit::Zero)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum AttackTarget<'a> {
    /// Discrepancy from the model's own output at the clean input.
    SelfOutput,
    /// Discrepancy from a fixed image, e.g. the ground truth.
    Reference(&'a ComplexImage),
}

fn clip(v: f64, eps: f64) -> f64 {
    v.clamp(-eps, eps)
}

/// Projected sign-gradient ascent on `l(f(z + delta), t)` over the
/// l-infinity ball. Returns the best iterate seen, so the objective at the
/// result is never below its value at the starting point.
pub fn pgd_attack<M: InputDifferentiable>(
    model: &M,
    z: &ComplexImage,
    target: AttackTarget<'_>,
    atk: &AttackConfig,
) -> Result<ComplexImage> {
    atk.validate()?;
    let (h, w) = z.shape();
    if atk.is_trivial() {
        return Ok(ComplexImage::zeros(h, w));
    }
    if !z.is_finite() {
        return Err(Error::NumericalFailure("attack input is not finite".into()));
    }
    let eps = atk.epsilon;
    let owned;
    let t = match target {
        AttackTarget::SelfOutput => {
            owned = model.apply(z)?;
            &owned
        }
        AttackTarget::Reference(r) => r,
    };
    let mut delta = match atk.init {
        AttackInit::Zero => ComplexImage::zeros(h, w),
        AttackInit::Uniform => {
            let mut rng = rng::stream(atk.seed, Stream::Attack, &[]);
            ComplexImage::from_fn(h, w, |_, _| {
                Complex64::new(rng.random_range(-eps..=eps), rng.random_range(-eps..=eps))
            })
        }
    };
    let mut best = delta.clone();
    let mut best_value = f64::NEG_INFINITY;
    for step in 0..=atk.n_steps {
        let input = z.add(&delta)?;
        let last = step == atk.n_steps;
        let (value, grad_in) = if last {
            (loss_l12(&model.apply(&input)?, t)?.value, None)
        } else {
            let (out, tape) = model.forward_taped(&input)?;
            let l = loss_l12(&out, t)?;
            (l.value, Some(model.input_vjp(&tape, &l.grad)?))
        };
        if !value.is_finite() {
            return Err(Error::NumericalFailure(alloc::format!("non-finite attack loss at step {step}")));
        }
        if value > best_value {
            best_value = value;
            best.clone_from(&delta);
        }
        if let Some(g) = grad_in {
            for (d, gv) in delta.data_mut().iter_mut().zip(g.data()) {
                d.re = clip(d.re + atk.step_size * sign(gv.re), eps);
                d.im = clip(d.im + atk.step_size * sign(gv.im), eps);
            }
        }
    }
    Ok(best)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
