use crate::error::{shape_err, Result};
use crate::model::ModelParams;

/// Adam moments mirroring a [`ModelParams`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        Self { m: params.zeros_like(), v: params.zeros_like(), step: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut ModelParams, grads: &ModelParams, lr: f64) -> Result<()> {
    if params.n_params() != grads.n_params() || params.n_params() != state.m.n_params() {
        return Err(shape_err!(
            "Adam shapes disagree: {} params, {} grads, {} moments",
            params.n_params(),
            grads.n_params(),
            state.m.n_params()
        ));
    }
    state.step += 1;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let bc1 = 1.0 - libm::pow(b1, state.step as f64);
    let bc2 = 1.0 - libm::pow(b2, state.step as f64);
    let slices = params.slices_mut().zip(grads.slices()).zip(state.m.slices_mut().zip(state.v.slices_mut()));
    for ((p, g), (m, v)) in slices {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (libm::sqrt(v_hat) + eps);
        }
    }
    Ok(())
}
