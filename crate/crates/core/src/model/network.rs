use alloc::vec::Vec;

use super::{cg_solve, ModelConfig, ModelParams};
use crate::acquisition::{AcquisitionSystem, KSpaceMeasurement};
use crate::conv::{conv2d, conv2d_backward, conv2d_backward_input, relu_in_place};
use crate::error::{shape_err, Result};
use crate::tensor::{ComplexImage, RealTensor};

/// Activations cached by [`model_forward`] for the reverse pass.
#[derive(Debug, Clone)]
pub struct ForwardTape {
    /// `layer_inputs[k][l]` is the input of denoiser layer `l` in unroll `k`;
    /// entry 0 is the two-plane view of the unroll's input image.
    layer_inputs: Vec<Vec<RealTensor>>,
    shape: (usize, usize),
}

impl ForwardTape {
    pub fn n_unrolls(&self) -> usize {
        self.layer_inputs.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub params: ModelParams,
    pub z: ComplexImage,
}

/// Borrowed bundle of everything that defines `f_theta`.
#[derive(Debug, Clone, Copy)]
pub struct Modl<'a> {
    pub params: &'a ModelParams,
    pub config: &'a ModelConfig,
    pub sys: &'a AcquisitionSystem,
}

impl<'a> Modl<'a> {
    pub fn new(params: &'a ModelParams, config: &'a ModelConfig, sys: &'a AcquisitionSystem) -> Result<Self> {
        config.validate()?;
        params.check_matches(config)?;
        Ok(Self { params, config, sys })
    }

    fn dc_solve(&self, rhs: &ComplexImage) -> Result<ComplexImage> {
        let lambda = self.config.lambda;
        let sys = self.sys;
        let sol = cg_solve(
            |p| {
                let mut out = sys.normal(p)?;
                out.axpy(lambda, p)?;
                Ok(out)
            },
            rhs,
            self.config.cg_max_iters,
            self.config.cg_tol,
        )?;
        Ok(sol.x)
    }

    /// Denoiser output `D(x)` (without the residual skip).
    fn denoise(&self, x: &ComplexImage, record: Option<&mut Vec<RealTensor>>) -> Result<ComplexImage> {
        let n_layers = self.params.layers.len();
        let mut a = x.to_planes();
        let mut record = record;
        for (l, k) in self.params.layers.iter().enumerate() {
            let mut pre = conv2d(&a, k)?;
            if l + 1 < n_layers {
                relu_in_place(&mut pre);
            }
            let input = core::mem::replace(&mut a, pre);
            if let Some(rec) = record.as_deref_mut() {
                rec.push(input);
            }
        }
        ComplexImage::from_planes(&a)
    }

    /// Reverse pass through the denoiser; adds parameter gradients into
    /// `grads` when given and returns the gradient w.r.t. the denoiser input.
    fn denoise_backward(
        &self,
        inputs: &[RealTensor],
        grad_out: &ComplexImage,
        mut grads: Option<&mut ModelParams>,
    ) -> Result<ComplexImage> {
        let n_layers = self.params.layers.len();
        let mut g = grad_out.to_planes();
        for l in (0..n_layers).rev() {
            if l + 1 < n_layers {
                // relu(pre) > 0 exactly where pre > 0
                let post = &inputs[l + 1];
                for (gv, &pv) in g.data_mut().iter_mut().zip(post.data()) {
                    if !(pv > 0.0) {
                        *gv = 0.0;
                    }
                }
            }
            let k = &self.params.layers[l];
            g = match grads.as_deref_mut() {
                Some(acc) => {
                    let cg = conv2d_backward(&inputs[l], k, &g)?;
                    let dst = &mut acc.layers[l];
                    for (a, b) in dst.weights.iter_mut().zip(&cg.weights) {
                        *a += b;
                    }
                    for (a, b) in dst.bias.iter_mut().zip(&cg.bias) {
                        *a += b;
                    }
                    cg.input
                }
                None => conv2d_backward_input(&inputs[l], k, &g)?,
            };
        }
        ComplexImage::from_planes(&g)
    }

    /// `x_0 = z`; `x_k = DC(x_{k-1} + D(x_{k-1}))` with the pseudo-measurement
    /// `A z` recomputed from the input.
    pub fn forward(&self, z: &ComplexImage) -> Result<(ComplexImage, ForwardTape)> {
        if z.shape() != self.sys.shape() {
            return Err(shape_err!("input {:?} vs acquisition {:?}", z.shape(), self.sys.shape()));
        }
        let mut tape = ForwardTape { layer_inputs: Vec::with_capacity(self.config.n_unrolls), shape: z.shape() };
        let mut x = z.clone();
        if self.config.n_unrolls == 0 {
            return Ok((x, tape));
        }
        let data_term = self.sys.normal(z)?;
        for _ in 0..self.config.n_unrolls {
            let mut inputs = Vec::with_capacity(self.params.layers.len());
            let mut d = self.denoise(&x, Some(&mut inputs))?;
            d.axpy(1.0, &x)?;
            let mut rhs = data_term.clone();
            rhs.axpy(self.config.lambda, &d)?;
            x = self.dc_solve(&rhs)?;
            tape.layer_inputs.push(inputs);
        }
        Ok((x, tape))
    }

    pub fn reconstruct(&self, z: &ComplexImage) -> Result<ComplexImage> {
        if z.shape() != self.sys.shape() {
            return Err(shape_err!("input {:?} vs acquisition {:?}", z.shape(), self.sys.shape()));
        }
        let mut x = z.clone();
        if self.config.n_unrolls == 0 {
            return Ok(x);
        }
        let data_term = self.sys.normal(z)?;
        for _ in 0..self.config.n_unrolls {
            let mut d = self.denoise(&x, None)?;
            d.axpy(1.0, &x)?;
            let mut rhs = data_term.clone();
            rhs.axpy(self.config.lambda, &d)?;
            x = self.dc_solve(&rhs)?;
        }
        Ok(x)
    }

    fn check_tape(&self, tape: &ForwardTape, grad: &ComplexImage) -> Result<()> {
        if tape.n_unrolls() != self.config.n_unrolls
            || tape.layer_inputs.iter().any(|l| l.len() != self.params.layers.len())
        {
            return Err(shape_err!("tape does not match the model configuration"));
        }
        if grad.shape() != tape.shape {
            return Err(shape_err!("gradient {:?} vs tape {:?}", grad.shape(), tape.shape));
        }
        Ok(())
    }

    fn reverse(
        &self,
        tape: &ForwardTape,
        grad_x_hat: &ComplexImage,
        mut grads: Option<&mut ModelParams>,
    ) -> Result<ComplexImage> {
        self.check_tape(tape, grad_x_hat)?;
        let (h, w) = tape.shape;
        let mut g = grad_x_hat.clone();
        if self.config.n_unrolls == 0 {
            return Ok(g);
        }
        // sum of the DC adjoint solves; every unroll sees the same A^H A z term
        let mut u_sum = ComplexImage::zeros(h, w);
        for inputs in tape.layer_inputs.iter().rev() {
            // M = A^H A + lambda I is self-adjoint, so the DC adjoint is another solve
            let u = self.dc_solve(&g)?;
            u_sum.axpy(1.0, &u)?;
            let g_d = u.scale(self.config.lambda);
            let mut g_prev = self.denoise_backward(inputs, &g_d, grads.as_deref_mut())?;
            g_prev.axpy(1.0, &g_d)?;
            g = g_prev;
        }
        g.axpy(1.0, &self.sys.normal(&u_sum)?)?;
        Ok(g)
    }

    /// Gradients of `<grad_x_hat, f(z)>` w.r.t. the parameters and the input.
    pub fn backward(&self, tape: &ForwardTape, grad_x_hat: &ComplexImage) -> Result<ModelGrads> {
        let mut params = self.params.zeros_like();
        let z = self.reverse(tape, grad_x_hat, Some(&mut params))?;
        Ok(ModelGrads { params, z })
    }

    /// Input gradient only; skips parameter gradient reductions.
    pub fn input_gradient(&self, tape: &ForwardTape, grad_x_hat: &ComplexImage) -> Result<ComplexImage> {
        self.reverse(tape, grad_x_hat, None)
    }
}

/// Solves `(A^H A + lambda I) x = A^H y_pseudo + lambda x_denoised` by CG.
pub fn dc_layer(
    sys: &AcquisitionSystem,
    config: &ModelConfig,
    y_pseudo: &KSpaceMeasurement,
    x_denoised: &ComplexImage,
) -> Result<ComplexImage> {
    config.validate()?;
    let mut rhs = sys.adjoint(y_pseudo)?;
    rhs.axpy(config.lambda, x_denoised)?;
    let lambda = config.lambda;
    Ok(cg_solve(
        |p| {
            let mut out = sys.normal(p)?;
            out.axpy(lambda, p)?;
            Ok(out)
        },
        &rhs,
        config.cg_max_iters,
        config.cg_tol,
    )?
    .x)
}

pub fn model_forward(
    params: &ModelParams,
    config: &ModelConfig,
    sys: &AcquisitionSystem,
    z: &ComplexImage,
) -> Result<(ComplexImage, ForwardTape)> {
    Modl::new(params, config, sys)?.forward(z)
}

pub fn model_backward(
    params: &ModelParams,
    config: &ModelConfig,
    sys: &AcquisitionSystem,
    tape: &ForwardTape,
    grad_x_hat: &ComplexImage,
) -> Result<ModelGrads> {
    Modl::new(params, config, sys)?.backward(tape, grad_x_hat)
}
