//! Unrolled reconstruction network: a shared residual CNN denoiser alternated
//! with conjugate-gradient data-consistency solves, with a hand-written
//! backward pass.

mod cg;
mod network;

use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

pub use cg::{cg_solve, CgSolution};
pub use network::{dc_layer, model_backward, model_forward, ForwardTape, ModelGrads, Modl};

use crate::conv::ConvKernel;
use crate::error::{config_err, shape_err, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Number of denoise + data-consistency iterations.
    pub n_unrolls: usize,
    pub denoiser_layers: usize,
    /// Hidden channel count of the denoiser.
    pub channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    /// Data-consistency weight.
    pub lambda: f64,
    pub cg_max_iters: usize,
    pub cg_tol: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_unrolls: 3,
            denoiser_layers: 3,
            channels: 32,
            kernel_h: 3,
            kernel_w: 3,
            lambda: 0.05,
            cg_max_iters: 10,
            cg_tol: 1e-5,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.denoiser_layers == 0 {
            return Err(config_err!("denoiser_layers must be >= 1"));
        }
        if self.denoiser_layers > 1 && self.channels == 0 {
            return Err(config_err!("channels must be >= 1"));
        }
        if self.kernel_h % 2 == 0 || self.kernel_w % 2 == 0 {
            return Err(config_err!("kernel extents must be odd, got {}x{}", self.kernel_h, self.kernel_w));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(config_err!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(config_err!("cg_tol must lie in (0, 1), got {}", self.cg_tol));
        }
        if self.cg_max_iters == 0 {
            return Err(config_err!("cg_max_iters must be >= 1"));
        }
        Ok(())
    }

    /// `(out, in)` channel counts per layer: 2 -> channels -> ... -> 2.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let l = self.denoiser_layers;
        (0..l)
            .map(|i| {
                let cin = if i == 0 { 2 } else { self.channels };
                let cout = if i + 1 == l { 2 } else { self.channels };
                (cout, cin)
            })
            .collect()
    }
}

/// Denoiser weights, shared across all unrolls.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<ConvKernel>,
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(o, i)| ConvKernel::zeros(o, i, config.kernel_h, config.kernel_w))
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|k| ConvKernel {
                out_channels: k.out_channels,
                in_channels: k.in_channels,
                kh: k.kh,
                kw: k.kw,
                weights: alloc::vec![0.0; k.weights.len()],
                bias: alloc::vec![0.0; k.bias.len()],
            })
            .collect();
        Self { layers }
    }

    /// Checks that the layers chain 2 -> ... -> 2 as `config` prescribes.
    pub fn check_matches(&self, config: &ModelConfig) -> Result<()> {
        let shapes = config.layer_shapes();
        if shapes.len() != self.layers.len() {
            return Err(shape_err!("{} layers, config expects {}", self.layers.len(), shapes.len()));
        }
        for (k, &(o, i)) in self.layers.iter().zip(&shapes) {
            if (k.out_channels, k.in_channels, k.kh, k.kw) != (o, i, config.kernel_h, config.kernel_w) {
                return Err(shape_err!(
                    "layer {}x{}x{}x{} does not match config {o}x{i}x{}x{}",
                    k.out_channels,
                    k.in_channels,
                    k.kh,
                    k.kw,
                    config.kernel_h,
                    config.kernel_w
                ));
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(ConvKernel::n_params).sum()
    }

    /// Flat views in canonical order: layer 0 weights, layer 0 bias, layer 1 ...
    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|k| [k.weights.as_slice(), k.bias.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|k| [k.weights.as_mut_slice(), k.bias.as_mut_slice()])
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().flat_map(|s| s.iter().copied()).collect()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.slices_mut().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slices().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// He initialization: weights ~ N(0, 2 / fan_in), zero biases.
pub fn init_params(config: &ModelConfig, seed: u64) -> Result<ModelParams> {
    config.validate()?;
    let mut params = ModelParams::zeros(config)?;
    for (li, k) in params.layers.iter_mut().enumerate() {
        let std = libm::sqrt(2.0 / k.fan_in() as f64);
        let normal = Normal::new(0.0, std).map_err(|e| config_err!("{e}"))?;
        let mut rng = rng::stream(seed, Stream::Init, &[li as u64]);
        for w in &mut k.weights {
            *w = normal.sample(&mut rng);
        }
    }
    Ok(params)
}
