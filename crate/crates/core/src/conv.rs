//! Same-size 2-D cross-correlation with hand-derived reverse mode, plus ReLU.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{shape_err, Result};
use crate::tensor::RealTensor;

/// Convolution weights laid out as `[out][in][kh][kw]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kh: usize,
    pub kw: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvKernel {
    pub fn zeros(out_channels: usize, in_channels: usize, kh: usize, kw: usize) -> Result<Self> {
        Self::new(
            out_channels,
            in_channels,
            kh,
            kw,
            vec![0.0; out_channels * in_channels * kh * kw],
            vec![0.0; out_channels],
        )
    }

    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kh: usize,
        kw: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if kh % 2 == 0 || kw % 2 == 0 {
            return Err(shape_err!("kernel extents must be odd, got {kh}x{kw}"));
        }
        if weights.len() != out_channels * in_channels * kh * kw {
            return Err(shape_err!("{} weights for a {out_channels}x{in_channels}x{kh}x{kw} kernel", weights.len()));
        }
        if bias.len() != out_channels {
            return Err(shape_err!("{} biases for {out_channels} output channels", bias.len()));
        }
        Ok(Self { out_channels, in_channels, kh, kw, weights, bias })
    }

    #[inline]
    pub fn weight_index(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + i) * self.kh + ky) * self.kw + kx
    }

    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kh * self.kw
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: RealTensor,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Valid ranges along one axis for tap offset `d`: destination indices `lo..hi`
/// read source index `dst + d`.
#[inline]
fn tap_range(len: usize, d: isize) -> (usize, usize) {
    let lo = if d < 0 { (-d) as usize } else { 0 };
    let hi = if d > 0 { len.saturating_sub(d as usize) } else { len };
    (lo, hi.max(lo))
}

pub fn conv2d(input: &RealTensor, k: &ConvKernel) -> Result<RealTensor> {
    if input.channels != k.in_channels {
        return Err(shape_err!("input has {} channels, kernel expects {}", input.channels, k.in_channels));
    }
    let (h, w) = (input.height, input.width);
    let plane = h * w;
    let mut out = RealTensor::zeros(k.out_channels, h, w);
    let (ph, pw) = ((k.kh / 2) as isize, (k.kw / 2) as isize);
    for o in 0..k.out_channels {
        let dst = &mut out.data[o * plane..(o + 1) * plane];
        dst.fill(k.bias[o]);
        for i in 0..k.in_channels {
            let src = &input.data[i * plane..(i + 1) * plane];
            for ky in 0..k.kh {
                let dy = ky as isize - ph;
                let (y0, y1) = tap_range(h, dy);
                for kx in 0..k.kw {
                    let wv = k.weights[k.weight_index(o, i, ky, kx)];
                    if wv == 0.0 {
                        continue;
                    }
                    let dx = kx as isize - pw;
                    let (x0, x1) = tap_range(w, dx);
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let d = &mut dst[y * w + x0..y * w + x1];
                        let sx0 = (x0 as isize + dx) as usize;
                        let s = &src[sy * w + sx0..sy * w + sx0 + (x1 - x0)];
                        for (a, &b) in d.iter_mut().zip(s) {
                            *a += wv * b;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of `<grad_out, conv2d(input, k)>` with respect to the input,
/// the weights and the bias.
pub fn conv2d_backward(input: &RealTensor, k: &ConvKernel, grad_out: &RealTensor) -> Result<ConvGrads> {
    backward(input, k, grad_out, true)
}

/// Input gradient only; skips the weight and bias reductions.
pub fn conv2d_backward_input(input: &RealTensor, k: &ConvKernel, grad_out: &RealTensor) -> Result<RealTensor> {
    Ok(backward(input, k, grad_out, false)?.input)
}

fn backward(input: &RealTensor, k: &ConvKernel, grad_out: &RealTensor, with_params: bool) -> Result<ConvGrads> {
    if input.channels != k.in_channels {
        return Err(shape_err!("input has {} channels, kernel expects {}", input.channels, k.in_channels));
    }
    if grad_out.shape() != (k.out_channels, input.height, input.width) {
        return Err(shape_err!(
            "output gradient is {:?}, expected {:?}",
            grad_out.shape(),
            (k.out_channels, input.height, input.width)
        ));
    }
    let (h, w) = (input.height, input.width);
    let plane = h * w;
    let (ph, pw) = ((k.kh / 2) as isize, (k.kw / 2) as isize);
    let mut grad_in = RealTensor::zeros(k.in_channels, h, w);
    let mut grad_w = if with_params { vec![0.0; k.weights.len()] } else { Vec::new() };
    let mut grad_b = if with_params { vec![0.0; k.out_channels] } else { Vec::new() };

    for o in 0..k.out_channels {
        let g = &grad_out.data[o * plane..(o + 1) * plane];
        if with_params {
            grad_b[o] = g.iter().sum();
        }
        for i in 0..k.in_channels {
            let src = &input.data[i * plane..(i + 1) * plane];
            let gi = &mut grad_in.data[i * plane..(i + 1) * plane];
            for ky in 0..k.kh {
                let dy = ky as isize - ph;
                let (y0, y1) = tap_range(h, dy);
                for kx in 0..k.kw {
                    let widx = k.weight_index(o, i, ky, kx);
                    let wv = k.weights[widx];
                    let dx = kx as isize - pw;
                    let (x0, x1) = tap_range(w, dx);
                    let n = x1 - x0;
                    let sx0 = (x0 as isize + dx) as usize;
                    let mut acc = 0.0;
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let gr = &g[y * w + x0..y * w + x1];
                        if with_params {
                            let s = &src[sy * w + sx0..sy * w + sx0 + n];
                            acc += gr.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                        }
                        if wv != 0.0 {
                            let d = &mut gi[sy * w + sx0..sy * w + sx0 + n];
                            for (a, &b) in d.iter_mut().zip(gr) {
                                *a += wv * b;
                            }
                        }
                    }
                    if with_params {
                        grad_w[widx] = acc;
                    }
                }
            }
        }
    }
    Ok(ConvGrads { input: grad_in, weights: grad_w, bias: grad_b })
}

pub fn relu(x: &RealTensor) -> RealTensor {
    let mut y = x.clone();
    relu_in_place(&mut y);
    y
}

pub fn relu_in_place(x: &mut RealTensor) {
    for v in &mut x.data {
        if !(*v > 0.0) {
            *v = 0.0;
        }
    }
}

/// Passes `grad_out` where `x > 0`; the subgradient at zero is zero.
pub fn relu_backward(x: &RealTensor, grad_out: &RealTensor) -> Result<RealTensor> {
    if x.shape() != grad_out.shape() {
        return Err(shape_err!("{:?} vs {:?}", x.shape(), grad_out.shape()));
    }
    let mut g = grad_out.clone();
    for (gv, &xv) in g.data.iter_mut().zip(&x.data) {
        if !(xv > 0.0) {
            *gv = 0.0;
        }
    }
    Ok(g)
}
