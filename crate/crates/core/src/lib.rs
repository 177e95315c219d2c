//! Numerical core of the robust MRI reconstruction workbench.
//!
//! Everything here is a pure function over owned or borrowed buffers: the
//! complex image substrate and unitary FFT, the multi-coil acquisition model,
//! the unrolled reconstruction network with hand-written reverse mode, the
//! attack / augmentation / training machinery, and the image-quality metrics.
//! File formats, configuration parsing and the command-line front end live in
//! the `rrwb` companion crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod acquisition;
pub mod conv;
pub mod error;
pub mod evaluation;
pub mod fft;
pub mod model;
pub mod rng;
pub mod robustness;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tensor::{ComplexImage, RealImage, RealTensor};
