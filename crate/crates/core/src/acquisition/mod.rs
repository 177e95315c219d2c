//! Simulated accelerated multi-coil acquisition.
//!
//! Per coil `i` the forward model is `y_i = P F S_i x + n_i`: coil weighting,
//! unitary 2-D FFT, Cartesian sampling mask, and complex Gaussian noise on the
//! kept samples. The adjoint `A^H y = sum_i conj(S_i) F^-1 (P y_i)` produces the
//! zero-filled image fed to reconstruction networks.

mod coils;
mod dataset;
mod mask;
mod phantom;
mod system;

pub use coils::{raw_coil_profile, simulate_coils, CoilSensitivities};
pub use dataset::{build_dataset, regenerate_zero_filled, DatasetRecord, PhantomParams};
pub use mask::{make_mask, SamplingMask};
pub use phantom::{generate_phantom, phantom_ellipses, Ellipse};
pub use system::{AcquisitionSystem, KSpaceMeasurement};
