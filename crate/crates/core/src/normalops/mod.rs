//! Normal operators `N_m`, `N_m^k` of the ray and momentum ray transforms.
//!
//! Two evaluation routes are provided: angular quadrature over the unit
//! sphere of exact chord integrals, and grid convolution with the explicit
//! homogeneous kernels. The module also houses the solenoidal decomposition
//! on periodic grids and the numerical checks of the identities relating
//! `N_0 R f`, `N_0 R^k f` and derivatives of `N_m^p f`.

mod angular;
mod convolution;
mod decompose;
mod grid;
mod ucp;
mod verify;

pub use angular::{
    divergence_normal, divergence_normal_compiled, fd_divergence, normal_momentum, normal_momentum_compiled,
    normal_ray, power_derivative, AngularIntegrals,
};
pub use convolution::{kernel_weights, lattice_zeta, normal_convolution, ConvolutionPlan};
pub use decompose::{
    solenoidal_decompose, spectral_divergence, spectral_symmetric_derivative, verify_smoothness, Decomposition,
    FrequencySymbol,
};
pub use grid::{fft_nd, GridHeader, GridTensorField};
pub use ucp::{ucp_experiment, UcpCheck, UcpConfig, UcpReport, UcpScenario};
pub use verify::{
    max_residual, verify_lemma_mrt, verify_prop_mrt, verify_prop_ray, ComponentResidual,
};

use crate::polyfield::FieldError;
use crate::spherequad::QuadError;
use crate::symtensor::TensorError;
use crate::xray::XrayError;

#[derive(Debug, thiserror::Error)]
pub enum NormalError {
    #[error("r = {r} out of range for k = {k}, m = {m}")]
    ROutOfRange { r: usize, k: usize, m: usize },
    #[error("k = {k} out of range for m = {m}")]
    KOutOfRange { k: usize, m: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("grid: {0}")]
    Grid(String),
    #[error("singular Gram matrix at frequency {0:?}")]
    Singular(Vec<i64>),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Xray(#[from] XrayError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
