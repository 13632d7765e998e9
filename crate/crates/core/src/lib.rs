//! Symmetric tensor calculus, ray transforms and normal operators for
//! tensor tomography, with exact and numerical identity checks.

pub mod linalg;
pub mod normalops;
pub mod poly;
pub mod polyfield;
pub mod rng;
pub mod scalar;
pub mod symtensor;
pub mod gauss;
pub mod spherequad;
pub mod xray;
