//! Light-cone kernels, line-integral weight functions, convolution identities
//! and conserved surface-layer functionals, each paired with an independent
//! brute-force oracle.

pub mod clifford;
pub mod quad;
pub mod kernels;
pub mod lineint;
pub mod convolution;
pub mod fields;
pub mod slayer;
pub mod report;
