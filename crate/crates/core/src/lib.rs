//! Stability analysis of finite-dimensional quantum Markov semigroups in the
//! Heisenberg picture.
//!
//! Everything is generic over the real scalar `T: Real` (`f32` or `f64`);
//! the `*64` and `*32` aliases below fix it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod generator;
pub mod invariant;
pub mod lyapunov;
pub mod operator;
pub mod scalar;
pub mod sparse;
pub mod synthesis;
pub mod verdict;

pub use nalgebra::Complex;

pub use dynamics::{
    evolve, expectation_series, invariant_set_probe, lasalle_diagnostics, mean_bound_check, EvolveOptions, Method,
    Trajectory,
};
pub use error::{Error, Result};
pub use generator::{
    dissipation_functional, dissipator, generator_heisenberg, generator_schroedinger, liouvillian, ModelSpec, Side,
    Superoperator,
};
pub use invariant::{
    connectivity_check, connectivity_scan, faithfulness_check, steady_states, subharmonicity_check, uniqueness_check,
    Uniqueness,
};
pub use lyapunov::{
    check_ground_convergence, check_lasalle_pair, check_lyapunov, check_weak_lyapunov, coercivity_assess,
    lyapunov_search, tightness_tail_bound, CheckOptions, LaSalleVariant, LyapunovCertificate,
};
pub use operator::{
    psd_check, spectral_decompose, ComplexMatrix, ComplexVector, DensityMatrix, HermitianOperator, PsdVerdict,
    SpectralDecomposition,
};
pub use scalar::Real;
pub use synthesis::{
    solve_ground_coupling, synthesize_coupling, verify_synthesis, CouplingPair, SynthesisResult, SynthesisSpec,
};
pub use verdict::Verdict;

pub type C64 = Complex<f64>;
pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type ComplexVector64 = ComplexVector<f64>;
pub type HermitianOperator64 = HermitianOperator<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type ModelSpec64 = ModelSpec<f64>;
pub type Trajectory64 = Trajectory<f64>;

pub type C32 = Complex<f32>;
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type ComplexVector32 = ComplexVector<f32>;
pub type HermitianOperator32 = HermitianOperator<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type ModelSpec32 = ModelSpec<f32>;
pub type Trajectory32 = Trajectory<f32>;
