//! Memory kernels from static Liouvillian moments.
//!
//! The crate builds a finite spin-boson model, computes the moments
//! `Ω_n = ⟨(iL)^n Â Â⟩ / ⟨Â Â⟩`, assembles the truncated kernel hierarchy,
//! removes its growing modes by an orthogonal spectral projection, and
//! propagates the stabilized hierarchy to obtain the memory kernel `K_1(t)`.
//! The kernel then drives a Volterra solver for the correlation function and
//! a half-range Fourier transform for spectra. An exact Liouville-space
//! oracle is provided for small models.

pub mod config;
pub mod csvio;
pub mod error;
pub mod expm;
pub mod gqme;
pub mod harness;
pub mod hierarchy;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod propagator;
pub mod spectra;
pub mod stabilizer;

pub use error::{Error, Result};
pub use faer::c64;
pub use gqme::{gqme_residual, solve_gqme, solve_gqme_with, CorrelationTrajectory, GqmeOptions};
pub use hierarchy::{
    build_generator, default_lambda, scale_initial, GeneratorMatrix, ScaledInitialCondition,
    ScalingKind, ScalingScheme,
};
pub use linalg::Operator;
pub use model::{
    build_spin_boson, discretize_ohmic, gibbs_state, ohmic_density, BathMode, ModelSystem,
    SpinParams,
};
pub use moments::{
    apply_il, compute_moments, initial_kernel_vector, pair, InitialKernelVector, MomentSequence,
    PairingContext,
};
pub use oracle::{
    exact_correlation, exact_memory_kernel, hierarchy_consistency, LiouvilleRep, OracleBudget,
};
pub use propagator::{
    extract_physical_kernel, propagate_kernel, ExpMethod, KernelTrajectory, PropagationOptions,
    TimeGrid,
};
pub use spectra::{half_fourier, lineshape, Lineshape, Spectrum};
pub use stabilizer::{
    build_projector, classify, schur_projector, spectral_decompose, stabilize, stabilize_matrix,
    EigenDecomposition, Projector, ProjectorMethod, SpectralSplit, StabilityReport,
    StabilizedGenerator, TolerancePolicy,
};
