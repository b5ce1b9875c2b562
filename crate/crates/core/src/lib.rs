//! Multisoliton solutions of the two-dimensional principal chiral model by
//! Darboux transformations, written as quasideterminants, together with
//! numerical checks of every invariant the construction relies on.
//!
//! ```
//! use chiral_core::{iterate_product, iterate_qdet, DarbouxChain, SpacetimePoint};
//! use num_complex::Complex64;
//!
//! let chain = DarbouxChain::su2(1.0, 1.0, &[1.0, 2.0]).unwrap();
//! let x = SpacetimePoint::from_tx(0.5, -1.0);
//! let lambda = Complex64::new(0.2, 0.3);
//! let a = iterate_product(&chain, lambda, x).unwrap();
//! let b = iterate_qdet(&chain, lambda, x).unwrap();
//! assert!((&a.v - &b.v).frobenius_norm() < 1e-9 * a.v.frobenius_norm());
//! ```

pub mod darboux;
pub mod error;
pub mod matcore;
pub mod model;
pub mod quasidet;
pub mod report;
pub mod su2;
pub mod tolerance;
pub mod verify;

pub use darboux::{
    build_m, build_s, darboux_matrix, iterate_product, iterate_qdet, projector_path,
    s_conditions_residual, transform_state, unitarity_checks, ChainPoint, ChainValues,
    DarbouxChain, DarbouxStep, ProjectorForm, SpectralData,
};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, ComplexScalar};
pub use model::{
    column_solution, deriv_lightcone, eom_residual, lax_residual, make_seed_su2, Currents,
    Direction, Grid, LaxSolution, SeedSolution, SpacetimePoint,
};
pub use quasidet::{check_homological, check_nc_jacobi, qdet_block, qdet_scalar, BlockGrid};
pub use report::{ReportEntry, ResidualReport, Severity};
pub use su2::{
    asymptotic_g, one_soliton, rs_profile, two_soliton, AsymptoticSign, RsProfile, SolitonParams,
    TwoSolitonParams,
};
pub use tolerance::Tolerances;
pub use verify::{convergence_study, run_full_suite, StudyTarget, SuiteConfig, SuiteReport};
