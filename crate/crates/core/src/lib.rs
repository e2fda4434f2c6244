//! Non-stationary subdivision with integer dilation matrices, and the
//! algebraic conditions for generating and reproducing exponential polynomials.

pub mod catalog;
pub mod checker;
pub mod cli;
pub mod engine;
pub mod error;
pub mod io;
pub mod lattice;
pub mod scheme;
pub mod space;
pub mod symbol;

pub use checker::{
    check_generation, check_reproduction, normalize, solve_tau, stepwise_test, ConditionRecord,
    ConditionReport, StepwiseReport, Verdict, DEFAULT_TOL,
};
pub use engine::{
    apply_operator, basic_limit_samples, is_interpolatory, refine, sample_exp_poly, GridData,
    Window,
};
pub use error::{Error, Result};
pub use lattice::{
    coset_reps, dual_coset_points, q_eval, v_sets, CosetSet, DilationMatrix, Parametrization,
};
pub use scheme::{SchemeSpec, SymbolRule};
pub use space::{ExpPolyPair, ExpPolySpace};
pub use symbol::LaurentSymbol;
