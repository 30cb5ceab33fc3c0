//! Truncated analytic series on parametrized norm scales, k-bounded operator
//! certificates, Lie-series exponentials and infinite products, and
//! Kolmogorov-type normal-form iterations with small-divisor inverses.
//!
//! The crate works at jet level throughout: every series carries a total
//! order cap and all operations are exact modulo degrees above the cap.
//! Convergence statements are surfaced as filtration orders, norm traces and
//! composable (k,τ,N) certificates rather than claims about full germs.
//!
//! Entry points by theme:
//! - [`series::TruncatedSeries`] and [`scale::ScaleFamily`]: sparse jets and
//!   the majorant/Hilbert/strip norms.
//! - [`bound`]: operators with (k,τ,N) certificates, condition (E),
//!   exponentials and infinite products.
//! - [`dioph`]: σ-norms, cutoff-bounded diophantine certificates, Siegel
//!   divisor tables and the small-divisor inverse series.
//! - [`iterate`]: the Kolmogorov, Newton, Picard and transversal engines.
//! - [`morse`], [`siegel`], [`torus`], [`singular`]: the worked instances.
//!
//! A narrative guide with runnable snippets lives in `book/`; its chapters
//! are compiled into [`guide`] so `cargo test --doc` keeps them in sync with
//! the library.

pub mod bound;
pub mod coeff;
pub mod dioph;
pub mod error;
pub mod field;
pub mod guide;
pub mod index;
pub mod io;
pub mod iterate;
pub mod morse;
pub mod scale;
pub mod series;
pub mod siegel;
pub mod singular;
pub mod torus;

pub use bound::{
    check_condition_e, compose_bound, condition_e_grid, estimate_bound, exp_neg_operator,
    exp_operator, gamma_inequality_check, infinite_product, jet_operator_norm, n_fold_bound,
    BoundProfile, ConvergenceCert, DiagRule, ExpPolicy, SeriesOperator, TailRule, Verdict,
};
pub use coeff::{ratio, Coeff, ExactC};
pub use dioph::{
    min_small_divisor, min_small_divisor_exact, siegel_divisors, sigma, small_divisor_series,
    DiophantineCert, Frequency,
};
pub use error::Error;
pub use field::VectorField;
pub use index::{MultiIndex, Signature};
pub use iterate::{
    kolmogorov_iterate, newton_iterate, picard_iterate, residual_bound,
    residual_bound_transversal, transversal_iterate, IterationTrace, ScaledAction, Schedule,
    StepPrecision, Strategy,
};
pub use morse::{morse_reduce, MorseProblem, MorseResult};
pub use num_complex::Complex64;
pub use scale::ScaleFamily;
pub use series::{compose_maps, invert_map, TruncatedSeries};
pub use siegel::{conjugacy_defect, siegel_linearize, SiegelProblem, SiegelResult};
pub use singular::{singular_kam_step, SingularKam, SingularResult};
pub use torus::{
    homological_correction, isochronic_check, kam_transversal_step, Hamiltonian, KamResult,
    TorusKam,
};
