//! Numerical laboratory for random power series `F(z) = Σ X_k z^k` with
//! independent coefficients.
//!
//! The crate samples coefficient realizations, evaluates partial sums on
//! circles and arcs, measures boundary functionals along radius schedules,
//! and checks the probabilistic inequalities behind strong natural
//! boundaries against exact closed forms and Monte Carlo.
//!
//! Start with [`laws::CoeffLaw`] and [`laws::LawSequence`], then see the
//! runnable programs under `examples/`.

// `!(x > 0.0)` is the idiom used throughout to reject NaN alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod error;
pub mod expr;
pub mod functionals;
pub mod inequalities;
pub mod laws;
pub mod potential;
pub mod rng;
pub mod roots;
pub mod runner;
pub mod series;
pub mod stats;

pub use error::{LabError, Result};
pub use laws::{CoeffLaw, LawSequence};
pub use rng::Stream;

pub use series::{ArcSpec, Radius, SeriesSample};
