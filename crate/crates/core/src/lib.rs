//! Interlaced least-squares and DREM parameter estimators for linearly and
//! nonlinearly parameterized regressions, in continuous and discrete time.
//!
//! The crate is organised bottom-up:
//!
//! * [`regression`]: the parameterization `G`, regressor extension and
//!   mixing, excitation tests and assumption checkers.
//! * [`ct`] and [`dt`]: the estimators themselves.
//! * [`baselines`]: normalized gradient and RLS for comparison.
//! * [`scenarios`]: reproducible example plants and the scenario runner.
//! * [`io`]: configuration parsing, trace export and the property suites
//!   behind `relaxls check`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod ct;
pub mod dt;
pub mod error;
pub mod io;
pub mod linalg;
pub mod regression;
pub mod scenarios;

pub use error::{Error, Result};
pub use regression::{MonotoneMap, RegressionSample, ScalarRegression};
