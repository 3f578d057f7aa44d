//! Simultaneous estimation of ordered location parameters `θ1 ≤ θ2` of a
//! bivariate symmetric model `X = θ + Z`.
//!
//! Estimators of the equivariant form `(X1 - ψ(D), X2 + ψ(D))`, `D = X2 - X1`,
//! live in [`estimators`]; their risk, exact and simulated, in [`risk`].
//! [`model`] holds the densities and losses, [`data`] the paired-data
//! input, and [`verify`] a numeric check battery.
//!
//! ```
//! use ordloc::estimators::{bz_squared, restricted_mle};
//! use ordloc::model::NormalLocationModel;
//!
//! let model = NormalLocationModel::from_variance(0.418, 0.626)?;
//! let (a, b) = restricted_mle().estimate(23.077, 22.654);
//! assert!((a - 22.8655).abs() < 1e-9 && a == b);
//! let (a, b) = bz_squared(model).estimate(23.077, 22.654);
//! assert!(a < b);
//! # Ok::<(), ordloc::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod estimators;
pub mod model;
pub mod numerics;
pub mod risk;
pub mod verify;

pub use error::{Error, Result};

// Runs the guide's code blocks as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/boundary.md")]
    mod boundary {}
    #[doc = include_str!("../../../book/src/risk.md")]
    mod risk {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/verify.md")]
    mod verify {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
