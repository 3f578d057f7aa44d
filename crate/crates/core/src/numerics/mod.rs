//! Special functions, quadrature, root finding, interpolation and sampling.

pub mod interp;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod special;

pub use interp::MonotoneCubic;
pub use quad::{integrate, Integral, Quadrature, DEFAULT_ABS_TOL};
pub use rng::{sample_bivariate_normal, BivariateNormal, Rng};
pub use roots::{find_root, find_root_expanding, DEFAULT_MAX_EXPANSIONS, DEFAULT_ROOT_TOL};
pub use special::{
    checked_std_normal_pdf, inverse_mills_ratio, std_normal_cdf, std_normal_log_cdf,
    std_normal_pdf, std_normal_quantile,
};
