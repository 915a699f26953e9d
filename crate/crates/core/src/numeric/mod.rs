//! Numerical building blocks: the exponential integral, adaptive
//! Gauss-Kronrod quadrature and one-dimensional golden-section search.

pub mod e1;
pub mod quad;
pub mod search;

pub use e1::{exp_integral_e1, exp_integral_e1_cf, exp_integral_e1_series, SERIES_CUTOFF};
pub use quad::{integrate, integrate_with_breaks, Integral, Tolerance};
pub use search::{golden_section_max, SearchResult};
