//! Numerical kernels shared by the codec and the analytic engine.

pub mod normal;
pub mod quadrature;
pub mod truncated;
pub mod window;

pub use normal::{bivariate_normal_pdf, bvn_cdf, bvn_rect, normal_cdf, normal_pdf};
pub use quadrature::{integrate_cell_2d, QuadratureRule};
pub use window::{cell_window_integral, AffineBound, CellIntegrator, WindowMoments, WINDOW_INFINITY};
