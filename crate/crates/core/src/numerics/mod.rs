//! Numerical kernels shared by the physics modules.

pub mod fixed_point;
pub mod oscillatory;
pub mod quadrature;
pub mod richardson;
pub mod roots;
pub mod special;
pub mod volterra;

pub use fixed_point::{fixed_point, FixedPoint, FixedPointOptions};
pub use oscillatory::{integrate_oscillatory, FilonOptions, FilonRule, Oscillation};
pub use quadrature::{integrate_adaptive, integrate_principal_value, Quadrature, QuadratureSpec};
pub use roots::find_root_bracketed;
pub use volterra::{solve_convolution, volterra_step};
