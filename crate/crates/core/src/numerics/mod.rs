pub mod cheb;
mod dop853_tableau;
pub mod fit;
pub mod linalg;
pub mod logval;
pub mod ode;
pub mod quad;
