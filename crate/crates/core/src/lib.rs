//! Numerical toolkit for the linear stability of ZND detonations.

pub mod atlas;
pub mod error;
pub mod evans1d;
pub mod hifreq;
pub mod multid;
pub mod numerics;
pub mod oscint;
pub mod profile;

pub use error::{Error, Result};
pub use numerics::logval::LogComplex;
