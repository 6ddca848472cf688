//! Local slopes, Ekeland points, descent orbits and primal lower regularity
//! on finite metric spaces and Euclidean grids, together with a harness that
//! checks subdifferential determination of PLR functions on concrete
//! instances.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod determination;
pub mod ekeland;
pub mod error;
pub mod extended;
pub mod linalg;
pub mod metric_space;
pub mod orbit;
pub mod plr;
pub mod slope;
pub mod subdifferential;

pub use error::{Error, Result};
pub use extended::ExtReal;
