//! Primal lower regularity and regular slopedness: certificates, the
//! PLR-preserving transforms, the series bound and representation sequences.

pub mod certificate;
pub mod representation;
pub mod sampling;
pub mod series;
pub mod transforms;

pub use certificate::{
    analytic_slopes, certify_plr, certify_plr_with, certify_regular_slope, PlrCertificate, PlrViolation,
    RegularSlopeCertificate, SlopeViolation, Status,
};
pub use representation::{
    first_index, representation_sequence, representation_sequence_on_grid, RepresentationReport,
    RepresentationStep,
};
pub use sampling::Sampling;
pub use series::{verify_series_bound, SeriesReport};
pub use transforms::{add_convex_plr, scale_plr, sharp_min_expr, sharp_min_transform, AddConvexReport, SharpMinReport};
