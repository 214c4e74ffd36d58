//! Manufactured solutions, error norms, convergence studies and the
//! invariant checks run by the property suite.

mod audit;
mod discrete;
mod eoc;
mod mms;
mod norms;
mod projections;
pub mod properties;
mod studies;

pub use audit::{mass_conservation_audit, MassAudit};
pub use discrete::DiscreteMms;
pub use eoc::{eoc, Eoc};
pub use mms::{default_mms, ExactFields, MmsCase, TimeFunction, ZeroFields};
pub use norms::{error_norms, field_errors, ErrorReport, FieldErrors};
pub use projections::{projection_errors, projection_p1, projection_p2, projection_p3, ProjectionErrors};
pub use studies::{
    polynomial_exactness, projection_study, spatial_study, temporal_study, ExactnessReport, ProjectionStudy,
    SpatialStudy, StudyRow, StudySettings, TemporalStudy,
};
