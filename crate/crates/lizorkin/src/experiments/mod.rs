//! Verification studies: configuration, runners and report emission.

pub mod config;
pub mod report;
pub mod studies;
pub mod suite;

pub use config::{Study, StudyConfig};
pub use report::{Check, Row, StudyReport};
pub use studies::{
    init_workers, run_study, study_composition, study_equivalence, study_extension, study_holder,
    study_interpolation, study_inverse, WORKERS_ENV,
};
pub use suite::{default_suite, SuiteFunction};
