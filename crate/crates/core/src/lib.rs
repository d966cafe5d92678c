//! Pass/fail rulings for students who missed one of four core exams.
//!
//! The missing grade is imputed from the other three, either by an ordinary
//! least-squares model ([`regression`]) or by a similar-case /
//! nearest-neighbor class ([`hybrid`]). [`evaluation`] measures both kinds of
//! misclassification over repeated random splits, and [`rescue`] turns
//! repeated estimates into a majority-vote ruling for a single student.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod hybrid;
pub mod ingest;
pub mod model;
pub mod regression;
pub mod report;
pub mod rescue;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
pub use model::{band_of, is_passing, Grade, GradeBand, Observation, PassFail, StudentRecord, TargetIndex};
