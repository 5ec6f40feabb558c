//! Collective spin squeezing by one-axis twisting with coherent light in a
//! double-pass Faraday geometry.
//!
//! The spin is kept in the Dicke basis of a fixed total spin `S`. A pulse
//! acts on the density matrix elementwise (see [`twist`]); [`observables`]
//! extracts the squeezing ellipse, [`asymptotics`] handles large `S`,
//! [`oracle`] provides brute-force atom-light references and
//! [`feasibility`] maps laboratory parameters to the model.

pub mod asymptotics;
pub mod error;
pub mod feasibility;
pub mod observables;
pub mod optimize;
pub mod oracle;
pub mod special;
pub mod spin;
pub mod twist;

pub use error::{Error, Result};
pub use observables::{
    closed_form_report, matrix_report, qpd, QpdGrid, QpdGridSpec, QpdNormalization, SqueezingReport,
};
pub use spin::{make_css, SpinDensityMatrix, SpinMagnitude, SpinMomentSet};
pub use twist::{evolve, evolve_train, PulseTrain, TwistParameters};
