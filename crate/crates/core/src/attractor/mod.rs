//! Stationary states, ω-limit clouds, gradient structure, attractor
//! regularity, Hausdorff semidistance, box counting, and the
//! upper-semicontinuity sweep in `α`.

mod cloud;
mod dynamics;
mod stationary;

pub use cloud::{box_counting_dimension, dyadic_scales, hausdorff_semidistance, BoxCount, PointCloud};
pub use dynamics::{
    attractor_regularity_check, gradient_structure_check, omega_limit_ensemble, omega_limit_sample,
    upper_semicontinuity_scan, GradientReport, RegularityReport, SamplingParams, UscReport,
};
pub use stationary::{stationary_jacobian, stationary_solve, StationarySolution};
