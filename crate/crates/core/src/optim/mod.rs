//! Zeroth-order gradient estimators and the stochastic-approximation loop.

mod estimators;
mod objective;
mod perturbation;
mod sa;
mod schedule;

pub use estimators::{psr_gradient, spsa_gradient, two_point_gradient, CSchedule, Estimate, GradEstimator};
pub use objective::{FnObjective, Objective, ShiftSite};
pub use perturbation::{PerturbationDist, PerturbationKind, MIN_GAUSSIAN_COMPONENT};
pub use sa::{fmt_f64, sa_run, select_random_index, select_random_iterate, RunOptions, Trajectory, DIVERGENCE_NORM};
pub use schedule::StepSchedule;
