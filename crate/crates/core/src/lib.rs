//! Gaussian-process tracking control under computational delay.
//!
//! The crate simulates a chained-integrator plant whose unknown nonlinearity
//! is compensated by GP predictions that take simulated computation time to
//! produce: each prediction is started at a schedule time, commits after the
//! model-size-dependent delay, and is held constant until the next commit.
//! On top of the closed loop sit the uniform GP error bound, the
//! delay-aware tracking bounds with their constants, an event-triggered
//! online update rule with data eviction, and a certificate comparing
//! offline training against online updates.
//!
//! Modules map onto the moving parts:
//!
//! * [`gp`] - per-dimension exact GP regression with incremental add/delete,
//! * [`bound`] - the uniform prediction-error bound and its constants,
//! * [`plant`], [`lyapunov`], [`tracking`] - plant, control law, and the
//!   tracking-bound constants,
//! * [`delay`], [`sim`] - delay models, evaluation schedule, and the
//!   fixed-step closed-loop integrator,
//! * [`trigger`] - the event trigger, deletion strategies, and the
//!   offline-vs-online certificate,
//! * [`experiments`] - the Monte-Carlo harness behind the CLI.
//!
//! Monte-Carlo repetitions and grid evaluations run in parallel by default;
//! build with `--no-default-features` for a fully sequential binary.

// Validation deliberately writes `!(x > 0.0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod chol;
pub mod delay;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod gp;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod lyapunov;
pub mod par;
pub mod plant;
pub mod sim;
pub mod tracking;
pub mod trigger;

pub use bound::{BoundParams, EtaBound, LipschitzConstants};
pub use delay::{DelayModel, DelaySchedule};
pub use domain::Domain;
pub use error::{Error, Result};
pub use gp::{GpModel, TrainingSet};
pub use kernel::KernelParams;
pub use plant::{ControllerGains, PlantSpec, Reference};
pub use sim::{LoopConfig, SimTrace};
pub use tracking::BoundConstants;
pub use trigger::{DeletionStrategy, TriggerPolicy};
