//! Energy and throughput analysis of dataflow networks whose actors can run
//! always-active or power themselves down between firings.
//!
//! The pipeline: build or load a [`MarkedGraph`] (directly or by unrolling an
//! [`SdfGraph`]), compute minimum periods and schedules with [`timing`],
//! minimum-energy configurations with [`milp`], and explore the
//! period/energy trade-off with [`dse`]. [`metrics`] scores fronts by
//! hypervolume.

pub mod cli;
pub mod dse;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod milp;
pub mod rational;
pub mod timing;

pub use dse::{dse_hs, dse_ps, dse_xs, pareto_filter, ExploredPoint, Front, Strategy};
pub use energy::{energy_aa, energy_sp, power_profile, total_energy};
pub use error::{Error, Result};
pub use graph::{
    repetition_vector, unroll, validate_liveness, ActorSpec, Channel, DecisionVector, Liveness, MarkedGraph,
    PowerParams, SdfActor, SdfChannel, SdfGraph,
};
pub use metrics::{hypervolume, hypervolume_ratio, normalize, NormalizationBox};
pub use milp::{min_energy_config, MilpSolution};
pub use rational::Rational;
pub use timing::{min_period, schedule_for, verify_schedule, Schedule, StartAnchor};
