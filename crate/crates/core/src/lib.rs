//! Pulse-modulated impulsive dosing control for third-order positive Wiener
//! plants.
//!
//! The crate covers the whole design chain:
//!
//! * [`matfun3`] — exact matrix functions of the compartment chain matrix and
//!   a closed-form cubic eigen-solver;
//! * [`plant`] — the PK/PD Wiener patient model;
//! * [`cycle`] — the periodic 1-cycle fixed point, its Jacobian, the complete
//!   analytic stability test and convergence-rate optimisation;
//! * [`design`] — piecewise-affine modulation functions from chosen slopes;
//! * [`sim`] — exact event-driven simulation of the hybrid closed loop and of
//!   open-loop schedules;
//! * [`cohort`] — virtual-patient cohorts and population evaluation.
//!
//! ```
//! use pulsedose_core::cycle::Linearization;
//! use pulsedose_core::design::design_modulation;
//! use pulsedose_core::sim::{simulate_closed_loop, trace_metrics};
//! use pulsedose_core::{CycleTarget, PlantParams, SaturationBounds, SlopePair, StateVec};
//!
//! let plant = PlantParams::population_mean();
//! let target = CycleTarget::new(20.0, 200.0)?;
//! let slopes = SlopePair::new(-2.0, 0.7)?;
//!
//! let report = Linearization::new(&plant, &target).stability_report(&slopes);
//! assert!(report.stable && report.rho < 0.25);
//!
//! let law = design_modulation(&plant, &target, &slopes, &SaturationBounds::default())?.config;
//! let trace = simulate_closed_loop(&plant, &law, &StateVec::ZERO, 240.0, 0.01)?;
//! let m = trace_metrics(&trace, 20.0)?;
//! assert!(m.inf_y > 2.0 && m.sup_y_t_5t < 10.0);
//! # Ok::<(), pulsedose_core::Error>(())
//! ```

pub mod cohort;
pub mod constants;
pub mod cycle;
pub mod design;
pub mod error;
pub mod linalg;
pub mod matfun3;
pub mod plant;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::{Mat3, Vec3};
pub use matfun3::{EigenKind, Spectrum3};
pub use plant::{PlantParams, StateVec};

pub use cohort::{EvaluationReport, EvaluationSettings, LogNormalParams, PatientOutcome, PatientRecord, Policy};
pub use cycle::{
    CycleTarget, FixedPoint, Linearization, RateOptimum, SearchMode, SlopeBox, SlopeMode, SlopePair, StabilityReport,
};
pub use design::{Controller, Design, FirstPulse, ModulationConfig, SaturationBounds};
pub use sim::{DoseSchedule, PulseModulator, SimTrace, TraceMetrics};
