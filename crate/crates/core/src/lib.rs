//! Heralded N00N-state reduction through cascaded eraser units.
//!
//! A state `(|N,0⟩ + e^{iNφ}|0,N⟩)/√2` passes through a chain of units. Each
//! unit taps both arms with a beamsplitter of reflectance `ρ`, erases the
//! which-way information on a balanced beamsplitter and counts photons at two
//! detectors. Heralded events lower the photon number while keeping the
//! `N`-fold phase, ending in the single-photon state `|1::0⟩^{Nφ}`.

pub mod cascade;
pub mod error;
pub mod fock;
pub mod montecarlo;
pub mod unit;

pub use cascade::{
    analytics, critical_reflectance, efficiency_penalty, efficiency_sweep, even_analytics,
    odd_analytics, odd_analytics_with, optimal_schedule, resolving_analytics, resolving_optimum,
    AnalyticsReport, CascadeSpec, DetectionScheme, OddBranchWeights, OptimalSchedule, Parity,
    PhaseCorrection, ResolvingReport, SweepRow,
};
pub use error::{Error, Result};
pub use fock::{
    apply_beamsplitter, apply_phase, fidelity, make_noon, FockState, Ket, ModeLabel, NoonSpec,
    PureState, Reflectance,
};
pub use montecarlo::{
    compare, simulate_cascade, simulate_resolving, Comparison, DetectorKind, DetectorModel,
    ExactRates, Prediction, ProtocolKind, Shot, Simulation, SimulationReport, Tally, Verdict,
};
pub use unit::{
    detection_table, prob_closed_form, unit_propagate, which_way_propagate, DetectionEvent,
    UnitOutcome,
};
