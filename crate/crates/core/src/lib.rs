//! Optimal time sharing between RF energy harvesting and information
//! transmission for an underlay cognitive radio link.
//!
//! The secondary transmitter harvests from the primary transmitter for part
//! of every slot and spends the energy transmitting for the rest. The split
//! is chosen per slot to maximize the rate, while a penalty calibrated on
//! training slots keeps the fraction of slots that push interference at the
//! primary receiver above its cap within a budget.
//!
//! Modules, bottom up:
//! - [`channel`]: parameters, fading draws, unit conversions.
//! - [`timeshare`]: the per-slot rule.
//! - [`calibrate`]: fitting the outage penalty.
//! - [`montecarlo`]: policy runs and aggregate metrics.
//! - [`experiment`]: CLI sweeps and CSV output.

pub mod calibrate;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod timeshare;

pub use calibrate::{calibrate_lambda, critical_lambda, outage_fraction, CalibrationResult};
pub use channel::{
    db_to_linear, dbm_to_watts, draw_slot, snr_factor, watts_to_dbm, ChannelDraw, Phase,
    SlotStreams, SystemParams,
};
pub use error::{Error, Result};
pub use montecarlo::{
    decide, run, run_scenario, run_scenario_with, CalibrationMode, Policy, RunMetrics,
    ScenarioResult, SlotRecord,
};
pub use timeshare::{
    alpha_boundary, alpha_unconstrained, choose_alpha, outage_indicator, rate, solve_z0,
    transmit_power, SlotAnalysis, SlotDecision,
};
