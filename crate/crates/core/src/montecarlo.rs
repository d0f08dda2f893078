//! Monte Carlo evaluation of time-sharing policies over block-fading slots.

use rayon::prelude::*;

use crate::calibrate::{calibrate_lambda, CalibrationResult};
use crate::channel::{snr_factor, ChannelDraw, Phase, SlotStreams, SystemParams};
use crate::error::{Error, Result};
use crate::timeshare::{
    alpha_boundary, alpha_unconstrained, rate_unchecked, transmit_power_unchecked, SlotAnalysis,
    SlotDecision,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Penalized optimal rule with a calibrated outage penalty.
    OptimalTimeShare { lambda: f64 },
    /// Same split in every slot; outages are recorded, not prevented.
    FixedAlpha { alpha: f64 },
    /// Per-slot rate maximizer ignoring primary protection (upper bound).
    Unconstrained,
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Policy::OptimalTimeShare { lambda } if lambda.is_nan() || lambda < 0.0 => {
                Err(Error::invalid("lambda", format!("{lambda} is negative")))
            }
            Policy::FixedAlpha { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::invalid("alpha", format!("{alpha} is not in (0, 1)")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::OptimalTimeShare { .. } => "optimal",
            Policy::FixedAlpha { .. } => "fixed",
            Policy::Unconstrained => "unconstrained",
        }
    }
}

/// Aggregates of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Average achievable rate, bits/s/Hz.
    pub avg_rate: f64,
    /// Average secondary transmit power, watts.
    pub p_he: f64,
    pub outage_fraction: f64,
    pub m_slots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub slot_index: usize,
    pub draw: ChannelDraw,
    pub decision: SlotDecision,
}

pub fn decide(policy: &Policy, draw: &ChannelDraw, params: &SystemParams) -> SlotDecision {
    match *policy {
        Policy::OptimalTimeShare { lambda } => SlotAnalysis::new(draw, params).decide(lambda),
        Policy::Unconstrained => {
            let s = snr_factor(draw, params);
            fixed_decision(alpha_unconstrained(s), s, draw, params)
        }
        Policy::FixedAlpha { alpha } => {
            fixed_decision(alpha, snr_factor(draw, params), draw, params)
        }
    }
}

fn fixed_decision(alpha: f64, s: f64, draw: &ChannelDraw, params: &SystemParams) -> SlotDecision {
    SlotDecision {
        alpha,
        outage: alpha < alpha_boundary(draw.g, draw.z, params.pt, params.gamma_th),
        rate: rate_unchecked(alpha, s),
        tx_power: transmit_power_unchecked(alpha, draw.g, params.pt),
    }
}

/// `count` consecutive draws of a phase, starting at slot 0.
pub fn generate_draws(params: &SystemParams, phase: Phase, count: usize) -> Vec<ChannelDraw> {
    let streams = SlotStreams::new(params.seed, phase);
    (0..count)
        .into_par_iter()
        .map(|i| streams.draw(i as u64, params))
        .collect()
}

pub fn training_draws(params: &SystemParams) -> Vec<ChannelDraw> {
    generate_draws(params, Phase::Training, params.m_train)
}

pub fn evaluation_draws(params: &SystemParams) -> Vec<ChannelDraw> {
    generate_draws(params, Phase::Evaluation, params.m_slots)
}

/// Sums in a fixed binary-tree order that does not depend on threading.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

impl RunMetrics {
    pub fn from_decisions(decisions: &[SlotDecision]) -> Result<Self> {
        if decisions.is_empty() {
            return Err(Error::EmptyRun);
        }
        let n = decisions.len() as f64;
        let rates: Vec<f64> = decisions.iter().map(|d| d.rate).collect();
        let powers: Vec<f64> = decisions.iter().map(|d| d.tx_power).collect();
        let outages = decisions.iter().filter(|d| d.outage).count();
        Ok(RunMetrics {
            avg_rate: pairwise_sum(&rates) / n,
            p_he: pairwise_sum(&powers) / n,
            outage_fraction: outages as f64 / n,
            m_slots: decisions.len(),
        })
    }
}

pub fn decide_all(
    policy: &Policy,
    draws: &[ChannelDraw],
    params: &SystemParams,
) -> Vec<SlotDecision> {
    draws
        .par_iter()
        .map(|d| decide(policy, d, params))
        .collect()
}

/// Runs `policy` over the given draws; the first `trace` slots are returned
/// as records.
pub fn run_on_draws(
    policy: &Policy,
    draws: &[ChannelDraw],
    params: &SystemParams,
    trace: usize,
) -> Result<(RunMetrics, Vec<SlotRecord>)> {
    policy.validate()?;
    let decisions = decide_all(policy, draws, params);
    let metrics = RunMetrics::from_decisions(&decisions)?;
    let records = draws
        .iter()
        .zip(&decisions)
        .take(trace)
        .enumerate()
        .map(|(slot_index, (draw, decision))| SlotRecord {
            slot_index,
            draw: *draw,
            decision: *decision,
        })
        .collect();
    Ok((metrics, records))
}

/// Runs `policy` over the evaluation slots of `params`.
pub fn run(policy: &Policy, params: &SystemParams) -> Result<RunMetrics> {
    run_with_trace(policy, params, 0).map(|(m, _)| m)
}

pub fn run_with_trace(
    policy: &Policy,
    params: &SystemParams,
    trace: usize,
) -> Result<(RunMetrics, Vec<SlotRecord>)> {
    params.validate()?;
    run_on_draws(policy, &evaluation_draws(params), params, trace)
}

/// Where the penalty is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CalibrationMode {
    /// Fresh training slots from an independent stream.
    #[default]
    OutOfSample,
    /// The evaluation slots themselves.
    InSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub policy: Policy,
    pub metrics: RunMetrics,
    pub trace: Vec<SlotRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub calibration: CalibrationResult,
    pub optimal: PolicyRun,
    pub fixed: PolicyRun,
    pub unconstrained: PolicyRun,
}

impl ScenarioResult {
    pub fn runs(&self) -> [&PolicyRun; 3] {
        [&self.optimal, &self.fixed, &self.unconstrained]
    }
}

pub fn run_scenario(params: &SystemParams) -> Result<ScenarioResult> {
    run_scenario_with(params, CalibrationMode::OutOfSample, 0)
}

/// Calibrates the penalty, then runs the optimal, fixed (alpha = 0.5) and
/// unconstrained policies on the same evaluation slots.
pub fn run_scenario_with(
    params: &SystemParams,
    mode: CalibrationMode,
    trace: usize,
) -> Result<ScenarioResult> {
    params.validate()?;
    let eval = evaluation_draws(params);
    let calibration = match mode {
        CalibrationMode::OutOfSample => calibrate_lambda(&training_draws(params), params)?,
        CalibrationMode::InSample => calibrate_lambda(&eval, params)?,
    };
    let policy_run = |policy: Policy| -> Result<PolicyRun> {
        let (metrics, trace) = run_on_draws(&policy, &eval, params, trace)?;
        Ok(PolicyRun {
            policy,
            metrics,
            trace,
        })
    };
    Ok(ScenarioResult {
        calibration,
        optimal: policy_run(Policy::OptimalTimeShare {
            lambda: calibration.lambda,
        })?,
        fixed: policy_run(Policy::FixedAlpha { alpha: 0.5 })?,
        unconstrained: policy_run(Policy::Unconstrained)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams {
            m_slots: 2000,
            m_train: 2000,
            ..SystemParams::default()
        }
    }

    #[test]
    fn fixed_alpha_examples() {
        let p = SystemParams {
            pt: 1.0,
            noise: 1.0,
            gamma_th: 1.0,
            ..params()
        };
        // s = g pt x / (y pt + noise) = 3
        let d = ChannelDraw {
            x: 3.0,
            y: 0.0,
            g: 1.0,
            z: 3.0,
        };
        let dec = decide(&Policy::FixedAlpha { alpha: 0.5 }, &d, &p);
        assert!((dec.rate - 1.0).abs() < 1e-15);
        // boundary 3/(3+1) = 0.75 > 0.5
        assert!(dec.outage);
        assert_eq!(dec.tx_power, 1.0);
    }

    #[test]
    fn policy_validation() {
        assert!(Policy::FixedAlpha { alpha: 1.0 }.validate().is_err());
        assert!(Policy::FixedAlpha { alpha: 0.0 }.validate().is_err());
        assert!(Policy::OptimalTimeShare { lambda: -1.0 }
            .validate()
            .is_err());
        assert!(Policy::OptimalTimeShare { lambda: f64::NAN }
            .validate()
            .is_err());
        assert!(Policy::Unconstrained.validate().is_ok());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn silent_link_has_zero_rate() {
        let p = SystemParams {
            mu_x: 1e-300,
            ..params()
        };
        let m = run(&Policy::Unconstrained, &p).unwrap();
        assert!(m.avg_rate < 1e-200);
        let p = SystemParams {
            mu_g: 1e-300,
            ..params()
        };
        assert!(run(&Policy::Unconstrained, &p).unwrap().avg_rate < 1e-200);
    }

    #[test]
    fn trace_is_bounded_and_consistent() {
        let p = params();
        let (m, trace) = run_with_trace(&Policy::Unconstrained, &p, 5).unwrap();
        assert_eq!(m.m_slots, p.m_slots);
        assert_eq!(trace.len(), 5);
        for rec in &trace {
            assert_eq!(rec.decision, decide(&Policy::Unconstrained, &rec.draw, &p));
        }
    }

    #[test]
    fn scenario_orders_policies() {
        let r = run_scenario(&params()).unwrap();
        assert!(r.unconstrained.metrics.avg_rate >= r.optimal.metrics.avg_rate);
        assert!(r.calibration.train_outage_fraction <= params().epsilon);
    }
}
