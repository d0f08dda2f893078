//! Calibration of the outage penalty on a set of training slots.
//!
//! With a fixed penalty `lambda`, a binding slot outages exactly when
//! `lambda` is below its critical value `rate_max - rate_safe`. The empirical
//! outage count is therefore a step function of `lambda`, and the smallest
//! penalty meeting the budget is an order statistic of the critical values.

use rayon::prelude::*;

use crate::channel::{ChannelDraw, SystemParams};
use crate::error::{Error, Result};
use crate::timeshare::SlotAnalysis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    /// Outage penalty, in rate units (bits/s/Hz).
    pub lambda: f64,
    pub train_outage_fraction: f64,
    /// The outage budget forced a positive penalty.
    pub binding: bool,
}

/// Largest outage count `k` with `k / n <= epsilon`.
pub fn allowed_outages(epsilon: f64, n: usize) -> usize {
    let total = n as f64;
    let mut k = ((epsilon * total).floor().max(0.0) as usize).min(n);
    while k > 0 && k as f64 / total > epsilon {
        k -= 1;
    }
    while k < n && (k + 1) as f64 / total <= epsilon {
        k += 1;
    }
    k
}

pub fn critical_lambda(draw: &ChannelDraw, params: &SystemParams) -> Option<f64> {
    SlotAnalysis::new(draw, params).critical_lambda()
}

pub fn outage_count(draws: &[ChannelDraw], params: &SystemParams, lambda: f64) -> usize {
    draws
        .par_iter()
        .filter(|d| SlotAnalysis::new(d, params).decide(lambda).outage)
        .count()
}

pub fn outage_fraction(draws: &[ChannelDraw], params: &SystemParams, lambda: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::EmptyRun);
    }
    Ok(outage_count(draws, params, lambda) as f64 / draws.len() as f64)
}

/// The `(budget+1)`-th largest critical penalty, or 0 when at most `budget`
/// slots are binding. Slots with a critical value strictly above the result
/// outage; ties back off.
pub fn penalty_for_budget(mut critical: Vec<f64>, budget: usize) -> f64 {
    if critical.len() <= budget {
        return 0.0;
    }
    let (_, kth, _) = critical.select_nth_unstable_by(budget, |a, b| b.total_cmp(a));
    *kth
}

/// Smallest penalty whose training outage fraction stays within `epsilon`.
///
/// With `K` allowed outages and critical values sorted in decreasing order,
/// the penalty is the `(K+1)`-th largest value: the `K` slots above it keep
/// their maximizer, and every slot at or below it backs off.
pub fn calibrate_lambda(
    train_draws: &[ChannelDraw],
    params: &SystemParams,
) -> Result<CalibrationResult> {
    if train_draws.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let critical: Vec<f64> = train_draws
        .par_iter()
        .filter_map(|d| critical_lambda(d, params))
        .collect();
    let lambda = penalty_for_budget(critical, allowed_outages(params.epsilon, train_draws.len()));
    let train_outage_fraction = outage_fraction(train_draws, params, lambda)?;
    Ok(CalibrationResult {
        lambda,
        train_outage_fraction,
        binding: lambda > 0.0,
    })
}
