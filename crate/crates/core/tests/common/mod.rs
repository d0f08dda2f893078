//! Reference computations for tests. Nothing here calls into the solver,
//! the selection rule or the calibration of the library under test.
#![allow(dead_code)]

use cr_timeshare::{ChannelDraw, SystemParams};

/// `alpha * log2(1 + (1 - alpha) / alpha * s)` written out directly.
pub fn rate_direct(alpha: f64, s: f64) -> f64 {
    alpha * (1.0 + (1.0 - alpha) / alpha * s).log2()
}

pub fn z0_residual(z0: f64, s: f64) -> f64 {
    z0 * z0.ln() - z0 - s + 1.0
}

/// `(1 + w) ln(1 + w) - w`, the root equation shifted to `w = z - 1`. Small
/// `w` uses the alternating series `sum w^k / (k (k - 1))`, k >= 2.
pub fn shifted_residual(w: f64, s: f64) -> f64 {
    let phi = if w < 0.1 {
        let mut sum = 0.0;
        let mut power = w;
        for k in 2..60 {
            power *= w;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * power / (k * (k - 1)) as f64;
        }
        sum
    } else {
        (1.0 + w) * w.ln_1p() - w
    };
    phi - s
}

/// Bisection for `z0 - 1`, run until the bracket is two adjacent floats.
pub fn bisect_w(s: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while shifted_residual(hi, s) < 0.0 {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if shifted_residual(hi, s).abs() < shifted_residual(lo, s).abs() {
                hi
            } else {
                lo
            };
        }
        if shifted_residual(mid, s) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

pub fn bisect_z0(s: f64) -> f64 {
    1.0 + bisect_w(s)
}

/// Argmax of the rate over the grid `(k + 0.5) / n`, `k = 0..n`, and its value.
pub fn grid_argmax(s: f64, n: usize) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let a = (k as f64 + 0.5) / n as f64;
        let f = rate_direct(a, s);
        if f > best.1 {
            best = (a, f);
        }
    }
    best
}

pub fn snr(d: &ChannelDraw, p: &SystemParams) -> f64 {
    d.g * p.pt * d.x / (d.y * p.pt + p.noise)
}

pub fn boundary(d: &ChannelDraw, p: &SystemParams) -> f64 {
    let c = d.g * p.pt * d.z;
    c / (c + p.gamma_th)
}

/// Per-slot decision of the penalized rule, recomputed from scratch with
/// the bisection root. Returns (alpha, outage, rate, tx_power).
pub fn reference_decision(d: &ChannelDraw, p: &SystemParams, lambda: f64) -> (f64, bool, f64, f64) {
    let s = snr(d, p);
    let a1 = if s > 0.0 { s / (s + bisect_w(s)) } else { 1.0 };
    let a2 = boundary(d, p);
    let f = |a: f64| {
        if a >= 1.0 || s == 0.0 {
            0.0
        } else {
            rate_direct(a, s)
        }
    };
    let alpha = if a1 >= a2 || f(a1) - lambda > f(a2) {
        a1
    } else {
        a2
    };
    let power = if alpha >= 1.0 {
        0.0
    } else {
        (1.0 - alpha) / alpha * d.g * p.pt
    };
    (alpha, alpha < a2, f(alpha), power)
}

/// Brute-force calibration: bisection on lambda over `[0, 1 + max rate]`
/// for the smallest penalty whose outage count fits the budget, counting
/// outages with `count(lambda)`.
pub fn bisect_lambda(count: impl Fn(f64) -> usize, upper: f64, budget: usize) -> f64 {
    if count(0.0) <= budget {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, upper);
    assert!(count(hi) <= budget);
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if count(mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Largest k with k / n <= eps, by enumeration.
pub fn budget_by_enumeration(eps: f64, n: usize) -> usize {
    (0..=n)
        .filter(|&k| k as f64 / n as f64 <= eps)
        .max()
        .unwrap()
}
