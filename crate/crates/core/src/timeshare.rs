//! Per-slot time sharing between energy harvesting and transmission.
//!
//! A slot spends `1 - alpha` of its duration harvesting from the primary
//! transmitter and `alpha` transmitting with the full harvested energy.

use std::f64::consts::LN_2;

use crate::channel::{snr_factor, ChannelDraw, SystemParams};
use crate::error::{Error, Result};

/// Outcome of the time-sharing rule for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDecision {
    /// Fraction of the slot used for transmission, in (0, 1].
    pub alpha: f64,
    /// Interference at the primary receiver exceeds the cap.
    pub outage: bool,
    /// Achievable rate, bits/s/Hz.
    pub rate: f64,
    /// Transmit power draining the harvested energy, watts.
    pub tx_power: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha))
    }
}

/// Rate of a slot with SNR factor `s` when a fraction `alpha` is spent
/// transmitting: `alpha * log2(1 + (1 - alpha) / alpha * s)`.
pub fn rate(alpha: f64, s: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain("snr factor", s));
    }
    Ok(rate_unchecked(alpha, s))
}

pub(crate) fn rate_unchecked(alpha: f64, s: f64) -> f64 {
    if s == 0.0 || alpha >= 1.0 {
        return 0.0;
    }
    let gain = (1.0 - alpha) / alpha * s;
    if gain.is_finite() {
        alpha * gain.ln_1p() / LN_2
    } else {
        // alpha is so small that the ratio overflowed; 1 + gain == gain here.
        alpha * ((1.0 - alpha).ln() + s.ln() - alpha.ln()) / LN_2
    }
}

/// `(1 + w) ln(1 + w) - w`, accurate for small `w`.
fn harvest_excess(w: f64) -> f64 {
    if w < 0.05 {
        // sum_{k>=2} (-1)^k w^k / (k (k - 1))
        let mut term = w * w;
        let mut acc = 0.0;
        for k in 2..18u32 {
            let k = f64::from(k);
            acc += term / (k * (k - 1.0));
            term *= -w;
        }
        acc
    } else {
        (1.0 + w) * w.ln_1p() - w
    }
}

/// Solves `z ln z - z - s + 1 = 0` for `z > 1` and returns `z - 1`.
///
/// Working in `w = z - 1` keeps full relative precision as `s -> 0`, where
/// `w ~ sqrt(2 s)`. The root is kept bracketed; Newton steps that would
/// leave the bracket fall back to bisection.
pub fn solve_z0_minus_one(s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("snr factor", s));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while harvest_excess(hi) < s {
        lo = hi;
        hi *= 2.0;
    }

    let mut w = if s < 0.5 {
        let r = (2.0 * s).sqrt();
        r * (1.0 + r / 6.0)
    } else {
        0.5 * (lo + hi)
    };
    if !(w > lo && w < hi) {
        w = 0.5 * (lo + hi);
    }

    for _ in 0..200 {
        let residual = harvest_excess(w) - s;
        if residual == 0.0 {
            break;
        }
        if residual > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let slope = w.ln_1p();
        let mut next = w - residual / slope;
        if !(next > lo && next < hi) {
            next = lo + 0.5 * (hi - lo);
        }
        if next == w {
            break;
        }
        w = next;
    }
    Ok(w)
}

/// The unique `z0 > 1` with `z0 ln z0 - z0 - s + 1 = 0`.
pub fn solve_z0(s: f64) -> Result<f64> {
    solve_z0_minus_one(s).map(|w| 1.0 + w)
}

/// Maximizer of [`rate`] over `alpha` ignoring primary protection.
///
/// A slot with `s = 0` has zero rate for every `alpha` and is left idle
/// (`alpha = 1`).
pub fn alpha_unconstrained(s: f64) -> f64 {
    match solve_z0_minus_one(s) {
        Ok(w) => s / (s + w),
        Err(_) => 1.0,
    }
}

/// Smallest transmit fraction that keeps interference at the primary
/// receiver within `gamma_th`: `g pt z / (g pt z + gamma_th)`.
///
/// The quotient is bumped up by a few ulps when rounding would otherwise put
/// the interference of the resulting transmit power above the cap.
pub fn alpha_boundary(g: f64, z: f64, pt: f64, gamma_th: f64) -> f64 {
    let c = g * pt * z;
    if c <= 0.0 {
        return 0.0;
    }
    let mut alpha = c / (c + gamma_th);
    for _ in 0..64 {
        if alpha >= 1.0 || transmit_power_unchecked(alpha, g, pt) * z <= gamma_th {
            break;
        }
        alpha = alpha.next_up();
    }
    alpha
}

/// Whether transmitting for fraction `alpha` puts the primary receiver in
/// outage. The boundary itself is outage free.
pub fn outage_indicator(alpha: f64, g: f64, z: f64, pt: f64, gamma_th: f64) -> bool {
    alpha < alpha_boundary(g, z, pt, gamma_th)
}

/// Power that drains the energy harvested over `1 - alpha` of the slot in
/// the remaining `alpha`.
pub fn transmit_power(alpha: f64, g: f64, pt: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(transmit_power_unchecked(alpha, g, pt))
}

pub(crate) fn transmit_power_unchecked(alpha: f64, g: f64, pt: f64) -> f64 {
    if alpha >= 1.0 {
        0.0
    } else {
        (1.0 - alpha) * g * pt / alpha
    }
}

/// The two candidate operating points of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotAnalysis {
    pub s: f64,
    /// Unconstrained maximizer of the rate.
    pub alpha_max: f64,
    /// Interference boundary; every `alpha >= alpha_safe` is outage free.
    pub alpha_safe: f64,
    pub rate_max: f64,
    pub rate_safe: f64,
    g: f64,
    pt: f64,
}

impl SlotAnalysis {
    pub fn new(draw: &ChannelDraw, params: &SystemParams) -> Self {
        let s = snr_factor(draw, params);
        let alpha_max = alpha_unconstrained(s);
        let alpha_safe = alpha_boundary(draw.g, draw.z, params.pt, params.gamma_th);
        let rate_max = rate_unchecked(alpha_max, s);
        let rate_safe = if alpha_safe > 0.0 {
            rate_unchecked(alpha_safe, s)
        } else {
            0.0
        };
        SlotAnalysis {
            s,
            alpha_max,
            alpha_safe,
            rate_max,
            rate_safe,
            g: draw.g,
            pt: params.pt,
        }
    }

    /// The unconstrained maximizer would cause a primary outage.
    pub fn binding(&self) -> bool {
        self.alpha_max < self.alpha_safe
    }

    /// Penalty at and above which a binding slot backs off to the boundary.
    /// `None` when the slot never causes an outage.
    pub fn critical_lambda(&self) -> Option<f64> {
        self.binding()
            .then(|| (self.rate_max - self.rate_safe).max(0.0))
    }

    /// Applies the penalized rule: keep the maximizer unless it is binding and
    /// `rate_max - lambda <= rate_safe`, in which case back off to the boundary.
    pub fn decide(&self, lambda: f64) -> SlotDecision {
        let keep_max = match self.critical_lambda() {
            None => true,
            Some(critical) => lambda < critical,
        };
        if keep_max {
            self.at(self.alpha_max, self.rate_max)
        } else {
            self.at(self.alpha_safe, self.rate_safe)
        }
    }

    fn at(&self, alpha: f64, rate: f64) -> SlotDecision {
        SlotDecision {
            alpha,
            outage: alpha < self.alpha_safe,
            rate,
            tx_power: transmit_power_unchecked(alpha, self.g, self.pt),
        }
    }
}

/// Optimal time share of one slot for a given outage penalty `lambda`.
pub fn choose_alpha(draw: &ChannelDraw, params: &SystemParams, lambda: f64) -> SlotDecision {
    SlotAnalysis::new(draw, params).decide(lambda)
}
