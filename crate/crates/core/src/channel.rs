//! Scenario parameters, block-fading channel draws and unit conversions.
//!
//! All quantities are linear SI internally (watts, dimensionless power gains).
//! Decibel units only appear at the CLI and CSV boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Physical and statistical parameters of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Primary transmitter power, watts.
    pub pt: f64,
    /// Noise power at the secondary receiver, watts.
    pub noise: f64,
    /// Interference cap at the primary receiver, watts.
    pub gamma_th: f64,
    /// Tolerated fraction of primary outages, in (0, 1).
    pub epsilon: f64,
    /// Mean gain, secondary transmitter to secondary receiver.
    pub mu_x: f64,
    /// Mean gain, primary transmitter to secondary receiver.
    pub mu_y: f64,
    /// Mean gain, primary transmitter to harvester.
    pub mu_g: f64,
    /// Mean gain, secondary transmitter to primary receiver.
    pub mu_z: f64,
    /// Evaluation slots.
    pub m_slots: usize,
    /// Training slots used to calibrate the outage penalty.
    pub m_train: usize,
    pub seed: u64,
}

impl Default for SystemParams {
    /// 30 dBW primary, -90 dBm noise and interference cap, 1% outage, 10^4 slots.
    fn default() -> Self {
        SystemParams {
            pt: dbw_to_watts(30.0),
            noise: dbm_to_watts(-90.0),
            gamma_th: dbm_to_watts(-90.0),
            epsilon: 0.01,
            mu_x: 1e-3,
            mu_y: 1e-7,
            mu_g: 1e-4,
            mu_z: 1e-9,
            m_slots: 10_000,
            m_train: 10_000,
            seed: 42,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        positive("pt", self.pt)?;
        positive("noise", self.noise)?;
        positive("gamma_th", self.gamma_th)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("{} is not in (0, 1)", self.epsilon),
            ));
        }
        positive("mu_x", self.mu_x)?;
        positive("mu_y", self.mu_y)?;
        positive("mu_g", self.mu_g)?;
        positive("mu_z", self.mu_z)?;
        if self.m_slots == 0 {
            return Err(Error::invalid("m_slots", "must be at least 1"));
        }
        if self.m_train == 0 {
            return Err(Error::invalid("m_train", "must be at least 1"));
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("{v} is not a finite positive number"),
        ))
    }
}

/// Fading power gains of the four links in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelDraw {
    pub x: f64,
    pub y: f64,
    pub g: f64,
    pub z: f64,
}

pub fn db_to_linear(value_db: f64) -> f64 {
    10f64.powf(value_db / 10.0)
}

pub fn linear_to_db(value: f64) -> f64 {
    10.0 * value.log10()
}

pub fn dbm_to_watts(value_dbm: f64) -> f64 {
    db_to_linear(value_dbm - 30.0)
}

/// Returns `-inf` for zero power.
pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts) + 30.0
}

pub fn dbw_to_watts(value_dbw: f64) -> f64 {
    db_to_linear(value_dbw)
}

pub fn watts_to_dbw(watts: f64) -> f64 {
    linear_to_db(watts)
}

/// Exponential variate with the given mean from a uniform `u` in [0, 1).
pub fn exponential_from_uniform(u: f64, mean: f64) -> f64 {
    -mean * (-u).ln_1p()
}

/// Uniform in [0, 1) with 53 bits of resolution.
fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws one slot of Rayleigh block fading: four independent exponential
/// power gains with the configured means.
///
/// Every gain is `mean * E` for a unit exponential `E`, so scenarios that
/// differ only in their channel means see the same fading pattern.
pub fn draw_slot<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams) -> ChannelDraw {
    let x = exponential_from_uniform(unit_uniform(rng), params.mu_x);
    let y = exponential_from_uniform(unit_uniform(rng), params.mu_y);
    let g = exponential_from_uniform(unit_uniform(rng), params.mu_g);
    let z = exponential_from_uniform(unit_uniform(rng), params.mu_z);
    ChannelDraw { x, y, g, z }
}

/// Which independent family of slot streams to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Training,
    Evaluation,
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Training => 0x7472_6169_6e00_0001,
            Phase::Evaluation => 0x6576_616c_0000_0002,
        }
    }
}

/// Counter-based slot streams: slot `i` of a phase always reads the same
/// ChaCha8 stream, keyed by (seed, phase) with stream id `i`.
#[derive(Debug, Clone)]
pub struct SlotStreams {
    key: [u8; 32],
}

impl SlotStreams {
    pub fn new(seed: u64, phase: Phase) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&phase.tag().to_le_bytes());
        key[16..].copy_from_slice(b"cr-timeshare/v1\0");
        SlotStreams { key }
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }

    pub fn draw(&self, index: u64, params: &SystemParams) -> ChannelDraw {
        draw_slot(&mut self.rng(index), params)
    }
}

/// Effective SNR scaling of a slot, `g*pt*x / (y*pt + noise)`.
pub fn snr_factor(draw: &ChannelDraw, params: &SystemParams) -> f64 {
    draw.g * params.pt * draw.x / (draw.y * params.pt + params.noise)
}
