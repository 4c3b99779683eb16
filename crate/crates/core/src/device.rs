//! Magnetic-tunnel-junction bit-cells and their access switches.
//!
//! An MTJ stores one bit as its resistance state: parallel (low resistance,
//! `R_P`) or anti-parallel (high resistance, `R_AP = R_P * (1 + TMR)`).
//! Process variation makes the as-fabricated resistance of each junction a
//! normally distributed random variable around its state's nominal value.
//!
//! The read path never exposes the junction's own resistance contrast to the
//! compute line. Instead a latch converts the stored state into the on/off
//! state of a transistor switch, so the effective contrast seen downstream is
//! set by the switch's off/on resistance ratio — orders of magnitude larger
//! than the junction's intrinsic ratio and independent of it.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rng::rng_from_seed;

/// Floor applied to sampled resistances so downstream divisions stay finite.
pub const MIN_RESISTANCE_OHM: f64 = 1e-3;

/// Magnetization state of an MTJ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MtjState {
    /// Free and pinned layers aligned: low resistance, logical weight 0.
    Parallel,
    /// Free and pinned layers opposed: high resistance, logical weight 1.
    AntiParallel,
}

impl MtjState {
    /// True for the high-resistance (anti-parallel) state.
    pub fn is_high_resistance(self) -> bool {
        matches!(self, MtjState::AntiParallel)
    }
}

/// Statistical description of the MTJ population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MtjParams {
    /// Nominal parallel-state resistance [Ω]. Default 6 kΩ.
    pub r_p_nominal_ohm: f64,
    /// Tunnel magnetoresistance ratio, `(R_AP - R_P) / R_P`, as a fraction
    /// (2.0 means 200 %). Default 2.0.
    pub tmr0: f64,
    /// Relative 1-sigma spread of as-fabricated resistance around the
    /// state nominal. Default 0.05 (5 %).
    pub sigma_r: f64,
    /// Free-text geometry note carried into reports (elliptical bit-cell).
    pub area_note: String,
    /// Free-text tunnel-barrier note carried into reports.
    pub t_ox_note: String,
}

impl Default for MtjParams {
    fn default() -> Self {
        MtjParams {
            r_p_nominal_ohm: 6.0e3,
            tmr0: 2.0,
            sigma_r: 0.05,
            area_note: "ellipse 40 nm x 40 nm".to_string(),
            t_ox_note: "MgO 0.85 nm".to_string(),
        }
    }
}

impl MtjParams {
    /// Nominal resistance of the given state [Ω].
    pub fn nominal_r_ohm(&self, state: MtjState) -> f64 {
        match state {
            MtjState::Parallel => self.r_p_nominal_ohm,
            MtjState::AntiParallel => self.r_p_nominal_ohm * (1.0 + self.tmr0),
        }
    }

    /// Checks physical plausibility of the parameter set.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_p_nominal_ohm.is_finite() && self.r_p_nominal_ohm > 0.0) {
            return Err(SimError::Domain(format!(
                "r_p_nominal_ohm must be positive and finite, got {}",
                self.r_p_nominal_ohm
            )));
        }
        if !(self.tmr0.is_finite() && self.tmr0 > 0.0) {
            return Err(SimError::Domain(format!(
                "tmr0 must be positive and finite, got {}",
                self.tmr0
            )));
        }
        if !(self.sigma_r.is_finite() && self.sigma_r >= 0.0) {
            return Err(SimError::Domain(format!(
                "sigma_r must be non-negative and finite, got {}",
                self.sigma_r
            )));
        }
        Ok(())
    }
}

/// One MTJ instance: its population parameters plus its programmed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtjDevice {
    /// Population statistics this device was drawn from.
    pub params: MtjParams,
    /// Programmed magnetization state.
    pub state: MtjState,
}

impl MtjDevice {
    /// Creates a device in `state` drawn from population `params`.
    pub fn new(params: MtjParams, state: MtjState) -> Self {
        MtjDevice { params, state }
    }

    /// Nominal (spread-free) resistance of this device [Ω].
    pub fn nominal_r_ohm(&self) -> f64 {
        self.params.nominal_r_ohm(self.state)
    }
}

/// On/off resistances of the pull-down switch that a latched weight drives.
///
/// The off/on ratio of this switch is the *magnified* resistance contrast
/// that the compute line actually sees; it is set by transistor leakage, not
/// by the junction, so it is independent of the junction's own TMR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchParams {
    /// Switch on-resistance [Ω]. Default 1 kΩ.
    pub r_on_ohm: f64,
    /// Switch off-resistance [Ω]. Default 7.501 MΩ, giving a magnified
    /// contrast of 7500.
    pub r_off_ohm: f64,
}

impl Default for SwitchParams {
    fn default() -> Self {
        SwitchParams {
            r_on_ohm: 1.0e3,
            r_off_ohm: 7.501e6,
        }
    }
}

impl SwitchParams {
    /// Alternative corner with twice the off-resistance (magnified contrast
    /// of 15000) for leakage-sensitivity studies.
    pub fn high_magnification() -> Self {
        SwitchParams {
            r_on_ohm: 1.0e3,
            r_off_ohm: 15.001e6,
        }
    }

    /// Checks that both resistances are positive and ordered.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_on_ohm.is_finite() && self.r_on_ohm > 0.0) {
            return Err(SimError::Domain(format!(
                "r_on_ohm must be positive and finite, got {}",
                self.r_on_ohm
            )));
        }
        if !(self.r_off_ohm.is_finite() && self.r_off_ohm > 0.0) {
            return Err(SimError::Domain(format!(
                "r_off_ohm must be positive and finite, got {}",
                self.r_off_ohm
            )));
        }
        if self.r_off_ohm <= self.r_on_ohm {
            return Err(SimError::Domain(format!(
                "r_off_ohm ({}) must exceed r_on_ohm ({})",
                self.r_off_ohm, self.r_on_ohm
            )));
        }
        Ok(())
    }
}

/// Resistance contrast `(r_high - r_low) / r_low` of a two-state resistor.
///
/// Errors if either resistance is non-positive or `r_high < r_low`.
pub fn tmr(r_ap_ohm: f64, r_p_ohm: f64) -> Result<f64> {
    if !(r_p_ohm.is_finite() && r_p_ohm > 0.0) || !(r_ap_ohm.is_finite() && r_ap_ohm > 0.0) {
        return Err(SimError::Domain(format!(
            "resistances must be positive and finite, got r_ap={r_ap_ohm}, r_p={r_p_ohm}"
        )));
    }
    if r_ap_ohm < r_p_ohm {
        return Err(SimError::Domain(format!(
            "r_ap ({r_ap_ohm}) must be >= r_p ({r_p_ohm})"
        )));
    }
    Ok((r_ap_ohm - r_p_ohm) / r_p_ohm)
}

/// Magnified resistance contrast of the latched read path: the contrast of
/// the pull-down switch itself, `(r_off - r_on) / r_on`.
///
/// Takes only the switch corner — the junction population does not appear in
/// the signature because the magnified contrast does not depend on it.
pub fn m_tmr(switch: &SwitchParams) -> Result<f64> {
    switch.validate()?;
    tmr(switch.r_off_ohm, switch.r_on_ohm)
}

/// Draws the as-fabricated resistance of `device` [Ω].
///
/// The draw is `Normal(nominal, sigma_r * nominal)`, floored at
/// [`MIN_RESISTANCE_OHM`] so extreme tail samples cannot produce a
/// non-physical (zero or negative) resistance. The same `(device, seed)`
/// pair always yields the same sample.
pub fn sample_resistance(device: &MtjDevice, seed: u64) -> Result<f64> {
    device.params.validate()?;
    let nominal = device.nominal_r_ohm();
    let sigma = device.params.sigma_r * nominal;
    if sigma == 0.0 {
        return Ok(nominal);
    }
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(nominal, sigma)
        .map_err(|e| SimError::Domain(format!("resistance distribution: {e}")))?;
    Ok(normal.sample(&mut rng).max(MIN_RESISTANCE_OHM))
}
