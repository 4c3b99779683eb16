//! Reference latch that regenerates a stored junction state into a
//! rail-level weight bit.
//!
//! During a latch event the bit-cell resistance is compared against a
//! reference resistor `r_ref` placed between the two nominal states. The
//! regenerative sense amplifier maps the relative resistance difference
//! through a steep logistic characteristic onto the output node `v_w`:
//! devices well above the reference settle near the supply (weight 1),
//! devices well below settle near ground (weight 0), and devices too close
//! to the reference — after process spread and amplifier input offset — land
//! in the forbidden middle band and are flagged as failed.
//!
//! The input-referred offset scales inversely with the latch supply `v_l`:
//! running the latch at a reduced supply saves energy but widens the
//! effective offset and costs yield. The models here quantify both sides of
//! that trade.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{MtjDevice, MtjParams, MtjState};
use crate::error::{Result, SimError};
use crate::rng::{derive_seed, rng_from_seed};

/// Output level above which a latch event reads as weight 1 [mV].
pub const V_ONE_THRESHOLD_MV: f64 = 750.0;
/// Output level below which a latch event reads as weight 0 [mV].
pub const V_ZERO_THRESHOLD_MV: f64 = 150.0;

/// Fitted logistic gain of the regenerative comparison (dimensionless).
pub const DEFAULT_GAIN_K: f64 = 165.1579136498494;
/// Fitted input-referred offset spread at full latch supply (relative units).
pub const DEFAULT_SIGMA_OFFSET: f64 = 0.09342770165014798;
/// Fitted duty/efficiency factor of the latch-and-hold energy model.
pub const DEFAULT_ENERGY_C0: f64 = 0.25730723763238433;
/// Series resistance of the two access transistors in the latch current
/// path [Ω].
pub const DEFAULT_SERIES_R_OHM: f64 = 2000.0;

/// Digital value produced by one latch event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightBit {
    /// Output settled above [`V_ONE_THRESHOLD_MV`]: stored weight 1.
    One,
    /// Output settled below [`V_ZERO_THRESHOLD_MV`]: stored weight 0.
    Zero,
    /// Output stuck in the forbidden middle band: latch failure.
    Fail,
}

/// Electrical and statistical parameters of the latch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatchParams {
    /// Reference resistance the bit-cell is compared against [Ω].
    /// Default 9.5 kΩ (optimum for a 200 % junction population).
    pub r_ref_ohm: f64,
    /// Latch supply during the sense event [mV]. Default 600 mV.
    pub v_l_mv: f64,
    /// Logistic gain of the regenerative comparison. Fitted; see
    /// [`DEFAULT_GAIN_K`].
    pub gain_k: f64,
    /// Input-referred offset spread at full supply, as a fraction of
    /// `r_ref`. The effective spread at supply `v_l` is
    /// `sigma_offset * v_dd / v_l`. Fitted; see [`DEFAULT_SIGMA_OFFSET`].
    pub sigma_offset: f64,
    /// Time the latched value is held on the weight node per sense
    /// event [ns]. Default 4 ns.
    pub hold_time_ns: f64,
    /// Full logic supply the latch output swings to [mV]. Default 900 mV.
    pub v_dd_mv: f64,
    /// Series resistance of the access devices in the latch current
    /// path [Ω]. Default 2 kΩ (two 1 kΩ transistors).
    pub series_r_ohm: f64,
    /// Duty/efficiency factor of the energy model. Fitted; see
    /// [`DEFAULT_ENERGY_C0`].
    pub energy_c0: f64,
}

impl Default for LatchParams {
    fn default() -> Self {
        LatchParams {
            r_ref_ohm: 9.5e3,
            v_l_mv: 600.0,
            gain_k: DEFAULT_GAIN_K,
            sigma_offset: DEFAULT_SIGMA_OFFSET,
            hold_time_ns: 4.0,
            v_dd_mv: 900.0,
            series_r_ohm: DEFAULT_SERIES_R_OHM,
            energy_c0: DEFAULT_ENERGY_C0,
        }
    }
}

impl LatchParams {
    /// Checks all parameters needed to *resolve* a latch event.
    pub fn validate(&self) -> Result<()> {
        self.validate_energy_path()?;
        // NaN must fail this check, so test the two rejection cases explicitly.
        if self.v_l_mv.is_nan() || self.v_l_mv <= 0.0 {
            return Err(SimError::Domain(format!(
                "v_l_mv must be positive for a latch event, got {}",
                self.v_l_mv
            )));
        }
        if !(self.gain_k.is_finite() && self.gain_k > 0.0) {
            return Err(SimError::Domain(format!(
                "gain_k must be positive and finite, got {}",
                self.gain_k
            )));
        }
        if !(self.sigma_offset.is_finite() && self.sigma_offset >= 0.0) {
            return Err(SimError::Domain(format!(
                "sigma_offset must be non-negative and finite, got {}",
                self.sigma_offset
            )));
        }
        if self.v_dd_mv <= V_ONE_THRESHOLD_MV {
            return Err(SimError::Domain(format!(
                "v_dd_mv ({}) must exceed the weight-1 threshold ({} mV)",
                self.v_dd_mv, V_ONE_THRESHOLD_MV
            )));
        }
        Ok(())
    }

    /// Checks the subset of parameters the energy model uses. `v_l_mv == 0`
    /// is legal here (a powered-down latch consumes nothing).
    fn validate_energy_path(&self) -> Result<()> {
        if !(self.r_ref_ohm.is_finite() && self.r_ref_ohm > 0.0) {
            return Err(SimError::Domain(format!(
                "r_ref_ohm must be positive and finite, got {}",
                self.r_ref_ohm
            )));
        }
        if !(self.v_l_mv.is_finite() && self.v_l_mv >= 0.0) {
            return Err(SimError::Domain(format!(
                "v_l_mv must be non-negative and finite, got {}",
                self.v_l_mv
            )));
        }
        if !(self.hold_time_ns.is_finite() && self.hold_time_ns > 0.0) {
            return Err(SimError::Domain(format!(
                "hold_time_ns must be positive and finite, got {}",
                self.hold_time_ns
            )));
        }
        if !(self.v_dd_mv.is_finite() && self.v_dd_mv > 0.0) {
            return Err(SimError::Domain(format!(
                "v_dd_mv must be positive and finite, got {}",
                self.v_dd_mv
            )));
        }
        if !(self.series_r_ohm.is_finite() && self.series_r_ohm >= 0.0) {
            return Err(SimError::Domain(format!(
                "series_r_ohm must be non-negative and finite, got {}",
                self.series_r_ohm
            )));
        }
        if !(self.energy_c0.is_finite() && self.energy_c0 > 0.0) {
            return Err(SimError::Domain(format!(
                "energy_c0 must be positive and finite, got {}",
                self.energy_c0
            )));
        }
        Ok(())
    }

    /// Effective input-referred offset spread at the configured supply.
    pub fn sigma_eff(&self) -> f64 {
        self.sigma_offset * (self.v_dd_mv / self.v_l_mv)
    }
}

/// Everything one latch event produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatchOutcome {
    /// Settled weight-node voltage [mV].
    pub v_w_mv: f64,
    /// Classified digital value.
    pub bit: WeightBit,
    /// Energy consumed by this sense-and-hold event [fJ].
    pub energy_fj: f64,
    /// Resolved behavior of a failed bit on the compute line: a failed
    /// latch leaves its pull-down half-driven, and whether it conducts is a
    /// coin flip frozen at latch time. Only meaningful when `bit` is
    /// [`WeightBit::Fail`]; a failed bit conducts iff this is true.
    pub stuck_one: bool,
}

/// Monte-Carlo (or analytic) latch yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldStats {
    /// Probability that an anti-parallel device latches as weight 1.
    pub yield_one: f64,
    /// Probability that a parallel device latches as weight 0.
    pub yield_zero: f64,
    /// Mean of the two (both states equally likely).
    pub yield_avg: f64,
}

/// Result of the per-bit energy model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatchEnergy {
    /// Expected sense-and-hold energy per bit [fJ].
    pub energy_fj: f64,
    /// True when the requested junction contrast lies outside the fitted
    /// range (0.5 ..= 2.5) and the value is an extrapolation.
    pub extrapolated: bool,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Inverse of [`logistic`].
fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Resolves one latch event for a bit-cell of resistance `dev_r_ohm`.
///
/// The settled output is
/// `v_w = v_dd * logistic(gain_k * (dev_r - r_ref*(1+eps)) / r_ref)`
/// where `eps ~ Normal(0, sigma_eff)` is the input-referred offset of this
/// event. Classification: above [`V_ONE_THRESHOLD_MV`] reads as
/// [`WeightBit::One`], below [`V_ZERO_THRESHOLD_MV`] as [`WeightBit::Zero`],
/// anything between is a [`WeightBit::Fail`].
///
/// The RNG stream is consumed identically on every call (offset draw, then
/// the stuck-bit coin) so outcomes stay reproducible under any classification.
pub fn resolve(dev_r_ohm: f64, p: &LatchParams, seed: u64) -> Result<LatchOutcome> {
    p.validate()?;
    if !(dev_r_ohm.is_finite() && dev_r_ohm > 0.0) {
        return Err(SimError::Domain(format!(
            "dev_r_ohm must be positive and finite, got {dev_r_ohm}"
        )));
    }

    let mut rng = rng_from_seed(seed);
    let sigma_eff = p.sigma_eff();
    let eps = if sigma_eff > 0.0 {
        let normal = Normal::new(0.0, sigma_eff)
            .map_err(|e| SimError::Domain(format!("offset distribution: {e}")))?;
        normal.sample(&mut rng)
    } else {
        0.0
    };
    let stuck_one = rng.gen_bool(0.5);

    let z = p.gain_k * ((dev_r_ohm - p.r_ref_ohm * (1.0 + eps)) / p.r_ref_ohm);
    let v_w_mv = p.v_dd_mv * logistic(z);

    let bit = if v_w_mv > V_ONE_THRESHOLD_MV {
        WeightBit::One
    } else if v_w_mv < V_ZERO_THRESHOLD_MV {
        WeightBit::Zero
    } else {
        WeightBit::Fail
    };

    Ok(LatchOutcome {
        v_w_mv,
        bit,
        energy_fj: hold_energy_fj(p, dev_r_ohm),
        stuck_one,
    })
}

/// Sense-and-hold energy for a single event against a specific bit-cell
/// resistance [fJ]: `c0 * v_l^2 * hold_time * G`, with `G` the parallel
/// conductance of the cell branch and the reference branch, each including
/// the access-device series resistance.
fn hold_energy_fj(p: &LatchParams, dev_r_ohm: f64) -> f64 {
    let v_l_v = p.v_l_mv * 1e-3;
    let hold_s = p.hold_time_ns * 1e-9;
    let g = 1.0 / (dev_r_ohm + p.series_r_ohm) + 1.0 / (p.r_ref_ohm + p.series_r_ohm);
    p.energy_c0 * v_l_v * v_l_v * hold_s * g * 1e15
}

/// Expected per-bit sense-and-hold energy for a junction population [fJ],
/// averaging the two stored states (equally likely).
///
/// A latch with `v_l_mv == 0` is powered down and consumes exactly 0 fJ;
/// non-positive resistances or hold times are domain errors. The
/// `extrapolated` flag is raised when the population contrast is outside
/// the 0.5 ..= 2.5 range the constant `energy_c0` was fitted on.
pub fn energy_model(p: &LatchParams, mtj: &MtjParams) -> Result<LatchEnergy> {
    p.validate_energy_path()?;
    mtj.validate()?;
    let extrapolated = !(0.5..=2.5).contains(&mtj.tmr0);
    if p.v_l_mv == 0.0 {
        return Ok(LatchEnergy {
            energy_fj: 0.0,
            extrapolated,
        });
    }
    let e_p = hold_energy_fj(p, mtj.nominal_r_ohm(MtjState::Parallel));
    let e_ap = hold_energy_fj(p, mtj.nominal_r_ohm(MtjState::AntiParallel));
    Ok(LatchEnergy {
        energy_fj: 0.5 * (e_p + e_ap),
        extrapolated,
    })
}

/// Monte-Carlo estimate of latch yield for a junction population.
///
/// For each trial one anti-parallel and one parallel device are drawn from
/// the population, latched, and classified; `yield_one` and `yield_zero`
/// are the fractions resolved correctly. Trials are seeded individually
/// from `(seed, state, trial)`, so the estimate is independent of trial
/// order and of how trials are partitioned across worker threads.
pub fn yield_estimate(
    mtj: &MtjParams,
    p: &LatchParams,
    trials: usize,
    seed: u64,
) -> Result<YieldStats> {
    mtj.validate()?;
    p.validate()?;
    if trials == 0 {
        return Err(SimError::Domain("trials must be at least 1".to_string()));
    }

    let ap = MtjDevice::new(mtj.clone(), MtjState::AntiParallel);
    let pa = MtjDevice::new(mtj.clone(), MtjState::Parallel);

    let (ones, zeros) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let t = t as u64;
            let r_ap = crate::device::sample_resistance(&ap, derive_seed(seed, &[1, t]))
                .expect("validated params");
            let o_ap = resolve(r_ap, p, derive_seed(seed, &[2, t])).expect("validated params");
            let r_p = crate::device::sample_resistance(&pa, derive_seed(seed, &[3, t]))
                .expect("validated params");
            let o_p = resolve(r_p, p, derive_seed(seed, &[4, t])).expect("validated params");
            (
                u64::from(o_ap.bit == WeightBit::One),
                u64::from(o_p.bit == WeightBit::Zero),
            )
        })
        .reduce(|| (0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = trials as f64;
    let yield_one = ones as f64 / n;
    let yield_zero = zeros as f64 / n;
    Ok(YieldStats {
        yield_one,
        yield_zero,
        yield_avg: 0.5 * (yield_one + yield_zero),
    })
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

/// Closed-form prediction of the Monte-Carlo limit of [`yield_estimate`].
///
/// With resistance spread and offset both normal, the latch comparison is a
/// single Gaussian threshold crossing per state, so the yields have exact
/// normal-CDF expressions. Used by the calibration fit, where millions of
/// model evaluations make sampling impractical; tests cross-check it against
/// the sampled estimator.
///
/// The resistance floor applied by sampling is ignored here; it only matters
/// for spreads far outside the fitted regime.
pub fn analytic_yield(mtj: &MtjParams, p: &LatchParams) -> Result<YieldStats> {
    mtj.validate()?;
    p.validate()?;

    let r_ap = mtj.nominal_r_ohm(MtjState::AntiParallel);
    let r_p = mtj.nominal_r_ohm(MtjState::Parallel);
    let sigma_eff = p.sigma_eff();

    // Threshold crossings in z-space map to resistance offsets of
    // logit(v/v_dd)/gain_k relative to the (offset-shifted) reference.
    let t_hi = logit(V_ONE_THRESHOLD_MV / p.v_dd_mv) / p.gain_k;
    let t_lo = logit(V_ZERO_THRESHOLD_MV / p.v_dd_mv) / p.gain_k;

    let s_ap = f64::hypot(mtj.sigma_r * r_ap, p.r_ref_ohm * sigma_eff);
    let s_p = f64::hypot(mtj.sigma_r * r_p, p.r_ref_ohm * sigma_eff);

    let yield_one = if s_ap > 0.0 {
        phi((r_ap - p.r_ref_ohm * (1.0 + t_hi)) / s_ap)
    } else {
        f64::from(r_ap > p.r_ref_ohm * (1.0 + t_hi))
    };
    let yield_zero = if s_p > 0.0 {
        phi((p.r_ref_ohm * (1.0 + t_lo) - r_p) / s_p)
    } else {
        f64::from(r_p < p.r_ref_ohm * (1.0 + t_lo))
    };

    Ok(YieldStats {
        yield_one,
        yield_zero,
        yield_avg: 0.5 * (yield_one + yield_zero),
    })
}
