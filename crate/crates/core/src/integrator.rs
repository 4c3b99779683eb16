//! Current-mirror charge accumulation onto the output capacitor.
//!
//! The compute-line current is mirrored with ratio `gamma` onto a capacitor
//! for three fixed charge quanta of `t_h` each. An ideal mirror would add
//! `V_a = gamma * i_a * t_h / c1` per unit pulse; a real mirror's output
//! current droops as the output voltage rises, compressing the top of the
//! transfer curve. The droop is modeled as an affine reduction of charge
//! current, `g(V) = 1 - lambda * V`, and comes in two flavors:
//!
//! * **Plain mirror** ([`MirrorMode::Tcm`]): the full droop applies.
//! * **Feedback mirror** ([`MirrorMode::Cmf`]): a feedback loop lowers the
//!   mirror's bias node as the output rises (up to `v_bias_swing`),
//!   cancelling most of the droop. Only the fraction `feedback_factor` of
//!   the plain droop remains while the output is below `v_max`; past
//!   `v_max` the bias swing is exhausted and the slope reverts to the plain
//!   law.
//!
//! Integration is fixed-step explicit Euler with 64 steps per quantum. For
//! `lambda = 0` the step rule is exact, so the ideal-limit identity
//! `v_final = (Σ k_q) * V_a` holds to floating-point accuracy.

use serde::{Deserialize, Serialize};

use crate::array::ColumnCurrentTrace;
use crate::error::{Result, SimError};

/// Euler steps per charge quantum.
pub const STEPS_PER_QUANTUM: usize = 64;

/// Fitted droop coefficient of the plain mirror [1/V].
pub const DEFAULT_DROOP_LAMBDA_PER_V: f64 = 0.8388683884587891;
/// Fitted residual droop fraction of the feedback mirror.
pub const DEFAULT_FEEDBACK_FACTOR: f64 = 0.42373655176541036;
/// Default output capacitance [F], chosen so one unit pulse at the default
/// unit current (50 µA) adds exactly 1/15 of the 650 mV linear ceiling.
pub const DEFAULT_C1_FARAD: f64 = 0.05 * 50e-6 * 800e-12 * 15.0 / 0.65;

/// Which mirror is accumulating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorMode {
    /// Plain current mirror: full output droop.
    Tcm,
    /// Current mirror with droop-cancelling feedback.
    Cmf,
}

impl std::fmt::Display for MirrorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MirrorMode::Tcm => write!(f, "tcm"),
            MirrorMode::Cmf => write!(f, "cmf"),
        }
    }
}

/// Electrical parameters of the accumulation stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MirrorParams {
    /// Mirror current ratio (output / compute-line). Default 0.05.
    pub gamma: f64,
    /// Output capacitance [F]. Default [`DEFAULT_C1_FARAD`].
    pub c1_farad: f64,
    /// Duration of one charge quantum [ps]. Default 800 ps.
    pub t_h_ps: f64,
    /// Supply rail; the output hard-clips here [mV]. Default 900 mV.
    pub v_dd_mv: f64,
    /// Upper edge of the linear accumulation range [mV]. Default 650 mV.
    pub v_max_mv: f64,
    /// Affine droop coefficient of the plain mirror [1/V]. Fitted; see
    /// [`DEFAULT_DROOP_LAMBDA_PER_V`].
    pub droop_lambda_per_v: f64,
    /// Fraction of the plain droop that survives feedback, in [0, 1]
    /// (0 = perfect cancellation, 1 = no feedback benefit). Fitted; see
    /// [`DEFAULT_FEEDBACK_FACTOR`].
    pub feedback_factor: f64,
    /// Total bias-node excursion the feedback loop can spend [mV]; it is
    /// consumed linearly and runs out exactly at `v_max`. Default 80 mV.
    pub v_bias_swing_mv: f64,
}

impl Default for MirrorParams {
    fn default() -> Self {
        MirrorParams {
            gamma: 0.05,
            c1_farad: DEFAULT_C1_FARAD,
            t_h_ps: 800.0,
            v_dd_mv: 900.0,
            v_max_mv: 650.0,
            droop_lambda_per_v: DEFAULT_DROOP_LAMBDA_PER_V,
            feedback_factor: DEFAULT_FEEDBACK_FACTOR,
            v_bias_swing_mv: 80.0,
        }
    }
}

impl MirrorParams {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(SimError::Domain(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            )));
        }
        if !(self.c1_farad.is_finite() && self.c1_farad > 0.0) {
            return Err(SimError::Domain(format!(
                "c1_farad must be positive and finite, got {}",
                self.c1_farad
            )));
        }
        if !(self.t_h_ps.is_finite() && self.t_h_ps > 0.0) {
            return Err(SimError::Domain(format!(
                "t_h_ps must be positive and finite, got {}",
                self.t_h_ps
            )));
        }
        if !(self.v_max_mv.is_finite() && self.v_dd_mv.is_finite())
            || !(0.0 < self.v_max_mv && self.v_max_mv < self.v_dd_mv)
        {
            return Err(SimError::Domain(format!(
                "need 0 < v_max_mv ({}) < v_dd_mv ({})",
                self.v_max_mv, self.v_dd_mv
            )));
        }
        if !(self.droop_lambda_per_v.is_finite() && self.droop_lambda_per_v >= 0.0) {
            return Err(SimError::Domain(format!(
                "droop_lambda_per_v must be non-negative and finite, got {}",
                self.droop_lambda_per_v
            )));
        }
        if !(self.feedback_factor.is_finite() && (0.0..=1.0).contains(&self.feedback_factor)) {
            return Err(SimError::Domain(format!(
                "feedback_factor must be in [0, 1], got {}",
                self.feedback_factor
            )));
        }
        if !(self.v_bias_swing_mv.is_finite() && self.v_bias_swing_mv >= 0.0) {
            return Err(SimError::Domain(format!(
                "v_bias_swing_mv must be non-negative and finite, got {}",
                self.v_bias_swing_mv
            )));
        }
        Ok(())
    }

    /// Ideal per-pulse output step `V_a = gamma * i_a * t_h / c1` [mV].
    pub fn unit_step_mv(&self, i_a_ua: f64) -> f64 {
        self.gamma * (i_a_ua * 1e-6) * (self.t_h_ps * 1e-12) / self.c1_farad * 1e3
    }

    /// Bias-node excursion the feedback loop has spent at output voltage
    /// `v_out_mv` [mV]: linear in the output and capped at the full swing,
    /// which runs out at `v_max`.
    pub fn bias_reduction_mv(&self, v_out_mv: f64) -> f64 {
        self.v_bias_swing_mv * (v_out_mv.clamp(0.0, self.v_max_mv) / self.v_max_mv)
    }

    /// Relative charge current at output voltage `v_out_v` (clamped to 0).
    fn droop_gain(&self, mode: MirrorMode, v_out_v: f64) -> f64 {
        let lambda = self.droop_lambda_per_v;
        let g = match mode {
            MirrorMode::Tcm => 1.0 - lambda * v_out_v,
            MirrorMode::Cmf => {
                let v_max_v = self.v_max_mv * 1e-3;
                if v_out_v <= v_max_v {
                    1.0 - self.feedback_factor * lambda * v_out_v
                } else {
                    // Feedback swing exhausted: plain slope beyond the knee.
                    1.0 - self.feedback_factor * lambda * v_max_v - lambda * (v_out_v - v_max_v)
                }
            }
        };
        g.max(0.0)
    }
}

/// Ideal mirrored current [µA]: `gamma * i_cl`, before droop.
pub fn mirror_current(i_cl_ua: f64, p: &MirrorParams) -> Result<f64> {
    p.validate()?;
    if !(i_cl_ua.is_finite() && i_cl_ua >= 0.0) {
        return Err(SimError::Domain(format!(
            "i_cl_ua must be non-negative and finite, got {i_cl_ua}"
        )));
    }
    Ok(p.gamma * i_cl_ua)
}

/// One recorded point of an accumulation transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// Time since integration started [ps].
    pub t_ps: f64,
    /// Output voltage [mV].
    pub v_out_mv: f64,
    /// Instantaneous mirror output current [µA].
    pub i_out_ua: f64,
}

/// Full transient of one accumulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorTrace {
    /// Step-by-step samples, `1 + 3 * STEPS_PER_QUANTUM` of them.
    pub samples: Vec<TraceSample>,
    /// Settled output voltage [mV].
    pub v_final_mv: f64,
    /// True when the output hit the supply rail and was clipped.
    pub saturated: bool,
}

/// Stateful accumulation capacitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrator {
    /// Present output voltage [V].
    v_out_v: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new()
    }
}

impl Integrator {
    /// A discharged integrator (output at 0 V).
    pub fn new() -> Self {
        Integrator { v_out_v: 0.0 }
    }

    /// Discharges the output capacitor.
    pub fn reset(&mut self) {
        self.v_out_v = 0.0;
    }

    /// Present output voltage [mV].
    pub fn v_out_mv(&self) -> f64 {
        self.v_out_v * 1e3
    }

    /// Accumulates one column evaluation on top of the present state.
    ///
    /// Steps `c1 * dV/dt = gamma * i_cl(t) * g(V)` over the three charge
    /// quanta with 64 Euler steps each. The output clips at the supply and
    /// sets the `saturated` flag instead of erroring.
    pub fn integrate(
        &mut self,
        trace: &ColumnCurrentTrace,
        p: &MirrorParams,
        mode: MirrorMode,
    ) -> Result<IntegratorTrace> {
        p.validate()?;
        if !(trace.i_a_ua.is_finite() && trace.i_a_ua >= 0.0) {
            return Err(SimError::Domain(format!(
                "trace unit current must be non-negative and finite, got {}",
                trace.i_a_ua
            )));
        }

        let dt_s = p.t_h_ps * 1e-12 / STEPS_PER_QUANTUM as f64;
        let dt_ps = p.t_h_ps / STEPS_PER_QUANTUM as f64;
        let v_dd_v = p.v_dd_mv * 1e-3;

        let mut v = self.v_out_v;
        let mut t_ps = 0.0;
        let mut saturated = false;
        let mut samples = Vec::with_capacity(1 + 3 * STEPS_PER_QUANTUM);

        let ideal_i_a = |k: u32| p.gamma * k as f64 * trace.i_a_ua * 1e-6;
        samples.push(TraceSample {
            t_ps,
            v_out_mv: v * 1e3,
            i_out_ua: ideal_i_a(trace.k_per_quantum[0]) * p.droop_gain(mode, v) * 1e6,
        });

        for (q, &k) in trace.k_per_quantum.iter().enumerate() {
            let i_ideal_a = ideal_i_a(k);
            for step in 0..STEPS_PER_QUANTUM {
                let i_a = i_ideal_a * p.droop_gain(mode, v);
                v += i_a * dt_s / p.c1_farad;
                if v > v_dd_v {
                    v = v_dd_v;
                    saturated = true;
                }
                t_ps += dt_ps;
                // Current flowing immediately after this instant: the next
                // step of this quantum, the next quantum at a boundary, or
                // nothing once charging ends.
                let k_next = if step + 1 < STEPS_PER_QUANTUM {
                    k
                } else if q + 1 < trace.k_per_quantum.len() {
                    trace.k_per_quantum[q + 1]
                } else {
                    0
                };
                samples.push(TraceSample {
                    t_ps,
                    v_out_mv: v * 1e3,
                    i_out_ua: ideal_i_a(k_next) * p.droop_gain(mode, v) * 1e6,
                });
            }
        }

        self.v_out_v = v;
        Ok(IntegratorTrace {
            samples,
            v_final_mv: v * 1e3,
            saturated,
        })
    }
}
