//! Experiment drivers: Monte-Carlo yield/power sweeps over the latch
//! operating space, transfer-curve linearity (INL) extraction, the
//! conventional-vs-latch-magnified cell comparison, and the calibration
//! fit that pins every tuned constant.

mod calibrate;

pub use self::calibrate::calibrate;

use serde::{Deserialize, Serialize};

use crate::adc;
use crate::array::{unit_current_ua, ColumnCurrentTrace, CHARGE_QUANTA, MAX_ROWS};
use crate::config::MacroConfig;
use crate::device::{MtjParams, MtjState, SwitchParams};
use crate::error::{Result, SimError};
use crate::integrator::{Integrator, MirrorMode, MirrorParams};
use crate::latch::{analytic_yield, energy_model, yield_estimate, LatchParams};
use crate::rng::derive_seed;

/// Smallest Monte-Carlo sample size a sweep grid may request.
pub const MIN_SWEEP_TRIALS: usize = 100;

/// Cross-product grid for yield/power sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    /// Reference-resistance axis [Ω].
    pub r_ref_ohm: Vec<f64>,
    /// Latch-voltage axis [mV].
    pub v_l_mv: Vec<f64>,
    /// Junction-contrast axis (relative resistance spread between states).
    pub tmr0: Vec<f64>,
    /// Monte-Carlo trials per grid point and per stored state.
    pub trials: usize,
}

impl Default for SweepGrid {
    /// Brackets the preferred operating point (9.5 kΩ, 600 mV) on both
    /// axes: reference resistances between the two junction states
    /// (6 kΩ / 18 kΩ at the default contrast) and latch voltages up to
    /// the 900 mV supply.
    fn default() -> Self {
        SweepGrid {
            r_ref_ohm: vec![7.0e3, 8.0e3, 9.5e3, 11.0e3, 13.0e3],
            v_l_mv: vec![450.0, 600.0, 750.0, 900.0],
            tmr0: vec![2.0],
            trials: 5000,
        }
    }
}

impl SweepGrid {
    /// Checks the axes are non-empty and positive and the sample size is
    /// statistically meaningful.
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("r_ref_ohm", &self.r_ref_ohm),
            ("v_l_mv", &self.v_l_mv),
            ("tmr0", &self.tmr0),
        ] {
            if axis.is_empty() {
                return Err(SimError::Config(format!("sweep axis {name} is empty")));
            }
            if axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(SimError::Config(format!(
                    "sweep axis {name} must contain only positive finite values"
                )));
            }
        }
        if self.trials < MIN_SWEEP_TRIALS {
            return Err(SimError::Config(format!(
                "trials must be at least {MIN_SWEEP_TRIALS}, got {}",
                self.trials
            )));
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn cardinality(&self) -> usize {
        self.r_ref_ohm.len() * self.v_l_mv.len() * self.tmr0.len()
    }

    /// Expands the cross product in a fixed order: `r_ref_ohm` slowest,
    /// then `v_l_mv`, then `tmr0` fastest.
    pub fn points(&self) -> Vec<OperatingPoint> {
        let mut out = Vec::with_capacity(self.cardinality());
        for &r_ref in &self.r_ref_ohm {
            for &v_l in &self.v_l_mv {
                for &tmr0 in &self.tmr0 {
                    out.push(OperatingPoint {
                        tmr0,
                        r_ref_ohm: r_ref,
                        v_l_mv: v_l,
                    });
                }
            }
        }
        out
    }
}

/// One latch operating point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Junction contrast.
    pub tmr0: f64,
    /// Reference resistance [Ω].
    pub r_ref_ohm: f64,
    /// Latch voltage [mV].
    pub v_l_mv: f64,
}

/// Statistics gathered at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Junction contrast.
    pub tmr0: f64,
    /// Reference resistance [Ω].
    pub r_ref_ohm: f64,
    /// Latch voltage [mV].
    pub v_l_mv: f64,
    /// Monte-Carlo trials per stored state.
    pub trials: usize,
    /// Monte-Carlo probability of latching a stored 1 correctly.
    pub yield_one: f64,
    /// Monte-Carlo probability of latching a stored 0 correctly.
    pub yield_zero: f64,
    /// Mean of the two Monte-Carlo yields.
    pub yield_avg: f64,
    /// Closed-form counterpart of `yield_one`.
    pub analytic_one: f64,
    /// Closed-form counterpart of `yield_zero`.
    pub analytic_zero: f64,
    /// Closed-form counterpart of `yield_avg`.
    pub analytic_avg: f64,
    /// Expected sense-and-hold energy per bit [fJ].
    pub energy_fj: f64,
    /// The energy value extrapolates outside the fitted contrast range.
    pub energy_extrapolated: bool,
}

/// Evaluates an explicit list of operating points.
///
/// Point `i` draws from a sub-stream derived as `(seed, i)`, so the table
/// is reproducible point-by-point no matter how the list is sliced or
/// parallelized by callers.
pub fn yield_points(
    points: &[OperatingPoint],
    mtj_base: &MtjParams,
    latch_base: &LatchParams,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(points.len());
    for (i, pt) in points.iter().enumerate() {
        let mut mtj = mtj_base.clone();
        mtj.tmr0 = pt.tmr0;
        let mut latch = latch_base.clone();
        latch.r_ref_ohm = pt.r_ref_ohm;
        latch.v_l_mv = pt.v_l_mv;

        let mc = yield_estimate(&mtj, &latch, trials, derive_seed(seed, &[i as u64]))?;
        let closed = analytic_yield(&mtj, &latch)?;
        let energy = energy_model(&latch, &mtj)?;
        out.push(SweepPoint {
            tmr0: pt.tmr0,
            r_ref_ohm: pt.r_ref_ohm,
            v_l_mv: pt.v_l_mv,
            trials,
            yield_one: mc.yield_one,
            yield_zero: mc.yield_zero,
            yield_avg: mc.yield_avg,
            analytic_one: closed.yield_one,
            analytic_zero: closed.yield_zero,
            analytic_avg: closed.yield_avg,
            energy_fj: energy.energy_fj,
            energy_extrapolated: energy.extrapolated,
        })
    }
    Ok(out)
}

/// Runs the cross-product sweep of `grid`; one row per grid point, in the
/// fixed order of [`SweepGrid::points`]. Identical `(grid, seed)` inputs
/// give a bit-identical table.
pub fn yield_sweep(
    grid: &SweepGrid,
    mtj_base: &MtjParams,
    latch_base: &LatchParams,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    grid.validate()?;
    yield_points(&grid.points(), mtj_base, latch_base, grid.trials, seed)
}

/// Line-fit convention for linearity extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InlConvention {
    /// Ideal line through the first and last point of the curve. The
    /// first and last INL entries are exactly zero by construction.
    EndpointFit,
}

impl std::fmt::Display for InlConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InlConvention::EndpointFit => write!(f, "endpoint-fit"),
        }
    }
}

/// Linearity report of a transfer curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InlReport {
    /// Line-fit convention used.
    pub convention: InlConvention,
    /// One least-significant step of the fitted line, in the curve's
    /// value units per unit code.
    pub lsb: f64,
    /// Input codes, as given.
    pub codes: Vec<u32>,
    /// Measured values re-expressed in LSB above the first point.
    pub measured_lsb: Vec<f64>,
    /// Integral nonlinearity per code [LSB].
    pub inl_lsb: Vec<f64>,
    /// Largest |INL| over the curve [LSB].
    pub max_abs_inl_lsb: f64,
}

/// Extracts integral nonlinearity from a measured transfer curve.
///
/// The ideal line passes through the first and last points; one LSB is
/// that line's rise per unit code. Deviation is evaluated as
/// `(v[i] - v[0]) - t_i * (v[end] - v[0])` with `t_i` the code's position
/// along the span, which makes the endpoint INL entries exactly zero.
pub fn compute_inl(curve: &[(u32, f64)], convention: InlConvention) -> Result<InlReport> {
    if curve.len() < 2 {
        return Err(SimError::Domain(format!(
            "linearity needs at least 2 points, got {}",
            curve.len()
        )));
    }
    for w in curve.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(SimError::Domain(format!(
                "codes must be strictly increasing, but {} follows {}",
                w[1].0, w[0].0
            )));
        }
    }
    if curve.iter().any(|(_, v)| !v.is_finite()) {
        return Err(SimError::Domain(
            "curve values must all be finite".to_string(),
        ));
    }

    let (c0, v0) = curve[0];
    let (c_end, v_end) = *curve.last().expect("len >= 2");
    let span_codes = f64::from(c_end - c0);
    let rise = v_end - v0;
    // All curve values are finite (checked above), so `rise` cannot be NaN.
    if rise <= 0.0 {
        return Err(SimError::Domain(format!(
            "curve must rise from first to last point to define an LSB \
             (first {v0}, last {v_end})"
        )));
    }
    let InlConvention::EndpointFit = convention;
    let lsb = rise / span_codes;

    let mut codes = Vec::with_capacity(curve.len());
    let mut measured_lsb = Vec::with_capacity(curve.len());
    let mut inl_lsb = Vec::with_capacity(curve.len());
    let mut max_abs: f64 = 0.0;
    for &(c, v) in curve {
        let t = f64::from(c - c0) / span_codes;
        let inl = ((v - v0) - t * rise) / lsb;
        codes.push(c);
        measured_lsb.push((v - v0) / lsb);
        inl_lsb.push(inl);
        max_abs = max_abs.max(inl.abs());
    }

    Ok(InlReport {
        convention,
        lsb,
        codes,
        measured_lsb,
        inl_lsb,
        max_abs_inl_lsb: max_abs,
    })
}

/// Largest |INL| of a curve under the endpoint-fit convention [LSB].
pub fn max_abs_inl(curve: &[(u32, f64)]) -> Result<f64> {
    Ok(compute_inl(curve, InlConvention::EndpointFit)?.max_abs_inl_lsb)
}

/// Splits a total pulse count into the three charge quanta the way
/// thermometer-coded inputs deliver it: the counts differ by at most one
/// and earlier quanta carry the remainder.
fn thermometer_quanta(count: u32) -> [u32; CHARGE_QUANTA] {
    let k1 = count.div_ceil(3);
    let k3 = count / 3;
    [k1, count - k1 - k3, k3]
}

/// Settled accumulator voltage for every pulse count `0..=max_count`.
///
/// Each count is delivered through a fresh accumulation with the counts
/// split across the charge quanta as a thermometer input pattern would.
pub fn analog_transfer_curve(
    p: &MirrorParams,
    mode: MirrorMode,
    i_a_ua: f64,
    max_count: u32,
) -> Result<Vec<(u32, f64)>> {
    let hard_cap = 3 * MAX_ROWS as u32;
    if max_count > hard_cap {
        return Err(SimError::Domain(format!(
            "max_count {max_count} exceeds {hard_cap}, the most pulses one column can deliver"
        )));
    }
    let mut out = Vec::with_capacity(max_count as usize + 1);
    let mut integ = Integrator::new();
    for count in 0..=max_count {
        let trace = ColumnCurrentTrace {
            k_per_quantum: thermometer_quanta(count),
            i_a_ua,
        };
        integ.reset();
        let res = integ.integrate(&trace, p, mode)?;
        out.push((count, res.v_final_mv));
    }
    Ok(out)
}

/// End-to-end transfer curve including the converter: ideal count in,
/// measured output code out.
pub fn quantized_transfer_curve(
    cfg: &MacroConfig,
    mode: MirrorMode,
) -> Result<Vec<(u32, u8)>> {
    cfg.validate()?;
    let i_a_ua = unit_current_ua(cfg.array.v_cl_mv, &cfg.switch)?;
    let analog = analog_transfer_curve(&cfg.integrator, mode, i_a_ua, 15)?;
    let mut out = Vec::with_capacity(analog.len());
    for (count, v_mv) in analog {
        let res = adc::convert(v_mv, &cfg.adc, derive_seed(cfg.seed, &[3, u64::from(count)]))?;
        out.push((count, res.code));
    }
    Ok(out)
}

/// Which bit-cell arrangement a comparison row models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellMode {
    /// Junction sits directly in the current path; the stored weight is
    /// read as its resistance.
    Conventional,
    /// Junction only steers a latch; the current path sees the latch's
    /// output switch.
    Proposed,
}

impl std::fmt::Display for CellMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellMode::Conventional => write!(f, "conventional"),
            CellMode::Proposed => write!(f, "proposed"),
        }
    }
}

/// Influence curves of one cell arrangement at one junction contrast.
///
/// All currents are expressed in units of the compute line's design
/// current (one fully-on cell of the latch-based arrangement), so both
/// arrangements sit on a common scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparePoint {
    /// Junction contrast this row models.
    pub tmr0: f64,
    /// Cell arrangement.
    pub mode: CellMode,
    /// Current of a weight-1 cell [µA].
    pub i_on_ua: f64,
    /// Current of a weight-0 cell [µA].
    pub i_off_ua: f64,
    /// Weight-0 leakage in design-current units.
    pub off_leak_units: f64,
    /// Output vs number of weight-1 rows (0..=rows) at full activation,
    /// in design-current units.
    pub w_curve_units: Vec<f64>,
    /// Output vs activation (0..=3) with all rows at weight 1, in
    /// design-current units.
    pub x_curve_units: Vec<f64>,
    /// Largest gap between the weight-influence curve and the ideal line
    /// the activation-influence curve implies, in design-current units.
    pub mismatch_units: f64,
}

/// Weight-influence mismatch of the conventional arrangement relative to
/// the latch-based one at one junction contrast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareFactor {
    /// Junction contrast.
    pub tmr0: f64,
    /// `conventional mismatch / proposed mismatch`.
    pub conventional_over_proposed: f64,
}

/// Side-by-side influence study of the two cell arrangements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Rows in the modeled column.
    pub rows: usize,
    /// Compute-line bias [mV].
    pub v_cl_mv: f64,
    /// Two rows (one per arrangement) per junction contrast, conventional
    /// first.
    pub points: Vec<ComparePoint>,
    /// Mismatch ratio per junction contrast.
    pub factors: Vec<CompareFactor>,
}

const COMPARE_ROWS: usize = 4;
const COMPARE_MAX_X: u32 = 3;

fn influence_point(
    tmr0: f64,
    mode: CellMode,
    r_cell_on_ohm: f64,
    r_cell_off_ohm: f64,
    v_cl_mv: f64,
    i_design_ua: f64,
) -> ComparePoint {
    let i_on_ua = v_cl_mv * 1e3 / r_cell_on_ohm;
    let i_off_ua = v_cl_mv * 1e3 / r_cell_off_ohm;
    let on = i_on_ua / i_design_ua;
    let leak = i_off_ua / i_design_ua;

    let x_max = f64::from(COMPARE_MAX_X);
    let rows = COMPARE_ROWS as f64;
    // All rows at weight 1: leakage plays no part, the curve is exactly
    // linear in the activation.
    let x_curve_units: Vec<f64> = (0..=COMPARE_MAX_X)
        .map(|x| f64::from(x) * rows * on)
        .collect();
    // Full activation, w rows on: the off rows still conduct their leak.
    let w_curve_units: Vec<f64> = (0..=COMPARE_ROWS)
        .map(|w| x_max * (w as f64 * on + (rows - w as f64) * leak))
        .collect();
    // Ideal weight curve implied by the activation curve's slope.
    let mismatch_units = w_curve_units
        .iter()
        .enumerate()
        .map(|(w, &meas)| (meas - x_max * w as f64 * on).abs())
        .fold(0.0f64, f64::max);

    ComparePoint {
        tmr0,
        mode,
        i_on_ua,
        i_off_ua,
        off_leak_units: leak,
        w_curve_units,
        x_curve_units,
        mismatch_units,
    }
}

/// Compares weight- vs activation-influence of the conventional cell
/// (junction in the current path) against the latch-based cell, per
/// junction contrast.
///
/// Conventional: cell current `V(CL) / (R_junction + r_on)`, weight 1
/// stored as the low-resistance state. Latch-based: `V(CL) / (2 r_on)`
/// when on, `V(CL) / (r_off + r_on)` when off — independent of the
/// junction contrast by construction.
pub fn compare_conventional(
    tmr_values: &[f64],
    mtj: &MtjParams,
    switch: &SwitchParams,
    v_cl_mv: f64,
) -> Result<CompareReport> {
    if tmr_values.is_empty() {
        return Err(SimError::Dimension(
            "need at least one junction contrast to compare".to_string(),
        ));
    }
    mtj.validate()?;
    switch.validate()?;
    if !(v_cl_mv.is_finite() && v_cl_mv > 0.0) {
        return Err(SimError::Domain(format!(
            "v_cl_mv must be positive and finite, got {v_cl_mv}"
        )));
    }

    let i_design_ua = unit_current_ua(v_cl_mv, switch)?;
    let mut points = Vec::with_capacity(2 * tmr_values.len());
    let mut factors = Vec::with_capacity(tmr_values.len());
    for &t in tmr_values {
        if !(t.is_finite() && t > 0.0) {
            return Err(SimError::Domain(format!(
                "junction contrast values must be positive and finite, got {t}"
            )));
        }
        let mut m = mtj.clone();
        m.tmr0 = t;
        let r_p = m.nominal_r_ohm(MtjState::Parallel);
        let r_ap = m.nominal_r_ohm(MtjState::AntiParallel);

        let conventional = influence_point(
            t,
            CellMode::Conventional,
            r_p + switch.r_on_ohm,
            r_ap + switch.r_on_ohm,
            v_cl_mv,
            i_design_ua,
        );
        let proposed = influence_point(
            t,
            CellMode::Proposed,
            2.0 * switch.r_on_ohm,
            switch.r_off_ohm + switch.r_on_ohm,
            v_cl_mv,
            i_design_ua,
        );
        factors.push(CompareFactor {
            tmr0: t,
            conventional_over_proposed: conventional.mismatch_units / proposed.mismatch_units,
        });
        points.push(conventional);
        points.push(proposed);
    }

    Ok(CompareReport {
        rows: COMPARE_ROWS,
        v_cl_mv,
        points,
        factors,
    })
}
