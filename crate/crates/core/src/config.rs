//! Whole-macro configuration: one struct gathering every block's
//! parameters, loadable from TOML with defaults for anything omitted.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adc::SarAdcParams;
use crate::analysis::SweepGrid;
use crate::array::MAX_COLS;
use crate::calibration::Calibration;
use crate::device::{MtjParams, SwitchParams};
use crate::engine::PipelineTiming;
use crate::error::{Result, SimError};
use crate::integrator::MirrorParams;
use crate::latch::LatchParams;

/// Array-level electrical and shape settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    /// Columns evaluated per burst (1..=16).
    pub n_cols: usize,
    /// Compute-line bias [mV].
    pub v_cl_mv: f64,
    /// Input pulse width [ps].
    pub t_cp_ps: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            n_cols: MAX_COLS,
            v_cl_mv: 100.0,
            t_cp_ps: 800.0,
        }
    }
}

impl ArrayConfig {
    /// Checks shape and bias are usable.
    pub fn validate(&self) -> Result<()> {
        if self.n_cols == 0 || self.n_cols > MAX_COLS {
            return Err(SimError::Config(format!(
                "n_cols must be 1..={MAX_COLS}, got {}",
                self.n_cols
            )));
        }
        if !(self.v_cl_mv.is_finite() && self.v_cl_mv > 0.0) {
            return Err(SimError::Config(format!(
                "v_cl_mv must be positive and finite, got {}",
                self.v_cl_mv
            )));
        }
        if !(self.t_cp_ps.is_finite() && self.t_cp_ps > 0.0) {
            return Err(SimError::Config(format!(
                "t_cp_ps must be positive and finite, got {}",
                self.t_cp_ps
            )));
        }
        Ok(())
    }
}

/// Complete simulator configuration.
///
/// Loading from TOML fills any omitted section with its default; the two
/// calibration fields are the exception — omitting both leaves the
/// configuration uncalibrated, and energy/efficiency reporting refuses to
/// run until the calibrate step supplies one. The programmatic
/// [`Default`] instead carries the shipped calibration so library users
/// start from a fully working setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroConfig {
    /// Master seed; every stochastic draw in a run derives from it.
    pub seed: u64,
    /// Junction population.
    pub device: MtjParams,
    /// Latch output-switch resistances.
    pub switch: SwitchParams,
    /// Weight latch.
    pub latch: LatchParams,
    /// Array shape and bias.
    pub array: ArrayConfig,
    /// Current-mirror accumulator.
    pub integrator: MirrorParams,
    /// Output converter.
    pub adc: SarAdcParams,
    /// Pipeline stage durations.
    pub engine: PipelineTiming,
    /// Sweep grid for yield studies.
    pub analysis: SweepGrid,
    /// Path to a calibration TOML produced by the calibrate command.
    /// Mutually exclusive with the inline `calibration` table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_file: Option<PathBuf>,
    /// Inline calibration constants. Mutually exclusive with
    /// `calibration_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig {
            seed: 42,
            device: MtjParams::default(),
            switch: SwitchParams::default(),
            latch: LatchParams::default(),
            array: ArrayConfig::default(),
            integrator: MirrorParams::default(),
            adc: SarAdcParams::default(),
            engine: PipelineTiming::default(),
            analysis: SweepGrid::default(),
            calibration_file: None,
            calibration: Some(Calibration::default()),
        }
    }
}

impl MacroConfig {
    /// A variability-free configuration: nominal resistances, offset-free
    /// latches, droop-free mirrors, noise-free comparator. Useful as a
    /// ground truth — the analog chain then reproduces the digital dot
    /// product exactly.
    pub fn ideal() -> Self {
        let mut cfg = MacroConfig::default();
        cfg.device.sigma_r = 0.0;
        cfg.latch.sigma_offset = 0.0;
        cfg.integrator.droop_lambda_per_v = 0.0;
        cfg.adc.comparator_offset_sigma_mv = 0.0;
        cfg
    }

    /// Checks every section plus the cross-field rules.
    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.switch.validate()?;
        self.latch.validate()?;
        self.array.validate()?;
        self.integrator.validate()?;
        self.adc.validate()?;
        self.engine.validate()?;
        self.analysis.validate()?;
        if self.calibration_file.is_some() && self.calibration.is_some() {
            return Err(SimError::Config(
                "calibration_file and an inline [calibration] table are mutually exclusive; \
                 keep one"
                    .to_string(),
            ));
        }
        if let Some(cal) = &self.calibration {
            cal.validate()?;
        }
        Ok(())
    }

    /// Folds a calibration's fitted constants into the block parameters
    /// they tune and stores the calibration for energy reporting.
    pub fn apply_calibration(&mut self, cal: Calibration) -> Result<()> {
        cal.validate()?;
        self.latch.gain_k = cal.gain_k;
        self.latch.sigma_offset = cal.sigma_offset;
        self.latch.energy_c0 = cal.energy_c0;
        self.device.sigma_r = cal.sigma_r;
        self.integrator.droop_lambda_per_v = cal.droop_lambda_per_v;
        self.integrator.feedback_factor = cal.feedback_factor;
        self.calibration_file = None;
        self.calibration = Some(cal);
        Ok(())
    }
}
