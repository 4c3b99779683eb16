//! Behavioral simulator of an analog in-memory multiply-accumulate macro
//! built on magnetic-junction bit-cells.
//!
//! The signal chain being modeled, end to end:
//!
//! 1. **Device** — each bit-cell stores one weight bit as the resistance
//!    state of a magnetic tunnel junction with log-normal-free, simple
//!    Gaussian resistance spread ([`device`]).
//! 2. **Latch** — at the start of a burst, a regenerative latch senses
//!    each junction against a reference and drives a high-contrast output
//!    switch; the latch can misresolve, which is where yield comes from
//!    ([`latch`]).
//! 3. **Array** — latched weight switches gate pulse-counted activations
//!    onto a shared compute line; the line current is the dot product in
//!    units of one cell current ([`array`]).
//! 4. **Integrator** — a current mirror copies a fraction of the line
//!    current onto a capacitor; its gain droops as the output rises,
//!    optionally compensated by a feedback mirror ([`integrator`]).
//! 5. **ADC** — a 4-bit successive-approximation converter digitizes the
//!    settled voltage ([`adc`]).
//! 6. **Engine** — runs whole columns through that chain, accounts
//!    timing and energy, and recombines bit-planes ([`engine`]).
//! 7. **Analysis** — Monte-Carlo yield sweeps, linearity extraction, the
//!    conventional-cell comparison, and the deterministic calibration
//!    fit ([`analysis`]).
//!
//! Reproducibility is a design rule: every stochastic draw derives from
//! one master seed through a splittable mixing function, so results are
//! bit-identical across runs and thread counts.

// Unit-test style: tests build config variants by mutating a default and
// assert with negated comparisons so NaN results fail rather than pass.
#![cfg_attr(
    test,
    allow(
        clippy::field_reassign_with_default,
        clippy::neg_cmp_op_on_partial_ord,
        clippy::needless_range_loop
    )
)]

pub mod adc;
pub mod analysis;
pub mod array;
pub mod calibration;
pub mod config;
pub mod device;
pub mod engine;
pub mod error;
pub mod integrator;
pub mod latch;
pub mod rng;

pub use adc::{AdcResult, SarAdcParams};
pub use analysis::{
    analog_transfer_curve, calibrate, compare_conventional, compute_inl, max_abs_inl,
    quantized_transfer_curve, yield_points, yield_sweep, CellMode, CompareFactor, ComparePoint,
    CompareReport, InlConvention, InlReport, OperatingPoint, SweepGrid, SweepPoint,
};
pub use array::{
    compute_line_current, encode_input, latch_column, unit_current_ua, ColumnCurrentTrace,
    InputVector, LocalBca, PulseTrain, CHARGE_QUANTA, MAX_ACTIVATION, MAX_COLS, MAX_ROWS,
};
pub use calibration::{Calibration, CalibrationTargets, Residuals, YieldAnchor};
pub use config::{ArrayConfig, MacroConfig};
pub use device::{
    m_tmr, sample_resistance, tmr, MtjDevice, MtjParams, MtjState, SwitchParams,
};
pub use engine::{
    average_delay, column_delay, efficiency_report, energy_report, mac_oracle, recombine_multibit,
    run_mvm, tops_per_watt, ColumnEnergy, ColumnTiming, EfficiencyReport, EnergyFractions,
    EnergyLedger, MacResult, MvmRun, PipelineTiming, Recombined, TimingSummary,
    MAX_ACCUMULATION_ROWS, MIN_ACCUMULATION_ROWS,
};
pub use error::{Result, SimError};
pub use integrator::{Integrator, IntegratorTrace, MirrorMode, MirrorParams, TraceSample};
pub use latch::{
    analytic_yield, energy_model, resolve, yield_estimate, LatchEnergy, LatchOutcome, LatchParams,
    WeightBit, YieldStats,
};
pub use rng::{derive_seed, rng_from_seed, splitmix64};
