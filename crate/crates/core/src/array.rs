//! Local bit-cell array: weight storage, pulse-count input encoding, and
//! compute-line current summation.
//!
//! Weights are 1-bit and live in the junction states of an `m x n` tile
//! (up to 64 rows; 16 columns in the full tile, fewer allowed for small
//! studies). Activations are 2-bit and enter as pulse counts: an input of
//! value `x` drives its row for `x` unit-width pulses, each aligned with one
//! of the three charge quanta of an evaluation. A row sources one unit
//! current onto the compute line during a quantum exactly when its latched
//! weight conducts and its input is still high, so the per-quantum current
//! is `k_q * i_a` with `k_q` the number of such rows — a thermometer-coded
//! realization of the multiply-accumulate.
//!
//! The compute path only ever sees latched weight bits and the access-switch
//! current; it never touches the junctions themselves, which models the
//! separation between the compute port and the read/write port of the cell.

use serde::{Deserialize, Serialize};

use crate::device::{MtjDevice, MtjParams, MtjState, SwitchParams};
use crate::error::{Result, SimError};
use crate::latch::{resolve, LatchOutcome, LatchParams, WeightBit};
use crate::rng::derive_seed;

/// Maximum accumulation depth (rows) of one local array tile.
pub const MAX_ROWS: usize = 64;
/// Column count of the full tile.
pub const MAX_COLS: usize = 16;
/// Number of charge quanta per evaluation: one per possible input pulse of
/// a 2-bit activation.
pub const CHARGE_QUANTA: usize = 3;
/// Largest representable activation value (2-bit).
pub const MAX_ACTIVATION: u8 = 3;

/// A weight tile: junction population plus the programmed bit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBca {
    mtj: MtjParams,
    weights: Vec<Vec<bool>>,
}

impl LocalBca {
    /// Programs a bit matrix into a tile drawn from population `mtj`.
    ///
    /// `matrix[i][j] == true` stores weight 1 at row `i`, column `j` by
    /// putting that junction in its anti-parallel (high-resistance) state,
    /// so an ideal latch pass recovers the matrix exactly.
    pub fn load_weights(matrix: &[Vec<bool>], mtj: &MtjParams) -> Result<Self> {
        mtj.validate()?;
        let rows = matrix.len();
        if rows == 0 || rows > MAX_ROWS {
            return Err(SimError::Config(format!(
                "weight matrix must have 1..={MAX_ROWS} rows, got {rows}"
            )));
        }
        let cols = matrix[0].len();
        if cols == 0 || cols > MAX_COLS {
            return Err(SimError::Config(format!(
                "weight matrix must have 1..={MAX_COLS} columns, got {cols}"
            )));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(SimError::Config(format!(
                    "ragged weight matrix: row 0 has {cols} columns, row {i} has {}",
                    row.len()
                )));
            }
        }
        Ok(LocalBca {
            mtj: mtj.clone(),
            weights: matrix.to_vec(),
        })
    }

    /// Number of rows (accumulation depth).
    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.weights[0].len()
    }

    /// Junction population the tile was drawn from.
    pub fn mtj_params(&self) -> &MtjParams {
        &self.mtj
    }

    /// Stored bit at `(row, col)`.
    pub fn weight(&self, row: usize, col: usize) -> bool {
        self.weights[row][col]
    }

    /// The stored bits of one column, top to bottom.
    pub fn column_bits(&self, col: usize) -> Vec<bool> {
        self.weights.iter().map(|r| r[col]).collect()
    }

    /// The device at `(row, col)`: population parameters plus the state
    /// encoding the stored bit.
    pub fn device(&self, row: usize, col: usize) -> MtjDevice {
        let state = if self.weights[row][col] {
            MtjState::AntiParallel
        } else {
            MtjState::Parallel
        };
        MtjDevice::new(self.mtj.clone(), state)
    }
}

/// A 2-bit activation encoded as pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    /// Number of unit pulses (equals the activation value).
    pub count: u8,
    /// Width of each pulse [ps].
    pub width_ps: f64,
}

impl PulseTrain {
    /// Total time the row input is high [ps].
    pub fn total_high_time_ps(&self) -> f64 {
        f64::from(self.count) * self.width_ps
    }
}

/// Encodes a 2-bit activation as `x` pulses of width `t_cp_ps` each.
pub fn encode_input(x: u8, t_cp_ps: f64) -> Result<PulseTrain> {
    if x > MAX_ACTIVATION {
        return Err(SimError::Domain(format!(
            "activation must be 0..={MAX_ACTIVATION}, got {x}"
        )));
    }
    if !(t_cp_ps.is_finite() && t_cp_ps > 0.0) {
        return Err(SimError::Domain(format!(
            "t_cp_ps must be positive and finite, got {t_cp_ps}"
        )));
    }
    Ok(PulseTrain {
        count: x,
        width_ps: t_cp_ps,
    })
}

/// A validated vector of 2-bit activations, one per array row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputVector {
    activations: Vec<u8>,
}

impl InputVector {
    /// Validates and wraps a raw activation list.
    pub fn new(activations: Vec<u8>) -> Result<Self> {
        if activations.is_empty() {
            return Err(SimError::Dimension(
                "input vector must have at least one element".to_string(),
            ));
        }
        for (i, &x) in activations.iter().enumerate() {
            if x > MAX_ACTIVATION {
                return Err(SimError::Domain(format!(
                    "activation at row {i} must be 0..={MAX_ACTIVATION}, got {x}"
                )));
            }
        }
        Ok(InputVector { activations })
    }

    /// Number of rows driven.
    pub fn len(&self) -> usize {
        self.activations.len()
    }

    /// True when the vector is empty (never, post-construction).
    pub fn is_empty(&self) -> bool {
        self.activations.is_empty()
    }

    /// Raw activation values.
    pub fn activations(&self) -> &[u8] {
        &self.activations
    }

    /// Pulse encoding of row `i`.
    pub fn pulse_train(&self, i: usize, t_cp_ps: f64) -> Result<PulseTrain> {
        encode_input(self.activations[i], t_cp_ps)
    }
}

/// Per-quantum compute-line activity of one column evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnCurrentTrace {
    /// Active-row counts for the three charge quanta; the instantaneous
    /// compute-line current during quantum `q` is `k_per_quantum[q] * i_a`.
    pub k_per_quantum: [u32; CHARGE_QUANTA],
    /// Unit current one conducting row sources [µA].
    pub i_a_ua: f64,
}

impl ColumnCurrentTrace {
    /// Total number of unit charge pulses, `Σ_q k_q` — the analog image of
    /// the digital multiply-accumulate result.
    pub fn total_pulses(&self) -> u32 {
        self.k_per_quantum.iter().sum()
    }
}

/// Unit current sourced by one conducting row [µA]: the compute-line bias
/// across the two series access transistors, `v_cl / (2 * r_on)`.
pub fn unit_current_ua(v_cl_mv: f64, switch: &SwitchParams) -> Result<f64> {
    switch.validate()?;
    if !(v_cl_mv.is_finite() && v_cl_mv > 0.0) {
        return Err(SimError::Domain(format!(
            "v_cl_mv must be positive and finite, got {v_cl_mv}"
        )));
    }
    Ok(v_cl_mv * 1e-3 / (2.0 * switch.r_on_ohm) * 1e6)
}

/// Latches every row of one column: samples each device's as-fabricated
/// resistance, then resolves its latch event.
///
/// Rows are seeded individually from `(rng_seed, row)`, so the outcome of a
/// row does not depend on how many rows precede it.
pub fn latch_column(
    bca: &LocalBca,
    col: usize,
    p: &LatchParams,
    rng_seed: u64,
) -> Result<Vec<LatchOutcome>> {
    if col >= bca.cols() {
        return Err(SimError::Dimension(format!(
            "column {col} out of range for a {}-column array",
            bca.cols()
        )));
    }
    (0..bca.rows())
        .map(|row| {
            let dev = bca.device(row, col);
            let r = crate::device::sample_resistance(&dev, derive_seed(rng_seed, &[row as u64, 0]))?;
            resolve(r, p, derive_seed(rng_seed, &[row as u64, 1]))
        })
        .collect()
}

/// Sums latched weights against input pulses into per-quantum row counts.
///
/// A row contributes during quantum `q` (1-based) iff its latched bit
/// conducts and its activation is at least `q`. A cleanly latched weight 1
/// conducts; a failed latch conducts iff its frozen stuck bit came up 1.
pub fn compute_line_current(
    latched: &[LatchOutcome],
    input: &InputVector,
    i_a_ua: f64,
) -> Result<ColumnCurrentTrace> {
    if latched.len() != input.len() {
        return Err(SimError::Dimension(format!(
            "latched column has {} rows but input vector has {}",
            latched.len(),
            input.len()
        )));
    }
    if !(i_a_ua.is_finite() && i_a_ua > 0.0) {
        return Err(SimError::Domain(format!(
            "i_a_ua must be positive and finite, got {i_a_ua}"
        )));
    }

    let mut k = [0u32; CHARGE_QUANTA];
    for (outcome, &x) in latched.iter().zip(input.activations()) {
        let conducts = match outcome.bit {
            WeightBit::One => true,
            WeightBit::Zero => false,
            WeightBit::Fail => outcome.stuck_one,
        };
        if conducts {
            for (q, slot) in k.iter_mut().enumerate() {
                if u8::try_from(q + 1).expect("tiny") <= x {
                    *slot += 1;
                }
            }
        }
    }
    Ok(ColumnCurrentTrace {
        k_per_quantum: k,
        i_a_ua,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn noiseless_latch() -> LatchParams {
        LatchParams {
            sigma_offset: 0.0,
            ..LatchParams::default()
        }
    }

    fn noiseless_mtj() -> MtjParams {
        MtjParams {
            sigma_r: 0.0,
            ..MtjParams::default()
        }
    }

    fn bits(rows: &[&str]) -> Vec<Vec<bool>> {
        rows.iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect()
    }

    fn outcome(bit: WeightBit, stuck_one: bool) -> LatchOutcome {
        LatchOutcome {
            v_w_mv: match bit {
                WeightBit::One => 890.0,
                WeightBit::Zero => 10.0,
                WeightBit::Fail => 450.0,
            },
            bit,
            energy_fj: 70.0,
            stuck_one,
        }
    }

    #[test]
    fn identity_round_trips_noiselessly() {
        let n = 16;
        let matrix: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        let bca = LocalBca::load_weights(&matrix, &noiseless_mtj()).unwrap();
        let p = noiseless_latch();
        for col in 0..n {
            let latched = latch_column(&bca, col, &p, 17).unwrap();
            for (row, out) in latched.iter().enumerate() {
                let expected = if row == col { WeightBit::One } else { WeightBit::Zero };
                assert_eq!(out.bit, expected, "row {row} col {col}");
            }
        }
    }

    #[test]
    fn all_zero_weights_produce_zero_current() {
        let bca = LocalBca::load_weights(&bits(&["0000", "0000", "0000"]), &noiseless_mtj()).unwrap();
        let latched = latch_column(&bca, 2, &noiseless_latch(), 3).unwrap();
        let input = InputVector::new(vec![3, 3, 3]).unwrap();
        let trace = compute_line_current(&latched, &input, 50.0).unwrap();
        assert_eq!(trace.k_per_quantum, [0, 0, 0]);
        assert_eq!(trace.total_pulses(), 0);
    }

    #[test]
    fn pulse_encoding_matches_truth_table() {
        // 2-bit activation -> total high time: 00 -> 0, 01 -> T, 10 -> 2T, 11 -> 3T.
        let t_cp = 800.0;
        for (x, expected) in [(0u8, 0.0), (1, 800.0), (2, 1600.0), (3, 2400.0)] {
            let pt = encode_input(x, t_cp).unwrap();
            assert_eq!(pt.count, x);
            assert_relative_eq!(pt.total_high_time_ps(), expected, max_relative = 1e-12);
        }
        assert!(encode_input(4, t_cp).is_err());
        assert!(encode_input(0, 0.0).is_err());
    }

    #[test]
    fn quantum_counts_match_hand_enumeration() {
        // All four rows on, single pulse each: every row active in quantum 1 only.
        let latched: Vec<_> = (0..4).map(|_| outcome(WeightBit::One, false)).collect();
        let input = InputVector::new(vec![1, 1, 1, 1]).unwrap();
        let trace = compute_line_current(&latched, &input, 50.0).unwrap();
        assert_eq!(trace.k_per_quantum, [4, 0, 0]);

        // W = [1,0,1,0], X = [3,3,2,2]: rows 0 and 2 conduct; row 0 is high
        // for quanta 1-3, row 2 for quanta 1-2.
        let latched = vec![
            outcome(WeightBit::One, false),
            outcome(WeightBit::Zero, false),
            outcome(WeightBit::One, false),
            outcome(WeightBit::Zero, false),
        ];
        let input = InputVector::new(vec![3, 3, 2, 2]).unwrap();
        let trace = compute_line_current(&latched, &input, 50.0).unwrap();
        assert_eq!(trace.k_per_quantum, [2, 2, 1]);

        // Any weights, all-zero input: nothing conducts in any quantum.
        let input = InputVector::new(vec![0, 0, 0, 0]).unwrap();
        let trace = compute_line_current(&latched, &input, 50.0).unwrap();
        assert_eq!(trace.k_per_quantum, [0, 0, 0]);
    }

    #[test]
    fn failed_latch_contributes_via_frozen_coin() {
        let input = InputVector::new(vec![2]).unwrap();
        let stuck_high = vec![outcome(WeightBit::Fail, true)];
        let trace = compute_line_current(&stuck_high, &input, 50.0).unwrap();
        assert_eq!(trace.k_per_quantum, [1, 1, 0]);

        let stuck_low = vec![outcome(WeightBit::Fail, false)];
        let trace = compute_line_current(&stuck_low, &input, 50.0).unwrap();
        assert_eq!(trace.k_per_quantum, [0, 0, 0]);
    }

    #[test]
    fn unit_current_from_default_bias() {
        // 100 mV across two 1 kΩ access transistors in series: 50 µA.
        let i = unit_current_ua(100.0, &SwitchParams::default()).unwrap();
        assert_relative_eq!(i, 50.0, max_relative = 1e-12);
    }

    #[test]
    fn dimension_errors_are_reported() {
        assert!(LocalBca::load_weights(&[], &noiseless_mtj()).is_err());
        assert!(LocalBca::load_weights(&bits(&["01", "0"]), &noiseless_mtj()).is_err());
        let too_wide = vec![vec![false; MAX_COLS + 1]];
        assert!(LocalBca::load_weights(&too_wide, &noiseless_mtj()).is_err());
        let too_deep = vec![vec![false]; MAX_ROWS + 1];
        assert!(LocalBca::load_weights(&too_deep, &noiseless_mtj()).is_err());

        let bca = LocalBca::load_weights(&bits(&["10", "01"]), &noiseless_mtj()).unwrap();
        assert!(latch_column(&bca, 2, &noiseless_latch(), 0).is_err());

        let latched = vec![outcome(WeightBit::One, false); 2];
        let input = InputVector::new(vec![1, 1, 1]).unwrap();
        assert!(compute_line_current(&latched, &input, 50.0).is_err());
    }

    #[test]
    fn latch_failure_rate_consistent_with_population_yield() {
        // Latching a noisy column many times reproduces the per-bit yield
        // of the population within Monte-Carlo tolerance.
        let mtj = MtjParams {
            sigma_r: 0.24934,
            ..MtjParams::default()
        };
        let matrix = vec![vec![true]; 16];
        let bca = LocalBca::load_weights(&matrix, &mtj).unwrap();
        let p = LatchParams::default();
        let trials = 400;
        let mut correct = 0u64;
        for t in 0..trials {
            let latched = latch_column(&bca, 0, &p, derive_seed(malice(), &[t])).unwrap();
            correct += latched.iter().filter(|o| o.bit == WeightBit::One).count() as u64;
        }
        let rate = correct as f64 / (trials as f64 * 16.0);
        let expected = crate::latch::analytic_yield(&mtj, &p).unwrap().yield_one;
        // 6400 bit events: standard error ~0.25 points; allow 4 sigma.
        assert!(
            (rate - expected).abs() < 0.015,
            "measured {rate}, expected {expected}"
        );
    }

    // Arbitrary fixed seed for the statistical test above.
    fn malice() -> u64 {
        0xDECAF
    }

    proptest! {
        /// Noiseless latch recovers any loaded matrix exactly.
        #[test]
        fn random_matrix_round_trips(
            rows in 1usize..MAX_ROWS + 1,
            cols in 1usize..MAX_COLS + 1,
            seed in any::<u64>(),
        ) {
            let mut state = seed;
            let matrix: Vec<Vec<bool>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| {
                            state = crate::rng::splitmix64(state);
                            state & 1 == 1
                        })
                        .collect()
                })
                .collect();
            let bca = LocalBca::load_weights(&matrix, &noiseless_mtj()).unwrap();
            let p = noiseless_latch();
            for col in 0..cols {
                let latched = latch_column(&bca, col, &p, seed).unwrap();
                for (row, out) in latched.iter().enumerate() {
                    let expected = if matrix[row][col] { WeightBit::One } else { WeightBit::Zero };
                    prop_assert_eq!(out.bit, expected);
                }
            }
        }

        /// Charge conservation: with a clean latch, total pulses equal the
        /// digital multiply-accumulate of the column.
        #[test]
        fn charge_conservation(
            weights in proptest::collection::vec(any::<bool>(), 1..=MAX_ROWS),
            seed in any::<u64>(),
        ) {
            let mut state = seed;
            let xs: Vec<u8> = weights
                .iter()
                .map(|_| {
                    state = crate::rng::splitmix64(state);
                    (state % 4) as u8
                })
                .collect();
            let latched: Vec<_> = weights
                .iter()
                .map(|&w| outcome(if w { WeightBit::One } else { WeightBit::Zero }, false))
                .collect();
            let input = InputVector::new(xs.clone()).unwrap();
            let trace = compute_line_current(&latched, &input, 50.0).unwrap();
            let mac: u32 = weights
                .iter()
                .zip(&xs)
                .map(|(&w, &x)| u32::from(w) * u32::from(x))
                .sum();
            prop_assert_eq!(trace.total_pulses(), mac);

            // Thermometer property: later quanta never busier than earlier.
            prop_assert!(trace.k_per_quantum[0] >= trace.k_per_quantum[1]);
            prop_assert!(trace.k_per_quantum[1] >= trace.k_per_quantum[2]);
            // Counts never exceed the row count.
            for &k in &trace.k_per_quantum {
                prop_assert!(k as usize <= weights.len());
            }
        }
    }
}
