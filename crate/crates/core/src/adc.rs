//! 4-bit successive-approximation ADC using charge redistribution.
//!
//! The capacitor bank has binary-weighted units 8:4:2:1 plus one dummy unit
//! (16 units total). Sampling charges the bank against the common-mode
//! level, leaving node P at `v_com - v_in`. Each decision phase switches the
//! tested capacitor's bottom plate to the reference, lifting node P by that
//! capacitor's share of `v_ref`; the comparator keeps the capacitor if node
//! P is still at or below the common-mode node (bit 1) and releases it at
//! the next phase otherwise (bit 0). Four phases produce the 4-bit code.
//!
//! The binary search is implemented literally — phase by phase, as charge
//! movements — and off code boundaries it lands on exactly
//! `floor(16 * v_in / v_ref)`. Tests cross-check it against that arithmetic
//! quantizer; the implementation itself never shortcuts through it.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rng::rng_from_seed;

/// Total capacitor bank size in unit capacitors.
pub const CAP_TOTAL_UNITS: u32 = 16;

/// Comparator tie band as a fraction of `v_ref`: inputs within this distance
/// of a code boundary resolve to the higher code. This pins the behavior at
/// exact boundaries (where the un-perturbed comparison is an exact float
/// tie) and absorbs the few-ULP rounding of upstream ideal-mode arithmetic.
/// It is nine orders of magnitude tighter than a code width, so any input
/// meaningfully off a boundary is unaffected.
pub const BOUNDARY_TIE_EPS_REL: f64 = 1e-9;

/// Electrical parameters of the converter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SarAdcParams {
    /// Resolution in bits. This macro's converter is 4-bit; other values
    /// are rejected.
    pub bits: u32,
    /// Full-scale reference [mV]. Default 650 * 16 / 15 ≈ 693.3 mV, so the
    /// top code's threshold sits exactly at the integrator's 650 mV linear
    /// ceiling.
    pub v_ref_mv: f64,
    /// Common-mode level node P is sampled against [mV]. Default 450 mV.
    pub v_com_mv: f64,
    /// Capacitor bank weights in unit capacitors, most significant first,
    /// ending with the dummy unit. Must sum to [`CAP_TOTAL_UNITS`].
    pub cap_weights: Vec<u32>,
    /// 1-sigma comparator input offset per decision [mV]. Default 0.
    pub comparator_offset_sigma_mv: f64,
}

impl Default for SarAdcParams {
    fn default() -> Self {
        SarAdcParams {
            bits: 4,
            v_ref_mv: 650.0 * 16.0 / 15.0,
            v_com_mv: 450.0,
            cap_weights: vec![8, 4, 2, 1, 1],
            comparator_offset_sigma_mv: 0.0,
        }
    }
}

impl SarAdcParams {
    /// Checks structural invariants of the bank.
    pub fn validate(&self) -> Result<()> {
        if self.bits != 4 {
            return Err(SimError::Config(format!(
                "this converter is 4-bit; got bits = {}",
                self.bits
            )));
        }
        if self.cap_weights.len() != self.bits as usize + 1 {
            return Err(SimError::Config(format!(
                "cap_weights needs {} entries ({} decision caps plus the dummy), got {}",
                self.bits + 1,
                self.bits,
                self.cap_weights.len()
            )));
        }
        let total: u32 = self.cap_weights.iter().sum();
        if total != CAP_TOTAL_UNITS {
            return Err(SimError::Config(format!(
                "cap_weights must sum to {CAP_TOTAL_UNITS} units, got {total}"
            )));
        }
        if self.cap_weights.contains(&0) {
            return Err(SimError::Config(
                "cap_weights entries must be positive".to_string(),
            ));
        }
        if !(self.v_ref_mv.is_finite() && self.v_ref_mv > 0.0) {
            return Err(SimError::Domain(format!(
                "v_ref_mv must be positive and finite, got {}",
                self.v_ref_mv
            )));
        }
        if !(self.v_com_mv.is_finite() && self.v_com_mv > 0.0) {
            return Err(SimError::Domain(format!(
                "v_com_mv must be positive and finite, got {}",
                self.v_com_mv
            )));
        }
        if !(self.comparator_offset_sigma_mv.is_finite() && self.comparator_offset_sigma_mv >= 0.0)
        {
            return Err(SimError::Domain(format!(
                "comparator_offset_sigma_mv must be non-negative and finite, got {}",
                self.comparator_offset_sigma_mv
            )));
        }
        Ok(())
    }

    /// Code width [mV].
    pub fn lsb_mv(&self) -> f64 {
        self.v_ref_mv / f64::from(CAP_TOTAL_UNITS)
    }
}

/// Outcome of one conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdcResult {
    /// Converted 4-bit code.
    pub code: u8,
    /// Node-P voltage after sampling and after each decision phase [mV]
    /// (`bits + 1` entries).
    pub vp_history: Vec<f64>,
    /// True when the input exceeded full scale and the code clipped at 15.
    pub saturated: bool,
}

/// Converts one settled voltage.
///
/// The RNG seeds the per-phase comparator offset draws; with the default
/// zero offset the conversion is fully deterministic and the seed is inert.
pub fn convert(v_in_mv: f64, p: &SarAdcParams, seed: u64) -> Result<AdcResult> {
    p.validate()?;
    if !(v_in_mv.is_finite() && v_in_mv >= 0.0) {
        return Err(SimError::Domain(format!(
            "v_in_mv must be non-negative and finite, got {v_in_mv}"
        )));
    }

    let mut rng = rng_from_seed(seed);
    let noise_dist = if p.comparator_offset_sigma_mv > 0.0 {
        Some(
            Normal::new(0.0, p.comparator_offset_sigma_mv)
                .map_err(|e| SimError::Domain(format!("comparator offset distribution: {e}")))?,
        )
    } else {
        None
    };

    let tie_eps_mv = BOUNDARY_TIE_EPS_REL * p.v_ref_mv;
    let nbits = p.bits as usize;

    // Sampling phase: bank bottom plates step from v_in to ground.
    let mut vp = p.v_com_mv - v_in_mv;
    let mut vp_history = Vec::with_capacity(nbits + 1);
    vp_history.push(vp);

    let mut code = 0u8;
    // Reference share released when the previously tested bit was 0.
    let mut release_mv = 0.0;
    for i in 0..nbits {
        let test_mv = f64::from(p.cap_weights[i]) / f64::from(CAP_TOTAL_UNITS) * p.v_ref_mv;
        // The previous capacitor (if rejected) returns to ground in the same
        // instant the tested one rises to the reference.
        vp += test_mv - release_mv;
        vp_history.push(vp);

        let offset_mv = noise_dist.map_or(0.0, |d| d.sample(&mut rng));
        let keep = vp <= p.v_com_mv + offset_mv + tie_eps_mv;
        if keep {
            code |= 1 << (nbits - 1 - i);
            release_mv = 0.0;
        } else {
            release_mv = test_mv;
        }
    }

    Ok(AdcResult {
        code,
        vp_history,
        saturated: v_in_mv > p.v_ref_mv,
    })
}

/// Converts the settled output of an accumulation whose sampling window
/// overlapped the accumulation itself: the provider is polled exactly once,
/// at sample close, and its value converted as usual.
pub fn sample_and_convert_pipelined<F>(provider: F, p: &SarAdcParams, seed: u64) -> Result<AdcResult>
where
    F: FnOnce() -> f64,
{
    let v_final_mv = provider();
    convert(v_final_mv, p, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Arithmetic quantizer the SAR recurrence must agree with off
    /// boundaries. Lives only in tests.
    fn quantizer_oracle(v_mv: f64, v_ref_mv: f64) -> u8 {
        ((16.0 * v_mv / v_ref_mv).floor() as i64).clamp(0, 15) as u8
    }

    #[test]
    fn zero_input_reads_zero() {
        let p = SarAdcParams::default();
        let r = convert(0.0, &p, 0).unwrap();
        assert_eq!(r.code, 0);
        assert!(!r.saturated);
        assert_eq!(r.vp_history.len(), 5);
        // With nothing sampled, every tested share overshoots the
        // common-mode node and every bit resolves low.
        assert_relative_eq!(r.vp_history[0], p.v_com_mv, max_relative = 1e-12);
        for &vp in &r.vp_history[1..] {
            assert!(vp > p.v_com_mv);
        }
    }

    #[test]
    fn mid_code_example_reads_1010() {
        let p = SarAdcParams::default();
        let v = 10.5 / 16.0 * p.v_ref_mv;
        let r = convert(v, &p, 0).unwrap();
        assert_eq!(r.code, 0b1010);
        assert!(!r.saturated);
    }

    #[test]
    fn grid_matches_quantizer_oracle() {
        let p = SarAdcParams::default();
        for i in 0..256u32 {
            let v = f64::from(i) / 256.0 * p.v_ref_mv;
            let r = convert(v, &p, 0).unwrap();
            if i % 16 == 0 {
                // Exact code boundary: ties resolve to the higher code,
                // which is i/16 itself.
                assert_eq!(r.code, (i / 16) as u8, "boundary at grid point {i}");
            } else {
                assert_eq!(r.code, quantizer_oracle(v, p.v_ref_mv), "grid point {i}");
            }
        }
    }

    #[test]
    fn history_telescopes_by_cap_shares() {
        let p = SarAdcParams::default();
        for i in 0..256u32 {
            let v = (f64::from(i) + 0.31) / 256.0 * p.v_ref_mv;
            let r = convert(v, &p, 0).unwrap();
            assert_eq!(r.vp_history.len(), 5);
            for (phase, w) in r.vp_history.windows(2).enumerate() {
                let delta = w[1] - w[0];
                let share = f64::from(p.cap_weights[phase]) / 16.0 * p.v_ref_mv;
                let matches_plus = (delta - share).abs() < 1e-9 * p.v_ref_mv;
                let matches_minus = (delta + share).abs() < 1e-9 * p.v_ref_mv;
                assert!(
                    matches_plus || matches_minus,
                    "phase {phase}: delta {delta} not ±{share}"
                );
            }
        }
    }

    #[test]
    fn saturation_clips_to_top_code() {
        let p = SarAdcParams::default();
        let r = convert(p.v_ref_mv * 1.2, &p, 0).unwrap();
        assert_eq!(r.code, 15);
        assert!(r.saturated);
        // At exactly full scale the code is 15 but the flag stays down.
        let r = convert(p.v_ref_mv, &p, 0).unwrap();
        assert_eq!(r.code, 15);
        assert!(!r.saturated);
    }

    #[test]
    fn exact_boundaries_resolve_upward() {
        let p = SarAdcParams::default();
        for c in 1..=15u32 {
            let v = f64::from(c) / 16.0 * p.v_ref_mv;
            let r = convert(v, &p, 0).unwrap();
            assert_eq!(r.code, c as u8, "boundary {c}/16 must read {c}");
        }
    }

    #[test]
    fn pipelined_sampling_matches_direct_conversion() {
        let p = SarAdcParams::default();
        let v = 3.2 / 16.0 * p.v_ref_mv;
        let direct = convert(v, &p, 9).unwrap();
        let pipelined = sample_and_convert_pipelined(|| v, &p, 9).unwrap();
        assert_eq!(direct, pipelined);
        assert_eq!(pipelined.code, 3);

        assert_eq!(sample_and_convert_pipelined(|| 0.0, &p, 9).unwrap().code, 0);
        let sat = sample_and_convert_pipelined(|| p.v_ref_mv + 1.0, &p, 9).unwrap();
        assert_eq!(sat.code, 15);
        assert!(sat.saturated);
    }

    #[test]
    fn rejects_bad_inputs_and_params() {
        let p = SarAdcParams::default();
        assert!(convert(-1.0, &p, 0).is_err());
        assert!(convert(f64::NAN, &p, 0).is_err());

        let bad_bits = SarAdcParams {
            bits: 6,
            ..SarAdcParams::default()
        };
        assert!(convert(100.0, &bad_bits, 0).is_err());
        let bad_sum = SarAdcParams {
            cap_weights: vec![8, 4, 2, 1, 2],
            ..SarAdcParams::default()
        };
        assert!(convert(100.0, &bad_sum, 0).is_err());
        let bad_len = SarAdcParams {
            cap_weights: vec![8, 4, 2, 2],
            ..SarAdcParams::default()
        };
        assert!(convert(100.0, &bad_len, 0).is_err());
    }

    #[test]
    fn comparator_noise_is_seeded_deterministically() {
        let p = SarAdcParams {
            comparator_offset_sigma_mv: 5.0,
            ..SarAdcParams::default()
        };
        let v = 7.5 / 16.0 * p.v_ref_mv;
        let a = convert(v, &p, 1234).unwrap();
        let b = convert(v, &p, 1234).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        /// Monotone transfer: a larger input never yields a smaller code.
        #[test]
        fn monotone_codes(a in 0.0f64..800.0, b in 0.0f64..800.0) {
            let p = SarAdcParams::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let code_lo = convert(lo, &p, 0).unwrap().code;
            let code_hi = convert(hi, &p, 0).unwrap().code;
            prop_assert!(code_lo <= code_hi);
        }

        /// Codes stay in range and match the oracle away from boundaries.
        #[test]
        fn oracle_agreement_off_boundaries(v in 0.0f64..900.0) {
            let p = SarAdcParams::default();
            let r = convert(v, &p, 0).unwrap();
            prop_assert!(r.code <= 15);
            let pos = 16.0 * v / p.v_ref_mv;
            if (pos - pos.round()).abs() > 1e-6 {
                prop_assert_eq!(r.code, quantizer_oracle(v, p.v_ref_mv));
            }
        }
    }
}
