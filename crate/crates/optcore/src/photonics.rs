//! Value-level models of the device primitives: microring resonance, per-arm
//! wavelength assignment, the comparator-based flash quantizer, the light
//! driver, and the optical dot-product path (arm MAC, photodetector
//! summation, electronic accumulation and activation).
//!
//! All integer operations are exact; the only non-ideality hook is an
//! optional multiplicative per-MR gain error in [`arm_mac_analog`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::OCBGeometry;

/// Comparators in the flash quantizer; output codes span 0..=15.
pub const CBC_COMPARATORS: usize = 15;

/// One tunable microring: geometry, resonance order, and the programmed
/// signed weight code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MRDevice {
    pub n_eff: f64,
    pub circumference_l: f64,
    pub mode_order_m: u32,
    pub weight_code: i64,
}

impl MRDevice {
    pub fn resonant_wavelength(&self) -> Result<f64> {
        mr_resonance(self.n_eff, self.circumference_l, self.mode_order_m)
    }
}

/// Resonant wavelength `n_eff * L / m` in meters.
pub fn mr_resonance(n_eff: f64, circumference_l: f64, mode_order_m: u32) -> Result<f64> {
    if !n_eff.is_finite() || !circumference_l.is_finite() {
        return Err(Error::NonFinite("mr_resonance input"));
    }
    if n_eff <= 0.0 || circumference_l <= 0.0 || mode_order_m == 0 {
        return Err(Error::InvalidArgument(
            "mr_resonance requires positive n_eff, L, and m".into(),
        ));
    }
    Ok(n_eff * circumference_l / mode_order_m as f64)
}

/// Deterministic injective slot-to-channel assignment: slot `i` gets channel
/// `i`. Errors when more slots are active than wavelengths exist.
pub fn assign_wavelengths(active_slots: usize, channels: usize) -> Result<Vec<usize>> {
    if active_slots > channels {
        return Err(Error::WavelengthCapacity {
            active: active_slots,
            channels,
        });
    }
    Ok((0..active_slots).collect())
}

/// One arm's programmed state: up to `mrs_per_arm` slots, idle slots `None`,
/// and the wavelength channel carried by each non-idle slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub mrs: Vec<Option<MRDevice>>,
    pub channel_assignment: Vec<Option<usize>>,
}

impl ArmState {
    /// Builds an arm from a slot list, assigning channel `i` to slot `i`.
    pub fn program(slots: Vec<Option<MRDevice>>, geom: &OCBGeometry) -> Result<Self> {
        if slots.len() > geom.mrs_per_arm {
            return Err(Error::ArmLength {
                len: slots.len(),
                max: geom.mrs_per_arm,
            });
        }
        let active = slots.iter().filter(|s| s.is_some()).count();
        if active > geom.wavelength_channels {
            return Err(Error::WavelengthCapacity {
                active,
                channels: geom.wavelength_channels,
            });
        }
        let channel_assignment = slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.as_ref().map(|_| i).filter(|&i| i < geom.wavelength_channels)
            })
            .collect::<Vec<_>>();
        // Slot index beyond the channel count with an active MR cannot carry
        // a wavelength; treat as a capacity violation.
        if slots
            .iter()
            .zip(&channel_assignment)
            .any(|(s, c)| s.is_some() && c.is_none())
        {
            return Err(Error::WavelengthCapacity {
                active,
                channels: geom.wavelength_channels,
            });
        }
        Ok(Self {
            mrs: slots,
            channel_assignment,
        })
    }
}

/// A 4-bit activation level with its raw thermometer pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantCode {
    pub code: u8,
    pub thermometer: [bool; CBC_COMPARATORS],
}

impl QuantCode {
    /// Validates monotonicity (no true bit above a false bit) and counts.
    pub fn from_thermometer(thermometer: [bool; CBC_COMPARATORS]) -> Result<Self> {
        let mut seen_false = false;
        let mut code = 0u8;
        for &bit in &thermometer {
            if bit {
                if seen_false {
                    return Err(Error::InvalidArgument(
                        "thermometer code is not monotone".into(),
                    ));
                }
                code += 1;
            } else {
                seen_false = true;
            }
        }
        Ok(Self { code, thermometer })
    }
}

/// Flash quantization: 15 comparators at thresholds
/// `t_i = v_min + i * (v_max - v_min) / 16`, `i = 1..=15`; the code is the
/// number of comparators whose threshold the input reaches.
pub fn cbc_quantize(v: f64, v_min: f64, v_max: f64) -> Result<QuantCode> {
    if !v.is_finite() || !v_min.is_finite() || !v_max.is_finite() {
        return Err(Error::NonFinite("cbc_quantize input"));
    }
    if v_max <= v_min {
        return Err(Error::QuantizerRange { v_min, v_max });
    }
    let span = v_max - v_min;
    let mut thermometer = [false; CBC_COMPARATORS];
    for (i, bit) in thermometer.iter_mut().enumerate() {
        let threshold = v_min + (i as f64 + 1.0) * span / 16.0;
        *bit = v >= threshold;
    }
    QuantCode::from_thermometer(thermometer)
}

/// Light driver: the intensity level equals the number of enabled drive
/// transistors, a linear map from the 4-bit code.
pub fn ldu_intensity(code: &QuantCode) -> u8 {
    code.code
}

/// Largest magnitude a signed weight code of this width can carry
/// (symmetric range, so -bound..=bound).
pub fn signed_code_bound(bits: u32) -> i64 {
    if bits >= 63 {
        i64::MAX
    } else if bits == 0 {
        0
    } else {
        (1i64 << (bits - 1)) - 1
    }
}

/// Largest unsigned activation code of this width (0..=bound).
pub fn unsigned_code_bound(bits: u32) -> i64 {
    if bits >= 63 {
        i64::MAX
    } else {
        (1i64 << bits) - 1
    }
}

/// One arm's dot product: up to 9 weight/activation pairs multiplied on
/// distinct wavelengths and summed at the photodetector. Exact integer
/// semantics; weights are signed codes, activations unsigned codes.
pub fn arm_mac(
    weights: &[i64],
    activations: &[i64],
    weight_bits: u32,
    activation_bits: u32,
) -> Result<i64> {
    let max_slots = OCBGeometry::default().mrs_per_arm;
    if weights.len() != activations.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: activations.len(),
        });
    }
    if weights.len() > max_slots {
        return Err(Error::ArmLength {
            len: weights.len(),
            max: max_slots,
        });
    }
    let w_bound = signed_code_bound(weight_bits);
    let a_bound = unsigned_code_bound(activation_bits);
    let mut sum: i128 = 0;
    for (&w, &a) in weights.iter().zip(activations) {
        if w.abs() > w_bound {
            return Err(Error::CodeRange {
                what: "weight",
                value: w,
                bits: weight_bits,
            });
        }
        if a < 0 || a > a_bound {
            return Err(Error::CodeRange {
                what: "activation",
                value: a,
                bits: activation_bits,
            });
        }
        sum += w as i128 * a as i128;
    }
    i64::try_from(sum).map_err(|_| Error::InvalidArgument("arm_mac accumulator overflow".into()))
}

/// Electronic accumulation across arms/segments: exact integer sum.
pub fn accumulate(partials: &[i64]) -> Result<i64> {
    if partials.is_empty() {
        return Err(Error::Empty("accumulate partials"));
    }
    let sum: i128 = partials.iter().map(|&p| p as i128).sum();
    i64::try_from(sum).map_err(|_| Error::InvalidArgument("accumulate overflow".into()))
}

/// ReLU followed by rational rescale (`scale_num / scale_den`), rounded
/// half-away-from-zero and clamped to the unsigned `out_bits` range.
pub fn relu_requantize(x: i64, scale_num: i64, scale_den: i64, out_bits: u32) -> Result<i64> {
    if scale_num <= 0 || scale_den <= 0 {
        return Err(Error::InvalidArgument(
            "requantize scale must be positive".into(),
        ));
    }
    let y = x.max(0) as i128;
    // Round half up; the ReLU output is non-negative, so half-up equals
    // half-away-from-zero here.
    let rounded = (2 * y * scale_num as i128 + scale_den as i128) / (2 * scale_den as i128);
    let clamp = unsigned_code_bound(out_bits) as i128;
    Ok(rounded.min(clamp) as i64)
}

/// Per-layer default requantization scale `1 / den` with the smallest
/// power-of-two `den` bringing `max_abs_bound` into the 4-bit code range.
/// Recorded in reports so runs are reproducible.
pub fn default_requant_scale(max_abs_bound: i64) -> (i64, i64) {
    let mut den: i64 = 1;
    while max_abs_bound > 15 * den {
        den *= 2;
    }
    (1, den)
}

/// Study-path arm MAC with a multiplicative per-MR gain error (0 = ideal).
pub fn arm_mac_analog(weights: &[i64], activations: &[i64], gain_error: &[f64]) -> Result<f64> {
    if weights.len() != activations.len() || weights.len() != gain_error.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: activations.len().max(gain_error.len()),
        });
    }
    let max_slots = OCBGeometry::default().mrs_per_arm;
    if weights.len() > max_slots {
        return Err(Error::ArmLength {
            len: weights.len(),
            max: max_slots,
        });
    }
    Ok(weights
        .iter()
        .zip(activations)
        .zip(gain_error)
        .map(|((&w, &a), &g)| w as f64 * a as f64 * (1.0 + g))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_formula() {
        assert_eq!(mr_resonance(1.0, 1.0, 1).unwrap(), 1.0);
        let lambda = mr_resonance(2.0, 3.1e-6, 4).unwrap();
        assert!((lambda - 1.55e-6).abs() / 1.55e-6 < 1e-12);
        // Doubling the mode order halves the wavelength bit-exactly.
        let full = mr_resonance(2.317, 8.4e-6, 3).unwrap();
        let half = mr_resonance(2.317, 8.4e-6, 6).unwrap();
        assert_eq!(full / 2.0, half);
        assert!(mr_resonance(0.0, 1.0, 1).is_err());
        assert!(mr_resonance(1.0, -1.0, 1).is_err());
        assert!(mr_resonance(1.0, 1.0, 0).is_err());
        assert!(mr_resonance(f64::NAN, 1.0, 1).is_err());
    }

    #[test]
    fn wavelength_assignment() {
        assert_eq!(assign_wavelengths(9, 9).unwrap(), (0..9).collect::<Vec<_>>());
        assert_eq!(assign_wavelengths(5, 9).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(assign_wavelengths(0, 9).unwrap(), Vec::<usize>::new());
        assert!(matches!(
            assign_wavelengths(10, 9),
            Err(Error::WavelengthCapacity {
                active: 10,
                channels: 9
            })
        ));
    }

    #[test]
    fn arm_state_channels_distinct() {
        let geom = OCBGeometry::default();
        let mr = MRDevice {
            n_eff: 2.3,
            circumference_l: 7.0e-6,
            mode_order_m: 10,
            weight_code: 3,
        };
        let slots = vec![Some(mr), None, Some(mr), Some(mr)];
        let arm = ArmState::program(slots, &geom).unwrap();
        let mut channels: Vec<usize> = arm.channel_assignment.iter().flatten().copied().collect();
        assert_eq!(channels.len(), 3);
        channels.dedup();
        assert_eq!(channels.len(), 3);
        assert!(arm.channel_assignment[1].is_none());
        let too_long = vec![Some(mr); 10];
        assert!(ArmState::program(too_long, &geom).is_err());
    }

    #[test]
    fn quantizer_endpoints_and_midpoint() {
        let q = cbc_quantize(0.0, 0.0, 1.0).unwrap();
        assert_eq!(q.code, 0);
        assert_eq!(cbc_quantize(-3.0, 0.0, 1.0).unwrap().code, 0);
        assert_eq!(cbc_quantize(1.0, 0.0, 1.0).unwrap().code, 15);
        assert_eq!(cbc_quantize(7.5, 0.0, 1.0).unwrap().code, 15);
        // The midpoint lands exactly on threshold 8.
        assert_eq!(cbc_quantize(0.5, 0.0, 1.0).unwrap().code, 8);
        assert_eq!(cbc_quantize(0.0, -2.0, 2.0).unwrap().code, 8);
        assert!(cbc_quantize(0.5, 1.0, 1.0).is_err());
        assert!(cbc_quantize(0.5, 2.0, 1.0).is_err());
        assert!(cbc_quantize(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn quantizer_monotone_and_surjective() {
        let mut last = 0u8;
        for i in 0..=1600 {
            let v = i as f64 / 1600.0;
            let code = cbc_quantize(v, 0.0, 1.0).unwrap().code;
            assert!(code >= last, "not monotone at v={v}");
            last = code;
        }
        let mut seen = [false; 16];
        for i in 0..16 {
            let v = (i as f64 + 0.5) / 16.0;
            seen[cbc_quantize(v, 0.0, 1.0).unwrap().code as usize] = true;
        }
        assert!(seen.iter().all(|&s| s), "codes not surjective: {seen:?}");
    }

    #[test]
    fn ldu_is_the_identity_on_codes() {
        for code in 0..=15u8 {
            let v = (code as f64 + 0.5) / 16.0;
            let q = cbc_quantize(v, 0.0, 1.0).unwrap();
            assert_eq!(q.code, code);
            assert_eq!(ldu_intensity(&q), code);
        }
        let mut therm = [false; CBC_COMPARATORS];
        for bit in therm.iter_mut().take(8) {
            *bit = true;
        }
        let q = QuantCode::from_thermometer(therm).unwrap();
        assert_eq!(ldu_intensity(&q), 8);
        // Non-monotone patterns are rejected.
        therm[10] = true;
        assert!(QuantCode::from_thermometer(therm).is_err());
    }

    #[test]
    fn arm_mac_matches_loop_oracle() {
        assert_eq!(arm_mac(&[0; 9], &[5; 9], 4, 4).unwrap(), 0);
        assert_eq!(
            arm_mac(&[3, 0, 0, 0, 0, 0, 0, 0, 0], &[5, 1, 1, 1, 1, 1, 1, 1, 1], 4, 4).unwrap(),
            15
        );
        let w = [7, -7, 3, -1, 0, 5, -4, 2, 6];
        let a = [15, 3, 0, 9, 12, 1, 7, 14, 2];
        let oracle: i64 = w.iter().zip(&a).map(|(&x, &y)| x * y).sum();
        assert_eq!(arm_mac(&w, &a, 4, 4).unwrap(), oracle);
    }

    #[test]
    fn arm_mac_rejects_bad_inputs() {
        assert!(matches!(
            arm_mac(&[1, 2], &[1], 4, 4),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            arm_mac(&[0; 10], &[0; 10], 4, 4),
            Err(Error::ArmLength { .. })
        ));
        // 4-bit signed weights reach +-7; 8 is out of range.
        assert!(matches!(
            arm_mac(&[8], &[1], 4, 4),
            Err(Error::CodeRange { .. })
        ));
        assert!(matches!(
            arm_mac(&[1], &[16], 4, 4),
            Err(Error::CodeRange { .. })
        ));
        assert!(matches!(
            arm_mac(&[1], &[-1], 4, 4),
            Err(Error::CodeRange { .. })
        ));
    }

    #[test]
    fn arm_mac_is_linear_in_activations() {
        let w = [2, -3, 1, 0, 7, -7, 4, 5, -1];
        let a = [1, 2, 3, 4, 5, 6, 7, 0, 2];
        let b = [3, 0, 1, 5, 2, 4, 1, 7, 6];
        let ab: Vec<i64> = a.iter().zip(&b).map(|(&x, &y)| x + y).collect();
        assert_eq!(
            arm_mac(&w, &ab, 4, 8).unwrap(),
            arm_mac(&w, &a, 4, 8).unwrap() + arm_mac(&w, &b, 4, 8).unwrap()
        );
    }

    #[test]
    fn accumulate_sums_exactly() {
        assert_eq!(accumulate(&[42]).unwrap(), 42);
        assert_eq!(accumulate(&[1, 2, 3]).unwrap(), 6);
        assert!(matches!(accumulate(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn segmented_dot_product_equals_oracle() {
        // A 25-element dot product split across three arms (9 + 9 + 7).
        let w: Vec<i64> = (0..25).map(|i| (i % 15) - 7).collect();
        let a: Vec<i64> = (0..25).map(|i| (i * 7) % 16).collect();
        let oracle: i64 = w.iter().zip(&a).map(|(&x, &y)| x * y).sum();
        let partials: Vec<i64> = w
            .chunks(9)
            .zip(a.chunks(9))
            .map(|(wc, ac)| arm_mac(wc, ac, 4, 4).unwrap())
            .collect();
        assert_eq!(partials.len(), 3);
        assert_eq!(accumulate(&partials).unwrap(), oracle);
    }

    #[test]
    fn relu_requantize_cases() {
        assert_eq!(relu_requantize(-7, 1, 1, 4).unwrap(), 0);
        assert_eq!(relu_requantize(0, 1, 1, 4).unwrap(), 0);
        // 37/4 = 9.25 rounds to 9.
        assert_eq!(relu_requantize(37, 1, 4, 4).unwrap(), 9);
        // 38/4 = 9.5 rounds away from zero to 10.
        assert_eq!(relu_requantize(38, 1, 4, 4).unwrap(), 10);
        assert_eq!(relu_requantize(1000, 1, 1, 4).unwrap(), 15);
        assert!(relu_requantize(1, 0, 1, 4).is_err());
        assert!(relu_requantize(1, 1, -2, 4).is_err());
    }

    #[test]
    fn default_scale_brings_bound_into_range() {
        assert_eq!(default_requant_scale(37), (1, 4));
        assert_eq!(default_requant_scale(15), (1, 1));
        assert_eq!(default_requant_scale(16), (1, 2));
        let (num, den) = default_requant_scale(100_000);
        assert_eq!(num, 1);
        assert!(100_000 <= 15 * den && 100_000 > 15 * den / 2);
    }

    #[test]
    fn analog_hook_with_zero_gain_is_exact() {
        let w = [3, -2, 7, 0, 1];
        let a = [4, 9, 2, 15, 3];
        let ideal = arm_mac(&w, &a, 4, 4).unwrap();
        let analog = arm_mac_analog(&w, &a, &[0.0; 5]).unwrap();
        assert_eq!(analog, ideal as f64);
        let skewed = arm_mac_analog(&w, &a, &[0.1; 5]).unwrap();
        assert!((skewed - 1.1 * ideal as f64).abs() < 1e-9);
    }
}
