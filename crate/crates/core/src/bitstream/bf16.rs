//! bfloat16 scalar codec: the upper half of an IEEE-754 binary32 pattern.

use crate::{Error, Result};

/// Rounds `value` to bfloat16 (round to nearest, ties to even) and returns
/// the bit pattern.
pub fn bf16_encode(value: f32) -> Result<u16> {
    if !value.is_finite() {
        return Err(Error::invalid(format!(
            "cannot encode non-finite value {value} as bfloat16"
        )));
    }
    let bits = value.to_bits();
    let lower = bits & 0xFFFF;
    let mut upper = bits >> 16;
    if lower > 0x8000 || (lower == 0x8000 && upper & 1 == 1) {
        upper += 1;
    }
    let out = upper as u16;
    if out & 0x7F80 == 0x7F80 {
        // Rounded past the largest finite bfloat16.
        return Err(Error::invalid(format!(
            "value {value} overflows bfloat16"
        )));
    }
    Ok(out)
}

pub fn bf16_decode(bits: u16) -> f32 {
    f32::from_bits(u32::from(bits) << 16)
}

/// Nearest bfloat16-representable value.
pub fn quantize(value: f32) -> Result<f32> {
    bf16_encode(value).map(bf16_decode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_patterns() {
        assert_eq!(bf16_encode(1.0).unwrap(), 0x3F80);
        assert_eq!(bf16_encode(-2.5).unwrap(), 0xC020);
        assert_eq!(bf16_encode(0.0).unwrap(), 0x0000);
        assert_eq!(bf16_encode(-0.0).unwrap(), 0x8000);
        let pi = f32::from_bits(0x4049_0FDB);
        assert_eq!(bf16_encode(pi).unwrap(), 0x4049);
        assert_eq!(bf16_decode(0x4049), 3.140625);
    }

    #[test]
    fn ties_round_to_even() {
        // 0x3F80_8000 sits exactly between 0x3F80 and 0x3F81: even wins.
        assert_eq!(bf16_encode(f32::from_bits(0x3F80_8000)).unwrap(), 0x3F80);
        assert_eq!(bf16_encode(f32::from_bits(0x3F81_8000)).unwrap(), 0x3F82);
        assert_eq!(bf16_encode(f32::from_bits(0x3F80_8001)).unwrap(), 0x3F81);
        assert_eq!(bf16_encode(f32::from_bits(0x3F80_7FFF)).unwrap(), 0x3F80);
    }

    #[test]
    fn rejects_non_finite_and_overflow() {
        assert!(bf16_encode(f32::NAN).is_err());
        assert!(bf16_encode(f32::INFINITY).is_err());
        assert!(bf16_encode(f32::NEG_INFINITY).is_err());
        assert!(bf16_encode(f32::MAX).is_err());
        // Largest finite bfloat16 survives.
        assert_eq!(bf16_encode(bf16_decode(0x7F7F)).unwrap(), 0x7F7F);
    }

    #[test]
    fn subnormals_round_trip() {
        for bits in [0x0001u16, 0x007F, 0x8001] {
            assert_eq!(bf16_encode(bf16_decode(bits)).unwrap(), bits);
        }
    }
}
