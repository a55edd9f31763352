//! C99-style hexadecimal float strings (`%a`), used for lossless JSON fields.

/// Formats a finite `f64` as a hexadecimal float, e.g. `-0x1.8p+1` for `-3.0`.
pub fn format(value: f64) -> String {
    let bits = value.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exponent_bits = ((bits >> 52) & 0x7ff) as i32;
    let fraction = bits & ((1u64 << 52) - 1);

    if exponent_bits == 0 && fraction == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exponent) = if exponent_bits == 0 {
        (0, -1022)
    } else {
        (1, exponent_bits - 1023)
    };
    let mut digits = format!("{fraction:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let exp_sign = if exponent < 0 { '-' } else { '+' };
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp_sign}{}", exponent.abs())
    } else {
        format!("{sign}0x{lead}.{digits}p{exp_sign}{}", exponent.abs())
    }
}

/// Parses a hexadecimal float such as `0x1.8p+1`. Returns `None` on malformed
/// input or when more than 53 significant bits are supplied.
pub fn parse(text: &str) -> Option<f64> {
    let text = text.trim();
    let (negative, rest) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))?;
    let (mantissa, exponent) = rest.split_once(['p', 'P'])?;
    let exponent: i32 = exponent.parse().ok()?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }

    let mut significand: u64 = 0;
    let mut frac_digits = 0i32;
    for (i, c) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let digit = c.to_digit(16)? as u64;
        significand = significand.checked_mul(16)?.checked_add(digit)?;
        if i >= int_part.len() {
            frac_digits += 1;
        }
    }
    if significand > 1u64 << 53 {
        return None;
    }
    let value = scale_by_pow2(significand as f64, exponent - 4 * frac_digits);
    if !value.is_finite() {
        return None;
    }
    Some(if negative { -value } else { value })
}

/// `x * 2^e`, exact whenever the result is representable.
fn scale_by_pow2(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_strings() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(-3.0), "-0x1.8p+1");
        assert_eq!(format(0.5), "0x1p-1");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE), "0x1p-1022");
        assert_eq!(format(f64::from_bits(1)), "0x0.0000000000001p-1022");
        assert_eq!(parse("0x1.8p+1"), Some(3.0));
        assert_eq!(parse("-0x1p-1"), Some(-0.5));
        assert_eq!(parse("0x10p0"), Some(16.0));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse("1.5"), None);
        assert_eq!(parse("0x1.8"), None);
        assert_eq!(parse("0xp+1"), None);
        assert_eq!(parse("0x1.gp+0"), None);
        assert_eq!(parse("0x1p+5000"), None);
    }

    #[test]
    fn extremes_round_trip() {
        for v in [
            f64::MAX,
            f64::MIN,
            f64::MIN_POSITIVE,
            f64::from_bits(1),
            f64::from_bits(0x000f_ffff_ffff_ffff),
            std::f64::consts::PI,
            -1e-300,
        ] {
            assert_eq!(parse(&format(v)).unwrap().to_bits(), v.to_bits(), "{v}");
        }
    }

    proptest::proptest! {
        #[test]
        fn round_trip_is_bit_exact(bits in proptest::num::u64::ANY) {
            let v = f64::from_bits(bits);
            proptest::prop_assume!(v.is_finite());
            proptest::prop_assert_eq!(parse(&format(v)).unwrap().to_bits(), bits);
        }
    }
}
