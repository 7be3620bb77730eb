//! Parsing of `a+bi` style complex literals.

use num_complex::Complex64;

/// Parses `1.5`, `0.5+0.1i`, `2-3e-2i`, `-i` or `0.2j`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number `{s}`");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        let re = t.parse::<f64>().map_err(|_| bad())?;
        return if re.is_finite() { Ok(Complex64::new(re, 0.0)) } else { Err(bad()) };
    };
    // Split before the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    let im = im.parse::<f64>().map_err(|_| bad())?;
    let z = Complex64::new(re, im);
    if z.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn literals() {
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("0.5+0.1i").unwrap(), c(0.5, 0.1));
        assert_eq!(parse_complex("2-3e-2i").unwrap(), c(2.0, -0.03));
        assert_eq!(parse_complex("1e-3+2E+1j").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-0.25i").unwrap(), c(0.0, -0.25));
        assert_eq!(parse_complex(" 1 + 2i ").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("-1-i").unwrap(), c(-1.0, -1.0));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1+2", "1++2i", "inf", "1+2ii", "nan"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }
}
