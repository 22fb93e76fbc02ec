//! Serialization with 17 significant digits and string-encoded non-finite values.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Formats `v` with 17 significant digits, `%.17g` style, with trailing zeros removed.
/// Non-finite values become `inf`, `-inf` or `nan`.
pub fn real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-5..17).contains(&exponent) {
        return format!("{}e{exponent}", trim_zeros(mantissa));
    }
    let decimals = (16 - exponent) as usize;
    let fixed = format!("{v:.decimals$}");
    let trimmed = trim_zeros(&fixed);
    if trimmed.contains('.') {
        trimmed.to_string()
    } else {
        format!("{trimmed}.0")
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A float that serializes as `"inf"`, `"-inf"` or `"nan"` when it is not finite.
///
/// serde_json replaces non-finite floats with `null` before the formatter sees
/// them, so values that may be infinite are wrapped in this type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&real(self.0))
        }
    }
}

/// Compact JSON with floats written by [`real`].
struct RealFormatter;

impl Formatter for RealFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(real(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// One line of JSON followed by a newline.
pub fn to_json<S: Serialize>(value: &S) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, RealFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// CSV text with a header row; every field is already formatted.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(real(0.3), "0.29999999999999999");
        assert_eq!(real(0.5), "0.5");
        assert_eq!(real(1.0), "1.0");
        assert_eq!(real(-2.5e-7), "-2.4999999999999999e-7");
        assert_eq!(real(1e20), "1e20");
        assert_eq!(real(123456.0), "123456.0");
        assert_eq!(real(f64::NEG_INFINITY), "-inf");
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 6.02e23, -0.040_348_6] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_encodes_infinities_as_strings() {
        let text = to_json(&[Real(1.0), Real(f64::INFINITY), Real(f64::NEG_INFINITY)]).unwrap();
        assert_eq!(text, "[1.0,\"inf\",\"-inf\"]\n");
    }
}
