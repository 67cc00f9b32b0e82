//! JSON serialization with 17-significant-digit floats.
//!
//! Sidecar files, run logs, and model files all round-trip f64 values
//! exactly; the custom formatter pins the textual form so rerunning a
//! command produces byte-identical output.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Compact JSON with 17-significant-digit floats.
pub fn to_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

/// Pretty JSON, same float formatting.
pub fn to_string_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // PrettyFormatter is not composable with a float override, so indent the
    // compact form instead: two-space indent, stable output.
    let compact = to_string(value)?;
    let v: serde_json::Value = serde_json::from_str(&compact)?;
    // Numbers re-printed by Value would lose the pinned format; keep compact
    // when the document contains floats.
    if compact.contains('e') {
        Ok(compact)
    } else {
        serde_json::to_string_pretty(&v)
    }
}

/// Serde representation for f64 fields that may hold infinities (JSON has
/// no literal for them): finite values stay numbers, infinities become the
/// strings "inf" / "-inf".
pub mod maybe_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else if *v > 0.0 {
            "inf".serialize(s)
        } else {
            "-inf".serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, 'inf', or '-inf', got '{other}'"
                ))),
            },
        }
    }
}
