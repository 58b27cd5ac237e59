//! Frequencies as written in config files: raw rad/s or multiples of γ13.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A frequency entry. `Gamma13` keeps the multiplier so files round-trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFreq", into = "RawFreq")]
pub enum Freq {
    RadPerSec(f64),
    Gamma13(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawFreq {
    Number(f64),
    Text(String),
}

impl TryFrom<RawFreq> for Freq {
    type Error = String;

    fn try_from(raw: RawFreq) -> Result<Self, String> {
        match raw {
            RawFreq::Number(v) => Ok(Freq::RadPerSec(v)),
            RawFreq::Text(s) => s.parse(),
        }
    }
}

impl From<Freq> for RawFreq {
    fn from(f: Freq) -> Self {
        match f {
            Freq::RadPerSec(v) => RawFreq::Number(v),
            Freq::Gamma13(_) => RawFreq::Text(f.to_string()),
        }
    }
}

impl Freq {
    /// Value in rad/s given γ13 in rad/s.
    pub fn to_rad(self, gamma13: f64) -> f64 {
        match self {
            Freq::RadPerSec(v) => v,
            Freq::Gamma13(k) => k * gamma13,
        }
    }

    /// Re-expresses a rad/s value in γ13 units.
    pub fn in_gamma13(rad: f64, gamma13: f64) -> Self {
        Freq::Gamma13(rad / gamma13)
    }

    pub fn is_relative(self) -> bool {
        matches!(self, Freq::Gamma13(_))
    }
}

impl fmt::Display for Freq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Freq::RadPerSec(v) => write!(f, "{v}"),
            Freq::Gamma13(k) => write!(f, "{k}*gamma13"),
        }
    }
}

/// Accepts products of factors: numbers, `pi`, `2pi` style prefixes and at
/// most one `gamma13`, with an optional leading minus.
/// `"4.20*gamma13"`, `"-7.5*gamma13"`, `"2pi*3e6"`, `"2*pi*6.834e9"`.
impl std::str::FromStr for Freq {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let s = text.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s),
        };
        if body.trim().is_empty() {
            return Err(format!("empty frequency expression '{text}'"));
        }
        let mut value = sign;
        let mut relative = false;
        for factor in body.split('*') {
            let factor = factor.trim();
            if factor == "gamma13" {
                if relative {
                    return Err(format!("'{text}': gamma13 appears twice"));
                }
                relative = true;
            } else if factor == "pi" {
                value *= PI;
            } else if let Some(num) = factor.strip_suffix("pi") {
                value *= number(num, text)? * PI;
            } else {
                value *= number(factor, text)?;
            }
        }
        if !value.is_finite() {
            return Err(format!("'{text}' is not finite"));
        }
        Ok(if relative {
            Freq::Gamma13(value)
        } else {
            Freq::RadPerSec(value)
        })
    }
}

fn number(s: &str, whole: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("cannot read '{s}' in frequency expression '{whole}'"))
}
