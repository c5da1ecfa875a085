//! Predicted rate exponents, stored as exact rationals. Convention: an error
//! that scales like `n^{-e}` has exponent `e > 0`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Exponent = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFamily {
    GenGapUpper,
    GenGapLower,
    MseUpper,
    MseLower,
    WeightDecayReference,
}

impl RateFamily {
    pub const ALL: [RateFamily; 5] = [
        Self::GenGapUpper,
        Self::GenGapLower,
        Self::MseUpper,
        Self::MseLower,
        Self::WeightDecayReference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GenGapUpper => "gen_gap_upper",
            Self::GenGapLower => "gen_gap_lower",
            Self::MseUpper => "mse_upper",
            Self::MseLower => "mse_lower",
            Self::WeightDecayReference => "weight_decay_reference",
        }
    }
}

impl fmt::Display for RateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown rate family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateQuery {
    pub d: u64,
    pub which: RateFamily,
}

pub fn predicted_exponent(q: RateQuery) -> Result<Exponent> {
    let d = q.d;
    if d == 0 {
        return Err(invalid("rate exponents need d >= 1"));
    }
    Ok(match q.which {
        RateFamily::GenGapUpper => Ratio::new(1, 2 * d + 2),
        RateFamily::GenGapLower => Ratio::new(2, d + 1),
        RateFamily::MseUpper => Ratio::new(d + 3, 2 * d * d + 6 * d + 3),
        RateFamily::MseLower if d == 1 => Ratio::new(1, 2),
        RateFamily::MseLower => Ratio::new(2, d + 1),
        RateFamily::WeightDecayReference => Ratio::new(1, 4),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeComparison {
    pub predicted: Exponent,
    /// Fitted log-log slope (negative when the error decreases with n).
    pub observed: f64,
    /// `observed + predicted`: zero when the fit matches the predicted decay,
    /// positive when the observed decay is slower.
    pub gap: f64,
}

pub fn compare_slopes(observed: f64, q: RateQuery) -> Result<SlopeComparison> {
    let predicted = predicted_exponent(q)?;
    let p = *predicted.numer() as f64 / *predicted.denom() as f64;
    Ok(SlopeComparison {
        predicted,
        observed,
        gap: observed + p,
    })
}

/// CSV table `d,family,exponent,value` over `dims` and every family.
pub fn write_rate_table<W: Write>(dims: impl IntoIterator<Item = u64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "family", "exponent", "value"])?;
    for d in dims {
        for family in RateFamily::ALL {
            let e = predicted_exponent(RateQuery { d, which: family })?;
            let value = *e.numer() as f64 / *e.denom() as f64;
            w.write_record([d.to_string(), family.to_string(), e.to_string(), value.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(d: u64, which: RateFamily) -> Exponent {
        predicted_exponent(RateQuery { d, which }).unwrap()
    }

    #[test]
    fn known_values() {
        assert_eq!(e(1, RateFamily::MseUpper), Ratio::new(4, 11));
        assert_eq!(e(1, RateFamily::MseLower), Ratio::new(1, 2));
        assert_eq!(e(5, RateFamily::MseUpper), Ratio::new(8, 83));
        assert_eq!(e(3, RateFamily::GenGapUpper), Ratio::new(1, 8));
        assert_eq!(e(3, RateFamily::GenGapLower), Ratio::new(1, 2));
        assert_eq!(e(7, RateFamily::WeightDecayReference), Ratio::new(1, 4));
        assert!(predicted_exponent(RateQuery { d: 0, which: RateFamily::MseUpper }).is_err());
    }

    #[test]
    fn exponents_decrease_with_dimension() {
        for family in [RateFamily::GenGapUpper, RateFamily::GenGapLower, RateFamily::MseUpper] {
            for d in 1..30 {
                assert!(e(d + 1, family) < e(d, family), "{family} d={d}");
            }
        }
        for d in 2..30 {
            assert!(e(d + 1, RateFamily::MseLower) < e(d, RateFamily::MseLower));
        }
    }

    #[test]
    fn slope_gap_convention() {
        let q = RateQuery { d: 1, which: RateFamily::MseLower };
        assert_eq!(compare_slopes(-0.5, q).unwrap().gap, 0.0);
        assert_eq!(compare_slopes(0.0, q).unwrap().gap, 0.5);
        // Flipping the sign of the observed slope reflects the gap about `predicted`.
        let a = compare_slopes(-0.3, q).unwrap().gap;
        let b = compare_slopes(0.3, q).unwrap().gap;
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn family_names_round_trip() {
        for f in RateFamily::ALL {
            assert_eq!(f.name().parse::<RateFamily>().unwrap(), f);
        }
        assert!("nope".parse::<RateFamily>().is_err());
    }

    #[test]
    fn table_has_all_rows() {
        let mut buf = Vec::new();
        write_rate_table(1..=10, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 10 * 5);
        assert!(text.contains("1,mse_upper,4/11,"));
    }
}
