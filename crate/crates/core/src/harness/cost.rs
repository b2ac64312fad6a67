use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::roster::ModelSpec;
use super::{HarnessError, Result};

/// Money in units of 1e-9 USD. Sums are exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NanoUsd(pub u64);

impl NanoUsd {
    pub const ZERO: NanoUsd = NanoUsd(0);

    /// Nearest representable amount; rejects negative and non-finite input.
    pub fn from_usd(usd: f64) -> Result<Self> {
        if !usd.is_finite() || usd < 0.0 {
            return Err(HarnessError::InvalidArgument(format!("amount {usd} is not a non-negative USD value")));
        }
        Ok(NanoUsd((usd * 1e9).round() as u64))
    }

    pub fn usd(self) -> f64 {
        self.0 as f64 / 1e9
    }
}

impl Add for NanoUsd {
    type Output = NanoUsd;
    fn add(self, rhs: NanoUsd) -> NanoUsd {
        NanoUsd(self.0 + rhs.0)
    }
}

impl AddAssign for NanoUsd {
    fn add_assign(&mut self, rhs: NanoUsd) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for NanoUsd {
    fn sum<I: Iterator<Item = NanoUsd>>(iter: I) -> NanoUsd {
        iter.fold(NanoUsd::ZERO, Add::add)
    }
}

impl fmt::Display for NanoUsd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}", self.0 / 1_000_000_000, self.0 % 1_000_000_000)
    }
}

/// Price per token is `price_per_million / 1e6` USD. Prices resolve to
/// 1e-9 USD per million tokens; the total rounds half up to 1e-9 USD.
pub fn compute_cost(prompt_tokens: i64, completion_tokens: i64, spec: &ModelSpec) -> Result<NanoUsd> {
    if prompt_tokens < 0 || completion_tokens < 0 {
        return Err(HarnessError::InvalidArgument(format!(
            "token counts must be non-negative, got {prompt_tokens} and {completion_tokens}"
        )));
    }
    let p = NanoUsd::from_usd(spec.prompt_price)?.0 as u128;
    let c = NanoUsd::from_usd(spec.completion_price)?.0 as u128;
    let numer = prompt_tokens as u128 * p + completion_tokens as u128 * c;
    Ok(NanoUsd(((numer + 500_000) / 1_000_000) as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, c: f64) -> ModelSpec {
        ModelSpec::new("m", "v", p, c)
    }

    #[test]
    fn worked_examples() {
        assert_eq!(compute_cost(1_000, 100, &spec(0.05, 0.40)).unwrap(), NanoUsd(90_000));
        assert_eq!(compute_cost(1_000, 100, &spec(0.05, 0.40)).unwrap().to_string(), "0.000090000");
        assert_eq!(compute_cost(0, 0, &spec(3.0, 15.0)).unwrap(), NanoUsd::ZERO);
        assert_eq!(compute_cost(1_000_000, 1_000_000, &spec(0.15, 0.40)).unwrap().usd(), 0.55);
    }

    #[test]
    fn negative_counts_rejected() {
        assert!(compute_cost(-1, 0, &spec(1.0, 1.0)).is_err());
        assert!(compute_cost(0, -5, &spec(1.0, 1.0)).is_err());
    }

    #[test]
    fn sums_are_exact() {
        let parts = [NanoUsd(1), NanoUsd(2), NanoUsd(999_999_999)];
        assert_eq!(parts.iter().copied().sum::<NanoUsd>(), NanoUsd(1_000_000_002));
    }
}
