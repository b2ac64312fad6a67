use serde::{Deserialize, Serialize};

use super::{invalid, Result};

/// Largest double strictly below one.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// Probability that a respondent at `theta` answers an item with slope `a`
/// and location `b` correctly: `1 / (1 + exp(-a (theta - b)))`.
///
/// The result is kept strictly inside (0, 1) even where the logistic
/// saturates in double precision.
pub fn prob_correct(a: f64, b: f64, theta: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && theta.is_finite()) {
        return Err(invalid(format!(
            "prob_correct requires finite inputs (a={a}, b={b}, theta={theta})"
        )));
    }
    Ok(sigmoid(a * (theta - b)).clamp(f64::MIN_POSITIVE, ONE_BELOW))
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln P(correct)`, finite for any finite logit.
pub fn log_prob_correct(a: f64, b: f64, theta: f64) -> f64 {
    -softplus(-a * (theta - b))
}

/// `ln P(incorrect)`, finite for any finite logit.
pub fn log_prob_incorrect(a: f64, b: f64, theta: f64) -> f64 {
    -softplus(a * (theta - b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Fitted,
    ExcludedZeroAccuracy,
    ExcludedPerfectAccuracy,
    NotConverged,
}

impl ItemStatus {
    pub fn is_excluded(self) -> bool {
        matches!(self, Self::ExcludedZeroAccuracy | Self::ExcludedPerfectAccuracy)
    }
}

/// Discrimination `a` and difficulty `b` of one item.
///
/// Excluded items carry `a = b = 0`; their parameters are not estimable and
/// must not be read as estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemParams {
    pub item_id: String,
    pub a: f64,
    pub b: f64,
    pub status: ItemStatus,
}

impl ItemParams {
    pub fn new(item_id: impl Into<String>, a: f64, b: f64) -> Self {
        Self { item_id: item_id.into(), a, b, status: ItemStatus::Fitted }
    }

    pub fn is_fitted(&self) -> bool {
        self.status == ItemStatus::Fitted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self { a_min: -6.0, a_max: 6.0, b_min: -30.0, b_max: 30.0 }
    }
}

impl ParamBounds {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.a_min, self.a_max, self.b_min, self.b_max].iter().all(|v| v.is_finite())
            && self.a_min < self.a_max
            && self.b_min < self.b_max;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("malformed parameter bounds {self:?}")))
        }
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        (self.a_min..=self.a_max).contains(&a) && (self.b_min..=self.b_max).contains(&b)
    }

    pub fn clamp_a(&self, a: f64) -> f64 {
        a.clamp(self.a_min, self.a_max)
    }

    pub fn clamp_b(&self, b: f64) -> f64 {
        b.clamp(self.b_min, self.b_max)
    }
}
