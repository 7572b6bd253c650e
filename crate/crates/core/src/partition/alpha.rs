//! The constant `alpha = sqrt(2) * sum_{k>=2} (sqrt(ln k) - sqrt(ln(k-1))) / k`.

use serde::Serialize;

use crate::error::{Error, Result};

/// A closed interval known to contain `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaInterval {
    pub lo: f64,
    pub hi: f64,
    /// Number of series terms summed (`k = 2..=terms + 1`).
    pub terms: u64,
}

impl AlphaInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Series term in the cancellation-free form
/// `ln(1 + 1/(k-1)) / (k (sqrt(ln(k-1)) + sqrt(ln k)))`.
fn term(k: u64) -> f64 {
    let kf = k as f64;
    let diff = (1.0 / (kf - 1.0)).ln_1p();
    diff / (kf * (((kf - 1.0).ln()).sqrt() + kf.ln().sqrt()))
}

/// Generous bound on the accumulated floating-point error of a partial sum
/// with `terms` terms.
fn rounding_slack(terms: u64) -> f64 {
    4.0 * (terms as f64 + 8.0) * f64::EPSILON
}

/// `sqrt(2) * sum_{k=2}^{upto} term(k)`, with its rounding slack.
pub fn alpha_partial_sum(upto: u64) -> (f64, f64) {
    let mut s = 0.0f64;
    for k in 2..=upto.max(1) {
        s += term(k);
    }
    let terms = upto.saturating_sub(1);
    (std::f64::consts::SQRT_2 * s, rounding_slack(terms))
}

/// Enclosure of `alpha` of width at most `precision`, from a partial sum and
/// the tail bound `sum_{k>K} term(k) < 1/K`.
pub fn alpha_constant(precision: f64) -> Result<AlphaInterval> {
    if !(precision.is_finite() && precision > 0.0) {
        return Err(Error::input(format!("precision must be positive, got {precision}")));
    }
    if precision < 1e-7 {
        return Err(Error::resource(
            "alpha enclosure",
            format!("about {:.0} series terms", std::f64::consts::SQRT_2 / precision),
        ));
    }
    // width = sqrt(2)/K + 2 slack; pick K with a margin for the slack
    let mut upto = (std::f64::consts::SQRT_2 / (0.9 * precision)).ceil() as u64 + 1;
    loop {
        let (s, slack) = alpha_partial_sum(upto);
        let interval = AlphaInterval {
            lo: s - slack,
            hi: s + std::f64::consts::SQRT_2 / upto as f64 + slack,
            terms: upto - 1,
        };
        if interval.width() <= precision {
            return Ok(interval);
        }
        upto *= 2;
    }
}

/// Smallest `K >= 2` with `alpha - eps/2 < sqrt(2) * sum_{k=2}^{K} term(k)`.
pub fn k_for_epsilon(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let mut precision = epsilon / 64.0;
    loop {
        let alpha = alpha_constant(precision)?;
        let (lo_target, hi_target) = (alpha.lo - epsilon / 2.0, alpha.hi - epsilon / 2.0);
        let mut s = 0.0f64;
        let mut k = 1u64;
        let mut ambiguous = false;
        loop {
            k += 1;
            s += term(k);
            let sum = std::f64::consts::SQRT_2 * s;
            let slack = rounding_slack(k);
            if sum - slack > hi_target {
                break;
            }
            if sum + slack > lo_target {
                ambiguous = true;
                break;
            }
        }
        if !ambiguous {
            return Ok(k);
        }
        precision /= 16.0;
        if precision < 1e-7 {
            return Err(Error::Construction(format!(
                "cannot separate the partial sum at K = {k} from alpha - eps/2"
            )));
        }
    }
}
