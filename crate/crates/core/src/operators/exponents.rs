use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponents and constants of a Marcinkiewicz-type interpolation between a
/// weak `(p0, q0)` bound with constant `c0` and a weak `(p1, q1)` bound with
/// constant `c1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub p0: f64,
    pub q0: f64,
    pub p1: f64,
    pub q1: f64,
    pub t: f64,
    pub c0: f64,
    pub c1: f64,
    /// `1/p = (1-t)/p0 + t/p1`.
    pub p: f64,
    /// `1/q = (1-t)/q0 + t/q1`.
    pub q: f64,
    /// `2 (q/|q-q0| + q/|q-q1|)^(1/q) c0^(1-t) c1^t`, an infinite `q_i`
    /// contributing its limit 0.
    pub c_t: f64,
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

fn term(q: f64, qi: f64) -> f64 {
    if qi.is_infinite() {
        0.0
    } else {
        q / (q - qi).abs()
    }
}

impl ExponentConfig {
    pub fn new(p0: f64, q0: f64, p1: f64, q1: f64, t: f64, c0: f64, c1: f64) -> Result<Self> {
        for (name, p, q) in [("0", p0, q0), ("1", p1, q1)] {
            if p.is_nan() || q.is_nan() || !(1.0 <= p && p <= q) {
                return Err(Error::OutOfRange(format!(
                    "need 1 <= p{name} <= q{name} <= inf, got p{name} = {p}, q{name} = {q}"
                )));
            }
        }
        if q0 == q1 {
            return Err(Error::OutOfRange(format!("q0 and q1 must differ (both {q0})")));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::OutOfRange(format!("t = {t} not in (0,1)")));
        }
        for (name, c) in [("c0", c0), ("c1", c1)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::OutOfRange(format!("{name} = {c} must be positive and finite")));
            }
        }
        let p = 1.0 / ((1.0 - t) * recip(p0) + t * recip(p1));
        let q = 1.0 / ((1.0 - t) * recip(q0) + t * recip(q1));
        let c_t = 2.0 * (term(q, q0) + term(q, q1)).powf(1.0 / q) * c0.powf(1.0 - t) * c1.powf(t);
        Ok(Self { p0, q0, p1, q1, t, c0, c1, p, q, c_t })
    }

    /// Endpoints of the fractional maximal operator of order `alpha`:
    /// strong `(1/alpha, inf)` and weak `(1, 1/(1-alpha))`, both with
    /// constant 1.
    pub fn fractional_maximal(alpha: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OutOfRange(format!("alpha = {alpha} not in (0,1)")));
        }
        Self::new(1.0 / alpha, f64::INFINITY, 1.0, 1.0 / (1.0 - alpha), t, 1.0, 1.0)
    }

    /// Rejects user-supplied `p`, `q` that disagree with the derived ones.
    pub fn check_supplied(&self, p: Option<f64>, q: Option<f64>) -> Result<()> {
        for (name, given, derived) in [("p", p, self.p), ("q", q, self.q)] {
            if let Some(g) = given {
                if !((g - derived).abs() <= 1e-12 * derived.abs().max(1.0)) {
                    return Err(Error::Invalid(format!(
                        "supplied {name} = {g} disagrees with the derived value {derived}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_half_fractional_maximal() {
        let e = ExponentConfig::fractional_maximal(0.5, 0.5).unwrap();
        assert!((e.p - 4.0 / 3.0).abs() < 1e-15);
        assert!((e.q - 4.0).abs() < 1e-15);
        assert!((e.c_t - 2.0 * 2f64.powf(0.25)).abs() < 1e-15);
        assert!(e.check_supplied(Some(4.0 / 3.0), Some(4.0)).is_ok());
        assert!(e.check_supplied(Some(1.3), None).is_err());
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(ExponentConfig::new(2.0, 1.0, 1.0, 2.0, 0.5, 1.0, 1.0).is_err());
        assert!(ExponentConfig::new(1.0, 2.0, 1.0, 2.0, 0.5, 1.0, 1.0).is_err());
        assert!(ExponentConfig::new(1.0, 2.0, 2.0, 4.0, 1.0, 1.0, 1.0).is_err());
    }
}
