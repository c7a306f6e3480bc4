//! Report types shared between the library and the command line tool.
//!
//! Certified quantities never leave as bare floats: a ball serializes as a
//! round-trip decimal center plus an outward-rounded radius that absorbs
//! the decimal conversion error, so the printed pair still encloses the
//! true value.

use serde::Serialize;
use serde_json::Value;

use crate::ball::RealBall;
use crate::dyadic::{Dyadic, Round};

/// A certified enclosure in serializable form: `center ± radius`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallValue {
    pub center: f64,
    pub radius: f64,
}

impl BallValue {
    pub fn from_ball(b: &RealBall) -> BallValue {
        let center = b.center().to_f64();
        // the f64 center moved by up to |c - f64(c)|; widen the radius so
        // the printed pair still encloses the ball
        let slack = match Dyadic::from_f64(center) {
            Some(c64) => b.center().sub(&c64).abs(),
            None => b.center().abs(),
        };
        BallValue {
            center,
            radius: b.radius().add(&slack).to_f64_dir(Round::Up),
        }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

/// One computed quantity. `value` is a plain number for estimates, a
/// `{center, radius}` object for certified enclosures, or a command-shaped
/// object; anything structured beyond the headline number goes in
/// `details`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub quantity: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    pub method: String,
    pub precision_bits: u32,
    /// Operation path of every library call that produced the numbers,
    /// e.g. "ifs.delta_n".
    pub provenance: Vec<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    pub fn new(quantity: impl Into<String>, value: Value, method: impl Into<String>, precision_bits: u32) -> Report {
        Report {
            quantity: quantity.into(),
            value,
            error: None,
            method: method.into(),
            precision_bits,
            provenance: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn with_error(mut self, error: f64) -> Report {
        self.error = Some(error);
        self
    }

    pub fn with_provenance(mut self, ops: &[&str]) -> Report {
        self.provenance = ops.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_details(mut self, details: Value) -> Report {
        self.details = details;
        self
    }
}

/// Ball as a JSON value.
pub fn ball_json(b: &RealBall) -> Value {
    serde_json::to_value(BallValue::from_ball(b)).expect("two finite floats")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn printed_pair_still_encloses_the_ball() {
        // 1/3 at 80 bits: the decimal center is off by more than the ball
        // radius is wide, so the slack term must carry the difference
        let b = RealBall::from_ratio(&BigInt::from(1), &BigInt::from(3), 80);
        let v = BallValue::from_ball(&b);
        let third = 1.0 / 3.0;
        assert!(v.lo() <= third && third <= v.hi());
        assert!(v.radius < 1e-15);
    }

    #[test]
    fn exact_balls_print_with_zero_radius() {
        let b = RealBall::exact(Dyadic::from_f64(0.25).unwrap());
        let v = BallValue::from_ball(&b);
        assert_eq!(v.center, 0.25);
        assert_eq!(v.radius, 0.0);
    }

    #[test]
    fn report_serializes_with_sorted_stable_keys() {
        let r = Report::new("demo", ball_json(&RealBall::exact(Dyadic::one())), "exact", 64)
            .with_provenance(&["entropy.shannon"]);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"quantity\":\"demo\""));
        assert!(s.contains("\"provenance\":[\"entropy.shannon\"]"));
        assert!(!s.contains("error"), "absent error must not serialize");
    }
}
