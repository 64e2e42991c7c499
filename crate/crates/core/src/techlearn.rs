//! Technology cost learning and S-curve deployment.
//!
//! Unit costs follow a floored experience curve in cumulative deployment:
//!
//! ```text
//! cost(X) = floor + (c0 - floor) * (X / X0)^(-b)
//! ```
//!
//! and scheduled deployment follows a logistic curve in time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TechError {
    #[error("cumulative deployment must be positive, got {0}")]
    NonpositiveCumulative(f64),
    #[error("cost target {target} outside the open interval ({floor}, {c0})")]
    TargetOutOfRange { target: f64, floor: f64, c0: f64 },
    #[error("calibration horizon equals the reference deployment")]
    DegenerateHorizon,
    #[error("invalid technology curve: {0}")]
    InvalidCurve(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechCurve {
    pub name: String,
    /// Cost at the reference cumulative deployment `x0`.
    pub c0: f64,
    pub floor: f64,
    pub learning_exponent: f64,
    pub x0: f64,
}

impl TechCurve {
    pub fn validate(&self) -> Result<(), TechError> {
        if !(self.c0 > self.floor && self.floor >= 0.0) {
            return Err(TechError::InvalidCurve(format!(
                "{}: need c0 > floor >= 0 (c0 {}, floor {})",
                self.name, self.c0, self.floor
            )));
        }
        if !(self.x0 > 0.0) {
            return Err(TechError::InvalidCurve(format!(
                "{}: x0 must be > 0",
                self.name
            )));
        }
        if !(self.learning_exponent >= 0.0) {
            return Err(TechError::InvalidCurve(format!(
                "{}: learning exponent must be >= 0",
                self.name
            )));
        }
        Ok(())
    }
}

pub fn wright_cost(curve: &TechCurve, cumulative: f64) -> Result<f64, TechError> {
    if !(cumulative > 0.0) {
        return Err(TechError::NonpositiveCumulative(cumulative));
    }
    let ratio = cumulative / curve.x0;
    Ok(curve.floor + (curve.c0 - curve.floor) * ratio.powf(-curve.learning_exponent))
}

/// Learning exponent that makes the curve pass through `(x_target, cost_target)`.
///
/// Only `c0`, `floor` and `x0` of `curve` are used.
pub fn calibrate_exponent(
    curve: &TechCurve,
    x_target: f64,
    cost_target: f64,
) -> Result<f64, TechError> {
    if !(cost_target > curve.floor && cost_target < curve.c0) {
        return Err(TechError::TargetOutOfRange {
            target: cost_target,
            floor: curve.floor,
            c0: curve.c0,
        });
    }
    if x_target == curve.x0 {
        return Err(TechError::DegenerateHorizon);
    }
    if !(x_target > curve.x0) {
        return Err(TechError::InvalidCurve(format!(
            "{}: calibration needs x_target > x0",
            curve.name
        )));
    }
    let b =
        ((curve.c0 - curve.floor) / (cost_target - curve.floor)).ln() / (x_target / curve.x0).ln();
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdoptionCurve {
    /// Saturation level.
    pub k: f64,
    /// Growth rate per quarter.
    pub r: f64,
    /// Midpoint quarter.
    pub t0: f64,
}

impl AdoptionCurve {
    pub fn validate(&self) -> Result<(), TechError> {
        if !(self.k > 0.0 && self.r > 0.0) {
            return Err(TechError::InvalidCurve(format!(
                "adoption curve needs k > 0 and r > 0 (k {}, r {})",
                self.k, self.r
            )));
        }
        Ok(())
    }
}

pub fn logistic_level(curve: &AdoptionCurve, t: f64) -> f64 {
    curve.k / (1.0 + (-curve.r * (t - curve.t0)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechState {
    pub curve: TechCurve,
    pub cumulative: f64,
    pub current_cost: f64,
}

impl TechState {
    /// Starts at the reference point, where the cost equals `c0`.
    pub fn new(curve: TechCurve) -> Result<Self, TechError> {
        curve.validate()?;
        let cumulative = curve.x0;
        let current_cost = wright_cost(&curve, cumulative)?;
        Ok(Self {
            curve,
            cumulative,
            current_cost,
        })
    }

    /// Cost relative to the reference cost `c0`.
    pub fn cost_index(&self) -> f64 {
        self.current_cost / self.curve.c0
    }
}

pub fn advance_tech(state: &TechState, new_deployment: f64) -> TechState {
    assert!(
        new_deployment >= 0.0 && new_deployment.is_finite(),
        "deployment increment must be finite and non-negative"
    );
    if new_deployment == 0.0 {
        return state.clone();
    }
    let cumulative = state.cumulative + new_deployment;
    let current_cost = wright_cost(&state.curve, cumulative).expect("cumulative stays positive");
    TechState {
        curve: state.curve.clone(),
        cumulative,
        current_cost,
    }
}

/// Deployment for one quarter: the larger of the S-curve's scheduled
/// increment between `t` and `t + 1` and the deployment bought by
/// `purchases` (in cost units) at the current cost.
pub fn scheduled_deployment(
    adoption: Option<&AdoptionCurve>,
    t: u32,
    purchases_in_cost_units: f64,
    current_cost: f64,
) -> f64 {
    let scheduled = adoption
        .map(|a| logistic_level(a, t as f64 + 1.0) - logistic_level(a, t as f64))
        .unwrap_or(0.0)
        .max(0.0);
    let realized = if current_cost > 0.0 {
        (purchases_in_cost_units / current_cost).max(0.0)
    } else {
        0.0
    };
    scheduled.max(realized)
}

/// Runs a technology along its S-curve schedule for `quarters` steps.
pub fn run_schedule(state: &TechState, adoption: &AdoptionCurve, quarters: u32) -> TechState {
    (0..quarters).fold(state.clone(), |s, t| {
        let dx = scheduled_deployment(Some(adoption), t, 0.0, s.current_cost);
        advance_tech(&s, dx)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wind() -> TechCurve {
        TechCurve {
            name: "wind".into(),
            c0: 70.0,
            floor: 35.0,
            learning_exponent: 0.0,
            x0: 1.0,
        }
    }

    #[test]
    fn reference_identity() {
        let mut c = wind();
        c.learning_exponent = 0.7;
        assert_eq!(wright_cost(&c, c.x0).unwrap(), 70.0);
    }

    #[test]
    fn zero_exponent_is_flat() {
        let c = wind();
        for x in [0.01, 1.0, 4.0, 1e9] {
            assert_eq!(wright_cost(&c, x).unwrap(), 70.0);
        }
    }

    #[test]
    fn nonpositive_cumulative_rejected() {
        assert_eq!(
            wright_cost(&wind(), 0.0),
            Err(TechError::NonpositiveCumulative(0.0))
        );
    }

    #[test]
    fn wind_anchor() {
        // ln(35/8)/ln(4), frozen from the closed form.
        let b = calibrate_exponent(&wind(), 4.0, 43.0).unwrap();
        assert!((b - 1.064_659_2).abs() < 1e-4, "{b}");
        let mut c = wind();
        c.learning_exponent = 1.06466;
        assert!((wright_cost(&c, 4.0).unwrap() - 43.0).abs() < 0.01);
    }

    #[test]
    fn small_epsilon_expansion() {
        // cost_target = c0 - eps, x_target = x0 * e  =>  b ~ eps / (c0 - floor)
        let eps = 1e-6;
        let b = calibrate_exponent(&wind(), std::f64::consts::E, 70.0 - eps).unwrap();
        let first_order = eps / 35.0;
        assert!(
            ((b - first_order) / first_order).abs() < 1e-6,
            "{b} vs {first_order}"
        );
    }

    #[test]
    fn calibration_gates() {
        assert!(matches!(
            calibrate_exponent(&wind(), 4.0, 34.0),
            Err(TechError::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            calibrate_exponent(&wind(), 4.0, 70.0),
            Err(TechError::TargetOutOfRange { .. })
        ));
        assert_eq!(
            calibrate_exponent(&wind(), 1.0, 43.0),
            Err(TechError::DegenerateHorizon)
        );
    }

    #[test]
    fn logistic_values() {
        let a = AdoptionCurve {
            k: 1000.0,
            r: 0.2,
            t0: 7.0,
        };
        assert_eq!(logistic_level(&a, 7.0), 500.0);
        // 1000 / (1 + e^-2)
        assert!((logistic_level(&a, 17.0) - 880.797).abs() < 1e-3);
        assert!(logistic_level(&a, 7.0 - 50.0 / 0.2) < 1e-9 * 1000.0);
        assert!(1000.0 - logistic_level(&a, 7.0 + 50.0 / 0.2) < 1e-9 * 1000.0);
    }

    #[test]
    fn advance_zero_is_identity() {
        let s = TechState::new(wind()).unwrap();
        assert_eq!(advance_tech(&s, 0.0), s);
    }

    #[test]
    fn advance_is_path_independent() {
        let mut c = wind();
        c.learning_exponent = 0.5;
        let s = TechState::new(c).unwrap();
        let two = advance_tech(&advance_tech(&s, 5.0), 5.0);
        let one = advance_tech(&s, 10.0);
        assert_eq!(two.cumulative, one.cumulative);
        assert_eq!(two.current_cost, one.current_cost);
    }

    #[test]
    fn deployment_takes_larger_driver() {
        let a = AdoptionCurve {
            k: 100.0,
            r: 0.5,
            t0: 0.0,
        };
        let sched = logistic_level(&a, 1.0) - logistic_level(&a, 0.0);
        assert_eq!(scheduled_deployment(Some(&a), 0, 0.0, 10.0), sched);
        assert_eq!(scheduled_deployment(Some(&a), 0, 1e6, 10.0), 1e5);
        assert_eq!(scheduled_deployment(None, 0, 50.0, 10.0), 5.0);
    }

    proptest! {
        #[test]
        fn cost_bounded_and_monotone(c0 in 1.0f64..500.0, floor_frac in 0.0f64..0.99, b in 0.0f64..3.0,
                                     x1 in 1e-3f64..1e6, x2 in 1e-3f64..1e6) {
            let c = TechCurve { name: "p".into(), c0, floor: c0 * floor_frac, learning_exponent: b, x0: 1.0 };
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            let clo = wright_cost(&c, lo).unwrap();
            let chi = wright_cost(&c, hi).unwrap();
            prop_assert!(chi >= c.floor);
            prop_assert!(clo >= chi);
        }

        #[test]
        fn calibration_round_trip(c0 in 2.0f64..500.0, floor_frac in 0.0f64..0.9, target_frac in 0.01f64..0.99,
                                  ratio in 1.01f64..1e4) {
            let floor = c0 * floor_frac;
            let target = floor + (c0 - floor) * target_frac;
            prop_assume!(target > floor && target < c0);
            let mut c = TechCurve { name: "p".into(), c0, floor, learning_exponent: 0.0, x0: 3.0 };
            c.learning_exponent = calibrate_exponent(&c, 3.0 * ratio, target).unwrap();
            let got = wright_cost(&c, 3.0 * ratio).unwrap();
            prop_assert!(((got - target) / target).abs() <= 1e-9);
        }

        #[test]
        fn state_cost_never_stale(steps in proptest::collection::vec(0.0f64..100.0, 1..30)) {
            let mut c = wind();
            c.learning_exponent = 0.8;
            let mut s = TechState::new(c).unwrap();
            for dx in steps {
                let prev = s.cumulative;
                s = advance_tech(&s, dx);
                prop_assert!(s.cumulative >= prev);
                prop_assert_eq!(s.current_cost, wright_cost(&s.curve, s.cumulative).unwrap());
            }
        }

        #[test]
        fn logistic_increasing_and_bounded(t1 in -200.0f64..200.0, dt in 1e-3f64..50.0) {
            let a = AdoptionCurve { k: 10.0, r: 0.1, t0: 3.0 };
            let l1 = logistic_level(&a, t1);
            let l2 = logistic_level(&a, t1 + dt);
            prop_assert!(l1 > 0.0 && l2 <= 10.0);
            prop_assert!(l2 > l1);
        }
    }
}
