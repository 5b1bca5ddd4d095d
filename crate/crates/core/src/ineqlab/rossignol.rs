//! Window inequalities for monotone step functions on `[0, 1]`, evaluated
//! in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::IneqError;

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// `f = values[k]` on `[starts[k], starts[k + 1])`, the last piece ending at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    starts: Vec<Q>,
    values: Vec<Q>,
}

impl StepFunction {
    pub fn new(starts: Vec<Q>, values: Vec<Q>) -> Result<Self, IneqError> {
        let bad = |m: &str| Err(IneqError::Step(m.to_string()));
        if starts.is_empty() || starts.len() != values.len() {
            return bad("need one value per piece");
        }
        if !starts[0].is_zero() {
            return bad("first piece must start at 0");
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) || starts.last().is_some_and(|s| *s >= Q::one()) {
            return bad("piece starts must increase within [0, 1)");
        }
        if values.iter().any(|v| v.is_negative()) {
            return bad("values must be nonnegative");
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return bad("values must be nondecreasing");
        }
        Ok(StepFunction { starts, values })
    }

    pub fn constant(c: Q) -> Result<Self, IneqError> {
        Self::new(vec![Q::zero()], vec![c])
    }

    pub fn starts(&self) -> &[Q] {
        &self.starts
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    /// `f(x)` for `x` in `[0, 1]`.
    pub fn eval(&self, x: &Q) -> &Q {
        let k = self.starts.partition_point(|s| s <= x);
        &self.values[k.saturating_sub(1)]
    }

    /// Whether `f` is constant on `[a, 1]`.
    pub fn constant_from(&self, a: &Q) -> bool {
        let fa = self.eval(a);
        self.starts.iter().zip(&self.values).all(|(s, v)| s <= a || v == fa)
    }

    /// `int_lo^hi g(x) dx` where `g` is constant between consecutive cut
    /// points; `g` is sampled at midpoints.
    fn integrate(&self, lo: &Q, hi: &Q, extra: &[Q], g: impl Fn(&Q) -> Q) -> Q {
        let mut cuts: Vec<Q> = self
            .starts
            .iter()
            .chain(extra)
            .filter(|c| *c > lo && *c < hi)
            .cloned()
            .collect();
        cuts.push(lo.clone());
        cuts.push(hi.clone());
        cuts.sort();
        cuts.dedup();
        let two = q(2, 1);
        cuts.windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / &two;
                g(&mid) * (&w[1] - &w[0])
            })
            .fold(Q::zero(), |a, b| a + b)
    }

    fn square_integral(&self, lo: &Q, hi: &Q) -> Q {
        self.integrate(lo, hi, &[], |x| {
            let v = self.eval(x);
            v * v
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RossignolCase {
    pub name: &'static str,
    pub applicable: bool,
    pub rhs: f64,
    pub margin: f64,
    /// Exact comparison; inapplicable cases hold vacuously.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RossignolCheck {
    /// `int_tau^1 (f(x) - f(x - tau))^2 dx`.
    pub lhs: f64,
    pub cases: Vec<RossignolCase>,
    pub holds: bool,
}

fn case(name: &'static str, applicable: bool, lhs: &Q, rhs: Q) -> RossignolCase {
    let to = |x: &Q| x.to_f64().unwrap_or(f64::NAN);
    RossignolCase {
        name,
        applicable,
        rhs: to(&rhs),
        margin: to(&(&rhs - lhs)),
        holds: !applicable || *lhs <= rhs,
    }
}

/// The three window bounds for `f` constant on `[a, 1]` and shift `tau` in `(0, 1/2]`.
pub fn rossignol_check(f: &StepFunction, a: &Q, tau: &Q) -> Result<RossignolCheck, IneqError> {
    let half = q(1, 2);
    let one = Q::one();
    if !(tau.is_positive() && *tau <= half) {
        return Err(IneqError::Parameters(format!("tau = {tau} outside (0, 1/2]")));
    }
    if a.is_negative() || *a > one {
        return Err(IneqError::Parameters(format!("a = {a} outside [0, 1]")));
    }
    if !f.constant_from(a) {
        return Err(IneqError::Step(format!("not constant on [{a}, 1]")));
    }
    let shifted: Vec<Q> = f.starts.iter().map(|s| s + tau).collect();
    let lhs = f.integrate(tau, &one, &shifted, |x| {
        let d = f.eval(x) - f.eval(&(x - tau));
        &d * &d
    });
    let total = f.square_integral(&Q::zero(), &one);
    let two = q(2, 1);
    let cases = vec![
        case("window", true, &lhs, f.square_integral(&(&one - tau), &one)),
        case("a_below_tau", *a <= *tau, &lhs, &two * a * &total),
        case("tau_below_a", *tau <= *a && *a <= half, &lhs, &two * tau * &total),
    ];
    Ok(RossignolCheck {
        lhs: lhs.to_f64().unwrap_or(f64::NAN),
        holds: cases.iter().all(|c| c.holds),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_step() {
        let f = StepFunction::new(vec![q(0, 1), q(1, 4)], vec![q(0, 1), q(1, 1)]).unwrap();
        let c = rossignol_check(&f, &q(1, 4), &q(1, 2)).unwrap();
        assert_eq!(c.lhs, 0.25);
        let small = &c.cases[1];
        assert!(small.applicable);
        assert_eq!(small.rhs, 0.375);
        assert!(c.holds);
        assert!(!c.cases[2].applicable);
    }

    #[test]
    fn constant_function() {
        let f = StepFunction::constant(q(3, 2)).unwrap();
        let c = rossignol_check(&f, &q(0, 1), &q(1, 3)).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.cases.iter().all(|k| k.rhs >= 0.0 && k.holds));
    }

    #[test]
    fn input_validation() {
        assert!(StepFunction::new(vec![q(0, 1), q(1, 2)], vec![q(2, 1), q(1, 1)]).is_err());
        assert!(StepFunction::new(vec![q(1, 4)], vec![q(1, 1)]).is_err());
        assert!(StepFunction::new(vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(1, 1)]).is_err());
        assert!(StepFunction::new(vec![q(0, 1)], vec![q(-1, 1)]).is_err());
        let f = StepFunction::new(vec![q(0, 1), q(3, 4)], vec![q(0, 1), q(1, 1)]).unwrap();
        assert!(matches!(
            rossignol_check(&f, &q(1, 2), &q(1, 4)),
            Err(IneqError::Step(_))
        ));
        assert!(rossignol_check(&f, &q(3, 4), &q(3, 4)).is_err());
        assert!(rossignol_check(&f, &q(3, 4), &q(0, 1)).is_err());
    }

    #[test]
    fn shift_integral_by_hand() {
        // f = 1 on [0, 1/3), 2 on [1/3, 1/2), 5 on [1/2, 1]; tau = 1/4
        let f = StepFunction::new(vec![q(0, 1), q(1, 3), q(1, 2)], vec![q(1, 1), q(2, 1), q(5, 1)]).unwrap();
        let c = rossignol_check(&f, &q(1, 2), &q(1, 4)).unwrap();
        // [1/4,1/3): 0; [1/3,1/2): (2-1)^2 = 1 over 1/6; [1/2,7/12): (5-1)^2 over 1/12;
        // [7/12,3/4): (5-2)^2 over 1/6; [3/4,1]: 0
        let exact = q(1, 6) + q(16, 12) + q(9, 6);
        assert_eq!(c.lhs, exact.to_f64().unwrap());
        assert!(c.holds);
    }
}
