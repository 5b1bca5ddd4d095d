//! Real functions of `k` independent bits and their martingale increments.

use super::IneqError;
use crate::numeric::{compensated_sum, weighted_sum};

/// Largest `k` accepted; `2^20` doubles are 8 MiB.
pub const MAX_BITS: usize = 20;

/// `f : {0,1}^k -> R` under the product law with `P(bit = 1) = p`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeFunction {
    k: usize,
    p: f64,
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl HypercubeFunction {
    /// Fair bits.
    pub fn new(k: usize, values: Vec<f64>) -> Result<Self, IneqError> {
        Self::with_bias(k, values, 0.5)
    }

    pub fn with_bias(k: usize, values: Vec<f64>, p: f64) -> Result<Self, IneqError> {
        if k > MAX_BITS {
            return Err(IneqError::TooManyBits { bits: k, max: MAX_BITS });
        }
        if values.len() != 1 << k {
            return Err(IneqError::Length(values.len(), 1 << k));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(IneqError::BadBias(p));
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(IneqError::NonFinite(v));
        }
        let probs = (0..1usize << k)
            .map(|x| {
                let ones = x.count_ones() as i32;
                p.powi(ones) * (1.0 - p).powi(k as i32 - ones)
            })
            .collect();
        Ok(HypercubeFunction { k, p, values, probs })
    }

    pub fn from_fn(k: usize, f: impl Fn(usize) -> f64) -> Result<Self, IneqError> {
        if k > MAX_BITS {
            return Err(IneqError::TooManyBits { bits: k, max: MAX_BITS });
        }
        Self::new(k, (0..1usize << k).map(f).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bias(&self) -> f64 {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Probability of each configuration.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        weighted_sum(&self.values, &self.probs)
    }

    pub fn expect(&self, g: impl Fn(usize, f64) -> f64) -> f64 {
        compensated_sum(
            self.values
                .iter()
                .enumerate()
                .zip(&self.probs)
                .map(|((x, &v), &q)| q * g(x, v)),
        )
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|_, v| (v - m) * (v - m))
    }

    /// `E[(f(X) - f(X'))^2]` where `X'` redraws bit `i` independently.
    pub fn resample_sq(&self, i: usize) -> f64 {
        let p = self.p;
        self.expect(|x, v| {
            let flip = if x >> i & 1 == 0 { p } else { 1.0 - p };
            let d = v - self.values[x ^ (1 << i)];
            flip * d * d
        })
    }
}

/// `Delta_i f = E[f | F_i] - E[f | F_{i-1}]` where `F_i` is generated by the
/// first `i` bits of `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleDecomposition {
    order: Vec<usize>,
    mean: f64,
    increments: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleDiagnostics {
    /// `max_x |sum_i Delta_i f(x) - (f(x) - E f)|`.
    pub telescoping: f64,
    /// `max_{i != j} |E[Delta_i f Delta_j f]|`.
    pub orthogonality: f64,
    /// `|Var f - sum_i E[(Delta_i f)^2]|`.
    pub parseval: f64,
}

impl MartingaleDecomposition {
    /// Bit index order.
    pub fn new(f: &HypercubeFunction) -> Self {
        Self::with_order(f, &(0..f.k).collect::<Vec<_>>()).expect("identity is a permutation")
    }

    pub fn with_order(f: &HypercubeFunction, order: &[usize]) -> Result<Self, IneqError> {
        let k = f.k;
        let mut seen = vec![false; k];
        if order.len() != k || order.iter().any(|&b| b >= k || std::mem::replace(&mut seen[b], true)) {
            return Err(IneqError::BadOrder(k));
        }
        let p = f.p;
        // cond[i] = E[f | first i bits]; build from i = k downwards
        let mut cond = f.values.clone();
        let mut increments = vec![Vec::new(); k];
        for i in (1..=k).rev() {
            let bit = 1usize << order[i - 1];
            let coarser: Vec<f64> = (0..cond.len())
                .map(|x| (1.0 - p) * cond[x & !bit] + p * cond[x | bit])
                .collect();
            increments[i - 1] = cond.iter().zip(&coarser).map(|(a, b)| a - b).collect();
            cond = coarser;
        }
        Ok(MartingaleDecomposition {
            order: order.to_vec(),
            mean: cond[0],
            increments,
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `E f`, the value of the fully coarsened function.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `Delta_i f` for `i = 1..=k`, stored at index `i - 1`.
    pub fn increments(&self) -> &[Vec<f64>] {
        &self.increments
    }

    pub fn diagnostics(&self, f: &HypercubeFunction) -> MartingaleDiagnostics {
        let mean = f.mean();
        let telescoping = (0..f.values.len())
            .map(|x| {
                let s = compensated_sum(self.increments.iter().map(|d| d[x]));
                (s - (f.values[x] - mean)).abs()
            })
            .fold(0.0, f64::max);
        let inner = |a: &[f64], b: &[f64]| compensated_sum(a.iter().zip(b).zip(&f.probs).map(|((x, y), q)| q * x * y));
        let mut orthogonality = 0.0f64;
        for i in 0..self.increments.len() {
            for j in i + 1..self.increments.len() {
                orthogonality = orthogonality.max(inner(&self.increments[i], &self.increments[j]).abs());
            }
        }
        let energy = compensated_sum(self.increments.iter().map(|d| inner(d, d)));
        MartingaleDiagnostics {
            telescoping,
            orthogonality,
            parseval: (f.variance() - energy).abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dictator_and_parity() {
        let dictator = HypercubeFunction::from_fn(1, |x| (x & 1) as f64).unwrap();
        assert_eq!(dictator.variance(), 0.25);
        assert_eq!(dictator.resample_sq(0), 0.5);
        let m = MartingaleDecomposition::new(&dictator);
        assert_eq!(m.increments()[0], vec![-0.5, 0.5]);
        let parity = HypercubeFunction::from_fn(2, |x| (x.count_ones() % 2) as f64).unwrap();
        let m = MartingaleDecomposition::new(&parity);
        // the first bit alone says nothing about parity
        assert!(m.increments()[0].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(HypercubeFunction::new(2, vec![0.0; 3]).is_err());
        assert!(HypercubeFunction::new(21, vec![]).is_err());
        assert!(HypercubeFunction::with_bias(1, vec![0.0, 1.0], 1.0).is_err());
        assert!(HypercubeFunction::new(1, vec![f64::NAN, 1.0]).is_err());
        let f = HypercubeFunction::new(2, vec![0.0; 4]).unwrap();
        assert!(MartingaleDecomposition::with_order(&f, &[0, 0]).is_err());
        assert!(MartingaleDecomposition::with_order(&f, &[0]).is_err());
    }

    fn function() -> impl Strategy<Value = HypercubeFunction> {
        (1usize..7, 0.05f64..0.95).prop_flat_map(|(k, p)| {
            proptest::collection::vec(-10.0f64..10.0, 1 << k)
                .prop_map(move |v| HypercubeFunction::with_bias(k, v, p).unwrap())
        })
    }

    proptest! {
        #[test]
        fn increments_telescope_and_are_orthogonal(f in function(), seed in any::<u64>()) {
            let mut order: Vec<usize> = (0..f.k()).collect();
            let mut s = seed;
            for i in (1..order.len()).rev() {
                s = crate::rng::mix64(s, i as u64);
                order.swap(i, (s % (i as u64 + 1)) as usize);
            }
            for m in [MartingaleDecomposition::new(&f), MartingaleDecomposition::with_order(&f, &order).unwrap()] {
                let d = m.diagnostics(&f);
                prop_assert!(d.telescoping < 1e-12, "{d:?}");
                prop_assert!(d.orthogonality < 1e-12, "{d:?}");
                prop_assert!(d.parseval < 1e-12, "{d:?}");
                prop_assert!((m.mean() - f.mean()).abs() < 1e-12);
            }
        }
    }
}
