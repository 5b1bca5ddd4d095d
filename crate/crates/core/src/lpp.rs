//! Directed last-passage percolation on `{0..n}^2` with up-right paths.
//!
//! `M(i, j) = w(i, j) + max(M(i-1, j), M(i, j-1))` and `T_n = M(n, n)`.
//! Vertex weights are sampled like edge weights, `F^{-1}(U)` with `U` read
//! from `mix64(seed, key(i, j))`, so any single vertex can be regenerated.

use thiserror::Error;

use crate::numeric::linear_fit;
use crate::rng::mix64;
use crate::weights::{dyadic_unit, DistributionSpec, DEFAULT_DYADIC_BITS};

#[derive(Debug, Error, PartialEq)]
pub enum LppError {
    #[error("grid side must be at least 1")]
    Side,
    #[error("weight array has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("negative or non-finite vertex weight {0}")]
    BadWeight(f64),
    #[error("center fit needs at least two distinct sizes")]
    Fit,
    #[error("dyadic depth {0} outside 1..=64")]
    Depth(u32),
}

/// Counter for vertex `(i, j)`.
#[inline]
fn vertex_key(i: usize, j: usize) -> u64 {
    ((i as u64) << 32) | j as u64
}

#[inline]
fn vertex_weight(spec: &DistributionSpec, seed: u64, depth: u32, i: usize, j: usize) -> f64 {
    spec.inverse_cdf_unit(dyadic_unit(mix64(seed, vertex_key(i, j)), depth))
}

/// Geometric law with `q = 1/2`: `P(k) = 2^{-(k+1)}`, mean 1.
pub fn default_spec() -> DistributionSpec {
    DistributionSpec::geometric(0.5).expect("valid parameter")
}

/// `(n+1) x (n+1)` vertex weights, row `i` contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct LppGrid {
    n: usize,
    weights: Vec<f64>,
}

impl LppGrid {
    pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Self, LppError> {
        if n == 0 {
            return Err(LppError::Side);
        }
        let mut weights = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                weights.push(vertex_weight(spec, seed, DEFAULT_DYADIC_BITS, i, j));
            }
        }
        Ok(LppGrid { n, weights })
    }

    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self, LppError> {
        if n == 0 {
            return Err(LppError::Side);
        }
        let expected = (n + 1) * (n + 1);
        if weights.len() != expected {
            return Err(LppError::Length {
                expected,
                got: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(LppError::BadWeight(w));
        }
        Ok(LppGrid { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * (self.n + 1) + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Copy with `w(i, j)` replaced.
    pub fn with_weight(&self, i: usize, j: usize, w: f64) -> Result<Self, LppError> {
        if !(w.is_finite() && w >= 0.0) {
            return Err(LppError::BadWeight(w));
        }
        let mut out = self.clone();
        out.weights[i * (self.n + 1) + j] = w;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LppResult {
    pub t: f64,
    /// Vertices from `(0, 0)` to `(n, n)`.
    pub path: Vec<(usize, usize)>,
}

/// Full table and one maximising path. Backtracking prefers `(i-1, j)` on ties.
pub fn last_passage(grid: &LppGrid) -> LppResult {
    let n = grid.n;
    let w = n + 1;
    let mut m = vec![0.0f64; w * w];
    for i in 0..=n {
        for j in 0..=n {
            let up = if i > 0 { m[(i - 1) * w + j] } else { f64::NEG_INFINITY };
            let left = if j > 0 { m[i * w + j - 1] } else { f64::NEG_INFINITY };
            let prev = if i == 0 && j == 0 { 0.0 } else { up.max(left) };
            m[i * w + j] = grid.weight(i, j) + prev;
        }
    }
    let mut path = vec![(n, n)];
    let (mut i, mut j) = (n, n);
    while (i, j) != (0, 0) {
        if j == 0 || (i > 0 && m[(i - 1) * w + j] >= m[i * w + j - 1]) {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();
    LppResult { t: m[w * w - 1], path }
}

/// `T_n` with two rolling rows.
pub fn last_passage_time(grid: &LppGrid) -> f64 {
    let n = grid.n;
    rolling(n, |i, j| grid.weight(i, j))
}

/// `T_n` for the grid with `seed`, generating weights row by row in `O(n)` memory.
pub fn sample_last_passage_time(spec: &DistributionSpec, n: usize, seed: u64) -> Result<f64, LppError> {
    sample_last_passage_time_with_depth(spec, n, seed, DEFAULT_DYADIC_BITS)
}

/// As [`sample_last_passage_time`] with the uniforms truncated to `depth` bits.
pub fn sample_last_passage_time_with_depth(
    spec: &DistributionSpec,
    n: usize,
    seed: u64,
    depth: u32,
) -> Result<f64, LppError> {
    if n == 0 {
        return Err(LppError::Side);
    }
    if !(1..=64).contains(&depth) {
        return Err(LppError::Depth(depth));
    }
    Ok(rolling(n, |i, j| vertex_weight(spec, seed, depth, i, j)))
}

fn rolling(n: usize, w: impl Fn(usize, usize) -> f64) -> f64 {
    let mut row = vec![0.0f64; n + 1];
    for i in 0..=n {
        let mut left = f64::NEG_INFINITY;
        for (j, cell) in row.iter_mut().enumerate() {
            let up = if i > 0 { *cell } else { f64::NEG_INFINITY };
            let prev = if i == 0 && j == 0 { 0.0 } else { up.max(left) };
            *cell = w(i, j) + prev;
            left = *cell;
        }
    }
    row[n]
}

/// `Z = (T_n - center n) / (scale_coeff n^{scale_power})`.
pub fn rescaled_statistic(t: f64, n: usize, center: f64, scale_power: f64, scale_coeff: f64) -> f64 {
    let n = n as f64;
    (t - center * n) / (scale_coeff * n.powf(scale_power))
}

/// [`rescaled_statistic`] with exponent `1/3` and coefficient `2^{4/3}`.
pub fn rescaled_statistic_default(t: f64, n: usize, center: f64) -> f64 {
    rescaled_statistic(t, n, center, 1.0 / 3.0, 2f64.powf(4.0 / 3.0))
}

/// Center from `(n, mean T_n)` pairs: least squares of `mean/n = c + b n^{-2/3}`,
/// returning the extrapolated `c`.
pub fn fit_center(points: &[(usize, f64)]) -> Result<f64, LppError> {
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).powf(-2.0 / 3.0)).collect();
    let ys: Vec<f64> = points.iter().map(|(n, m)| m / *n as f64).collect();
    linear_fit(&xs, &ys).map(|f| f.intercept).ok_or(LppError::Fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_paths(n: usize) -> Vec<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        fn go(n: usize, i: usize, j: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
            cur.push((i, j));
            if i == n && j == n {
                out.push(cur.clone());
            } else {
                if i < n {
                    go(n, i + 1, j, cur, out);
                }
                if j < n {
                    go(n, i, j + 1, cur, out);
                }
            }
            cur.pop();
        }
        go(n, 0, 0, &mut Vec::new(), &mut out);
        out
    }

    fn path_sum(grid: &LppGrid, path: &[(usize, usize)]) -> f64 {
        path.iter().map(|&(i, j)| grid.weight(i, j)).sum()
    }

    #[test]
    fn all_ones() {
        for n in 1..10 {
            let grid = LppGrid::from_weights(n, vec![1.0; (n + 1) * (n + 1)]).unwrap();
            let r = last_passage(&grid);
            assert_eq!(r.t, (2 * n + 1) as f64);
            assert_eq!(r.path.len(), 2 * n + 1);
            assert_eq!(last_passage_time(&grid), r.t);
        }
    }

    #[test]
    fn two_by_two_example() {
        // row i, column j: w(0,0)=1, w(0,1)=2, w(1,0)=3, w(1,1)=4
        let grid = LppGrid::from_weights(1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = last_passage(&grid);
        assert_eq!(r.t, 8.0);
        assert_eq!(r.path, vec![(0, 0), (1, 0), (1, 1)]);
    }

    #[test]
    fn tie_prefers_first_coordinate_predecessor() {
        // walking back from (1,1), (0,1) wins the tie
        let grid = LppGrid::from_weights(1, vec![1.0; 4]).unwrap();
        assert_eq!(last_passage(&grid).path, vec![(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn brute_force_n4() {
        let paths = all_paths(4);
        assert_eq!(paths.len(), 70);
        for seed in 0..50u64 {
            let weights: Vec<f64> = (0..25).map(|k| (mix64(seed, k) % 10) as f64).collect();
            let grid = LppGrid::from_weights(4, weights).unwrap();
            let best = paths
                .iter()
                .map(|p| path_sum(&grid, p))
                .fold(f64::NEG_INFINITY, f64::max);
            let r = last_passage(&grid);
            assert_eq!(r.t, best);
            assert_eq!(path_sum(&grid, &r.path), r.t);
            assert_eq!(last_passage_time(&grid), best);
        }
    }

    #[test]
    fn sampled_grid_matches_streaming() {
        let spec = default_spec();
        for seed in 0..5 {
            let grid = LppGrid::sample(&spec, 20, seed).unwrap();
            assert_eq!(
                last_passage_time(&grid),
                sample_last_passage_time(&spec, 20, seed).unwrap()
            );
        }
    }

    #[test]
    fn geometric_weights_have_mean_one() {
        let grid = LppGrid::sample(&default_spec(), 300, 3).unwrap();
        let m = grid.weights().iter().sum::<f64>() / grid.weights().len() as f64;
        assert!((m - 1.0).abs() < 0.02, "{m}");
        assert!(grid.weights().iter().all(|w| w.fract() == 0.0));
    }

    #[test]
    fn rescaled_examples() {
        assert_eq!(rescaled_statistic_default(4.0 * 1000.0, 1000, 4.0), 0.0);
        let z = rescaled_statistic_default(4100.0, 1000, 4.0);
        assert!((z - 100.0 / (2f64.powf(4.0 / 3.0) * 10.0)).abs() < 1e-12);
        assert!((z - 3.969).abs() < 1e-3);
    }

    #[test]
    fn center_fit_recovers_synthetic_constant() {
        let pts: Vec<(usize, f64)> = [250usize, 500, 1000, 2000]
            .iter()
            .map(|&n| (n, 4.0 * n as f64 - 1.7 * (n as f64).powf(1.0 / 3.0)))
            .collect();
        assert!((fit_center(&pts).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(fit_center(&pts[..1]), Err(LppError::Fit));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(LppGrid::from_weights(0, vec![]), Err(LppError::Side));
        assert!(matches!(
            LppGrid::from_weights(1, vec![1.0; 3]),
            Err(LppError::Length { .. })
        ));
        assert!(matches!(
            LppGrid::from_weights(1, vec![1.0, -1.0, 0.0, 0.0]),
            Err(LppError::BadWeight(_))
        ));
    }

    proptest! {
        #[test]
        fn dp_dominates_paths_and_is_attained(n in 1usize..6, seed in any::<u64>()) {
            let weights: Vec<f64> = (0..((n + 1) * (n + 1)) as u64).map(|k| (mix64(seed, k) % 1000) as f64 / 7.0).collect();
            let grid = LppGrid::from_weights(n, weights).unwrap();
            let r = last_passage(&grid);
            let paths = all_paths(n);
            let mut best = f64::NEG_INFINITY;
            for p in &paths {
                let s = path_sum(&grid, p);
                prop_assert!(s <= r.t + 1e-9);
                best = best.max(s);
            }
            prop_assert!((best - r.t).abs() <= 1e-9);
        }

        #[test]
        fn raising_a_weight_never_lowers_t(n in 1usize..12, seed in any::<u64>(), i in 0usize..12, j in 0usize..12, bump in 0.0f64..5.0) {
            let grid = LppGrid::sample(&default_spec(), n, seed).unwrap();
            let (i, j) = (i % (n + 1), j % (n + 1));
            let raised = grid.with_weight(i, j, grid.weight(i, j) + bump).unwrap();
            prop_assert!(last_passage_time(&raised) >= last_passage_time(&grid));
        }
    }
}
