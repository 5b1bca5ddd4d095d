//! Edge-weight laws, counter-based sampling and the dyadic bit encoding.
//!
//! Every weight is produced as `F^{-1}(U)` where `F^{-1}(y) = inf{x : F(x) >= y}`
//! is the right-continuous inverse of the law's distribution function and
//! `U = sum_{j=1}^{J} w_j 2^{-j}` is read off the top `J` bits of
//! `mix64(seed, edge.lattice_key())` (`w_1` is the most significant bit).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lattice::Region;
use crate::rng::mix64;

/// Default truncation depth of the dyadic encoding (binary64 mantissa).
pub const DEFAULT_DYADIC_BITS: u32 = 53;

/// Bond percolation thresholds on `Z^d`. `d = 2` is exact; the others are
/// accepted numerical estimates.
pub fn critical_probability(dim: usize) -> f64 {
    match dim {
        2 => 0.5,
        3 => 0.248_812_6,
        4 => 0.160_131_4,
        _ => f64::NAN,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightsError {
    #[error("invalid distribution parameters: {0}")]
    InvalidLaw(String),
    #[error("quantile level {0} outside (0, 1)")]
    QuantileLevel(f64),
    #[error("F(t) = 0 at t = {0}; the weight is below the support")]
    BelowSupport(f64),
    #[error("atom at zero has mass {mass}, which is not below p_c({dim}) = {pc}")]
    AtomAtZero { mass: f64, dim: usize, pc: f64 },
    #[error("dyadic bit index {j} outside 1..={depth}")]
    BitIndex { j: u32, depth: u32 },
    #[error("dyadic depth {0} outside 1..=64")]
    Depth(u32),
    #[error("weight array has length {got}, region has {expected} edges")]
    Length { expected: usize, got: usize },
    #[error("negative or non-finite weight {0}")]
    BadWeight(f64),
    #[error("cannot parse distribution {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// An edge-weight law on `[0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// `a` with probability `1 - p`, `b` with probability `p`.
    Bernoulli {
        a: f64,
        b: f64,
        p: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    /// `P(k) = (1 - q) q^k` for `k = 0, 1, 2, ...`; mean `q / (1 - q)`.
    Geometric {
        q: f64,
    },
    /// Step distribution function: atoms at `x_i` with `F(x_i)` given.
    /// `x` strictly increasing, `F` nondecreasing, last `F` equal to 1.
    Table {
        points: Vec<(f64, f64)>,
    },
}

/// A validated law together with its infimum of support `I = inf{x : F(x) > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    law: Law,
    inf_support: f64,
}

impl DistributionSpec {
    pub fn new(law: Law) -> Result<Self, WeightsError> {
        let bad = |m: &str| Err(WeightsError::InvalidLaw(m.to_string()));
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let inf_support = match &law {
            Law::Bernoulli { a, b, p } => {
                if !(finite_nonneg(*a) && finite_nonneg(*b) && a <= b) {
                    return bad("bernoulli needs 0 <= a <= b");
                }
                if !(0.0..=1.0).contains(p) {
                    return bad("bernoulli needs 0 <= p <= 1");
                }
                if *p == 1.0 {
                    *b
                } else {
                    *a
                }
            }
            Law::Uniform { lo, hi } => {
                if !(finite_nonneg(*lo) && hi.is_finite() && lo < hi) {
                    return bad("uniform needs 0 <= lo < hi");
                }
                *lo
            }
            Law::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad("exponential needs rate > 0");
                }
                0.0
            }
            Law::Geometric { q } => {
                if !(0.0..1.0).contains(q) {
                    return bad("geometric needs 0 <= q < 1");
                }
                0.0
            }
            Law::Table { points } => {
                if points.is_empty() {
                    return bad("table needs at least one breakpoint");
                }
                let mut prev_x = f64::NEG_INFINITY;
                let mut prev_f = 0.0;
                for &(x, f) in points {
                    if !finite_nonneg(x) || x <= prev_x {
                        return bad("table breakpoints must be finite, >= 0 and strictly increasing");
                    }
                    if !(f.is_finite() && f >= prev_f && f <= 1.0) {
                        return bad("table F values must be nondecreasing within [0, 1]");
                    }
                    prev_x = x;
                    prev_f = f;
                }
                if prev_f != 1.0 {
                    return bad("table must end with F = 1");
                }
                points
                    .iter()
                    .find(|(_, f)| *f > 0.0)
                    .map(|(x, _)| *x)
                    .expect("last F is 1")
            }
        };
        Ok(DistributionSpec { law, inf_support })
    }

    pub fn bernoulli(a: f64, b: f64, p: f64) -> Result<Self, WeightsError> {
        Self::new(Law::Bernoulli { a, b, p })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, WeightsError> {
        Self::new(Law::Uniform { lo, hi })
    }

    pub fn exponential(rate: f64) -> Result<Self, WeightsError> {
        Self::new(Law::Exponential { rate })
    }

    pub fn geometric(q: f64) -> Result<Self, WeightsError> {
        Self::new(Law::Geometric { q })
    }

    /// Point mass at `c`, expressed as a degenerate Bernoulli law.
    pub fn point_mass(c: f64) -> Result<Self, WeightsError> {
        Self::new(Law::Bernoulli { a: c, b: c, p: 0.5 })
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn inf_support(&self) -> f64 {
        self.inf_support
    }

    /// `F(x) = P(t <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match &self.law {
            Law::Bernoulli { a, b, p } => {
                if x >= *b {
                    1.0
                } else if x >= *a {
                    1.0 - p
                } else {
                    0.0
                }
            }
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Law::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Law::Geometric { q } => {
                if x < 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    1.0 - q.powf(x.floor() + 1.0)
                }
            }
            Law::Table { points } => {
                let i = points.partition_point(|(px, _)| *px <= x);
                if i == 0 {
                    0.0
                } else {
                    points[i - 1].1
                }
            }
        }
    }

    /// Mass of the atom at `x`, `F(x) - F(x-)`.
    pub fn atom_mass(&self, x: f64) -> f64 {
        match &self.law {
            Law::Uniform { .. } | Law::Exponential { .. } => 0.0,
            Law::Bernoulli { a, b, p } => {
                let mut m = 0.0;
                if x == *a {
                    m += 1.0 - p;
                }
                if x == *b {
                    m += p;
                }
                m
            }
            Law::Geometric { q } => {
                if x >= 0.0 && x.fract() == 0.0 && x.is_finite() {
                    (1.0 - q) * q.powf(x)
                } else {
                    0.0
                }
            }
            Law::Table { points } => match points.binary_search_by(|(px, _)| px.total_cmp(&x)) {
                Ok(i) => points[i].1 - if i == 0 { 0.0 } else { points[i - 1].1 },
                Err(_) => 0.0,
            },
        }
    }

    /// Mass of the atom at zero; all mass lies on `[0, inf)` so this is `F(0)`.
    pub fn atom_at_zero(&self) -> f64 {
        self.cdf(0.0)
    }

    /// `F^{-1}(y) = inf{x : F(x) >= y}` for `y` in `(0, 1)`.
    pub fn inverse_cdf(&self, y: f64) -> Result<f64, WeightsError> {
        if !(y > 0.0 && y < 1.0) {
            return Err(WeightsError::QuantileLevel(y));
        }
        Ok(self.quantile(y))
    }

    /// `F^{-1}` extended to `[0, 1)` with `F^{-1}(0) = I`, the infimum of the
    /// support. This is what the sampler applies to a dyadic `U`.
    pub fn inverse_cdf_unit(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.inf_support
        } else {
            self.quantile(u.min(1.0 - f64::EPSILON / 2.0))
        }
    }

    fn quantile(&self, y: f64) -> f64 {
        match &self.law {
            Law::Bernoulli { a, b, p } => {
                if y <= 1.0 - p {
                    *a
                } else {
                    *b
                }
            }
            Law::Uniform { lo, hi } => lo + y * (hi - lo),
            Law::Exponential { rate } => -(-y).ln_1p() / rate,
            Law::Geometric { q } => {
                if *q == 0.0 {
                    return 0.0;
                }
                let r = 1.0 - y;
                if *q == 0.5 && 1.0 - r == y {
                    // F(k) = 1 - 2^{-(k+1)} >= y iff r >= 2^{-(k+1)}
                    let e = ((r.to_bits() >> 52) & 0x7ff) as i64 - 1023;
                    if e >= -1022 {
                        return (-e - 1) as f64;
                    }
                }
                // smallest k >= 0 with 1 - q^{k+1} >= y
                let guess = ((-y).ln_1p() / q.ln()).ceil() - 1.0;
                let mut k = guess.max(0.0);
                while self.cdf(k) < y {
                    k += 1.0;
                }
                while k > 0.0 && self.cdf(k - 1.0) >= y {
                    k -= 1.0;
                }
                k
            }
            Law::Table { points } => {
                let i = points.partition_point(|(_, f)| *f < y);
                points[i.min(points.len() - 1)].0
            }
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self.law,
            Law::Bernoulli { .. } | Law::Geometric { .. } | Law::Table { .. }
        )
    }

    /// Finite list of atoms `(value, probability)` when the law has finite support.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.law {
            Law::Bernoulli { a, b, p } => {
                if a == b {
                    Some(vec![(*a, 1.0)])
                } else {
                    Some(vec![(*a, 1.0 - p), (*b, *p)])
                }
            }
            Law::Table { points } => {
                let mut prev = 0.0;
                let mut out = Vec::new();
                for &(x, f) in points {
                    if f > prev {
                        out.push((x, f - prev));
                    }
                    prev = f;
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// For atomic laws, a power-of-ten scale `s` such that every support
    /// point times `s` is an integer (and small enough for exact 64-bit
    /// path sums). Passage times are then computed in integer ticks.
    pub fn integer_scale(&self) -> Option<i64> {
        const MAX_TICKS: f64 = (1u64 << 40) as f64;
        match &self.law {
            Law::Geometric { .. } => Some(1),
            Law::Bernoulli { .. } | Law::Table { .. } => {
                let atoms = self.atoms()?;
                let mut scale = 1i64;
                for _ in 0..=6 {
                    let ok = atoms.iter().all(|(x, _)| {
                        let v = x * scale as f64;
                        (v - v.round()).abs() <= 1e-9 * v.abs().max(1.0) && v <= MAX_TICKS
                    });
                    if ok {
                        return Some(scale);
                    }
                    scale *= 10;
                }
                None
            }
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            Law::Uniform { lo, hi } => 0.5 * (lo + hi),
            Law::Exponential { rate } => 1.0 / rate,
            Law::Geometric { q } => q / (1.0 - q),
            _ => self.atoms().expect("finite support").iter().map(|(x, p)| x * p).sum(),
        }
    }

    /// `E t^2`.
    pub fn second_moment(&self) -> f64 {
        match &self.law {
            Law::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            Law::Exponential { rate } => 2.0 / (rate * rate),
            Law::Geometric { q } => q * (1.0 + q) / ((1.0 - q) * (1.0 - q)),
            _ => self
                .atoms()
                .expect("finite support")
                .iter()
                .map(|(x, p)| x * x * p)
                .sum(),
        }
    }

    /// Whether `E[t^2 log_2^+ t] < inf`. Every built-in law has all moments,
    /// so this is always true; it is kept as an explicit, documented fact.
    pub fn has_log_second_moment(&self) -> bool {
        true
    }

    /// Check `mu({0}) < p_c(d)`, the condition under which first-passage
    /// times grow linearly. For `d >= 3` the threshold is a numerical estimate.
    pub fn validate_for_fpp(&self, dim: usize) -> Result<(), WeightsError> {
        let pc = critical_probability(dim);
        let mass = self.atom_at_zero();
        if dim >= 3 && mass > 0.0 {
            log::warn!("atom-at-zero check in d = {dim} uses an approximate p_c = {pc}");
        }
        if mass >= pc || pc.is_nan() {
            return Err(WeightsError::AtomAtZero { mass, dim, pc });
        }
        Ok(())
    }
}

impl fmt::Display for DistributionSpec {
    /// The `name:param,param,...` grammar of the config files.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.law {
            Law::Bernoulli { a, b, p } => write!(f, "bernoulli:{a},{b},{p}"),
            Law::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Law::Exponential { rate } => write!(f, "exponential:{rate}"),
            Law::Geometric { q } => write!(f, "geometric:{q}"),
            Law::Table { points } => {
                write!(f, "table:")?;
                for (i, (x, p)) in points.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x},{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = WeightsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| WeightsError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (name, params) = s.trim().split_once(':').ok_or_else(|| err("expected name:params"))?;
        let params: Vec<f64> = params
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(&e.to_string()))?;
        let want = |k: usize| {
            if params.len() == k {
                Ok(())
            } else {
                Err(err(&format!("expected {k} parameters, got {}", params.len())))
            }
        };
        let law = match name.trim().to_ascii_lowercase().as_str() {
            "bernoulli" => {
                want(3)?;
                Law::Bernoulli {
                    a: params[0],
                    b: params[1],
                    p: params[2],
                }
            }
            "uniform" => {
                want(2)?;
                Law::Uniform {
                    lo: params[0],
                    hi: params[1],
                }
            }
            "exponential" | "exp" => {
                want(1)?;
                Law::Exponential { rate: params[0] }
            }
            "geometric" => {
                want(1)?;
                Law::Geometric { q: params[0] }
            }
            "table" => {
                if params.is_empty() || !params.len().is_multiple_of(2) {
                    return Err(err("table expects x,F pairs"));
                }
                Law::Table {
                    points: params.chunks(2).map(|c| (c[0], c[1])).collect(),
                }
            }
            other => return Err(err(&format!("unknown distribution {other:?}"))),
        };
        DistributionSpec::new(law)
    }
}

/// The dyadic value `sum_j bits[j-1] 2^{-j}`.
pub fn dyadic_value(bits: &[bool]) -> f64 {
    bits.iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| 0.5f64.powi(i as i32 + 1))
        .sum()
}

/// `U = sum_{j<=depth} w_j 2^{-j}` from the top bits of `word`.
#[inline]
pub(crate) fn dyadic_unit(word: u64, depth: u32) -> f64 {
    mantissa_of(word, depth) as f64 * 0.5f64.powi(depth as i32)
}

/// Top `depth` bits of a 64-bit word as a dyadic mantissa.
#[inline]
fn mantissa_of(word: u64, depth: u32) -> u64 {
    if depth == 64 {
        word
    } else {
        word >> (64 - depth)
    }
}

#[inline]
fn mantissa_value(m: u64, depth: u32) -> f64 {
    m as f64 * 0.5f64.powi(depth as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipDirection {
    /// Set the bit to 1.
    Up,
    /// Set the bit to 0.
    Down,
}

/// Per-edge dyadic codes `(w_{e,1}, ..., w_{e,J})`, stored as `J`-bit
/// mantissas with `w_{e,1}` the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicCode {
    depth: u32,
    mantissas: Vec<u64>,
}

impl DyadicCode {
    pub fn from_mantissas(depth: u32, mantissas: Vec<u64>) -> Result<Self, WeightsError> {
        if !(1..=64).contains(&depth) {
            return Err(WeightsError::Depth(depth));
        }
        Ok(DyadicCode { depth, mantissas })
    }

    /// The codes the sampler uses for `(region, seed)`.
    pub fn sample(region: &Region, seed: u64, depth: u32) -> Result<Self, WeightsError> {
        if !(1..=64).contains(&depth) {
            return Err(WeightsError::Depth(depth));
        }
        let mantissas = region
            .enumerate_edges()
            .iter()
            .map(|e| mantissa_of(mix64(seed, e.lattice_key()), depth))
            .collect();
        Ok(DyadicCode { depth, mantissas })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    /// `U_e` in `[0, 1 - 2^{-J}]`.
    pub fn value(&self, edge: usize) -> f64 {
        mantissa_value(self.mantissas[edge], self.depth)
    }

    pub fn bit(&self, edge: usize, j: u32) -> Result<bool, WeightsError> {
        self.check_j(j)?;
        Ok((self.mantissas[edge] >> (self.depth - j)) & 1 == 1)
    }

    fn check_j(&self, j: u32) -> Result<(), WeightsError> {
        if j == 0 || j > self.depth {
            Err(WeightsError::BitIndex { j, depth: self.depth })
        } else {
            Ok(())
        }
    }

    /// Code with bit `j` of `edge` forced to 1 (`Up`) or 0 (`Down`).
    pub fn flipped(&self, edge: usize, j: u32, dir: FlipDirection) -> Result<Self, WeightsError> {
        self.check_j(j)?;
        let mask = 1u64 << (self.depth - j);
        let mut out = self.clone();
        match dir {
            FlipDirection::Up => out.mantissas[edge] |= mask,
            FlipDirection::Down => out.mantissas[edge] &= !mask,
        }
        Ok(out)
    }

    /// `F^{-1}(U_e)` after forcing bit `j` of `edge`.
    pub fn flipped_weight(
        &self,
        spec: &DistributionSpec,
        edge: usize,
        j: u32,
        dir: FlipDirection,
    ) -> Result<f64, WeightsError> {
        let code = self.flipped(edge, j, dir)?;
        Ok(spec.inverse_cdf_unit(code.value(edge)))
    }

    pub fn weights(&self, spec: &DistributionSpec) -> Vec<f64> {
        (0..self.len()).map(|e| spec.inverse_cdf_unit(self.value(e))).collect()
    }
}

/// `w = 1 - log F(t)`.
pub fn log_cdf_weight(spec: &DistributionSpec, t: f64) -> Result<f64, WeightsError> {
    let f = spec.cdf(t);
    if f <= 0.0 {
        return Err(WeightsError::BelowSupport(t));
    }
    Ok(1.0 - f.ln())
}

/// The laws exercised by the test suites and the tail check.
pub fn builtin_specs() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::bernoulli(1.0, 2.0, 0.5).expect("valid"),
        DistributionSpec::bernoulli(0.0, 1.0, 0.7).expect("valid"),
        DistributionSpec::uniform(0.0, 1.0).expect("valid"),
        DistributionSpec::uniform(0.5, 3.0).expect("valid"),
        DistributionSpec::exponential(1.0).expect("valid"),
        DistributionSpec::exponential(2.5).expect("valid"),
        DistributionSpec::geometric(0.5).expect("valid"),
        DistributionSpec::new(Law::Table {
            points: vec![(0.5, 0.2), (1.0, 0.7), (4.0, 1.0)],
        })
        .expect("valid"),
    ]
}

/// Empirical `P(w >= r)` against `e^{1-r}` for one threshold.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TailPoint {
    pub r: f64,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard deviation of the empirical frequency at the bound.
    pub sigma: f64,
    /// `empirical <= bound + 4 sigma`.
    pub holds: bool,
}

/// Tail of `w = 1 - log F(t)` over `samples` draws of `t`.
pub fn log_weight_tail(spec: &DistributionSpec, samples: u64, seed: u64, rs: &[f64]) -> Vec<TailPoint> {
    let ws: Vec<f64> = (0..samples)
        .map(|i| {
            let t = spec.inverse_cdf_unit(dyadic_unit(mix64(seed, i), DEFAULT_DYADIC_BITS));
            1.0 - spec.cdf(t).ln()
        })
        .collect();
    rs.iter()
        .map(|&r| {
            let empirical = ws.iter().filter(|&&w| w >= r).count() as f64 / samples as f64;
            let bound = (1.0 - r).exp().min(1.0);
            let sigma = (bound * (1.0 - bound) / samples as f64).sqrt();
            TailPoint {
                r,
                empirical,
                bound,
                sigma,
                holds: empirical <= bound + 4.0 * sigma,
            }
        })
        .collect()
}

/// An i.i.d. weight configuration on a finite region.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    region: Region,
    weights: Vec<f64>,
    seed: u64,
    spec: DistributionSpec,
}

impl WeightField {
    /// Sample with the default dyadic depth.
    pub fn sample(spec: &DistributionSpec, region: &Region, seed: u64) -> Self {
        Self::sample_with_depth(spec, region, seed, DEFAULT_DYADIC_BITS).expect("default depth is valid")
    }

    pub fn sample_with_depth(
        spec: &DistributionSpec,
        region: &Region,
        seed: u64,
        depth: u32,
    ) -> Result<Self, WeightsError> {
        if !(1..=64).contains(&depth) {
            return Err(WeightsError::Depth(depth));
        }
        let mut weights = Vec::with_capacity(region.edge_count());
        region.for_each_edge(|e| {
            weights.push(spec.inverse_cdf_unit(dyadic_unit(mix64(seed, e.lattice_key()), depth)));
        });
        Ok(WeightField {
            region: *region,
            weights,
            seed,
            spec: spec.clone(),
        })
    }

    /// Sample after checking the atom-at-zero condition for first passage.
    pub fn sample_for_fpp(spec: &DistributionSpec, region: &Region, seed: u64) -> Result<Self, WeightsError> {
        spec.validate_for_fpp(region.dim())?;
        Ok(Self::sample(spec, region, seed))
    }

    /// Explicit weights (seed recorded as 0).
    pub fn from_weights(spec: &DistributionSpec, region: &Region, weights: Vec<f64>) -> Result<Self, WeightsError> {
        if weights.len() != region.edge_count() {
            return Err(WeightsError::Length {
                expected: region.edge_count(),
                got: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(WeightsError::BadWeight(w));
        }
        Ok(WeightField {
            region: *region,
            weights,
            seed: 0,
            spec: spec.clone(),
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// Copy with one weight replaced.
    pub fn with_weight(&self, edge: usize, t: f64) -> Result<Self, WeightsError> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(WeightsError::BadWeight(t));
        }
        let mut out = self.clone();
        out.weights[edge] = t;
        Ok(out)
    }

    /// Copy with every weight multiplied by `c > 0`, tagged with the scaled law.
    pub fn scaled(&self, c: f64) -> Result<Self, WeightsError> {
        let weights: Vec<f64> = self.weights.iter().map(|w| w * c).collect();
        let spec = match self.spec.law() {
            Law::Bernoulli { a, b, p } => DistributionSpec::bernoulli(a * c, b * c, *p)?,
            Law::Uniform { lo, hi } => DistributionSpec::uniform(lo * c, hi * c)?,
            Law::Exponential { rate } => DistributionSpec::exponential(rate / c)?,
            Law::Table { points } => DistributionSpec::new(Law::Table {
                points: points.iter().map(|(x, f)| (x * c, *f)).collect(),
            })?,
            Law::Geometric { .. } => {
                return Err(WeightsError::InvalidLaw(
                    "geometric law is not closed under scaling".to_string(),
                ))
            }
        };
        Self::from_weights(&spec, &self.region, weights)
    }
}
