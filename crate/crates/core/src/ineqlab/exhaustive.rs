//! Passage time on a small box as an exact function of Bernoulli edge bits.

use serde::Serialize;

use super::checks::{efron_stein_check, falik_samorodnitsky_check, EsCheck, FsCheck};
use super::hypercube::HypercubeFunction;
use super::IneqError;
use crate::fpp::Engine;
use crate::lattice::{Region, Site};
use crate::weights::{DistributionSpec, Law, WeightField};

/// Enumeration limit, `2^20` configurations.
pub const MAX_EDGES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FppExhaustiveCheck {
    pub edges: usize,
    pub configs: usize,
    pub mean: f64,
    pub variance: f64,
    pub es: EsCheck,
    pub fs: FsCheck,
    pub holds: bool,
}

/// `T(src, dst)` inside `region` for every Bernoulli configuration, with
/// edge `e` set to the upper atom when bit `e` is 1.
pub fn fpp_exhaustive_check(
    region: &Region,
    src: &Site,
    dst: &Site,
    spec: &DistributionSpec,
) -> Result<FppExhaustiveCheck, IneqError> {
    let Law::Bernoulli { a, b, p } = *spec.law() else {
        return Err(IneqError::Parameters("exhaustive check needs a Bernoulli law".into()));
    };
    let edges = region.edge_count();
    if edges > MAX_EDGES {
        return Err(IneqError::TooManyEdges { edges, max: MAX_EDGES });
    }
    let engine = Engine::new(region);
    let configs = 1usize << edges;
    let mut values = Vec::with_capacity(configs);
    for x in 0..configs {
        let w = (0..edges).map(|e| if x >> e & 1 == 1 { b } else { a }).collect();
        let field = WeightField::from_weights(spec, region, w).map_err(|e| IneqError::Parameters(e.to_string()))?;
        values.push(engine.passage_time_only(&field, src, dst)?.0);
    }
    // a degenerate law still gets a valid product measure
    let bias = if a == b || !(p > 0.0 && p < 1.0) { 0.5 } else { p };
    let f = HypercubeFunction::with_bias(edges, values, bias)?;
    let es = efron_stein_check(&f);
    let fs = falik_samorodnitsky_check(&f);
    Ok(FppExhaustiveCheck {
        edges,
        configs,
        mean: f.mean(),
        variance: f.variance(),
        holds: es.holds && fs.holds,
        es,
        fs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(hi: &[i64]) -> Region {
        Region::boxed(Site::origin(2), Site::new(hi).unwrap()).unwrap()
    }

    #[test]
    fn unit_square() {
        let r = square(&[1, 1]);
        let spec = DistributionSpec::bernoulli(1.0, 2.0, 0.5).unwrap();
        let c = fpp_exhaustive_check(&r, &Site::origin(2), &Site::new(&[1, 1]).unwrap(), &spec).unwrap();
        assert_eq!(c.edges, 4);
        assert_eq!(c.configs, 16);
        // min of two sums of two fair {1,2} bits: P(2) = 7/16, P(3) = 8/16, P(4) = 1/16
        assert!((c.mean - (14.0 + 24.0 + 4.0) / 16.0).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn seven_edges_and_point_mass() {
        let r = square(&[2, 1]);
        let dst = Site::new(&[2, 1]).unwrap();
        let c = fpp_exhaustive_check(
            &r,
            &Site::origin(2),
            &dst,
            &DistributionSpec::bernoulli(0.0, 1.0, 0.3).unwrap(),
        )
        .unwrap();
        assert_eq!(c.edges, 7);
        assert!(c.holds && c.variance > 0.0);
        let pm = fpp_exhaustive_check(&r, &Site::origin(2), &dst, &DistributionSpec::point_mass(1.0).unwrap()).unwrap();
        assert_eq!(pm.variance, 0.0);
        assert!(pm.fs.vacuous && pm.holds);
    }

    #[test]
    fn rejects_large_or_continuous() {
        let big = square(&[3, 3]);
        let spec = DistributionSpec::bernoulli(1.0, 2.0, 0.5).unwrap();
        assert!(matches!(
            fpp_exhaustive_check(&big, &Site::origin(2), &Site::new(&[3, 3]).unwrap(), &spec),
            Err(IneqError::TooManyEdges { .. })
        ));
        let r = square(&[1, 1]);
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        assert!(fpp_exhaustive_check(&r, &Site::origin(2), &Site::new(&[1, 1]).unwrap(), &u).is_err());
    }
}
