//! Simulation laboratory for first- and last-passage percolation.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] finite boxes and tori in `Z^d`, dense edge indexing, L1 balls.
//! * [`weights`] edge-weight laws, counter-based sampling, the dyadic bit encoding.
//! * [`fpp`] passage times, geodesic DAGs, the intersection of all geodesics,
//!   edge criticality, torus winding loops and the averaged passage time.
//! * [`lpp`] directed last-passage percolation on the square.
//! * [`estimators`] the Monte Carlo sweep engine and every statistical reduction.
//! * [`ineqlab`] exact enumeration checks of the concentration inequalities.
//! * [`config`], [`store`] and [`report`] the on-disk formats used by the CLI.

pub mod config;
pub mod estimators;
pub mod fpp;
pub mod ineqlab;
pub mod lattice;
pub mod lpp;
pub mod numeric;
pub mod report;
pub mod rng;
pub mod store;
pub mod weights;

pub use lattice::{EdgeId, Region, Site};
pub use weights::{DistributionSpec, Law, WeightField};
