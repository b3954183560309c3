//! Numerical toolkit for GL(3)×GL(2) subconvexity machinery: exact character
//! and exponential sums, the delta method, Voronoi-type integral transforms,
//! oscillatory integrals, and exponent bookkeeping.

pub mod arith;
pub mod charsum;
pub mod coeffs;
pub mod deltamethod;
pub mod ledger;
pub mod oscint;
pub mod special;
pub mod suite;
pub mod transforms;
pub mod weights;
