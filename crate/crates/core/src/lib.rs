//! Unbounded k-nearest-neighbor search by iterative radius expansion.
//!
//! The search reduces fixed-radius neighbor queries to point-in-sphere
//! intersection tests: a sphere of the current search radius is expanded
//! around every data point, an AABB tree is built over the spheres, and a
//! query point "hits" exactly the spheres of its neighbors within that
//! radius. The unbounded variant runs this fixed-radius search in rounds,
//! pruning queries that have found their `k` neighbors and doubling the
//! radius (with an in-place tree refit) until none remain.
//!
//! Modules:
//! - [`geom`]: points, spheres, boxes, squared distances.
//! - [`bvh`]: the sphere tree — deterministic build, in-place refit,
//!   instrumented point queries.
//! - [`search`]: the multi-round search, its bounded variant, the
//!   single-pass fixed-radius baseline, and start-radius sampling.
//! - [`oracle`]: brute-force references used for verification and for the
//!   baseline radius (`maxDist`, percentile radii).
//! - [`dataset`]: CSV loading and synthetic generators.
//! - [`verify`]: tie-aware comparison of search results against the oracle.

pub mod bvh;
pub mod dataset;
pub mod error;
pub mod geom;
pub mod oracle;
pub mod search;
pub mod verify;

pub use bvh::{Bvh, TraversalCounters};
pub use dataset::PointSet;
pub use error::Error;
pub use search::{KnnResult, SearchConfig, SearchRound};
