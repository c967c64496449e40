//! Binary bounding volume hierarchy over equal-radius spheres.
//!
//! The tree is built once over the sphere centers; its topology never
//! depends on the radius, so growing the radius is an in-place refit of
//! the bounds rather than a rebuild. Nodes live in one contiguous array
//! with both children at higher indices than their parent, which makes the
//! refit a single reverse (bottom-up) pass. Traversal is iterative with an
//! explicit stack; it tests interior node bounds, then each reached
//! primitive's own tight box, and runs the exact sphere test only on box
//! hits. Counters record every box test and every sphere test.

use crate::error::Error;
use crate::geom::{squared_distance, Aabb, Point3};

pub const DEFAULT_LEAF_CAPACITY: usize = 4;

/// Counts of the two intersection-test kinds performed while querying.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TraversalCounters {
    /// Box containment tests: interior node bounds plus each reached
    /// primitive's own tight box.
    pub aabb_tests: u64,
    /// Sphere tests, performed only for primitives whose own box contains
    /// the query. Independent of the leaf capacity.
    pub sphere_tests: u64,
}

impl TraversalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn merge(&mut self, other: TraversalCounters) {
        self.aabb_tests += other.aabb_tests;
        self.sphere_tests += other.sphere_tests;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Internal { left: u32, right: u32 },
    /// Range into the primitive order array.
    Leaf { start: u32, count: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BvhNode {
    bounds: Aabb,
    kind: NodeKind,
}

impl BvhNode {
    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }
}

/// The sphere tree. Holds a borrowed view of the dataset's points as the
/// sphere centers plus the single global radius shared by every sphere.
pub struct Bvh<'a> {
    nodes: Vec<BvhNode>,
    /// Permutation of 0..n; each leaf owns a disjoint range of it.
    order: Vec<u32>,
    centers: &'a [Point3],
    radius: f64,
    leaf_capacity: usize,
}

impl<'a> Bvh<'a> {
    /// Builds the tree over spheres of `radius` centered at `centers`.
    ///
    /// Construction is deterministic for a fixed input order: splits take
    /// the median along the longest axis of the node's centroid bounds,
    /// with (coordinate, index) ordering so ties cannot reorder points.
    pub fn build(centers: &'a [Point3], radius: f64, leaf_capacity: usize) -> Result<Self, Error> {
        if centers.is_empty() {
            return Err(Error::EmptyDataset);
        }
        assert!(
            radius.is_finite() && radius >= 0.0,
            "radius must be finite and non-negative"
        );
        assert!(leaf_capacity >= 1, "leaf capacity must be at least 1");

        let mut order: Vec<u32> = (0..centers.len() as u32).collect();
        let mut builder = Builder {
            centers,
            radius,
            leaf_capacity,
            nodes: Vec::with_capacity(2 * centers.len().div_ceil(leaf_capacity)),
        };
        builder.build_range(&mut order, 0);
        Ok(Self {
            nodes: builder.nodes,
            order,
            centers,
            radius,
            leaf_capacity,
        })
    }

    /// Grows every sphere to `new_radius` and recomputes bounds in place.
    ///
    /// Topology, child links, and the primitive order are untouched; leaf
    /// bounds are recomputed from the centers at the new radius and
    /// internal bounds bubble up bottom-up. Shrinking is rejected.
    pub fn refit(&mut self, new_radius: f64) -> Result<(), Error> {
        if new_radius.is_nan() || new_radius < self.radius {
            return Err(Error::ShrinkingRefit {
                new: new_radius,
                current: self.radius,
            });
        }
        self.radius = new_radius;
        for i in (0..self.nodes.len()).rev() {
            self.nodes[i].bounds = match self.nodes[i].kind {
                NodeKind::Leaf { start, count } => leaf_bounds(
                    self.centers,
                    &self.order[start as usize..(start + count) as usize],
                    new_radius,
                ),
                // Children sit at higher indices, already refit this pass.
                NodeKind::Internal { left, right } => self.nodes[left as usize]
                    .bounds
                    .union(&self.nodes[right as usize].bounds),
            };
        }
        Ok(())
    }

    /// Visits every primitive whose sphere (at the current radius) contains
    /// `q`, passing the primitive index and its squared distance to `q`.
    ///
    /// Box tests (interior nodes and each reached primitive's own tight
    /// box) bump `aabb_tests`; the sphere test runs, and bumps
    /// `sphere_tests`, only for primitives whose own box contains `q`.
    /// Subtrees whose bounds exclude `q` are skipped whole.
    pub fn query_point(
        &self,
        q: Point3,
        counters: &mut TraversalCounters,
        mut visit: impl FnMut(u32, f64),
    ) {
        let r = self.radius;
        let r2 = r * r;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(index) = stack.pop() {
            let node = &self.nodes[index as usize];
            counters.aabb_tests += 1;
            if !node.bounds.contains(q) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &prim in &self.order[start as usize..(start + count) as usize] {
                        let c = self.centers[prim as usize];
                        counters.aabb_tests += 1;
                        // The primitive's own box, same arithmetic as
                        // Aabb::of_sphere + contains.
                        if q.x < c.x - r
                            || q.x > c.x + r
                            || q.y < c.y - r
                            || q.y > c.y + r
                            || q.z < c.z - r
                            || q.z > c.z + r
                        {
                            continue;
                        }
                        counters.sphere_tests += 1;
                        let d2 = squared_distance(q, c);
                        if d2 <= r2 {
                            visit(prim, d2);
                        }
                    }
                }
                NodeKind::Internal { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }

    pub fn current_radius(&self) -> f64 {
        self.radius
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn primitive_order(&self) -> &[u32] {
        &self.order
    }
}

struct Builder<'a> {
    centers: &'a [Point3],
    radius: f64,
    leaf_capacity: usize,
    nodes: Vec<BvhNode>,
}

impl Builder<'_> {
    /// Builds the subtree over `order` (a sub-slice of the full permutation
    /// starting at offset `start`) and returns its node index. The parent
    /// is pushed before either child, so children always have higher
    /// indices.
    fn build_range(&mut self, order: &mut [u32], start: u32) -> u32 {
        let index = self.nodes.len() as u32;
        if order.len() <= self.leaf_capacity {
            // Canonical in-leaf order, so traversal order is independent of
            // how the selection algorithm left the slice.
            order.sort_unstable();
            self.nodes.push(BvhNode {
                bounds: leaf_bounds(self.centers, order, self.radius),
                kind: NodeKind::Leaf {
                    start,
                    count: order.len() as u32,
                },
            });
            return index;
        }

        let axis = centroid_bounds(self.centers, order).longest_axis();
        let mid = order.len() / 2;
        let centers = self.centers;
        order.select_nth_unstable_by(mid, |&a, &b| {
            centers[a as usize]
                .coord(axis)
                .total_cmp(&centers[b as usize].coord(axis))
                .then(a.cmp(&b))
        });

        self.nodes.push(BvhNode {
            bounds: Aabb::new(Point3::default(), Point3::default()),
            kind: NodeKind::Internal { left: 0, right: 0 },
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = self.build_range(lo, start);
        let right = self.build_range(hi, start + mid as u32);
        self.nodes[index as usize] = BvhNode {
            bounds: self.nodes[left as usize]
                .bounds
                .union(&self.nodes[right as usize].bounds),
            kind: NodeKind::Internal { left, right },
        };
        index
    }
}

/// Bounds of the centers listed in `prims`, inflated by `radius` per axis.
/// Shared by build and refit so a refit to the same radius reproduces the
/// same bits.
fn leaf_bounds(centers: &[Point3], prims: &[u32], radius: f64) -> Aabb {
    let bounds = centroid_bounds(centers, prims);
    Aabb::new(
        Point3::new(
            bounds.min.x - radius,
            bounds.min.y - radius,
            bounds.min.z - radius,
        ),
        Point3::new(
            bounds.max.x + radius,
            bounds.max.y + radius,
            bounds.max.z + radius,
        ),
    )
}

fn centroid_bounds(centers: &[Point3], prims: &[u32]) -> Aabb {
    let first = centers[prims[0] as usize];
    let mut min = first;
    let mut max = first;
    for &i in &prims[1..] {
        let p = centers[i as usize];
        min = Point3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
        max = Point3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
    }
    Aabb::new(min, max)
}
