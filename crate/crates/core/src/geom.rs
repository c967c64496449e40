//! Scalar and geometric primitives shared by every other module.
//!
//! Distances are carried as squared values internally; square roots are
//! taken only where results leave the library. Containment tests are
//! boundary-inclusive everywhere: a point at distance exactly `r` from a
//! sphere center counts as inside, and a point on a box face counts as
//! contained. Keeping one convention lets the tree traversal, the search
//! loop, and the brute-force oracle agree exactly.

/// A point in dataset units. 2D inputs are lifted with `z = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Coordinate along `axis` (0 = x, 1 = y, 2 = z).
    pub fn coord(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }
}

/// Squared Euclidean distance between two points.
pub fn squared_distance(a: Point3, b: Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

/// The smallest non-negative float whose square is at least `d2`.
///
/// All distances this library reports come through here. Containment is
/// decided on squared values (`d2 <= r * r`), and a plain `sqrt` can round
/// low enough that squaring it back excludes the very point that defined
/// it; feeding a reported distance back in as a radius must keep that
/// point inside. At most one ulp above the rounded square root.
pub fn inclusive_sqrt(d2: f64) -> f64 {
    let mut r = d2.sqrt();
    while r * r < d2 {
        r = r.next_up();
    }
    r
}

/// A sphere expanded around a data point. Within one search round every
/// sphere shares the same global radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub center: Point3,
    pub radius: f64,
}

impl Sphere {
    pub const fn new(center: Point3, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// Boundary-inclusive sphere containment: distance exactly `radius` is in.
pub fn point_in_sphere(p: Point3, s: Sphere) -> bool {
    squared_distance(p, s.center) <= s.radius * s.radius
}

/// An axis-aligned bounding box, `min.d <= max.d` on every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub const fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    /// The tight box around a sphere: `[center - r, center + r]` per axis.
    pub fn of_sphere(s: Sphere) -> Self {
        let r = s.radius;
        Self {
            min: Point3::new(s.center.x - r, s.center.y - r, s.center.z - r),
            max: Point3::new(s.center.x + r, s.center.y + r, s.center.z + r),
        }
    }

    /// Boundary-inclusive containment test.
    pub fn contains(&self, p: Point3) -> bool {
        self.min.x <= p.x
            && p.x <= self.max.x
            && self.min.y <= p.y
            && p.y <= self.max.y
            && self.min.z <= p.z
            && p.z <= self.max.z
    }

    /// True when `other` lies entirely inside `self` (boundary-inclusive).
    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: Point3::new(
                self.min.x.min(other.min.x),
                self.min.y.min(other.min.y),
                self.min.z.min(other.min.z),
            ),
            max: Point3::new(
                self.max.x.max(other.max.x),
                self.max.y.max(other.max.y),
                self.max.z.max(other.max.z),
            ),
        }
    }

    /// Index of the longest side (0 = x, 1 = y, 2 = z); ties go to the
    /// lower axis.
    pub fn longest_axis(&self) -> usize {
        let dx = self.max.x - self.min.x;
        let dy = self.max.y - self.min.y;
        let dz = self.max.z - self.min.z;
        if dx >= dy && dx >= dz {
            0
        } else if dy >= dz {
            1
        } else {
            2
        }
    }
}

/// A query launched from a data point in the sphere-intersection reduction:
/// a ray of infinitesimal length whose swept segment is, for intersection
/// purposes, the single point `origin`. Traversal therefore implements
/// point containment; the type exists as vocabulary for that reduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryRay {
    pub origin: Point3,
}

impl QueryRay {
    /// Fixed direction; it has no geometric effect at zero length.
    pub const DIRECTION: [f64; 3] = [0.0, 0.0, 1.0];
    /// Upper end of the ray interval `[0, T_MAX]`.
    pub const T_MAX: f64 = f64::MIN_POSITIVE;

    pub const fn new(origin: Point3) -> Self {
        Self { origin }
    }
}
