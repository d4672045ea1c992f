//! Lattice geometry: points, neighbour vectors, point groups and canonical
//! forms of point sets.
//!
//! Three lattices are supported:
//!
//! - `cubic`: the simple cubic lattice `Z^3` with 6 unit neighbours.
//! - `fcc`: the face-centred cubic lattice, embedded as the integer points
//!   with even coordinate sum. Its 12 neighbour vectors are the sign and
//!   permutation variants of `(1, 1, 0)`.
//! - `sqr`: the 2D square lattice (points with `z == 0`). It exists as a cheap
//!   test lattice and is not one of the 3D models the toolkit targets.
//!
//! Coordinates are bounded to `(-2^15, 2^15)` so that points can be packed
//! into a single order-preserving `u64` key (see [`Point::pack`]).

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exclusive bound on the absolute value of every coordinate.
pub const COORD_LIMIT: i32 = 1 << 15;

const PACK_OFFSET: i64 = 1 << 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("point {0} is not a member of the {1} lattice")]
    NotMember(Point, LatticeKind),
    #[error("point {0} is outside the supported coordinate range (|c| < {COORD_LIMIT})")]
    OutOfRange(Point),
    #[error("point set is empty")]
    EmptySet,
    #[error("unknown lattice `{0}` (expected cubic, fcc or sqr)")]
    UnknownLattice(String),
}

/// An integer point of 3-space.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Point {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Point { x, y, z }
    }

    pub fn in_range(self) -> bool {
        self.x.abs() < COORD_LIMIT && self.y.abs() < COORD_LIMIT && self.z.abs() < COORD_LIMIT
    }

    /// Packs the point into a `u64` whose natural order equals the
    /// lexicographic `(x, y, z)` order. Requires [`Point::in_range`].
    #[inline]
    pub fn pack(self) -> u64 {
        debug_assert!(self.in_range(), "{self} out of packing range");
        (((self.x as i64 + PACK_OFFSET) as u64) << 32)
            | (((self.y as i64 + PACK_OFFSET) as u64) << 16)
            | ((self.z as i64 + PACK_OFFSET) as u64)
    }

    #[inline]
    pub fn unpack(key: u64) -> Self {
        Point {
            x: (((key >> 32) & 0xffff) as i64 - PACK_OFFSET) as i32,
            y: (((key >> 16) & 0xffff) as i64 - PACK_OFFSET) as i32,
            z: ((key & 0xffff) as i64 - PACK_OFFSET) as i32,
        }
    }

    /// Offset to add to a packed key to move it by `self` (wrapping arithmetic).
    #[inline]
    pub fn packed_delta(self) -> u64 {
        ((self.x as i64) << 32).wrapping_add((self.y as i64) << 16).wrapping_add(self.z as i64)
            as u64
    }

    pub fn min(self, other: Point) -> Point {
        Point::new(self.x.min(other.x), self.y.min(other.y), self.z.min(other.z))
    }

    pub fn max(self, other: Point) -> Point {
        Point::new(self.x.max(other.x), self.y.max(other.y), self.z.max(other.z))
    }

    pub fn coord_sum(self) -> i64 {
        self.x as i64 + self.y as i64 + self.z as i64
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Cubic,
    Fcc,
    Sqr,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 3] = [LatticeKind::Cubic, LatticeKind::Fcc, LatticeKind::Sqr];

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Cubic => "cubic",
            LatticeKind::Fcc => "fcc",
            LatticeKind::Sqr => "sqr",
        }
    }

    /// The shared, lazily built descriptor for this lattice.
    pub fn lattice(self) -> &'static Lattice {
        static CUBIC: OnceLock<Lattice> = OnceLock::new();
        static FCC: OnceLock<Lattice> = OnceLock::new();
        static SQR: OnceLock<Lattice> = OnceLock::new();
        let cell = match self {
            LatticeKind::Cubic => &CUBIC,
            LatticeKind::Fcc => &FCC,
            LatticeKind::Sqr => &SQR,
        };
        cell.get_or_init(|| Lattice::build(self))
    }

    /// Whether the neighbour graph is bipartite under coordinate-sum parity.
    pub fn is_bipartite(self) -> bool {
        matches!(self, LatticeKind::Cubic | LatticeKind::Sqr)
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cubic" => Ok(LatticeKind::Cubic),
            "fcc" => Ok(LatticeKind::Fcc),
            "sqr" => Ok(LatticeKind::Sqr),
            other => Err(LatticeError::UnknownLattice(other.to_string())),
        }
    }
}

/// A signed permutation matrix: `apply(p)[k] = sign[k] * p[perm[k]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymOp {
    perm: [u8; 3],
    sign: [i8; 3],
}

impl SymOp {
    pub const IDENTITY: SymOp = SymOp { perm: [0, 1, 2], sign: [1, 1, 1] };

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        let c = [p.x, p.y, p.z];
        Point::new(
            self.sign[0] as i32 * c[self.perm[0] as usize],
            self.sign[1] as i32 * c[self.perm[1] as usize],
            self.sign[2] as i32 * c[self.perm[2] as usize],
        )
    }

    pub fn is_identity(&self) -> bool {
        *self == SymOp::IDENTITY
    }

    pub fn compose(&self, inner: &SymOp) -> SymOp {
        // (self ∘ inner)(p)[k] = s[k] * inner(p)[perm[k]]
        let mut perm = [0u8; 3];
        let mut sign = [0i8; 3];
        for k in 0..3 {
            let j = self.perm[k] as usize;
            perm[k] = inner.perm[j];
            sign[k] = self.sign[k] * inner.sign[j];
        }
        SymOp { perm, sign }
    }
}

/// A rigid lattice motion `p -> op(p) + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Motion {
    pub op: SymOp,
    pub shift: Point,
}

impl Motion {
    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        self.op.apply(p) + self.shift
    }

    pub fn is_identity(&self) -> bool {
        self.op.is_identity() && self.shift == Point::ORIGIN
    }
}

/// Neighbour vectors, point group and membership rule of one lattice.
#[derive(Debug)]
pub struct Lattice {
    kind: LatticeKind,
    neighbors: Vec<Point>,
    group: Vec<SymOp>,
    /// `dir_perm[g][d]` is the index of `group[g].apply(neighbors[d])`.
    dir_perm: Vec<Vec<u8>>,
}

impl Lattice {
    fn build(kind: LatticeKind) -> Lattice {
        let p = Point::new;
        let neighbors = match kind {
            // F, B, L, R, U, D
            LatticeKind::Cubic => vec![
                p(1, 0, 0),
                p(-1, 0, 0),
                p(0, 1, 0),
                p(0, -1, 0),
                p(0, 0, 1),
                p(0, 0, -1),
            ],
            LatticeKind::Sqr => vec![p(1, 0, 0), p(-1, 0, 0), p(0, 1, 0), p(0, -1, 0)],
            // FL FR FU FD BL BR BU BD LU LD RU RD
            LatticeKind::Fcc => vec![
                p(1, 1, 0),
                p(1, -1, 0),
                p(1, 0, 1),
                p(1, 0, -1),
                p(-1, 1, 0),
                p(-1, -1, 0),
                p(-1, 0, 1),
                p(-1, 0, -1),
                p(0, 1, 1),
                p(0, 1, -1),
                p(0, -1, 1),
                p(0, -1, -1),
            ],
        };
        let perms: &[[u8; 3]] = match kind {
            LatticeKind::Sqr => &[[0, 1, 2], [1, 0, 2]],
            _ => &[[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]],
        };
        let mut group = Vec::new();
        for perm in perms {
            for bits in 0..8u8 {
                if kind == LatticeKind::Sqr && bits & 4 != 0 {
                    continue;
                }
                let sign = [
                    if bits & 1 == 0 { 1 } else { -1 },
                    if bits & 2 == 0 { 1 } else { -1 },
                    if bits & 4 == 0 { 1 } else { -1 },
                ];
                group.push(SymOp { perm: *perm, sign });
            }
        }
        debug_assert!(group[0].is_identity());
        let dir_perm = group
            .iter()
            .map(|g| {
                neighbors
                    .iter()
                    .map(|&v| {
                        let img = g.apply(v);
                        neighbors.iter().position(|&w| w == img).expect("group preserves N_L")
                            as u8
                    })
                    .collect()
            })
            .collect();
        Lattice { kind, neighbors, group, dir_perm }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    /// The neighbour vector set `N_L`, in the fixed direction order used by
    /// move strings and canonical walks.
    pub fn neighbor_vectors(&self) -> &[Point] {
        &self.neighbors
    }

    pub fn coordination(&self) -> usize {
        self.neighbors.len()
    }

    /// Rotations and reflections preserving `N_L` (identity first).
    pub fn point_group(&self) -> &[SymOp] {
        &self.group
    }

    /// Permutation of direction indices induced by group element `g`.
    pub fn direction_permutation(&self, g: usize) -> &[u8] {
        &self.dir_perm[g]
    }

    pub fn direction_index(&self, v: Point) -> Option<usize> {
        self.neighbors.iter().position(|&w| w == v)
    }

    pub fn is_member(&self, p: Point) -> bool {
        match self.kind {
            LatticeKind::Cubic => true,
            LatticeKind::Fcc => p.coord_sum() % 2 == 0,
            LatticeKind::Sqr => p.z == 0,
        }
    }

    pub fn check_member(&self, p: Point) -> Result<(), LatticeError> {
        if !p.in_range() {
            return Err(LatticeError::OutOfRange(p));
        }
        if !self.is_member(p) {
            return Err(LatticeError::NotMember(p, self.kind));
        }
        Ok(())
    }

    /// Length of the shortest lattice path between two member points.
    pub fn graph_distance(&self, p: Point, q: Point) -> u32 {
        let d = p - q;
        let (x, y, z) = (d.x.unsigned_abs(), d.y.unsigned_abs(), d.z.unsigned_abs());
        match self.kind {
            LatticeKind::Cubic | LatticeKind::Sqr => x + y + z,
            LatticeKind::Fcc => x.max(y).max(z).max((x + y + z) / 2),
        }
    }

    /// `(p - q) ∈ N_L`, without membership checks.
    #[inline]
    pub fn adjacent(&self, p: Point, q: Point) -> bool {
        let d = p - q;
        let (ax, ay, az) = (d.x.abs(), d.y.abs(), d.z.abs());
        match self.kind {
            LatticeKind::Cubic => ax + ay + az == 1,
            LatticeKind::Sqr => d.z == 0 && ax + ay == 1,
            LatticeKind::Fcc => ax <= 1 && ay <= 1 && az <= 1 && ax + ay + az == 2,
        }
    }

    pub fn is_neighbor(&self, p: Point, q: Point) -> Result<bool, LatticeError> {
        self.check_member(p)?;
        self.check_member(q)?;
        Ok(self.adjacent(p, q))
    }

    /// Number of unordered adjacent pairs in a set of distinct points.
    pub fn count_contacts(&self, points: &[Point]) -> u32 {
        let set: HashSet<Point> = points.iter().copied().collect();
        let mut twice = 0u32;
        for &p in points {
            for &v in &self.neighbors {
                if set.contains(&(p + v)) {
                    twice += 1;
                }
            }
        }
        twice / 2
    }

    /// Translation that moves the coordinate-wise minimum corner of `points`
    /// to the origin. On FCC an odd-parity corner is moved to `(1,0,0)`
    /// instead, so that the translation is a lattice vector.
    pub fn normalizing_shift(&self, points: &[Point]) -> Point {
        let corner = points
            .iter()
            .copied()
            .reduce(Point::min)
            .unwrap_or(Point::ORIGIN);
        let mut shift = -corner;
        if self.kind == LatticeKind::Fcc && shift.coord_sum() % 2 != 0 {
            shift.x += 1;
        }
        shift
    }

    /// Canonical form of a point set: the lexicographically smallest sorted
    /// image under (point-group element, normalizing translation).
    pub fn canonicalize_point_set(&self, points: &[Point]) -> Result<Vec<Point>, LatticeError> {
        if points.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        for &p in points {
            self.check_member(p)?;
        }
        Ok(self.canonical_set_unchecked(points))
    }

    pub(crate) fn canonical_set_unchecked(&self, points: &[Point]) -> Vec<Point> {
        let mut best: Option<Vec<Point>> = None;
        let mut img = Vec::with_capacity(points.len());
        for g in &self.group {
            img.clear();
            img.extend(points.iter().map(|&p| g.apply(p)));
            let shift = self.normalizing_shift(&img);
            for p in img.iter_mut() {
                *p = *p + shift;
            }
            img.sort_unstable();
            img.dedup();
            if best.as_ref().is_none_or(|b| img < *b) {
                best = Some(img.clone());
            }
        }
        best.expect("group is nonempty")
    }

    /// All motions mapping the (sorted) point set onto itself.
    pub fn set_stabilizer(&self, points: &[Point]) -> Vec<Motion> {
        let mut sorted = points.to_vec();
        sorted.sort_unstable();
        let corner = sorted.iter().copied().reduce(Point::min).unwrap_or(Point::ORIGIN);
        let mut out = Vec::new();
        let mut img = Vec::with_capacity(points.len());
        for g in &self.group {
            img.clear();
            img.extend(sorted.iter().map(|&p| g.apply(p)));
            let img_corner = img.iter().copied().reduce(Point::min).unwrap_or(Point::ORIGIN);
            let shift = corner - img_corner;
            for p in img.iter_mut() {
                *p = *p + shift;
            }
            img.sort_unstable();
            if img == sorted {
                out.push(Motion { op: *g, shift });
            }
        }
        out
    }

    /// Canonical form of an ordered point tuple: the lexicographically
    /// smallest image under the point group after translating the first
    /// element to the origin. Used as the key of an H-placement up to
    /// rigid motion.
    pub fn canonical_tuple(&self, points: &[Point]) -> Vec<Point> {
        let Some(&first) = points.first() else {
            return Vec::new();
        };
        let mut best: Option<Vec<Point>> = None;
        let mut img = Vec::with_capacity(points.len());
        for g in &self.group {
            img.clear();
            let anchor = g.apply(first);
            img.extend(points.iter().map(|&p| g.apply(p) - anchor));
            if best.as_ref().is_none_or(|b| img < *b) {
                best = Some(img.clone());
            }
        }
        best.expect("group is nonempty")
    }

    /// Ordered tuple translated so its first element sits at the origin.
    pub fn translated_tuple(points: &[Point]) -> Vec<Point> {
        match points.first() {
            Some(&first) => points.iter().map(|&p| p - first).collect(),
            None => Vec::new(),
        }
    }
}
