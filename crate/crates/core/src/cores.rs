//! H-cores: point sets of `nH` lattice points ranked by their number of
//! internal contacts, organised into layers (layer `k` holds every core with
//! `maxContacts - k` contacts) and persisted as a checksummed text database.
//!
//! Enumeration is exact within the search bound: a core is gap-free, so
//! every axis-parallel plane between its extreme coordinates holds at least
//! one point (which keeps each bounding-box side at most `nH` long), and
//! the box volume may optionally be capped. Boxes are scanned plane by
//! plane along their longest axis with an admissible contact bound, and
//! every hit is stored in canonical form.
//!
//! The bound is the only source of incompleteness. A point set with an
//! empty plane splits into two parts with no contact across the gap, so its
//! contacts cannot exceed [`split_max`]. Layers above that value therefore
//! contain every core of their contact count, bounded or not; see
//! [`is_certified`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::lattice::{Lattice, LatticeKind, Point};

/// A canonical point set and its contact count.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HCore {
    pub points: Vec<Point>,
    pub contacts: u32,
}

impl HCore {
    /// Canonicalizes `points` and counts its contacts.
    pub fn new(lattice: &Lattice, points: &[Point]) -> Result<Self, crate::lattice::LatticeError> {
        let points = lattice.canonicalize_point_set(points)?;
        let contacts = lattice.count_contacts(&points);
        Ok(HCore { points, contacts })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreLayer {
    pub layer: usize,
    pub contacts: u32,
    pub cores: Vec<HCore>,
}

/// Size limits for enumeration and database builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoreLimits {
    pub max_nh_cubic: usize,
    pub max_nh_fcc: usize,
    pub max_nh_sqr: usize,
    pub max_layers: usize,
    /// Cap on bounding-box volume; 0 means no cap beyond `side <= nH`.
    pub volume_cap: u64,
}

impl Default for CoreLimits {
    fn default() -> Self {
        CoreLimits { max_nh_cubic: 20, max_nh_fcc: 14, max_nh_sqr: 24, max_layers: 10, volume_cap: 0 }
    }
}

impl CoreLimits {
    pub fn max_nh(&self, kind: LatticeKind) -> usize {
        match kind {
            LatticeKind::Cubic => self.max_nh_cubic,
            LatticeKind::Fcc => self.max_nh_fcc,
            LatticeKind::Sqr => self.max_nh_sqr,
        }
    }

    pub fn check(&self, kind: LatticeKind, n_h: usize, layers: usize) -> Result<(), CoresError> {
        if n_h == 0 {
            return Err(CoresError::EmptyCore);
        }
        let bound = self.max_nh(kind);
        if n_h > bound {
            return Err(CoresError::Capacity { lattice: kind, n_h, bound });
        }
        if layers > self.max_layers {
            return Err(CoresError::LayerCapacity { layers, bound: self.max_layers });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CoresError {
    #[error("nH = {n_h} exceeds the supported bound {bound} for the {lattice} lattice")]
    Capacity { lattice: LatticeKind, n_h: usize, bound: usize },
    #[error("{layers} layers requested; at most {bound} are supported")]
    LayerCapacity { layers: usize, bound: usize },
    #[error("cores need at least one point")]
    EmptyCore,
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("unsupported database version `{0}`")]
    Version(String),
    #[error("checksum mismatch: file says {stored:016x}, content hashes to {computed:016x}")]
    Checksum { stored: u64, computed: u64 },
    #[error("integrity error in nH {n_h} layer {layer} core {index}: {message}")]
    Integrity { n_h: usize, layer: usize, index: usize, message: String },
    #[error("database lattice is {found}, expected {expected}")]
    LatticeMismatch { expected: LatticeKind, found: LatticeKind },
}

/// Upper bound on intra-plane contacts of `m` points in one plane.
fn plane_max(kind: LatticeKind, m: usize) -> i32 {
    if m == 0 {
        return 0;
    }
    match kind {
        LatticeKind::Sqr => m as i32 - 1,
        _ => {
            let root = (m as f64).sqrt();
            let mut ceil2 = (2.0 * root).ceil() as i64;
            // Guard against floating error around perfect squares.
            while (ceil2 - 1) * (ceil2 - 1) >= 4 * m as i64 {
                ceil2 -= 1;
            }
            while ceil2 * ceil2 < 4 * m as i64 {
                ceil2 += 1;
            }
            (2 * m as i64 - ceil2) as i32
        }
    }
}

/// Upper bound on contacts between two adjacent planes of sizes `m1`, `m2`.
fn inter_max(kind: LatticeKind, m1: usize, m2: usize) -> i32 {
    let lo = m1.min(m2) as i32;
    match kind {
        LatticeKind::Fcc => (4 * lo).min(plane_max(LatticeKind::Cubic, m1 + m2)),
        _ => lo,
    }
}

const NEG: i32 = i32::MIN / 4;

/// `best[r][p][prev]`: the most contacts `r` points can still make when
/// spread over `p` further nonempty planes of capacity `cap`, after a plane
/// holding `prev` points.
struct PlaneBound {
    n: usize,
    table: Vec<i32>,
}

impl PlaneBound {
    fn new(kind: LatticeKind, n: usize, cap: usize) -> Self {
        let cap = cap.min(n);
        let idx = |r: usize, p: usize, prev: usize| (r * (n + 1) + p) * (n + 1) + prev;
        let mut table = vec![NEG; (n + 1) * (n + 1) * (n + 1)];
        for prev in 0..=n {
            table[idx(0, 0, prev)] = 0;
        }
        for p in 1..=n {
            for r in 1..=n {
                for prev in 0..=n {
                    let mut best = NEG;
                    for m in 1..=r.min(cap) {
                        let rest = table[idx(r - m, p - 1, m)];
                        if rest == NEG {
                            continue;
                        }
                        best = best.max(plane_max(kind, m) + inter_max(kind, prev, m) + rest);
                    }
                    table[idx(r, p, prev)] = best;
                }
            }
        }
        PlaneBound { n, table }
    }

    fn get(&self, r: usize, p: usize, prev: usize) -> i32 {
        if p > r {
            return NEG;
        }
        self.table[(r * (self.n + 1) + p) * (self.n + 1) + prev]
    }
}

fn plane_capacity(kind: LatticeKind, u: usize, v: usize) -> usize {
    match kind {
        LatticeKind::Fcc => (u * v).div_ceil(2),
        _ => u * v,
    }
}

type BoundTables = HashMap<usize, PlaneBound>;

fn bound_table(tables: &mut BoundTables, kind: LatticeKind, n: usize, cap: usize) -> &PlaneBound {
    tables.entry(cap.min(n)).or_insert_with(|| PlaneBound::new(kind, n, cap))
}

/// Admissible contact bound for `n` points filling an `a x b x c` box,
/// taking the tightest of the three plane decompositions.
fn box_upper_bound(tables: &mut BoundTables, kind: LatticeKind, n: usize, dims: (usize, usize, usize)) -> i32 {
    let (a, b, c) = dims;
    // Square-lattice planes are rows, so the single plane orthogonal to z
    // is not covered by the row bound.
    let axes = if kind == LatticeKind::Sqr { 2 } else { 3 };
    [(a, b, c), (b, a, c), (c, a, b)][..axes]
        .iter()
        .map(|&(p, u, v)| bound_table(tables, kind, n, plane_capacity(kind, u, v)).get(n, p, 0))
        .min()
        .expect("three axes")
}

/// Boxes `a >= b >= c` (with `c = 1` on the square lattice) that can hold
/// `n` points within the bound.
fn candidate_boxes(kind: LatticeKind, n: usize, volume_cap: u64) -> Vec<(usize, usize, usize)> {
    let max_c = if kind == LatticeKind::Sqr { 1 } else { n };
    let mut out = Vec::new();
    for a in 1..=n {
        for b in 1..=a {
            for c in 1..=b.min(max_c) {
                let vol = a * b * c;
                if vol >= n && (volume_cap == 0 || vol as u64 <= volume_cap) {
                    out.push((a, b, c));
                }
            }
        }
    }
    out
}

/// Every canonical `n`-point set within the search bound having at least
/// `target` contacts. Sorted by decreasing contacts, then by points.
pub fn enumerate_at_least(kind: LatticeKind, n: usize, target: u32, volume_cap: u64) -> Vec<HCore> {
    assert!(n >= 1);
    let lattice = kind.lattice();
    let mut found: HashMap<Vec<Point>, u32> = HashMap::new();
    let mut tables = BoundTables::new();
    for dims in candidate_boxes(kind, n, volume_cap) {
        if box_upper_bound(&mut tables, kind, n, dims) < target as i32 {
            continue;
        }
        let bound = bound_table(&mut tables, kind, n, plane_capacity(kind, dims.1, dims.2));
        let parities: &[usize] = if kind == LatticeKind::Fcc { &[0, 1] } else { &[0] };
        for &parity in parities {
            let mut s = BoxSearch::new(lattice, n, target as i32, dims, parity, bound);
            s.plane(0, n, 0, 0);
            for (pts, contacts) in s.hits {
                found.entry(lattice.canonical_set_unchecked(&pts)).or_insert(contacts);
            }
        }
    }
    let mut cores: Vec<HCore> =
        found.into_iter().map(|(points, contacts)| HCore { points, contacts }).collect();
    cores.sort_by(|x, y| y.contacts.cmp(&x.contacts).then_with(|| x.points.cmp(&y.points)));
    cores
}

struct BoxSearch<'a> {
    kind: LatticeKind,
    n: usize,
    target: i32,
    dims: (usize, usize, usize),
    parity: usize,
    bound: &'a PlaneBound,
    occ: Vec<bool>,
    chosen: Vec<Point>,
    /// In-plane neighbour offsets `(dy, dz)`.
    intra: Vec<(i32, i32)>,
    /// Previous-plane neighbour offsets `(dy, dz)`.
    inter: Vec<(i32, i32)>,
    rows_y: Vec<u16>,
    rows_z: Vec<u16>,
    /// Number of occupied `y` rows and `z` rows.
    covered: (usize, usize),
    hits: Vec<(Vec<Point>, u32)>,
}

struct PlaneCtx {
    x: usize,
    cells: Vec<(usize, usize)>,
    inter_prev: Vec<u8>,
    /// `suffix[i][v]`: cells at index `>= i` with `inter_prev == v`.
    suffix: Vec<[u16; 5]>,
    m: usize,
    r_after: usize,
    base: i32,
    intra_cap: i32,
    inter_cap: i32,
    future: i32,
}

impl<'a> BoxSearch<'a> {
    fn new(
        lattice: &Lattice,
        n: usize,
        target: i32,
        dims: (usize, usize, usize),
        parity: usize,
        bound: &'a PlaneBound,
    ) -> Self {
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for v in lattice.neighbor_vectors() {
            if v.x == 0 {
                intra.push((v.y, v.z));
            } else if v.x == -1 {
                inter.push((v.y, v.z));
            }
        }
        BoxSearch {
            kind: lattice.kind(),
            n,
            target,
            dims,
            parity,
            bound,
            occ: vec![false; dims.0 * dims.1 * dims.2],
            chosen: Vec::with_capacity(n),
            intra,
            inter,
            rows_y: vec![0; dims.1],
            rows_z: vec![0; dims.2],
            covered: (0, 0),
            hits: Vec::new(),
        }
    }

    fn at(&self, x: usize, y: i32, z: i32) -> bool {
        let (_, b, c) = self.dims;
        if y < 0 || z < 0 || y as usize >= b || z as usize >= c {
            return false;
        }
        self.occ[(x * b + y as usize) * c + z as usize]
    }

    fn set(&mut self, x: usize, y: usize, z: usize, v: bool) {
        let (_, b, c) = self.dims;
        self.occ[(x * b + y) * c + z] = v;
    }

    fn plane(&mut self, x: usize, r: usize, prev: usize, contacts: i32) {
        let (a, b, c) = self.dims;
        if x == a {
            if r == 0 && contacts >= self.target {
                self.leaf(contacts);
            }
            return;
        }
        let cells: Vec<(usize, usize)> = (0..b)
            .flat_map(|y| (0..c).map(move |z| (y, z)))
            .filter(|&(y, z)| self.kind != LatticeKind::Fcc || (x + y + z) % 2 == self.parity)
            .collect();
        let cap = cells.len();
        let planes_after = a - 1 - x;
        let (lo, hi) = if planes_after == 0 { (r, r) } else { (1, (r - planes_after).min(cap)) };
        if r < planes_after + 1 || lo > hi || hi > cap || !self.rows_coverable(r) {
            return;
        }
        let inter_prev: Vec<u8> = if x == 0 {
            vec![0; cap]
        } else {
            cells
                .iter()
                .map(|&(y, z)| {
                    self.inter
                        .iter()
                        .filter(|&&(dy, dz)| self.at(x - 1, y as i32 + dy, z as i32 + dz))
                        .count() as u8
                })
                .collect()
        };
        let mut suffix = vec![[0u16; 5]; cap + 1];
        for i in (0..cap).rev() {
            suffix[i] = suffix[i + 1];
            suffix[i][inter_prev[i] as usize] += 1;
        }
        for m in (lo..=hi).rev() {
            let future = self.bound.get(r - m, planes_after, m);
            if future == NEG {
                continue;
            }
            let intra_cap = plane_max(self.kind, m);
            let inter_cap = inter_max(self.kind, prev, m);
            if contacts + intra_cap + inter_cap + future < self.target {
                continue;
            }
            let ctx = PlaneCtx {
                x,
                cells: cells.clone(),
                inter_prev: inter_prev.clone(),
                suffix: suffix.clone(),
                m,
                r_after: r - m,
                base: contacts,
                intra_cap,
                inter_cap,
                future,
            };
            self.cells(&ctx, 0, m, 0, 0);
        }
    }

    fn top_inter(ctx: &PlaneCtx, i: usize, mut need: usize) -> i32 {
        let mut total = 0i32;
        for v in (1..5).rev() {
            let take = need.min(ctx.suffix[i][v] as usize);
            total += (take * v) as i32;
            need -= take;
            if need == 0 {
                break;
            }
        }
        total
    }

    fn cells(&mut self, ctx: &PlaneCtx, i: usize, need: usize, intra: i32, inter: i32) {
        if need == 0 {
            let total = ctx.base + intra + inter;
            if total + ctx.future >= self.target {
                self.plane(ctx.x + 1, ctx.r_after, ctx.m, total);
            }
            return;
        }
        if ctx.cells.len() - i < need || !self.rows_coverable(need + ctx.r_after) {
            return;
        }
        let per_point = if self.kind == LatticeKind::Sqr { 1 } else { 2 };
        let intra_room = (ctx.intra_cap - intra).min(per_point * need as i32).max(0);
        let inter_room = Self::top_inter(ctx, i, need).min(ctx.inter_cap - inter).max(0);
        if ctx.base + intra + inter + intra_room + inter_room + ctx.future < self.target {
            return;
        }
        let (y, z) = ctx.cells[i];
        let gain = self
            .intra
            .iter()
            .filter(|&&(dy, dz)| self.at(ctx.x, y as i32 + dy, z as i32 + dz))
            .count() as i32;
        self.set(ctx.x, y, z, true);
        self.cover(y, z, true);
        self.chosen.push(Point::new(ctx.x as i32, y as i32, z as i32));
        self.cells(ctx, i + 1, need - 1, intra + gain, inter + ctx.inter_prev[i] as i32);
        self.chosen.pop();
        self.cover(y, z, false);
        self.set(ctx.x, y, z, false);
        self.cells(ctx, i + 1, need, intra, inter);
    }

    /// Whether `remaining` more points can still occupy every empty row in
    /// `y` and in `z`.
    fn rows_coverable(&self, remaining: usize) -> bool {
        let (_, b, c) = self.dims;
        remaining >= b - self.covered.0 && remaining >= c - self.covered.1
    }

    fn cover(&mut self, y: usize, z: usize, add: bool) {
        if add {
            self.rows_y[y] += 1;
            self.covered.0 += usize::from(self.rows_y[y] == 1);
            self.rows_z[z] += 1;
            self.covered.1 += usize::from(self.rows_z[z] == 1);
        } else {
            self.covered.0 -= usize::from(self.rows_y[y] == 1);
            self.rows_y[y] -= 1;
            self.covered.1 -= usize::from(self.rows_z[z] == 1);
            self.rows_z[z] -= 1;
        }
    }

    fn leaf(&mut self, contacts: i32) {
        let (_, b, c) = self.dims;
        if self.covered != (b, c) {
            return;
        }
        debug_assert_eq!(self.chosen.len(), self.n);
        let shift = if self.kind == LatticeKind::Fcc && self.parity == 1 {
            Point::new(1, 0, 0)
        } else {
            Point::ORIGIN
        };
        let pts = self.chosen.iter().map(|&p| p + shift).collect();
        self.hits.push((pts, contacts as u32));
    }
}

fn max_contacts_cache() -> &'static Mutex<HashMap<(LatticeKind, usize), u32>> {
    static CACHE: OnceLock<Mutex<HashMap<(LatticeKind, usize), u32>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Upper bound on the contacts of any `n`-point set within the search bound.
fn contact_upper_bound(kind: LatticeKind, n: usize) -> u32 {
    let mut tables = BoundTables::new();
    candidate_boxes(kind, n, 0)
        .into_iter()
        .map(|dims| box_upper_bound(&mut tables, kind, n, dims))
        .max()
        .unwrap_or(0)
        .max(0) as u32
}

/// Largest contact count of any `n_h`-point lattice subset.
pub fn max_contacts(kind: LatticeKind, n_h: usize, limits: &CoreLimits) -> Result<u32, CoresError> {
    limits.check(kind, n_h, 0)?;
    Ok(max_contacts_unchecked(kind, n_h))
}

fn max_contacts_unchecked(kind: LatticeKind, n_h: usize) -> u32 {
    if let Some(&v) = max_contacts_cache().lock().unwrap().get(&(kind, n_h)) {
        return v;
    }
    // The optimum has no separating plane, so it lies within the bound and
    // the first nonempty descending target finds it.
    let mut target = contact_upper_bound(kind, n_h);
    let value = loop {
        if !enumerate_at_least(kind, n_h, target, 0).is_empty() {
            break target;
        }
        target -= 1;
    };
    max_contacts_cache().lock().unwrap().insert((kind, n_h), value);
    value
}

/// Most contacts a set of `n_h` points can have when some lattice plane
/// separates it into two nonempty parts; `None` for a single point.
pub fn split_max(kind: LatticeKind, n_h: usize) -> Option<u32> {
    (1..n_h)
        .map(|a| max_contacts_unchecked(kind, a) + max_contacts_unchecked(kind, n_h - a))
        .max()
}

/// Whether a layer with `contacts` contacts, enumerated without a volume
/// cap, contains every `n_h`-point set of that contact count.
pub fn is_certified(kind: LatticeKind, n_h: usize, contacts: u32) -> bool {
    split_max(kind, n_h).is_none_or(|s| contacts > s)
}

/// True when every axis-parallel plane between the extreme coordinates of
/// `points` holds at least one of them.
pub fn is_gap_free(points: &[Point]) -> bool {
    let axes: [fn(&Point) -> i32; 3] = [|p| p.x, |p| p.y, |p| p.z];
    axes.iter().all(|axis| {
        let mut values: Vec<i32> = points.iter().map(axis).collect();
        values.sort_unstable();
        values.dedup();
        values.windows(2).all(|w| w[1] - w[0] == 1)
    })
}

/// Layer `k` for `n_h` points: every core with `maxContacts - k` contacts.
pub fn enumerate_cores(
    kind: LatticeKind,
    n_h: usize,
    k: usize,
    limits: &CoreLimits,
) -> Result<CoreLayer, CoresError> {
    limits.check(kind, n_h, k + 1)?;
    let max_c = max_contacts_unchecked(kind, n_h);
    if k as u32 > max_c {
        return Ok(CoreLayer { layer: k, contacts: 0, cores: Vec::new() });
    }
    let contacts = max_c - k as u32;
    let cores = enumerate_at_least(kind, n_h, contacts, limits.volume_cap)
        .into_iter()
        .filter(|c| c.contacts == contacts)
        .collect();
    Ok(CoreLayer { layer: k, contacts, cores })
}

/// Layers `0..layers` for `n_h` points from a single enumeration pass.
pub fn enumerate_layers(
    kind: LatticeKind,
    n_h: usize,
    layers: usize,
    limits: &CoreLimits,
) -> Result<Vec<CoreLayer>, CoresError> {
    limits.check(kind, n_h, layers)?;
    if layers == 0 {
        return Ok(Vec::new());
    }
    let max_c = max_contacts_unchecked(kind, n_h);
    let floor = max_c.saturating_sub(layers as u32 - 1);
    let mut by_contacts: BTreeMap<u32, Vec<HCore>> = BTreeMap::new();
    for core in enumerate_at_least(kind, n_h, floor, limits.volume_cap) {
        by_contacts.entry(core.contacts).or_default().push(core);
    }
    Ok((0..layers)
        .filter(|&k| k as u32 <= max_c)
        .map(|k| {
            let contacts = max_c - k as u32;
            CoreLayer { layer: k, contacts, cores: by_contacts.remove(&contacts).unwrap_or_default() }
        })
        .collect())
}

/// Layers of H-cores for a range of core sizes on one lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreDatabase {
    lattice: LatticeKind,
    volume_cap: u64,
    entries: BTreeMap<usize, Vec<CoreLayer>>,
}

/// Result of a database build: what was built, and which sizes were refused.
#[derive(Debug)]
pub struct BuildReport {
    pub db: CoreDatabase,
    pub refused: Vec<(usize, CoresError)>,
}

impl CoreDatabase {
    pub fn new(lattice: LatticeKind, volume_cap: u64) -> Self {
        CoreDatabase { lattice, volume_cap, entries: BTreeMap::new() }
    }

    /// Builds layers `0..max_layers` for every size in `n_hs`. Sizes beyond
    /// the limits are skipped and listed in the report.
    pub fn build(
        lattice: LatticeKind,
        n_hs: impl IntoIterator<Item = usize>,
        max_layers: usize,
        limits: &CoreLimits,
    ) -> Result<BuildReport, CoresError> {
        if max_layers > limits.max_layers {
            return Err(CoresError::LayerCapacity { layers: max_layers, bound: limits.max_layers });
        }
        let mut db = CoreDatabase::new(lattice, limits.volume_cap);
        let mut refused = Vec::new();
        for n_h in n_hs {
            match enumerate_layers(lattice, n_h, max_layers, limits) {
                Ok(layers) => {
                    db.entries.insert(n_h, layers);
                }
                Err(e) => refused.push((n_h, e)),
            }
        }
        Ok(BuildReport { db, refused })
    }

    /// Builds and writes the database to `path`.
    pub fn build_to_file(
        lattice: LatticeKind,
        n_hs: impl IntoIterator<Item = usize>,
        max_layers: usize,
        limits: &CoreLimits,
        path: &Path,
    ) -> Result<BuildReport, CoresError> {
        let report = Self::build(lattice, n_hs, max_layers, limits)?;
        report.db.save(path)?;
        Ok(report)
    }

    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    pub fn volume_cap(&self) -> u64 {
        self.volume_cap
    }

    pub fn insert(&mut self, n_h: usize, layers: Vec<CoreLayer>) {
        self.entries.insert(n_h, layers);
    }

    pub fn layers(&self, n_h: usize) -> Option<&[CoreLayer]> {
        self.entries.get(&n_h).map(|v| v.as_slice())
    }

    pub fn stored_layers(&self, n_h: usize) -> usize {
        self.entries.get(&n_h).map_or(0, |v| v.len())
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("HPCOREDB 1\n");
        let _ = writeln!(s, "lattice {}", self.lattice.name());
        let _ = writeln!(s, "bound {}", self.volume_cap);
        for (n_h, layers) in &self.entries {
            for l in layers {
                let _ = writeln!(
                    s,
                    "nH {} layer {} contacts {} count {}",
                    n_h,
                    l.layer,
                    l.contacts,
                    l.cores.len()
                );
                for core in &l.cores {
                    let line: Vec<String> =
                        core.points.iter().map(|p| format!("{},{},{}", p.x, p.y, p.z)).collect();
                    s.push_str(&line.join(";"));
                    s.push('\n');
                }
            }
        }
        let _ = writeln!(s, "checksum {:016x}", fnv1a64(s.as_bytes()));
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), CoresError> {
        std::fs::write(path, self.to_text())
            .map_err(|source| CoresError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CoresError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CoresError::Io { path: path.display().to_string(), source })?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, CoresError> {
        let body_len = verify_checksum(text)?;
        let mut lines = Lines { text: &text[..body_len], pos: 0 };
        let header = lines.next_line()?;
        match header.1.strip_prefix("HPCOREDB ") {
            Some("1") => {}
            Some(v) => return Err(CoresError::Version(v.to_string())),
            None => return Err(fmt_err(header.0, "missing HPCOREDB header")),
        }
        let (off, line) = lines.next_line()?;
        let name = line.strip_prefix("lattice ").ok_or_else(|| fmt_err(off, "expected `lattice`"))?;
        let lattice: LatticeKind =
            name.parse().map_err(|_| fmt_err(off, &format!("unknown lattice `{name}`")))?;
        let (off, line) = lines.next_line()?;
        let volume_cap: u64 = line
            .strip_prefix("bound ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fmt_err(off, "expected `bound <volume-cap>`"))?;

        let mut db = CoreDatabase::new(lattice, volume_cap);
        let lat = lattice.lattice();
        loop {
            if lines.pos == body_len {
                break;
            }
            let (off, line) = lines.next_line()?;
            let f: Vec<&str> = line.split(' ').collect();
            let parsed = (f.len() == 8 && f[0] == "nH" && f[2] == "layer" && f[4] == "contacts" && f[6] == "count")
                .then(|| -> Option<(usize, usize, u32, usize)> {
                    Some((f[1].parse().ok()?, f[3].parse().ok()?, f[5].parse().ok()?, f[7].parse().ok()?))
                })
                .flatten();
            let Some((n_h, layer, contacts, count)) = parsed else {
                return Err(fmt_err(off, "expected `nH <n> layer <k> contacts <c> count <m>`"));
            };
            let layers = db.entries.entry(n_h).or_default();
            if layer != layers.len() {
                return Err(CoresError::Integrity {
                    n_h,
                    layer,
                    index: 0,
                    message: format!("layers must be contiguous; expected layer {}", layers.len()),
                });
            }
            if let Some(prev) = layers.last() {
                if prev.contacts != contacts + 1 {
                    return Err(CoresError::Integrity {
                        n_h,
                        layer,
                        index: 0,
                        message: "contact counts must decrease by one per layer".into(),
                    });
                }
            }
            let mut cores = Vec::with_capacity(count);
            let mut seen = HashSet::with_capacity(count);
            for index in 0..count {
                let (off, line) = lines.next_line()?;
                let points = parse_core_line(line).ok_or_else(|| fmt_err(off, "malformed core line"))?;
                let integrity = |message: String| CoresError::Integrity { n_h, layer, index, message };
                if points.len() != n_h {
                    return Err(integrity(format!("core has {} points", points.len())));
                }
                if points.iter().any(|&p| !p.in_range() || !lat.is_member(p)) {
                    return Err(integrity("point outside the lattice".into()));
                }
                let recomputed = lat.count_contacts(&points);
                if recomputed != contacts {
                    return Err(integrity(format!(
                        "stored contact count {contacts}, recomputed {recomputed}"
                    )));
                }
                if lat.canonical_set_unchecked(&points) != points {
                    return Err(integrity("core is not in canonical form".into()));
                }
                if !seen.insert(points.clone()) {
                    return Err(integrity("duplicate core".into()));
                }
                cores.push(HCore { points, contacts });
            }
            layers.push(CoreLayer { layer, contacts, cores });
        }
        Ok(db)
    }
}

/// Checks the trailing checksum line; returns the length of the hashed body.
fn verify_checksum(text: &str) -> Result<usize, CoresError> {
    if !text.ends_with('\n') {
        return Err(fmt_err(text.len(), "unexpected end of file (missing checksum line)"));
    }
    let body_len = text[..text.len() - 1].rfind('\n').map_or(0, |i| i + 1);
    let last = &text[body_len..text.len() - 1];
    let hex = last
        .strip_prefix("checksum ")
        .ok_or_else(|| fmt_err(body_len, "last line is not a checksum line"))?;
    // Exactly the written form, so no byte of the file can change unnoticed.
    if hex.len() != 16 || !hex.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return Err(fmt_err(body_len, "checksum is not 16 lowercase hex digits"));
    }
    let stored = u64::from_str_radix(hex, 16).expect("validated hex");
    let computed = fnv1a64(&text.as_bytes()[..body_len]);
    if stored != computed {
        return Err(CoresError::Checksum { stored, computed });
    }
    Ok(body_len)
}

struct Lines<'t> {
    text: &'t str,
    pos: usize,
}

impl<'t> Lines<'t> {
    /// Next LF-terminated line and its starting byte offset.
    fn next_line(&mut self) -> Result<(usize, &'t str), CoresError> {
        let start = self.pos;
        let rest = &self.text[start..];
        match rest.find('\n') {
            Some(i) => {
                self.pos = start + i + 1;
                Ok((start, &rest[..i]))
            }
            None => Err(fmt_err(
                self.text.len(),
                if rest.is_empty() { "unexpected end of file" } else { "unterminated last line" },
            )),
        }
    }
}

fn fmt_err(offset: usize, message: &str) -> CoresError {
    CoresError::Format { offset, message: message.to_string() }
}

fn parse_core_line(line: &str) -> Option<Vec<Point>> {
    line.split(';')
        .map(|p| {
            let mut it = p.split(',').map(|v| v.parse::<i32>());
            let pt = Point::new(it.next()?.ok()?, it.next()?.ok()?, it.next()?.ok()?);
            it.next().is_none().then_some(pt)
        })
        .collect()
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> CoreLimits {
        CoreLimits::default()
    }

    #[test]
    fn plane_bound_values() {
        // 2x2 square holds 4 contacts, 3x3 holds 12.
        assert_eq!(plane_max(LatticeKind::Cubic, 4), 4);
        assert_eq!(plane_max(LatticeKind::Cubic, 9), 12);
        assert_eq!(plane_max(LatticeKind::Cubic, 1), 0);
        assert_eq!(plane_max(LatticeKind::Cubic, 2), 1);
        assert_eq!(plane_max(LatticeKind::Sqr, 5), 4);
    }

    #[test]
    fn small_max_contacts() {
        for kind in LatticeKind::ALL {
            assert_eq!(max_contacts(kind, 1, &lim()).unwrap(), 0);
            assert_eq!(max_contacts(kind, 2, &lim()).unwrap(), 1);
        }
        assert_eq!(max_contacts(LatticeKind::Cubic, 4, &lim()).unwrap(), 4);
        assert_eq!(max_contacts(LatticeKind::Cubic, 8, &lim()).unwrap(), 12);
        assert_eq!(max_contacts(LatticeKind::Fcc, 3, &lim()).unwrap(), 3);
        assert_eq!(max_contacts(LatticeKind::Fcc, 4, &lim()).unwrap(), 6);
        assert_eq!(max_contacts(LatticeKind::Fcc, 13, &lim()).unwrap(), 36);
    }

    #[test]
    fn small_layers() {
        let l = enumerate_cores(LatticeKind::Cubic, 2, 0, &lim()).unwrap();
        assert_eq!(l.cores.len(), 1);
        let l = enumerate_cores(LatticeKind::Cubic, 3, 0, &lim()).unwrap();
        assert_eq!(l.contacts, 2);
        assert_eq!(l.cores.len(), 2);
        let l = enumerate_cores(LatticeKind::Cubic, 4, 0, &lim()).unwrap();
        assert_eq!(l.contacts, 4);
        let square = HCore::new(
            LatticeKind::Cubic.lattice(),
            &[Point::new(0, 0, 0), Point::new(1, 0, 0), Point::new(0, 1, 0), Point::new(1, 1, 0)],
        )
        .unwrap();
        assert!(l.cores.contains(&square));
        let l = enumerate_cores(LatticeKind::Cubic, 2, 1, &lim()).unwrap();
        assert_eq!(l.contacts, 0);
        // (0,0,0) with (1,1,0) or (1,1,1); (2,0,0) needs a side of 3 > nH.
        assert_eq!(l.cores.len(), 2);
        let l = enumerate_cores(LatticeKind::Cubic, 2, 5, &lim()).unwrap();
        assert!(l.cores.is_empty());
    }

    #[test]
    fn capacity_errors() {
        assert!(matches!(
            max_contacts(LatticeKind::Fcc, 15, &lim()),
            Err(CoresError::Capacity { n_h: 15, bound: 14, .. })
        ));
        assert!(matches!(
            enumerate_layers(LatticeKind::Cubic, 3, 11, &lim()),
            Err(CoresError::LayerCapacity { .. })
        ));
    }

    #[test]
    fn split_bounds() {
        assert_eq!(split_max(LatticeKind::Cubic, 1), None);
        assert_eq!(split_max(LatticeKind::Cubic, 2), Some(0));
        assert_eq!(split_max(LatticeKind::Cubic, 4), Some(2));
        assert!(is_certified(LatticeKind::Cubic, 4, 3));
        assert!(!is_certified(LatticeKind::Cubic, 4, 2));
    }

    #[test]
    fn text_round_trip_and_checksum() {
        let db = CoreDatabase::build(LatticeKind::Cubic, 1..=4, 2, &lim()).unwrap().db;
        let text = db.to_text();
        assert_eq!(CoreDatabase::from_text(&text).unwrap(), db);
        let tampered = text.replacen("contacts 4", "contacts 5", 1);
        assert!(matches!(CoreDatabase::from_text(&tampered), Err(CoresError::Checksum { .. })));
        let truncated = &text[..text.len() / 2];
        assert!(matches!(CoreDatabase::from_text(truncated), Err(CoresError::Format { .. })));
        let body = &text[..text.rfind("checksum").unwrap()];
        let bad_body = body.replacen("contacts 4 count", "contacts 5 count", 1);
        let resealed = format!("{bad_body}checksum {:016x}\n", fnv1a64(bad_body.as_bytes()));
        assert!(matches!(
            CoreDatabase::from_text(&resealed),
            Err(CoresError::Integrity { n_h: 4, layer: 0, index: 0, .. })
        ));
        let empty = CoreDatabase::new(LatticeKind::Fcc, 0);
        assert_eq!(CoreDatabase::from_text(&empty.to_text()).unwrap(), empty);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
