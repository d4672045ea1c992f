//! Brute-force ground truth for small instances: exhaustive self-avoiding
//! walk enumeration, exact optimum, degeneracy and core-degeneracy.
//!
//! With symmetry reduction every walk is enumerated once per orbit under
//! translation and the point group: walks start at the origin and only the
//! lexicographically smallest direction sequence of each orbit is kept.
//! Equivalence classes are keyed by the canonical H tuple
//! ([`Lattice::canonical_tuple`]), or by the translated tuple when
//! symmetry reduction is off. Both conventions match `predict`.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::lattice::{Lattice, LatticeKind, Point};
use crate::model::{
    BackboneStructure, Energy, HpSequence, ModelKind, SideChainStructure, Structure,
};

/// Largest chain lengths the oracle accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub cubic: usize,
    pub fcc: usize,
    pub sqr: usize,
    pub side_chain_cubic: usize,
    pub side_chain_fcc: usize,
    pub side_chain_sqr: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            cubic: 14,
            fcc: 10,
            sqr: 18,
            side_chain_cubic: 8,
            side_chain_fcc: 6,
            side_chain_sqr: 10,
        }
    }
}

impl OracleLimits {
    pub fn bound(&self, lattice: LatticeKind, model: ModelKind) -> usize {
        match (model, lattice) {
            (ModelKind::Backbone, LatticeKind::Cubic) => self.cubic,
            (ModelKind::Backbone, LatticeKind::Fcc) => self.fcc,
            (ModelKind::Backbone, LatticeKind::Sqr) => self.sqr,
            (ModelKind::SideChain, LatticeKind::Cubic) => self.side_chain_cubic,
            (ModelKind::SideChain, LatticeKind::Fcc) => self.side_chain_fcc,
            (ModelKind::SideChain, LatticeKind::Sqr) => self.side_chain_sqr,
        }
    }

    fn check(&self, n: usize, lattice: LatticeKind, model: ModelKind) -> Result<(), OracleError> {
        let bound = self.bound(lattice, model);
        if n == 0 || n > bound {
            return Err(OracleError::Capacity { n, bound, lattice, model });
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("chain length {n} outside the oracle bound 1..={bound} for {model} on {lattice}")]
    Capacity { n: usize, bound: usize, lattice: LatticeKind, model: ModelKind },
    #[error("structure {index} is invalid: {message}")]
    InvalidStructure { index: usize, message: String },
}

/// One equivalence class of optimal structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleClass {
    /// H placement (backbone) or H side-chain placement, in the canonical
    /// frame.
    pub key: Vec<Point>,
    pub size: u64,
    pub member: Structure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub optimal_energy: Energy,
    pub degeneracy: u64,
    pub core_degeneracy: u64,
    /// Sorted by key.
    pub classes: Vec<OracleClass>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleOptions {
    pub symmetry_reduce: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { symmetry_reduce: true }
    }
}

/// Dense occupancy grid centred on the origin.
struct Grid {
    side: i32,
    cells: Vec<u32>,
}

impl Grid {
    fn new(radius: i32) -> Self {
        let side = 2 * radius + 3;
        Grid { side, cells: vec![0; (side * side * side) as usize] }
    }

    #[inline]
    fn idx(&self, p: Point) -> usize {
        let o = self.side / 2;
        (((p.x + o) * self.side + (p.y + o)) * self.side + (p.z + o)) as usize
    }

    #[inline]
    fn get(&self, p: Point) -> u32 {
        self.cells[self.idx(p)]
    }

    #[inline]
    fn set(&mut self, p: Point, v: u32) {
        let i = self.idx(p);
        self.cells[i] = v;
    }
}

/// Depth-first walk enumerator. `visit` receives the points and the
/// bitmask of group elements fixing the walk (bit 0 is the identity).
struct WalkEnum<'a> {
    lattice: &'a Lattice,
    n: usize,
    reduce: bool,
    grid: Grid,
    points: Vec<Point>,
    dirs: Vec<u8>,
}

impl<'a> WalkEnum<'a> {
    fn new(lattice: &'a Lattice, n: usize, reduce: bool) -> Self {
        WalkEnum {
            lattice,
            n,
            reduce,
            grid: Grid::new(n as i32),
            points: Vec::with_capacity(n),
            dirs: Vec::with_capacity(n),
        }
    }

    fn all_group_mask(&self) -> u64 {
        let g = self.lattice.point_group().len();
        if g == 64 {
            u64::MAX
        } else {
            (1u64 << g) - 1
        }
    }

    /// Runs the enumeration. `step` is consulted after each placed monomer
    /// (with the new index) and may return false to prune the subtree.
    fn run<S, V>(&mut self, step: &mut S, visit: &mut V)
    where
        S: FnMut(&[Point], &Grid, usize) -> bool,
        V: FnMut(&[Point], &[u8], u64),
    {
        self.points.clear();
        self.dirs.clear();
        self.points.push(Point::ORIGIN);
        self.grid.set(Point::ORIGIN, 1);
        if step(&self.points, &self.grid, 0) {
            let mask = self.all_group_mask();
            self.extend(mask, step, visit);
        }
        self.grid.set(Point::ORIGIN, 0);
    }

    fn extend<S, V>(&mut self, tied: u64, step: &mut S, visit: &mut V)
    where
        S: FnMut(&[Point], &Grid, usize) -> bool,
        V: FnMut(&[Point], &[u8], u64),
    {
        if self.points.len() == self.n {
            visit(&self.points, &self.dirs, tied);
            return;
        }
        let last = *self.points.last().expect("walk is nonempty");
        for (d, &v) in self.lattice.neighbor_vectors().iter().enumerate() {
            let mut next_tied = tied;
            if self.reduce {
                let mut smaller = false;
                let mut bits = tied & !1;
                while bits != 0 {
                    let g = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let gd = self.lattice.direction_permutation(g)[d] as usize;
                    if gd < d {
                        smaller = true;
                        break;
                    }
                    if gd > d {
                        next_tied &= !(1u64 << g);
                    }
                }
                if smaller {
                    continue;
                }
            }
            let p = last + v;
            if self.grid.get(p) != 0 {
                continue;
            }
            let i = self.points.len();
            self.grid.set(p, i as u32 + 1);
            self.points.push(p);
            self.dirs.push(d as u8);
            if step(&self.points, &self.grid, i) {
                self.extend(next_tied, step, visit);
            }
            self.dirs.pop();
            self.points.pop();
            self.grid.set(p, 0);
        }
    }
}

/// Every self-avoiding walk of `n` monomers starting at the origin; with
/// `symmetry_reduce`, exactly one canonical walk per orbit. Returns the
/// number of walks visited.
pub fn enumerate_saws<F>(
    n: usize,
    lattice: LatticeKind,
    symmetry_reduce: bool,
    limits: &OracleLimits,
    mut visit: F,
) -> Result<u64, OracleError>
where
    F: FnMut(&BackboneStructure),
{
    limits.check(n, lattice, ModelKind::Backbone)?;
    let mut count = 0u64;
    let mut walks = WalkEnum::new(lattice.lattice(), n, symmetry_reduce);
    walks.run(&mut |_, _, _| true, &mut |pts, _, _| {
        count += 1;
        visit(&BackboneStructure { points: pts.to_vec() });
    });
    Ok(count)
}

/// Group elements (as indices) encoded in a tie mask.
fn mask_elements(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |g| mask & (1u64 << g) != 0)
}

struct Tally {
    best: i64,
    degeneracy: u64,
    classes: HashMap<Vec<Point>, (u64, Structure)>,
}

impl Tally {
    fn new() -> Self {
        Tally { best: -1, degeneracy: 0, classes: HashMap::new() }
    }

    /// Records `count` optimal-candidate structures with the given contacts.
    fn record(&mut self, contacts: i64, count: u64, key: impl FnOnce() -> Vec<Point>, member: impl FnOnce() -> Structure) {
        if count == 0 || contacts < self.best {
            return;
        }
        if contacts > self.best {
            self.best = contacts;
            self.degeneracy = 0;
            self.classes.clear();
        }
        self.degeneracy += count;
        match self.classes.entry(key()) {
            std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().0 += count,
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert((count, member()));
            }
        }
    }

    fn finish(self) -> OracleResult {
        let mut classes: Vec<OracleClass> = self
            .classes
            .into_iter()
            .map(|(key, (size, member))| OracleClass { key, size, member })
            .collect();
        classes.sort_by(|a, b| a.key.cmp(&b.key));
        OracleResult {
            optimal_energy: Energy::from_contacts(self.best.max(0)),
            degeneracy: self.degeneracy,
            core_degeneracy: classes.len() as u64,
            classes,
        }
    }
}

fn class_key(lattice: &Lattice, h_points: &[Point], reduce: bool) -> Vec<Point> {
    if reduce {
        lattice.canonical_tuple(h_points)
    } else {
        Lattice::translated_tuple(h_points)
    }
}

/// Exhaustive optimum, degeneracy and class partition.
pub fn brute_force_optimal(
    seq: &HpSequence,
    lattice: LatticeKind,
    model: ModelKind,
    options: OracleOptions,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    limits.check(seq.len(), lattice, model)?;
    match model {
        ModelKind::Backbone => Ok(backbone_optimal(seq, lattice.lattice(), options.symmetry_reduce)),
        ModelKind::SideChain => Ok(side_chain_optimal(seq, lattice.lattice(), options.symmetry_reduce)),
    }
}

fn backbone_optimal(seq: &HpSequence, lattice: &Lattice, reduce: bool) -> OracleResult {
    let n = seq.len();
    let coord = lattice.coordination() as i64;
    let is_h: Vec<bool> = (0..n).map(|i| seq.is_h(i)).collect();
    // Most contacts the monomers after index i can still add.
    let mut future = vec![0i64; n + 1];
    for i in (0..n).rev() {
        let own = if !is_h[i] {
            0
        } else if i + 1 == n {
            coord - 1
        } else {
            coord - 2
        };
        future[i] = future[i + 1] + own;
    }
    let mut contacts: Vec<i64> = vec![0; n];
    let mut tally = Tally::new();
    let mut walks = WalkEnum::new(lattice, n, reduce);
    let neighbors = lattice.neighbor_vectors().to_vec();
    let h_idx = seq.h_indices().to_vec();
    let best = std::cell::Cell::new(-1i64);
    let leaf = std::cell::Cell::new(0i64);
    walks.run(
        &mut |pts: &[Point], grid: &Grid, i: usize| {
            let prev = if i == 0 { 0 } else { contacts[i - 1] };
            let mut c = prev;
            if is_h[i] {
                let p = pts[i];
                for &v in &neighbors {
                    let j = grid.get(p + v);
                    if j != 0 {
                        let j = j as usize - 1;
                        if j + 1 < i && is_h[j] {
                            c += 1;
                        }
                    }
                }
            }
            contacts[i] = c;
            leaf.set(c);
            c + future[i + 1] >= best.get()
        },
        &mut |pts: &[Point], _, _| {
            let c = leaf.get();
            tally.record(
                c,
                1,
                || {
                    let h: Vec<Point> = h_idx.iter().map(|&i| pts[i]).collect();
                    class_key(lattice, &h, reduce)
                },
                || Structure::Backbone(BackboneStructure { points: pts.to_vec() }),
            );
            best.set(tally.best);
        },
    );
    tally.finish()
}

fn side_chain_optimal(seq: &HpSequence, lattice: &Lattice, reduce: bool) -> OracleResult {
    let n = seq.len();
    let neighbors = lattice.neighbor_vectors().to_vec();
    let coord = neighbors.len() as i64;
    let h_idx = seq.h_indices().to_vec();
    let p_idx: Vec<usize> = (0..n).filter(|&i| !seq.is_h(i)).collect();
    let mut tally = Tally::new();
    let mut backbones: Vec<(Vec<Point>, u64)> = Vec::new();
    let mut walks = WalkEnum::new(lattice, n, reduce);
    walks.run(&mut |_, _, _| true, &mut |pts, _, tied| backbones.push((pts.to_vec(), tied)));

    let mut grid = Grid::new(n as i32 + 1);
    let mut sides = vec![Point::ORIGIN; n];
    for (backbone, tied) in &backbones {
        for (i, &p) in backbone.iter().enumerate() {
            grid.set(p, (i + 1) as u32);
        }
        let stab: Vec<usize> = if reduce { mask_elements(*tied & !1).collect() } else { Vec::new() };
        let mut ctx = SideCtx {
            lattice,
            neighbors: &neighbors,
            coord,
            backbone,
            h_idx: &h_idx,
            p_idx: &p_idx,
            stab: &stab,
            reduce,
            n,
        };
        ctx.place_h(0, 0, &mut grid, &mut sides, &mut tally);
        for &p in backbone.iter() {
            grid.set(p, 0);
        }
    }
    tally.finish()
}

/// Side-chain markers in the grid are offset so they never collide with
/// backbone indices.
const SIDE: u32 = 1 << 16;

struct SideCtx<'a> {
    lattice: &'a Lattice,
    neighbors: &'a [Point],
    coord: i64,
    backbone: &'a [Point],
    h_idx: &'a [usize],
    p_idx: &'a [usize],
    /// Non-identity group elements fixing the backbone.
    stab: &'a [usize],
    reduce: bool,
    n: usize,
}

impl SideCtx<'_> {
    fn place_h(&mut self, k: usize, contacts: i64, grid: &mut Grid, sides: &mut [Point], tally: &mut Tally) {
        let remaining = (self.h_idx.len() - k) as i64;
        if contacts + remaining * (self.coord - 1) < tally.best {
            return;
        }
        if k == self.h_idx.len() {
            self.complete_p(contacts, grid, sides, tally);
            return;
        }
        let i = self.h_idx[k];
        let b = self.backbone[i];
        for &v in self.neighbors {
            let s = b + v;
            if grid.get(s) != 0 {
                continue;
            }
            let mut gain = 0;
            for &w in self.neighbors {
                let g = grid.get(s + w);
                if g >= SIDE {
                    let j = (g - SIDE) as usize;
                    if j != i && self.h_idx.binary_search(&j).is_ok() {
                        gain += 1;
                    }
                }
            }
            grid.set(s, SIDE + i as u32);
            sides[i] = s;
            self.place_h(k + 1, contacts + gain, grid, sides, tally);
            grid.set(s, 0);
        }
    }

    fn complete_p(&mut self, contacts: i64, grid: &mut Grid, sides: &mut [Point], tally: &mut Tally) {
        if self.stab.is_empty() {
            let mut first: Option<Vec<Point>> = None;
            let count = self.count_p(0, grid, sides, &mut first);
            if count == 0 {
                return;
            }
            let h: Vec<Point> = self.h_idx.iter().map(|&i| sides[i]).collect();
            let (lattice, reduce, backbone) = (self.lattice, self.reduce, self.backbone);
            tally.record(
                contacts,
                count,
                || class_key(lattice, &h, reduce),
                || {
                    Structure::SideChain(SideChainStructure {
                        backbone: backbone.to_vec(),
                        side_chains: first.expect("a completion exists"),
                    })
                },
            );
        } else {
            self.enumerate_p(0, contacts, grid, sides, tally);
        }
    }

    fn count_p(&self, k: usize, grid: &mut Grid, sides: &mut [Point], first: &mut Option<Vec<Point>>) -> u64 {
        if k == self.p_idx.len() {
            if first.is_none() {
                *first = Some(sides.to_vec());
            }
            return 1;
        }
        let i = self.p_idx[k];
        let b = self.backbone[i];
        let mut total = 0;
        for &v in self.neighbors {
            let s = b + v;
            if grid.get(s) != 0 {
                continue;
            }
            grid.set(s, SIDE + i as u32);
            sides[i] = s;
            total += self.count_p(k + 1, grid, sides, first);
            grid.set(s, 0);
        }
        total
    }

    /// Full enumeration for symmetric backbones: keeps only side-chain
    /// assignments that are lexicographically smallest under the backbone's
    /// stabilizer.
    fn enumerate_p(&mut self, k: usize, contacts: i64, grid: &mut Grid, sides: &mut [Point], tally: &mut Tally) {
        if k == self.p_idx.len() {
            if !self.is_canonical(sides) {
                return;
            }
            let h: Vec<Point> = self.h_idx.iter().map(|&i| sides[i]).collect();
            let (lattice, reduce, backbone) = (self.lattice, self.reduce, self.backbone);
            tally.record(
                contacts,
                1,
                || class_key(lattice, &h, reduce),
                || {
                    Structure::SideChain(SideChainStructure {
                        backbone: backbone.to_vec(),
                        side_chains: sides.to_vec(),
                    })
                },
            );
            return;
        }
        let i = self.p_idx[k];
        let b = self.backbone[i];
        for &v in self.neighbors {
            let s = b + v;
            if grid.get(s) != 0 {
                continue;
            }
            grid.set(s, SIDE + i as u32);
            sides[i] = s;
            self.enumerate_p(k + 1, contacts, grid, sides, tally);
            grid.set(s, 0);
        }
    }

    fn is_canonical(&self, sides: &[Point]) -> bool {
        let dirs: Vec<usize> = (0..self.n)
            .map(|i| self.lattice.direction_index(sides[i] - self.backbone[i]).expect("attached"))
            .collect();
        self.stab.iter().all(|&g| {
            let perm = self.lattice.direction_permutation(g);
            let img = dirs.iter().map(|&d| perm[d] as usize);
            img.cmp(dirs.iter().copied()) != std::cmp::Ordering::Less
        })
    }
}

/// Partitions structures by literal equality of their H placements
/// (backbone) or H side-chain placements (side-chain model). Returns the
/// index lists of the classes in order of first appearance.
pub fn class_partition(
    seq: &HpSequence,
    structures: &[Structure],
    lattice: LatticeKind,
) -> Result<Vec<Vec<usize>>, OracleError> {
    let lat = lattice.lattice();
    let mut order: Vec<Vec<Point>> = Vec::new();
    let mut classes: HashMap<Vec<Point>, Vec<usize>> = HashMap::new();
    for (index, s) in structures.iter().enumerate() {
        let report = crate::model::validate_structure(seq, s, lat);
        if !report.is_ok() {
            return Err(OracleError::InvalidStructure { index, message: report.to_string() });
        }
        let key = s.h_sites(seq);
        classes
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(index);
    }
    Ok(order.into_iter().map(|k| classes.remove(&k).expect("recorded")).collect())
}

/// Every optimal structure, one per symmetry orbit (backbone model only;
/// intended for partition checks at oracle scale).
pub fn optimal_structures(
    seq: &HpSequence,
    lattice: LatticeKind,
    limits: &OracleLimits,
) -> Result<Vec<BackboneStructure>, OracleError> {
    let best = brute_force_optimal(seq, lattice, ModelKind::Backbone, OracleOptions::default(), limits)?
        .optimal_energy;
    let lat = lattice.lattice();
    let mut out = Vec::new();
    enumerate_saws(seq.len(), lattice, true, limits, |w| {
        if crate::model::energy_backbone_unchecked(seq, &w.points, lat) == best {
            out.push(w.clone());
        }
    })?;
    Ok(out)
}
