//! Core-directed structure prediction.
//!
//! For a sequence with `n_h` H monomers the H-cores of that size are taken
//! layer by layer, most compact first. Each core is threaded by a
//! constraint problem that pins the H positions (backbone model) or the H
//! side-chain positions (side-chain model) onto the core. The first layer
//! in which some core can be threaded is optimal; if the stored layers run
//! out first, only a lower bound on the energy is known.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::cores::{is_certified, is_gap_free, CoreDatabase, HCore};
use crate::lattice::{Lattice, LatticeKind, Motion, Point};
use crate::model::{
    BackboneStructure, Energy, HpSequence, ModelKind, SideChainStructure, Structure,
};
use crate::oracle::{brute_force_optimal, OracleLimits, OracleOptions};
use crate::solver::{solve_with, Count, Csp, CspError, Domain, Mode, SearchStats, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictError {
    #[error("the core database has no entry for {n_h} H monomers; build it with `coredb build`")]
    MissingCores { n_h: usize },
    #[error("core database is for {found}, prediction requested on {expected}")]
    LatticeMismatch { expected: LatticeKind, found: LatticeKind },
    #[error("core has {found} points but the sequence has {expected} H monomers")]
    CoreSize { expected: usize, found: usize },
    #[error(transparent)]
    Solver(#[from] CspError),
}

/// What to compute beyond the optimal energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictMode {
    /// Energy and one optimal structure.
    First,
    /// Also the degeneracy and the core-degeneracy.
    Count,
    /// Also one representative per equivalence class.
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredictOptions {
    pub mode: PredictMode,
    /// Counting stops once this many optimal structures are known.
    pub cutoff: u64,
    /// Count structures up to rotation and reflection as well as translation.
    pub symmetry_dedup: bool,
    /// Margin around the core's bounding box for non-core positions.
    /// `None` picks the smallest margin that cannot cut off a structure.
    pub window_margin: Option<i32>,
    /// Node budget for completing a layer with the gapped H placements the
    /// chain can reach (see [`reachable_gapped_cores`]). Zero disables it.
    pub completion_budget: u64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            mode: PredictMode::First,
            cutoff: 1_000_000,
            symmetry_dedup: true,
            window_margin: None,
            completion_budget: 20_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Optimal,
    LowerBoundOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionResult {
    pub status: Status,
    /// Optimal energy, or a lower bound on it.
    pub energy: Energy,
    /// Every layer consulted held all cores the chain could fold into, so
    /// the energy and counts are exact rather than exact within the core
    /// search bound.
    pub certified: bool,
    pub structure: Option<Structure>,
    pub degeneracy: Option<Count>,
    pub core_degeneracy: Option<Count>,
    pub representatives: Option<Vec<Structure>>,
    pub threaded_core_count: usize,
    /// Index of the successful layer, or the number of layers tried.
    pub layers_descended: usize,
    pub layer_contacts: Option<u32>,
    pub stats: SearchStats,
}

/// A threading constraint problem and the variable layout needed to read
/// structures back out of its solutions.
#[derive(Clone, Debug)]
pub struct ThreadingProblem {
    pub csp: Csp,
    pub model: ModelKind,
    pub n: usize,
    /// Variables pinned to the core, in H-monomer order.
    pub h_vars: Vec<Var>,
}

impl ThreadingProblem {
    pub fn structure(&self, values: &[Point]) -> Structure {
        match self.model {
            ModelKind::Backbone => Structure::Backbone(BackboneStructure { points: values[..self.n].to_vec() }),
            ModelKind::SideChain => Structure::SideChain(SideChainStructure {
                backbone: values[..self.n].to_vec(),
                side_chains: values[self.n..2 * self.n].to_vec(),
            }),
        }
    }

    pub fn h_tuple(&self, values: &[Point]) -> Vec<Point> {
        self.h_vars.iter().map(|&v| values[v]).collect()
    }
}

fn default_margin(model: ModelKind, n: usize) -> i32 {
    match model {
        ModelKind::Backbone => n as i32 - 1,
        ModelKind::SideChain => n as i32 + 1,
    }
}

/// Builds the constraint problem that threads `seq` onto `core`.
pub fn build_threading_csp(
    seq: &HpSequence,
    core: &HCore,
    model: ModelKind,
    lattice: LatticeKind,
    window_margin: Option<i32>,
) -> Result<ThreadingProblem, PredictError> {
    let n = seq.len();
    if core.len() != seq.n_h() {
        return Err(PredictError::CoreSize { expected: seq.n_h(), found: core.len() });
    }
    let margin = window_margin.unwrap_or_else(|| default_margin(model, n)).max(0);
    let (mut lo, mut hi) = bounding_box(&core.points);
    let m = Point::new(margin, margin, margin);
    lo = lo - m;
    hi = hi + m;
    if lattice == LatticeKind::Sqr {
        lo.z = 0;
        hi.z = 0;
    }
    let free = || Domain::Box { lo, hi, exclude: core.points.clone() };
    let on_core = || Domain::Points(core.points.clone());

    let mut csp = Csp::new(lattice);
    let mut h_vars = Vec::with_capacity(seq.n_h());
    match model {
        ModelKind::Backbone => {
            for i in 0..n {
                let v = csp.add_var(if seq.is_h(i) { on_core() } else { free() });
                if seq.is_h(i) {
                    h_vars.push(v);
                }
            }
            for i in 1..n {
                csp.add_neighbor(i - 1, i);
            }
            csp.add_all_different((0..n).collect());
        }
        ModelKind::SideChain => {
            for _ in 0..n {
                csp.add_var(free());
            }
            for i in 0..n {
                let v = csp.add_var(if seq.is_h(i) { on_core() } else { free() });
                if seq.is_h(i) {
                    h_vars.push(v);
                }
            }
            for i in 1..n {
                csp.add_neighbor(i - 1, i);
            }
            for i in 0..n {
                csp.add_neighbor(i, n + i);
            }
            csp.add_all_different((0..2 * n).collect());
        }
    }
    add_distance_bounds(&mut csp, seq, core, model, lattice);
    csp.set_branch_set(h_vars.clone());
    Ok(ThreadingProblem { csp, model, n, h_vars })
}

/// Implied bounds between H-related variables: monomers `k` chain steps
/// apart are at most `k` lattice steps apart, plus one per side chain.
/// Bounds no tighter than the core's reach are omitted.
fn add_distance_bounds(csp: &mut Csp, seq: &HpSequence, core: &HCore, model: ModelKind, lattice: LatticeKind) {
    let lat = lattice.lattice();
    let diameter = core
        .points
        .iter()
        .flat_map(|&p| core.points.iter().map(move |&q| lat.graph_distance(p, q)))
        .max()
        .unwrap_or(0);
    let h = seq.h_indices();
    let n = seq.len();
    for (a, &i) in h.iter().enumerate() {
        for &j in &h[a + 1..] {
            let gap = (j - i) as u32;
            match model {
                ModelKind::Backbone => {
                    if gap >= 2 && gap < diameter {
                        csp.add_within(i, j, gap);
                    }
                }
                ModelKind::SideChain => {
                    if gap + 2 < diameter {
                        csp.add_within(n + i, n + j, gap + 2);
                    }
                    if gap >= 2 && gap < diameter + 2 {
                        csp.add_within(i, j, gap);
                    }
                    if gap + 1 < diameter + 1 {
                        csp.add_within(i, n + j, gap + 1);
                        csp.add_within(n + i, j, gap + 1);
                    }
                }
            }
        }
    }
}

fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut lo = points[0];
    let mut hi = points[0];
    for &p in points {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// On bipartite lattices the H monomers at even and odd chain positions
/// land on the two colour classes, so a core is threadable only if its
/// colour counts match the sequence's.
fn parity_compatible(seq: &HpSequence, core: &HCore, lattice: LatticeKind) -> bool {
    if !lattice.is_bipartite() {
        return true;
    }
    let even_h = seq.h_indices().iter().filter(|&&i| i % 2 == 0).count();
    let odd_h = seq.n_h() - even_h;
    let even_pts = core.points.iter().filter(|p| p.coord_sum().rem_euclid(2) == 0).count();
    let odd_pts = core.len() - even_pts;
    (even_h, odd_h) == (even_pts, odd_pts) || (even_h, odd_h) == (odd_pts, even_pts)
}

/// Threads `seq` onto a single core in the given solver mode.
pub fn thread_sequence(
    seq: &HpSequence,
    core: &HCore,
    model: ModelKind,
    lattice: LatticeKind,
    mode: Mode,
) -> Result<(Vec<Structure>, crate::solver::SolveReport), PredictError> {
    let problem = build_threading_csp(seq, core, model, lattice, None)?;
    let mut out = Vec::new();
    let report = solve_with(&problem.csp, mode, |s| {
        out.push(problem.structure(&s.values));
        ControlFlow::Continue(())
    })?;
    Ok((out, report))
}

/// Per-core outcome within a layer.
struct CoreOutcome {
    threaded: bool,
    structure: Option<Structure>,
    degeneracy: u64,
    degeneracy_capped: bool,
    core_degeneracy: u64,
    core_capped: bool,
    representatives: Vec<Structure>,
}

struct CoreRun<'a> {
    seq: &'a HpSequence,
    model: ModelKind,
    lattice: LatticeKind,
    options: PredictOptions,
    stats: SearchStats,
}

impl CoreRun<'_> {
    fn run(&mut self, core: &HCore, degeneracy_left: u64, core_left: u64) -> Result<CoreOutcome, PredictError> {
        let problem = build_threading_csp(self.seq, core, self.model, self.lattice, self.options.window_margin)?;
        let mut out = CoreOutcome {
            threaded: false,
            structure: None,
            degeneracy: 0,
            degeneracy_capped: false,
            core_degeneracy: 0,
            core_capped: false,
            representatives: Vec::new(),
        };
        let mut first = None;
        let report = solve_with(&problem.csp, Mode::First, |s| {
            first = Some(problem.structure(&s.values));
            ControlFlow::Break(())
        })?;
        self.stats.absorb(&report.stats);
        out.structure = first;
        out.threaded = out.structure.is_some();
        if !out.threaded || self.options.mode == PredictMode::First {
            return Ok(out);
        }

        let lat = self.lattice.lattice();
        let stab: Vec<Motion> = lat.set_stabilizer(&core.points);
        let group = lat.point_group().len() as u64;
        let stab_len = stab.len() as u64;

        if self.options.mode == PredictMode::Count {
            let (count, capped) = self.count_structures(&problem, core, &stab, group, degeneracy_left)?;
            out.degeneracy = count;
            out.degeneracy_capped = capped;
        }

        // Equivalence classes on this core: distinct H tuples, one per
        // stabilizer orbit when symmetry is factored out.
        let keep_reps = self.options.mode == PredictMode::Enumerate;
        let dedup = self.options.symmetry_dedup;
        let nontrivial: Vec<&Motion> = stab.iter().filter(|m| !m.is_identity()).collect();
        let mut classes = 0u64;
        let mut capped = false;
        let weight = if dedup { 1 } else { group / stab_len };
        let mut reps = Vec::new();
        let report = solve_with(&problem.csp, Mode::Restricted, |s| {
            let t = problem.h_tuple(&s.values);
            if dedup {
                let smallest = nontrivial.iter().all(|m| {
                    let img = t.iter().map(|&p| m.apply(p));
                    t.iter().copied().cmp(img) != std::cmp::Ordering::Greater
                });
                if !smallest {
                    return ControlFlow::Continue(());
                }
            }
            classes += weight;
            if keep_reps {
                reps.push(problem.structure(&s.values));
            }
            if classes >= core_left {
                capped = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        })?;
        self.stats.absorb(&report.stats);
        out.core_degeneracy = classes;
        out.core_capped = capped;
        out.representatives = reps;
        Ok(out)
    }

    /// Structures threaded onto `core`, counted up to translation and,
    /// with deduplication, up to the lattice's point group. Returns the
    /// count and whether it was truncated at `left`.
    fn count_structures(
        &mut self,
        problem: &ThreadingProblem,
        core: &HCore,
        stab: &[Motion],
        group: u64,
        left: u64,
    ) -> Result<(u64, bool), PredictError> {
        let stab_len = stab.len() as u64;
        let raw_cap = if self.options.symmetry_dedup {
            left.saturating_mul(stab_len)
        } else {
            left.saturating_mul(stab_len).div_ceil(group).max(1)
        };
        let report = solve_with(&problem.csp, Mode::Count { cutoff: raw_cap }, |_| ControlFlow::Continue(()))?;
        self.stats.absorb(&report.stats);
        let raw = report.count.value();
        if !report.count.is_exact() {
            return Ok((left, true));
        }
        if !self.options.symmetry_dedup {
            let total = raw * (group / stab_len);
            return Ok((total.min(left), total >= left));
        }
        // Orbit counting: a structure fixed by a motion has every H on a
        // fixed point of it, so only motions fixing the core pointwise
        // contribute.
        let mut fixed_total = raw;
        for m in stab.iter().filter(|m| !m.is_identity()) {
            if !core.points.iter().all(|&p| m.apply(p) == p) {
                continue;
            }
            let restricted = restrict_to_fixed(&problem.csp, m, self.lattice.lattice());
            let report = solve_with(&restricted, Mode::Count { cutoff: u64::MAX }, |_| ControlFlow::Continue(()))?;
            self.stats.absorb(&report.stats);
            fixed_total += report.count.value();
        }
        let total = fixed_total / stab_len;
        Ok((total.min(left), total >= left))
    }
}

/// Copy of `csp` with every domain cut down to the fixed points of `m`.
fn restrict_to_fixed(csp: &Csp, m: &Motion, lattice: &Lattice) -> Csp {
    let mut out = csp.clone();
    for v in 0..out.num_vars() {
        let d = out.domain_mut(v);
        let pts: Vec<Point> = match d {
            Domain::Points(p) => p.iter().copied().filter(|&q| m.apply(q) == q).collect(),
            Domain::Box { lo, hi, exclude } => {
                let mut pts = Vec::new();
                for x in lo.x..=hi.x {
                    for y in lo.y..=hi.y {
                        for z in lo.z..=hi.z {
                            let q = Point::new(x, y, z);
                            if lattice.is_member(q) && m.apply(q) == q && !exclude.contains(&q) {
                                pts.push(q);
                            }
                        }
                    }
                }
                pts
            }
        };
        *d = Domain::Points(pts);
    }
    out
}

/// A valid structure for a sequence without H monomers: a straight
/// backbone with every side chain on the same side.
fn extended_structure(n: usize, model: ModelKind, lattice: &Lattice) -> Structure {
    let dirs = lattice.neighbor_vectors();
    let step = dirs[0];
    let backbone: Vec<Point> = (0..n as i32).map(|i| Point::new(step.x * i, step.y * i, step.z * i)).collect();
    match model {
        ModelKind::Backbone => Structure::Backbone(BackboneStructure { points: backbone }),
        ModelKind::SideChain => {
            let side = dirs
                .iter()
                .copied()
                .find(|&d| {
                    let sides: Vec<Point> = backbone.iter().map(|&b| b + d).collect();
                    sides.iter().all(|s| !backbone.contains(s))
                })
                .expect("some direction leaves the line");
            Structure::SideChain(SideChainStructure {
                side_chains: backbone.iter().map(|&b| b + side).collect(),
                backbone,
            })
        }
    }
}

fn all_p_result(
    seq: &HpSequence,
    lattice: LatticeKind,
    model: ModelKind,
    options: &PredictOptions,
) -> PredictionResult {
    let structure = extended_structure(seq.len(), model, lattice.lattice());
    let degeneracy = if options.mode == PredictMode::Count {
        brute_force_optimal(
            seq,
            lattice,
            model,
            OracleOptions { symmetry_reduce: options.symmetry_dedup },
            &OracleLimits::default(),
        )
        .ok()
        .map(|r| {
            if r.degeneracy >= options.cutoff {
                Count::AtLeast(options.cutoff)
            } else {
                Count::Exact(r.degeneracy)
            }
        })
    } else {
        None
    };
    PredictionResult {
        status: Status::Optimal,
        energy: Energy(0),
        certified: true,
        degeneracy,
        core_degeneracy: (options.mode != PredictMode::First).then_some(Count::Exact(1)),
        representatives: (options.mode == PredictMode::Enumerate).then(|| vec![structure.clone()]),
        structure: Some(structure),
        threaded_core_count: 1,
        layers_descended: 0,
        layer_contacts: Some(0),
        stats: SearchStats::default(),
    }
}

fn energy_for(seq: &HpSequence, model: ModelKind, contacts: i64) -> Energy {
    match model {
        ModelKind::Backbone => Energy::from_contacts(contacts - seq.consecutive_hh() as i64),
        ModelKind::SideChain => Energy::from_contacts(contacts),
    }
}

fn capped_count(value: u64, capped: bool, cutoff: u64) -> Count {
    if capped || value >= cutoff {
        Count::AtLeast(cutoff)
    } else {
        Count::Exact(value)
    }
}

/// Predicts the optimal energy of `seq` from the cores stored in `db`.
pub fn predict(
    seq: &HpSequence,
    lattice: LatticeKind,
    model: ModelKind,
    db: &CoreDatabase,
    options: PredictOptions,
) -> Result<PredictionResult, PredictError> {
    if seq.n_h() == 0 {
        return Ok(all_p_result(seq, lattice, model, &options));
    }
    if db.lattice() != lattice {
        return Err(PredictError::LatticeMismatch { expected: lattice, found: db.lattice() });
    }
    let n_h = seq.n_h();
    let layers = db.layers(n_h).ok_or(PredictError::MissingCores { n_h })?;
    let cutoff = options.cutoff.max(1);
    let mut run = CoreRun { seq, model, lattice, options, stats: SearchStats::default() };
    let mut complete = true;

    for layer in layers {
        let mut extra = Vec::new();
        if !is_certified(lattice, n_h, layer.contacts) {
            match reachable_gapped_cores(seq, model, lattice, layer.contacts, db.volume_cap(), options.completion_budget) {
                Some(cores) => extra = cores,
                None => complete = false,
            }
        }
        let mut threaded = 0;
        let mut structure = None;
        let (mut degeneracy, mut deg_capped) = (0u64, false);
        let (mut core_deg, mut core_capped) = (0u64, false);
        let mut reps = Vec::new();
        for core in layer.cores.iter().chain(&extra) {
            if !parity_compatible(seq, core, lattice) {
                continue;
            }
            let outcome = run.run(core, cutoff - degeneracy.min(cutoff - 1), cutoff - core_deg.min(cutoff - 1))?;
            if !outcome.threaded {
                continue;
            }
            threaded += 1;
            if structure.is_none() {
                structure = outcome.structure;
            }
            degeneracy = degeneracy.saturating_add(outcome.degeneracy);
            deg_capped |= outcome.degeneracy_capped || degeneracy >= cutoff;
            core_deg = core_deg.saturating_add(outcome.core_degeneracy);
            core_capped |= outcome.core_capped || core_deg >= cutoff;
            reps.extend(outcome.representatives);
        }
        if threaded == 0 {
            continue;
        }
        let counting = options.mode != PredictMode::First;
        return Ok(PredictionResult {
            status: Status::Optimal,
            energy: energy_for(seq, model, layer.contacts as i64),
            certified: complete,
            structure,
            degeneracy: (options.mode == PredictMode::Count).then(|| capped_count(degeneracy, deg_capped, cutoff)),
            core_degeneracy: counting.then(|| capped_count(core_deg, core_capped, cutoff)),
            representatives: (options.mode == PredictMode::Enumerate).then_some(reps),
            threaded_core_count: threaded,
            layers_descended: layer.layer,
            layer_contacts: Some(layer.contacts),
            stats: run.stats,
        });
    }

    // Every stored layer failed: the optimum has fewer contacts than the
    // last layer tried.
    let last = layers.last().map_or(0, |l| l.contacts as i64);
    let bound = energy_for(seq, model, last - 1);
    Ok(PredictionResult {
        status: Status::LowerBoundOnly,
        energy: Energy(bound.0.min(0)),
        certified: complete,
        structure: None,
        degeneracy: None,
        core_degeneracy: None,
        representatives: None,
        threaded_core_count: 0,
        layers_descended: layers.len(),
        layer_contacts: None,
        stats: run.stats,
    })
}

/// H-point sets with exactly `contacts` contacts that lie outside the core
/// search bound (they have an empty plane, or exceed `volume_cap`) yet can
/// still hold the H monomers of `seq`. Consecutive H monomers `d` chain
/// steps apart sit at most `d` lattice steps apart (`d + 2` between side
/// chains), with matching colour on bipartite lattices. Returns `None` when
/// the search exceeds `budget` nodes.
pub fn reachable_gapped_cores(
    seq: &HpSequence,
    model: ModelKind,
    lattice: LatticeKind,
    contacts: u32,
    volume_cap: u64,
    budget: u64,
) -> Option<Vec<HCore>> {
    if budget == 0 {
        return None;
    }
    let lat = lattice.lattice();
    let h = seq.h_indices();
    let slack = if model == ModelKind::SideChain { 2 } else { 0 };
    let reach = |i: usize, j: usize| (h[j] - h[i]) as u32 + slack;
    let steps: Vec<Vec<Point>> = h
        .windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) as i32;
            let r = d + slack as i32;
            let zr = if lattice == LatticeKind::Sqr { 0 } else { r };
            let mut out = Vec::new();
            for x in -r..=r {
                for y in -r..=r {
                    for z in -zr..=zr {
                        let v = Point::new(x, y, z);
                        if v == Point::ORIGIN || !lat.is_member(v) || lat.graph_distance(v, Point::ORIGIN) > r as u32 {
                            continue;
                        }
                        if lattice.is_bipartite() && (v.coord_sum() - d as i64).rem_euclid(2) != 0 {
                            continue;
                        }
                        out.push(v);
                    }
                }
            }
            out
        })
        .collect();
    // Only the set's shape matters, so the first offset can be taken up to
    // the point group.
    let mut steps = steps;
    if let Some(first) = steps.first_mut() {
        first.retain(|&v| lat.point_group().iter().all(|g| g.apply(v) >= v));
    }
    // reach_table[k][j]: largest lattice distance between H number k and an
    // earlier H number j.
    let reach_table: Vec<Vec<u32>> = (0..h.len()).map(|k| (0..k).map(|j| reach(j, k)).collect()).collect();
    let mut search = GappedSearch {
        lat,
        steps: &steps,
        reach: &reach_table,
        target: contacts,
        volume_cap,
        nodes: 0,
        budget,
        placed: vec![Point::ORIGIN],
        found: BTreeSet::new(),
    };
    search.extend(0).then(|| {
        search
            .found
            .into_iter()
            .map(|points| HCore { contacts, points })
            .collect()
    })
}

struct GappedSearch<'a> {
    lat: &'a Lattice,
    steps: &'a [Vec<Point>],
    reach: &'a [Vec<u32>],
    target: u32,
    volume_cap: u64,
    nodes: u64,
    budget: u64,
    placed: Vec<Point>,
    found: BTreeSet<Vec<Point>>,
}

impl GappedSearch<'_> {
    /// Returns false once the budget is exhausted.
    fn extend(&mut self, contacts: u32) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let k = self.placed.len() - 1;
        if k == self.steps.len() {
            if contacts == self.target && !self.within_bound() {
                self.found.insert(self.lat.canonical_set_unchecked(&self.placed));
            }
            return true;
        }
        let last = self.placed[k];
        for &v in &self.steps[k] {
            let p = last + v;
            let far = self.placed.iter().zip(&self.reach[k + 1]).any(|(&q, &r)| self.lat.graph_distance(p, q) > r);
            if far || self.placed.contains(&p) {
                continue;
            }
            let gain = self.placed.iter().filter(|&&q| self.lat.adjacent(p, q)).count() as u32;
            if contacts + gain > self.target {
                continue;
            }
            self.placed.push(p);
            let ok = self.extend(contacts + gain);
            self.placed.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn within_bound(&self) -> bool {
        if !is_gap_free(&self.placed) {
            return false;
        }
        if self.volume_cap == 0 {
            return true;
        }
        let (lo, hi) = bounding_box(&self.placed);
        let volume = hi - lo + Point::new(1, 1, 1);
        (volume.x as u64) * (volume.y as u64) * (volume.z as u64) <= self.volume_cap
    }
}

/// Representatives of every equivalence class of optimal structures.
pub fn enumerate_representatives(
    seq: &HpSequence,
    lattice: LatticeKind,
    model: ModelKind,
    db: &CoreDatabase,
    options: PredictOptions,
) -> Result<Option<Vec<Structure>>, PredictError> {
    let options = PredictOptions { mode: PredictMode::Enumerate, cutoff: u64::MAX, ..options };
    let r = predict(seq, lattice, model, db, options)?;
    Ok(match r.status {
        Status::Optimal => r.representatives,
        Status::LowerBoundOnly => None,
    })
}

/// Search effort over the optimal layer's cores: nodes expanded by the
/// restricted search and by full enumeration of all solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Effort {
    pub restricted_nodes: u64,
    pub all_nodes: u64,
}

pub fn search_effort(
    seq: &HpSequence,
    lattice: LatticeKind,
    model: ModelKind,
    db: &CoreDatabase,
) -> Result<Option<Effort>, PredictError> {
    let r = predict(seq, lattice, model, db, PredictOptions::default())?;
    let (Status::Optimal, Some(contacts)) = (r.status, r.layer_contacts) else {
        return Ok(None);
    };
    let Some(layer) = db.layers(seq.n_h()).and_then(|ls| ls.iter().find(|l| l.contacts == contacts)) else {
        return Ok(None);
    };
    let mut effort = Effort { restricted_nodes: 0, all_nodes: 0 };
    for core in layer.cores.iter().filter(|c| parity_compatible(seq, c, lattice)) {
        let problem = build_threading_csp(seq, core, model, lattice, None)?;
        let noop = |_: &crate::solver::Solution| ControlFlow::Continue(());
        effort.restricted_nodes += solve_with(&problem.csp, Mode::Restricted, noop)?.stats.nodes_expanded;
        effort.all_nodes += solve_with(&problem.csp, Mode::All, noop)?.stats.nodes_expanded;
    }
    Ok(Some(effort))
}
