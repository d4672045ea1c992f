//! Finite-domain constraint solver over lattice-point domains.
//!
//! Constraints are binary lattice-neighbourhood constraints, binary
//! distance bounds and `AllDifferent` groups. Propagation is arc consistency
//! for the binary constraints plus singleton pruning and a matching-based
//! feasibility check for `AllDifferent`; search is
//! depth-first with binary branching `X = d` / `X != d`, smallest domain
//! first (ties by variable index), values in lexicographic order.
//!
//! Domains can be given as explicit point lists or as a lattice box minus an
//! exclusion list. Box domains are kept implicit until propagation meets an
//! explicit neighbour, at which point they are replaced by the (small) set of
//! supported values.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::lattice::{Lattice, LatticeKind, Point};

pub type Var = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Points(Vec<Point>),
    /// All lattice points `p` with `lo <= p <= hi` coordinate-wise, except
    /// those listed in `exclude`.
    Box { lo: Point, hi: Point, exclude: Vec<Point> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Neighbor(Var, Var),
    /// Lattice graph distance between the two values is at most the bound.
    Within(Var, Var, u32),
    AllDifferent(Vec<Var>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("constraint references undeclared variable {0}")]
    UnknownVariable(Var),
    #[error("neighbor constraint on a single variable {0}")]
    SelfNeighbor(Var),
    #[error("restricted search needs a nonempty branch set")]
    EmptyBranchSet,
    #[error("domain of variable {0} contains an out-of-range or non-lattice point")]
    BadDomain(Var),
}

/// A constraint satisfaction problem `(X, D, C)` plus a branch set.
#[derive(Clone, Debug)]
pub struct Csp {
    lattice: LatticeKind,
    domains: Vec<Domain>,
    constraints: Vec<Constraint>,
    branch_set: Option<Vec<Var>>,
}

impl Csp {
    pub fn new(lattice: LatticeKind) -> Self {
        Csp { lattice, domains: Vec::new(), constraints: Vec::new(), branch_set: None }
    }

    pub fn add_var(&mut self, domain: Domain) -> Var {
        self.domains.push(domain);
        self.domains.len() - 1
    }

    pub fn add_neighbor(&mut self, a: Var, b: Var) {
        self.constraints.push(Constraint::Neighbor(a, b));
    }

    pub fn add_within(&mut self, a: Var, b: Var, distance: u32) {
        self.constraints.push(Constraint::Within(a, b, distance));
    }

    pub fn add_all_different(&mut self, vars: Vec<Var>) {
        self.constraints.push(Constraint::AllDifferent(vars));
    }

    /// Variables branched on first in restricted mode. Defaults to all.
    pub fn set_branch_set(&mut self, vars: Vec<Var>) {
        self.branch_set = Some(vars);
    }

    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain_mut(&mut self, v: Var) -> &mut Domain {
        &mut self.domains[v]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn branch_set(&self) -> Vec<Var> {
        self.branch_set.clone().unwrap_or_else(|| (0..self.domains.len()).collect())
    }

    pub fn validate(&self) -> Result<(), CspError> {
        let n = self.domains.len();
        let check = |v: Var| if v < n { Ok(()) } else { Err(CspError::UnknownVariable(v)) };
        for c in &self.constraints {
            match c {
                Constraint::Neighbor(a, b) | Constraint::Within(a, b, _) => {
                    check(*a)?;
                    check(*b)?;
                    if a == b {
                        return Err(CspError::SelfNeighbor(*a));
                    }
                }
                Constraint::AllDifferent(vs) => vs.iter().try_for_each(|&v| check(v))?,
            }
        }
        if let Some(bs) = &self.branch_set {
            bs.iter().try_for_each(|&v| check(v))?;
        }
        let lat = self.lattice.lattice();
        for (v, d) in self.domains.iter().enumerate() {
            let pts: Vec<Point> = match d {
                Domain::Points(p) => p.clone(),
                Domain::Box { lo, hi, .. } => vec![*lo, *hi],
            };
            if pts.iter().any(|p| !p.in_range()) {
                return Err(CspError::BadDomain(v));
            }
            if matches!(d, Domain::Points(_)) && pts.iter().any(|&p| !lat.is_member(p)) {
                return Err(CspError::BadDomain(v));
            }
        }
        Ok(())
    }

    /// Independent check of a full assignment against every constraint and
    /// original domain.
    pub fn is_solution(&self, values: &[Point]) -> bool {
        if values.len() != self.domains.len() {
            return false;
        }
        let lat = self.lattice.lattice();
        let in_domain = |d: &Domain, p: Point| match d {
            Domain::Points(ps) => ps.contains(&p),
            Domain::Box { lo, hi, exclude } => {
                lat.is_member(p)
                    && (lo.x..=hi.x).contains(&p.x)
                    && (lo.y..=hi.y).contains(&p.y)
                    && (lo.z..=hi.z).contains(&p.z)
                    && !exclude.contains(&p)
            }
        };
        if !self.domains.iter().zip(values).all(|(d, &p)| in_domain(d, p)) {
            return false;
        }
        self.constraints.iter().all(|c| match c {
            Constraint::Neighbor(a, b) => lat.adjacent(values[*a], values[*b]),
            Constraint::Within(a, b, d) => lat.graph_distance(values[*a], values[*b]) <= *d,
            Constraint::AllDifferent(vs) => {
                let mut seen: Vec<Point> = vs.iter().map(|&v| values[v]).collect();
                seen.sort_unstable();
                seen.windows(2).all(|w| w[0] != w[1])
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    First,
    All,
    Count { cutoff: u64 },
    /// Branch on the branch set only; for each consistent complete branch-set
    /// assignment run one satisfiability search over the remaining variables.
    Restricted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub solutions_emitted: u64,
    pub max_depth: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.nodes_expanded += other.nodes_expanded;
        self.solutions_emitted += other.solutions_emitted;
        self.max_depth = self.max_depth.max(other.max_depth);
    }
}

/// A solution count, exact or truncated at the cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Count {
    Exact(u64),
    AtLeast(u64),
}

impl Count {
    pub fn value(self) -> u64 {
        match self {
            Count::Exact(v) | Count::AtLeast(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Count::Exact(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub values: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    /// Solutions found (`Count` mode) or emitted (other modes).
    pub count: Count,
    pub stats: SearchStats,
}

/// Runs `mode` on `csp`, streaming solutions into `emit`. Returning
/// `ControlFlow::Break` from `emit` stops the search early.
pub fn solve_with<F>(csp: &Csp, mode: Mode, mut emit: F) -> Result<SolveReport, CspError>
where
    F: FnMut(&Solution) -> ControlFlow<()>,
{
    csp.validate()?;
    let branch_set = csp.branch_set();
    if mode == Mode::Restricted && branch_set.is_empty() {
        return Err(CspError::EmptyBranchSet);
    }
    let engine = Engine::new(csp, &branch_set);
    let mut run = Run {
        engine: &engine,
        mode,
        stats: SearchStats::default(),
        found: 0,
        cutoff_hit: false,
        emit: &mut emit,
    };
    let mut root = engine.initial_state();
    if engine.propagate(&mut root, None) {
        let _ = run.search(root, 0, mode == Mode::Restricted);
    } else {
        run.stats.nodes_expanded += 1;
    }
    let count = match mode {
        Mode::Count { cutoff } if run.cutoff_hit || run.found >= cutoff => Count::AtLeast(cutoff),
        _ => Count::Exact(run.found),
    };
    Ok(SolveReport { count, stats: run.stats })
}

/// Collecting wrapper around [`solve_with`].
pub fn solve(csp: &Csp, mode: Mode) -> Result<(Vec<Solution>, SolveReport), CspError> {
    let mut out = Vec::new();
    let report = solve_with(csp, mode, |s| {
        out.push(s.clone());
        ControlFlow::Continue(())
    })?;
    Ok((out, report))
}

/// Root propagation only: the reduced explicit domains, or `None` when some
/// domain empties.
pub fn propagate(csp: &Csp) -> Result<Option<Vec<Vec<Point>>>, CspError> {
    csp.validate()?;
    let branch_set = csp.branch_set();
    let engine = Engine::new(csp, &branch_set);
    let mut state = engine.initial_state();
    if !engine.propagate(&mut state, None) {
        return Ok(None);
    }
    Ok(Some(
        state
            .doms
            .iter()
            .map(|d| engine.values(d).into_iter().map(Point::unpack).collect())
            .collect(),
    ))
}

struct Window {
    lo: Point,
    hi: Point,
    exclude: Vec<u64>,
}

#[derive(Clone, Debug)]
enum Dom {
    Ex(Vec<u64>),
    Win { id: u32, removed: Vec<u64>, len: usize },
}

#[derive(Clone)]
struct State {
    doms: Vec<Dom>,
}

struct Engine<'a> {
    lattice: &'a Lattice,
    deltas: Vec<u64>,
    windows: Vec<Window>,
    init: Vec<Dom>,
    /// Neighbour-constraint partners per variable.
    partners: Vec<Vec<Var>>,
    /// Distance-bound partners per variable.
    within: Vec<Vec<(Var, u32)>>,
    /// All-different groups containing each variable.
    groups_of: Vec<Vec<usize>>,
    groups: Vec<Vec<Var>>,
    in_branch: Vec<bool>,
}

impl<'a> Engine<'a> {
    fn new(csp: &Csp, branch_set: &[Var]) -> Self {
        let lattice = csp.lattice.lattice();
        let n = csp.domains.len();
        let mut windows = Vec::new();
        let mut init = Vec::with_capacity(n);
        for d in &csp.domains {
            match d {
                Domain::Points(ps) => {
                    let mut v: Vec<u64> = ps.iter().map(|p| p.pack()).collect();
                    v.sort_unstable();
                    v.dedup();
                    init.push(Dom::Ex(v));
                }
                Domain::Box { lo, hi, exclude } => {
                    let mut ex: Vec<u64> = exclude.iter().map(|p| p.pack()).collect();
                    ex.sort_unstable();
                    ex.dedup();
                    let w = Window { lo: *lo, hi: *hi, exclude: ex };
                    let len = box_size(lattice, &w);
                    windows.push(w);
                    init.push(Dom::Win { id: (windows.len() - 1) as u32, removed: Vec::new(), len });
                }
            }
        }
        let mut partners = vec![Vec::new(); n];
        let mut within = vec![Vec::new(); n];
        let mut groups = Vec::new();
        let mut groups_of = vec![Vec::new(); n];
        for c in &csp.constraints {
            match c {
                Constraint::Neighbor(a, b) => {
                    partners[*a].push(*b);
                    partners[*b].push(*a);
                }
                Constraint::Within(a, b, d) => {
                    within[*a].push((*b, *d));
                    within[*b].push((*a, *d));
                }
                Constraint::AllDifferent(vs) => {
                    for &v in vs {
                        groups_of[v].push(groups.len());
                    }
                    groups.push(vs.clone());
                }
            }
        }
        let mut in_branch = vec![false; n];
        for &v in branch_set {
            in_branch[v] = true;
        }
        let deltas = lattice.neighbor_vectors().iter().map(|v| v.packed_delta()).collect();
        Engine { lattice, deltas, windows, init, partners, within, groups_of, groups, in_branch }
    }

    fn initial_state(&self) -> State {
        State { doms: self.init.clone() }
    }

    fn win_contains(&self, id: u32, removed: &[u64], key: u64) -> bool {
        let w = &self.windows[id as usize];
        let p = Point::unpack(key);
        p.x >= w.lo.x
            && p.x <= w.hi.x
            && p.y >= w.lo.y
            && p.y <= w.hi.y
            && p.z >= w.lo.z
            && p.z <= w.hi.z
            && self.lattice.is_member(p)
            && w.exclude.binary_search(&key).is_err()
            && !removed.contains(&key)
    }

    fn contains(&self, d: &Dom, key: u64) -> bool {
        match d {
            Dom::Ex(v) => v.binary_search(&key).is_ok(),
            Dom::Win { id, removed, .. } => self.win_contains(*id, removed, key),
        }
    }

    fn len(d: &Dom) -> usize {
        match d {
            Dom::Ex(v) => v.len(),
            Dom::Win { len, .. } => *len,
        }
    }

    fn values(&self, d: &Dom) -> Vec<u64> {
        match d {
            Dom::Ex(v) => v.clone(),
            Dom::Win { id, removed, .. } => {
                let w = &self.windows[*id as usize];
                let mut out = Vec::new();
                for x in w.lo.x..=w.hi.x {
                    for y in w.lo.y..=w.hi.y {
                        for z in w.lo.z..=w.hi.z {
                            let p = Point::new(x, y, z);
                            if self.lattice.is_member(p) {
                                let k = p.pack();
                                if w.exclude.binary_search(&k).is_err() && !removed.contains(&k) {
                                    out.push(k);
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }

    fn has_support(&self, key: u64, other: &Dom) -> bool {
        self.deltas.iter().any(|&d| self.contains(other, key.wrapping_add(d)))
    }

    /// Removes unsupported values of `x` w.r.t. `y`. Returns whether `x`
    /// changed; `None` means the pair was left for later (both implicit).
    fn revise(&self, st: &mut State, x: Var, y: Var) -> Option<bool> {
        let (dx, dy) = (&st.doms[x], &st.doms[y]);
        let new = match (dx, dy) {
            (Dom::Win { .. }, Dom::Win { .. }) => return None,
            (Dom::Win { .. }, Dom::Ex(ys)) => {
                let mut v: Vec<u64> = Vec::with_capacity(ys.len() * self.deltas.len());
                for &k in ys {
                    for &d in &self.deltas {
                        let q = k.wrapping_add(d);
                        if self.contains(dx, q) {
                            v.push(q);
                        }
                    }
                }
                v.sort_unstable();
                v.dedup();
                v
            }
            (Dom::Ex(xs), _) => {
                let keep: Vec<u64> =
                    xs.iter().copied().filter(|&k| self.has_support(k, dy)).collect();
                if keep.len() == xs.len() {
                    return Some(false);
                }
                keep
            }
        };
        let changed = new.len() != Self::len(&st.doms[x]);
        st.doms[x] = Dom::Ex(new);
        Some(changed)
    }

    /// Distance-bound revision of `x` against `y`; only between explicit
    /// domains, otherwise `None`.
    fn revise_within(&self, st: &mut State, x: Var, y: Var, d: u32) -> Option<bool> {
        let (Dom::Ex(xs), Dom::Ex(ys)) = (&st.doms[x], &st.doms[y]) else { return None };
        let ys: Vec<Point> = ys.iter().map(|&k| Point::unpack(k)).collect();
        let keep: Vec<u64> = xs
            .iter()
            .copied()
            .filter(|&k| {
                let p = Point::unpack(k);
                ys.iter().any(|&q| self.lattice.graph_distance(p, q) <= d)
            })
            .collect();
        if keep.len() == xs.len() {
            return Some(false);
        }
        st.doms[x] = Dom::Ex(keep);
        Some(true)
    }

    fn remove_value(&self, st: &mut State, v: Var, key: u64) -> bool {
        match &mut st.doms[v] {
            Dom::Ex(vals) => match vals.binary_search(&key) {
                Ok(i) => {
                    vals.remove(i);
                    true
                }
                Err(_) => false,
            },
            Dom::Win { id, removed, len } => {
                if self.win_contains(*id, removed, key) {
                    removed.push(key);
                    *len -= 1;
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Propagates to a fixpoint. `touched` seeds the queue (all variables
    /// when `None`). Returns false on a wipe-out.
    fn propagate(&self, st: &mut State, touched: Option<Var>) -> bool {
        let n = st.doms.len();
        let mut queued = vec![false; n];
        let mut queue: std::collections::VecDeque<Var> = match touched {
            Some(v) => {
                queued[v] = true;
                [v].into()
            }
            None => {
                queued.iter_mut().for_each(|q| *q = true);
                (0..n).collect()
            }
        };
        loop {
            while let Some(v) = queue.pop_front() {
                queued[v] = false;
                if Self::len(&st.doms[v]) == 0 {
                    return false;
                }
                for &u in &self.partners[v] {
                    if let Some(true) = self.revise(st, u, v) {
                        if Self::len(&st.doms[u]) == 0 {
                            return false;
                        }
                        if !queued[u] {
                            queued[u] = true;
                            queue.push_back(u);
                        }
                    }
                }
                for &(u, d) in &self.within[v] {
                    if let Some(true) = self.revise_within(st, u, v, d) {
                        if Self::len(&st.doms[u]) == 0 {
                            return false;
                        }
                        if !queued[u] {
                            queued[u] = true;
                            queue.push_back(u);
                        }
                    }
                }
                if let Dom::Ex(vals) = &st.doms[v] {
                    if vals.len() == 1 {
                        let key = vals[0];
                        for &g in &self.groups_of[v] {
                            for &u in &self.groups[g] {
                                if u != v && self.remove_value(st, u, key) {
                                    if Self::len(&st.doms[u]) == 0 {
                                        return false;
                                    }
                                    if !queued[u] {
                                        queued[u] = true;
                                        queue.push_back(u);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            // Neighbour pairs of two implicit domains and distance bounds on
            // an implicit domain are skipped above; if any survive,
            // materialize one side and continue.
            let pending = (0..n).find(|&v| {
                matches!(st.doms[v], Dom::Win { .. })
                    && (!self.within[v].is_empty()
                        || self.partners[v].iter().any(|&u| matches!(st.doms[u], Dom::Win { .. })))
            });
            match pending {
                Some(v) => {
                    st.doms[v] = Dom::Ex(self.values(&st.doms[v]));
                    queued[v] = true;
                    queue.push_back(v);
                }
                None => return self.groups_matchable(st),
            }
        }
    }

    /// Whether every all-different group still admits distinct values.
    /// Variables whose domain is at least as large as the group can always
    /// be matched last, so only the smaller domains take part.
    fn groups_matchable(&self, st: &State) -> bool {
        self.groups.iter().all(|g| {
            let small: Vec<&[u64]> = g
                .iter()
                .filter_map(|&v| match &st.doms[v] {
                    Dom::Ex(vals) if vals.len() < g.len() => Some(vals.as_slice()),
                    _ => None,
                })
                .collect();
            has_matching(&small)
        })
    }

    fn assign(&self, st: &mut State, v: Var, key: u64) {
        st.doms[v] = Dom::Ex(vec![key]);
    }

    fn select(&self, st: &State, branch_only: bool) -> Option<Var> {
        let mut best: Option<(usize, Var)> = None;
        for (v, d) in st.doms.iter().enumerate() {
            if branch_only && !self.in_branch[v] {
                continue;
            }
            let l = Self::len(d);
            if l > 1 && best.is_none_or(|(bl, _)| l < bl) {
                best = Some((l, v));
            }
        }
        best.map(|(_, v)| v)
    }

    fn unfixed(&self, st: &State) -> usize {
        st.doms.iter().filter(|d| Self::len(d) > 1).count()
    }

    fn solution(&self, st: &State) -> Solution {
        Solution {
            values: st
                .doms
                .iter()
                .map(|d| match d {
                    Dom::Ex(v) => Point::unpack(v[0]),
                    Dom::Win { .. } => Point::unpack(self.values(d)[0]),
                })
                .collect(),
        }
    }
}

/// Kuhn's augmenting-path test for a system of distinct representatives.
fn has_matching(domains: &[&[u64]]) -> bool {
    fn augment(
        v: usize,
        domains: &[&[u64]],
        owner: &mut std::collections::HashMap<u64, usize>,
        seen: &mut std::collections::HashSet<u64>,
    ) -> bool {
        for &k in domains[v] {
            if seen.insert(k) {
                let free = match owner.get(&k) {
                    None => true,
                    Some(&w) => augment(w, domains, owner, seen),
                };
                if free {
                    owner.insert(k, v);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = std::collections::HashMap::new();
    let mut seen = std::collections::HashSet::new();
    (0..domains.len()).all(|v| {
        seen.clear();
        augment(v, domains, &mut owner, &mut seen)
    })
}

fn box_size(lattice: &Lattice, w: &Window) -> usize {
    let mut count = 0usize;
    let member_count = |x: i32, y: i32| -> usize {
        let zs = w.hi.z - w.lo.z + 1;
        if zs <= 0 {
            return 0;
        }
        match lattice.kind() {
            LatticeKind::Cubic => zs as usize,
            LatticeKind::Sqr => usize::from(w.lo.z <= 0 && 0 <= w.hi.z),
            LatticeKind::Fcc => (w.lo.z..=w.hi.z).filter(|z| (x + y + z) % 2 == 0).count(),
        }
    };
    for x in w.lo.x..=w.hi.x {
        for y in w.lo.y..=w.hi.y {
            count += member_count(x, y);
        }
    }
    let excluded_inside = w
        .exclude
        .iter()
        .map(|&k| Point::unpack(k))
        .filter(|p| {
            lattice.is_member(*p)
                && (w.lo.x..=w.hi.x).contains(&p.x)
                && (w.lo.y..=w.hi.y).contains(&p.y)
                && (w.lo.z..=w.hi.z).contains(&p.z)
        })
        .count();
    count - excluded_inside
}

type Emit<'e> = &'e mut dyn FnMut(&Solution) -> ControlFlow<()>;

struct Run<'e, 'a> {
    engine: &'e Engine<'a>,
    mode: Mode,
    stats: SearchStats,
    found: u64,
    cutoff_hit: bool,
    emit: Emit<'e>,
}

impl Run<'_, '_> {
    /// `st` is already propagated. `phase_one` is true while restricted
    /// mode is still branching on the branch set.
    fn search(&mut self, mut st: State, depth: u64, phase_one: bool) -> ControlFlow<()> {
        self.stats.nodes_expanded += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let eng = self.engine;

        if let Mode::Count { cutoff } = self.mode {
            match eng.unfixed(&st) {
                0 => return self.count(1, cutoff),
                1 => {
                    let v = eng.select(&st, false).expect("one unfixed variable");
                    return self.count(Engine::len(&st.doms[v]) as u64, cutoff);
                }
                _ => {}
            }
        }

        let var = if phase_one {
            match eng.select(&st, true) {
                Some(v) => Some(v),
                None => return self.finish_restricted(st, depth),
            }
        } else {
            eng.select(&st, false)
        };
        let Some(var) = var else {
            return self.emit_solution(&st);
        };

        if let Dom::Win { .. } = st.doms[var] {
            st.doms[var] = Dom::Ex(eng.values(&st.doms[var]));
        }
        loop {
            let Dom::Ex(vals) = &st.doms[var] else { unreachable!("branch domain is explicit") };
            let d = vals[0];
            let last = vals.len() == 1;
            let mut child = st.clone();
            eng.assign(&mut child, var, d);
            if eng.propagate(&mut child, Some(var)) {
                self.search(child, depth + 1, phase_one)?;
            } else {
                self.stats.nodes_expanded += 1;
            }
            if last {
                break;
            }
            // X != d branch.
            eng.remove_value(&mut st, var, d);
            if !eng.propagate(&mut st, Some(var)) {
                break;
            }
        }
        ControlFlow::Continue(())
    }

    fn count(&mut self, k: u64, cutoff: u64) -> ControlFlow<()> {
        self.found += k;
        if self.found >= cutoff {
            self.found = cutoff;
            self.cutoff_hit = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    }

    fn emit_solution(&mut self, st: &State) -> ControlFlow<()> {
        let sol = self.engine.solution(st);
        self.found += 1;
        self.stats.solutions_emitted += 1;
        (self.emit)(&sol)?;
        if self.mode == Mode::First {
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    }

    /// Satisfiability search over the non-branch variables.
    fn finish_restricted(&mut self, st: State, depth: u64) -> ControlFlow<()> {
        let mut found: Option<Solution> = None;
        {
            let mut first = |s: &Solution| {
                found = Some(s.clone());
                ControlFlow::Break(())
            };
            let mut sub = Run {
                engine: self.engine,
                mode: Mode::First,
                stats: SearchStats::default(),
                found: 0,
                cutoff_hit: false,
                emit: &mut first,
            };
            let _ = sub.search(st, depth, false);
            // The sub-run's root node is this node; avoid counting it twice.
            sub.stats.nodes_expanded -= 1;
            sub.stats.solutions_emitted = 0;
            self.stats.absorb(&sub.stats);
        }
        match found {
            Some(sol) => {
                self.found += 1;
                self.stats.solutions_emitted += 1;
                (self.emit)(&sol)
            }
            None => ControlFlow::Continue(()),
        }
    }
}
