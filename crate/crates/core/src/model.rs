//! HP sequences, backbone and side-chain structures, the two contact energy
//! functions and the H-placement equivalence relations.
//!
//! Monomer positions in the public API are 0-based slice indices; positions
//! reported in parse errors and validation violations are 1-based, matching
//! how sequences are usually written.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Monomer {
    H,
    P,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty sequence")]
    Empty,
    #[error("invalid monomer `{found}` at position {position} (expected H or P)")]
    InvalidMonomer { position: usize, found: char },
}

/// An HP sequence together with its derived H statistics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HpSequence {
    monomers: Vec<Monomer>,
    h_indices: Vec<usize>,
    consecutive_hh: usize,
}

impl HpSequence {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        if text.is_empty() {
            return Err(ParseError::Empty);
        }
        let monomers = text
            .chars()
            .enumerate()
            .map(|(i, c)| match c.to_ascii_uppercase() {
                'H' => Ok(Monomer::H),
                'P' => Ok(Monomer::P),
                _ => Err(ParseError::InvalidMonomer { position: i + 1, found: c }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_monomers(monomers))
    }

    /// # Panics
    /// If `monomers` is empty.
    pub fn from_monomers(monomers: Vec<Monomer>) -> Self {
        assert!(!monomers.is_empty(), "an HP sequence has at least one monomer");
        let h_indices = monomers
            .iter()
            .enumerate()
            .filter(|(_, m)| **m == Monomer::H)
            .map(|(i, _)| i)
            .collect();
        let consecutive_hh =
            monomers.windows(2).filter(|w| w[0] == Monomer::H && w[1] == Monomer::H).count();
        HpSequence { monomers, h_indices, consecutive_hh }
    }

    pub fn len(&self) -> usize {
        self.monomers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn monomers(&self) -> &[Monomer] {
        &self.monomers
    }

    pub fn is_h(&self, i: usize) -> bool {
        self.monomers[i] == Monomer::H
    }

    pub fn n_h(&self) -> usize {
        self.h_indices.len()
    }

    /// 0-based indices of the H monomers, ascending.
    pub fn h_indices(&self) -> &[usize] {
        &self.h_indices
    }

    /// Number of `i` with `S_i = S_{i+1} = H`.
    pub fn consecutive_hh(&self) -> usize {
        self.consecutive_hh
    }
}

impl FromStr for HpSequence {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HpSequence::parse(s)
    }
}

impl fmt::Display for HpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.monomers {
            f.write_str(match m {
                Monomer::H => "H",
                Monomer::P => "P",
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "bb")]
    Backbone,
    #[serde(rename = "sc")]
    SideChain,
}

impl ModelKind {
    pub fn code(self) -> &'static str {
        match self {
            ModelKind::Backbone => "bb",
            ModelKind::SideChain => "sc",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bb" | "backbone" => Ok(ModelKind::Backbone),
            "sc" | "sidechain" => Ok(ModelKind::SideChain),
            other => Err(format!("unknown model `{other}` (expected bb or sc)")),
        }
    }
}

/// A backbone-only conformation `C_1..C_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BackboneStructure {
    pub points: Vec<Point>,
}

/// A side-chain conformation: backbone `C^b` plus one side chain `C^s_i`
/// attached to every backbone monomer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideChainStructure {
    pub backbone: Vec<Point>,
    pub side_chains: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    Backbone(BackboneStructure),
    SideChain(SideChainStructure),
}

impl Structure {
    pub fn kind(&self) -> ModelKind {
        match self {
            Structure::Backbone(_) => ModelKind::Backbone,
            Structure::SideChain(_) => ModelKind::SideChain,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Structure::Backbone(b) => b.points.len(),
            Structure::SideChain(s) => s.backbone.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Positions that carry energy for H monomers: `C_i` for backbone
    /// structures, `C^s_i` for side-chain structures.
    pub fn h_sites(&self, seq: &HpSequence) -> Vec<Point> {
        let pts = match self {
            Structure::Backbone(b) => &b.points,
            Structure::SideChain(s) => &s.side_chains,
        };
        seq.h_indices().iter().map(|&i| pts[i]).collect()
    }
}

/// A contact energy: the negated number of counted HH contacts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Energy(pub i32);

impl Energy {
    pub fn from_contacts(contacts: i64) -> Self {
        debug_assert!(contacts >= 0);
        Energy(-(contacts as i32))
    }

    pub fn value(self) -> i32 {
        self.0
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A monomer site, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Backbone(usize),
    SideChain(usize),
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Backbone(i) => write!(f, "{i}"),
            Site::SideChain(i) => write!(f, "s{i}"),
        }
    }
}

/// One structural defect. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `C_i` and `C_{i+1}` are not neighbours.
    Connectivity { index: usize },
    SelfAvoidance { first: Site, second: Site },
    LatticeMembership { site: Site },
    /// Side chain `i` is not a neighbour of backbone monomer `i`.
    SideChainAttachment { index: usize },
    LengthMismatch { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Connectivity { index } => {
                write!(f, "connectivity: monomers {index} and {} are not neighbours", index + 1)
            }
            Violation::SelfAvoidance { first, second } => {
                write!(f, "self-avoidance: sites {first} and {second} coincide")
            }
            Violation::LatticeMembership { site } => {
                write!(f, "lattice-membership: site {site} is not a lattice point")
            }
            Violation::SideChainAttachment { index } => {
                write!(f, "side-chain-attachment: side chain {index} is not bound to its backbone")
            }
            Violation::LengthMismatch { expected, found } => {
                write!(f, "length-mismatch: sequence has {expected} monomers, structure has {found}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("OK");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid structure: {0}")]
    Invalid(ValidationReport),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("structure kind does not match the requested model")]
    KindMismatch,
}

fn check_walk(
    lattice: &Lattice,
    points: &[Point],
    site: fn(usize) -> Site,
    out: &mut Vec<Violation>,
) {
    for (i, &p) in points.iter().enumerate() {
        if !p.in_range() || !lattice.is_member(p) {
            out.push(Violation::LatticeMembership { site: site(i + 1) });
        }
    }
    for (i, w) in points.windows(2).enumerate() {
        if !lattice.adjacent(w[0], w[1]) {
            out.push(Violation::Connectivity { index: i + 1 });
        }
    }
}

fn check_distinct(sites: &[(Site, Point)], out: &mut Vec<Violation>) {
    let mut first_seen: HashMap<Point, Site> = HashMap::with_capacity(sites.len());
    for &(site, p) in sites {
        match first_seen.get(&p) {
            Some(&earlier) => out.push(Violation::SelfAvoidance { first: earlier, second: site }),
            None => {
                first_seen.insert(p, site);
            }
        }
    }
}

/// Full list of violations of a structure for a sequence on a lattice.
pub fn validate_structure(
    seq: &HpSequence,
    structure: &Structure,
    lattice: &Lattice,
) -> ValidationReport {
    let mut violations = Vec::new();
    match structure {
        Structure::Backbone(b) => {
            if b.points.len() != seq.len() {
                violations.push(Violation::LengthMismatch {
                    expected: seq.len(),
                    found: b.points.len(),
                });
            }
            check_walk(lattice, &b.points, Site::Backbone, &mut violations);
            let sites: Vec<_> =
                b.points.iter().enumerate().map(|(i, &p)| (Site::Backbone(i + 1), p)).collect();
            check_distinct(&sites, &mut violations);
        }
        Structure::SideChain(s) => {
            let n = s.backbone.len();
            if n != seq.len() || s.side_chains.len() != seq.len() {
                violations.push(Violation::LengthMismatch {
                    expected: seq.len(),
                    found: n.max(s.side_chains.len()),
                });
            }
            check_walk(lattice, &s.backbone, Site::Backbone, &mut violations);
            for (i, &p) in s.side_chains.iter().enumerate() {
                if !p.in_range() || !lattice.is_member(p) {
                    violations.push(Violation::LatticeMembership { site: Site::SideChain(i + 1) });
                }
            }
            for (i, (&b, &sc)) in s.backbone.iter().zip(&s.side_chains).enumerate() {
                if !lattice.adjacent(b, sc) {
                    violations.push(Violation::SideChainAttachment { index: i + 1 });
                }
            }
            let mut sites = Vec::with_capacity(2 * n);
            for i in 0..n.max(s.side_chains.len()) {
                if let Some(&b) = s.backbone.get(i) {
                    sites.push((Site::Backbone(i + 1), b));
                }
                if let Some(&sc) = s.side_chains.get(i) {
                    sites.push((Site::SideChain(i + 1), sc));
                }
            }
            check_distinct(&sites, &mut violations);
        }
    }
    ValidationReport { violations }
}

fn ensure_valid(seq: &HpSequence, s: &Structure, lattice: &Lattice) -> Result<(), ModelError> {
    let report = validate_structure(seq, s, lattice);
    if report.is_ok() {
        Ok(())
    } else {
        Err(ModelError::Invalid(report))
    }
}

/// Backbone energy: minus the number of non-consecutive HH neighbour pairs.
pub fn energy_backbone(
    seq: &HpSequence,
    structure: &BackboneStructure,
    lattice: &Lattice,
) -> Result<Energy, ModelError> {
    ensure_valid(seq, &Structure::Backbone(structure.clone()), lattice)?;
    Ok(energy_backbone_unchecked(seq, &structure.points, lattice))
}

pub(crate) fn energy_backbone_unchecked(
    seq: &HpSequence,
    points: &[Point],
    lattice: &Lattice,
) -> Energy {
    let h = seq.h_indices();
    let mut contacts = 0i64;
    for (a, &i) in h.iter().enumerate() {
        for &j in &h[a + 1..] {
            if i + 1 < j && lattice.adjacent(points[i], points[j]) {
                contacts += 1;
            }
        }
    }
    Energy::from_contacts(contacts)
}

/// Side-chain energy: minus the number of HH side-chain neighbour pairs.
/// Consecutive residues count.
pub fn energy_side_chain(
    seq: &HpSequence,
    structure: &SideChainStructure,
    lattice: &Lattice,
) -> Result<Energy, ModelError> {
    ensure_valid(seq, &Structure::SideChain(structure.clone()), lattice)?;
    Ok(energy_side_chain_unchecked(seq, &structure.side_chains, lattice))
}

pub(crate) fn energy_side_chain_unchecked(
    seq: &HpSequence,
    side_chains: &[Point],
    lattice: &Lattice,
) -> Energy {
    let h = seq.h_indices();
    let mut contacts = 0i64;
    for (a, &i) in h.iter().enumerate() {
        for &j in &h[a + 1..] {
            if lattice.adjacent(side_chains[i], side_chains[j]) {
                contacts += 1;
            }
        }
    }
    Energy::from_contacts(contacts)
}

pub fn energy(seq: &HpSequence, s: &Structure, lattice: &Lattice) -> Result<Energy, ModelError> {
    match s {
        Structure::Backbone(b) => energy_backbone(seq, b, lattice),
        Structure::SideChain(sc) => energy_side_chain(seq, sc, lattice),
    }
}

/// `C ~H D`: identical H monomer positions (literal equality).
pub fn equiv_backbone(
    seq: &HpSequence,
    c: &BackboneStructure,
    d: &BackboneStructure,
) -> Result<bool, ModelError> {
    if c.points.len() != seq.len() || d.points.len() != seq.len() {
        return Err(ModelError::LengthMismatch(c.points.len(), d.points.len()));
    }
    Ok(seq.h_indices().iter().all(|&i| c.points[i] == d.points[i]))
}

/// `X ≈H Y`: identical H side-chain positions; backbones and P side chains
/// are ignored.
pub fn equiv_side_chain(
    seq: &HpSequence,
    x: &SideChainStructure,
    y: &SideChainStructure,
) -> Result<bool, ModelError> {
    if x.side_chains.len() != seq.len() || y.side_chains.len() != seq.len() {
        return Err(ModelError::LengthMismatch(x.side_chains.len(), y.side_chains.len()));
    }
    Ok(seq.h_indices().iter().all(|&i| x.side_chains[i] == y.side_chains[i]))
}

pub fn equivalent(seq: &HpSequence, a: &Structure, b: &Structure) -> Result<bool, ModelError> {
    match (a, b) {
        (Structure::Backbone(x), Structure::Backbone(y)) => equiv_backbone(seq, x, y),
        (Structure::SideChain(x), Structure::SideChain(y)) => equiv_side_chain(seq, x, y),
        _ => Err(ModelError::KindMismatch),
    }
}
