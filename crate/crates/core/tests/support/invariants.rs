//! Strategies and checks shared by the property suite and the acceptance
//! run.

use std::collections::HashSet;

use hpkit::cores::{CoreDatabase, CoreLayer, HCore};
use hpkit::lattice::{LatticeKind, Point};
use hpkit::model::{
    energy, equivalent, validate_structure, BackboneStructure, HpSequence, ModelKind, Monomer, SideChainStructure,
    Structure,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn lattice_kind() -> impl Strategy<Value = LatticeKind> {
    prop_oneof![Just(LatticeKind::Cubic), Just(LatticeKind::Fcc), Just(LatticeKind::Sqr)]
}

pub fn model_kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Backbone), Just(ModelKind::SideChain)]
}

/// A sequence and a valid structure for it, grown by a self-avoiding random
/// walk. The walk stops early when it traps itself, so the sequence may be
/// shorter than requested.
#[derive(Clone, Debug)]
pub struct Folded {
    pub lattice: LatticeKind,
    pub seq: HpSequence,
    pub structure: Structure,
}

pub fn grow(lattice: LatticeKind, model: ModelKind, hp: &[bool], choices: &[u8]) -> Folded {
    let lat = lattice.lattice();
    let dirs = lat.neighbor_vectors();
    let mut used: HashSet<Point> = HashSet::new();
    let mut picks = choices.iter().copied().cycle();
    let mut pick_free = |from: Point, used: &HashSet<Point>| -> Option<Point> {
        let free: Vec<Point> = dirs.iter().map(|&d| from + d).filter(|p| !used.contains(p)).collect();
        (!free.is_empty()).then(|| free[picks.next().unwrap_or(0) as usize % free.len()])
    };
    let mut backbone = vec![Point::ORIGIN];
    let mut sides = Vec::new();
    used.insert(Point::ORIGIN);
    loop {
        let here = *backbone.last().expect("nonempty");
        if model == ModelKind::SideChain {
            match pick_free(here, &used) {
                Some(s) => {
                    used.insert(s);
                    sides.push(s);
                }
                None => {
                    used.remove(&here);
                    backbone.pop();
                    break;
                }
            }
        }
        if backbone.len() == hp.len() {
            break;
        }
        match pick_free(here, &used) {
            Some(next) => {
                used.insert(next);
                backbone.push(next);
            }
            None => break,
        }
    }
    let n = backbone.len();
    let seq = HpSequence::from_monomers(hp[..n].iter().map(|&h| if h { Monomer::H } else { Monomer::P }).collect());
    let structure = match model {
        ModelKind::Backbone => Structure::Backbone(BackboneStructure { points: backbone }),
        ModelKind::SideChain => Structure::SideChain(SideChainStructure { backbone, side_chains: sides }),
    };
    Folded { lattice, seq, structure }
}

pub fn folded() -> impl Strategy<Value = Folded> {
    (lattice_kind(), model_kind(), prop::collection::vec(any::<bool>(), 1..24), prop::collection::vec(any::<u8>(), 1..48))
        .prop_map(|(lattice, model, hp, choices)| grow(lattice, model, &hp, &choices))
}

/// Energy equals minus (adjacent HH pairs minus consecutive HH pairs) for
/// backbone structures and minus the adjacent H side-chain pairs otherwise.
pub fn check_energy_identity(f: &Folded) -> Result<(), TestCaseError> {
    let lat = f.lattice.lattice();
    prop_assert!(validate_structure(&f.seq, &f.structure, lat).is_ok());
    let sites = f.structure.h_sites(&f.seq);
    let adjacent = lat.count_contacts(&sites) as i32;
    let expected = match f.structure.kind() {
        ModelKind::Backbone => -(adjacent - f.seq.consecutive_hh() as i32),
        ModelKind::SideChain => -adjacent,
    };
    prop_assert_eq!(energy(&f.seq, &f.structure, lat).unwrap().value(), expected);
    Ok(())
}

/// A point set on the lattice plus a random rigid motion of it.
#[derive(Clone, Debug)]
pub struct MovedSet {
    pub lattice: LatticeKind,
    pub points: Vec<Point>,
    pub moved: Vec<Point>,
}

pub fn moved_set() -> impl Strategy<Value = MovedSet> {
    (lattice_kind(), prop::collection::vec(any::<u8>(), 1..40), any::<usize>(), (-5i32..=5, -5i32..=5, -5i32..=5))
        .prop_map(|(lattice, choices, g, (x, y, z))| {
            let lat = lattice.lattice();
            // Random connected-or-not sets: a walk that may revisit points.
            let dirs = lat.neighbor_vectors();
            let mut p = Point::ORIGIN;
            let mut points = vec![p];
            for (i, c) in choices.iter().enumerate() {
                p = p + dirs[*c as usize % dirs.len()];
                if i % 3 == 2 {
                    p = p + dirs[(*c as usize / 7) % dirs.len()];
                }
                points.push(p);
            }
            points.sort_unstable();
            points.dedup();
            let op = &lat.point_group()[g % lat.point_group().len()];
            let mut shift = Point::new(x, y, z);
            if lattice == LatticeKind::Sqr {
                shift.z = 0;
            }
            if lattice == LatticeKind::Fcc && shift.coord_sum() % 2 != 0 {
                shift.x += 1;
            }
            let moved = points.iter().map(|&q| op.apply(q) + shift).collect();
            MovedSet { lattice, points, moved }
        })
}

/// Canonical forms are idempotent and constant on symmetry orbits.
pub fn check_canonical_forms(m: &MovedSet) -> Result<(), TestCaseError> {
    let lat = m.lattice.lattice();
    let canon = lat.canonicalize_point_set(&m.points).unwrap();
    prop_assert_eq!(&lat.canonicalize_point_set(&canon).unwrap(), &canon);
    prop_assert_eq!(&lat.canonicalize_point_set(&m.moved).unwrap(), &canon);
    prop_assert_eq!(lat.count_contacts(&canon), lat.count_contacts(&m.points));
    let key = lat.canonical_tuple(&m.points);
    prop_assert_eq!(&lat.canonical_tuple(&key), &key);
    prop_assert_eq!(&lat.canonical_tuple(&m.moved), &key);
    Ok(())
}

/// Three structures for one sequence, drawn from a small pool so that
/// equivalent pairs are common.
pub fn structure_triple() -> impl Strategy<Value = (HpSequence, [Structure; 3])> {
    (lattice_kind(), model_kind(), prop::collection::vec(any::<bool>(), 3..6), prop::collection::vec(0u8..3, 3))
        .prop_map(|(lattice, model, hp, idx)| {
            // Short walks on a fixed choice pool: several walks share H sites.
            let pool: Vec<Folded> = (0..3u8).map(|k| grow(lattice, model, &hp, &[k, 0, k / 2])).collect();
            let n = pool.iter().map(|f| f.seq.len()).min().expect("three walks");
            let seq = HpSequence::from_monomers(pool[0].seq.monomers()[..n].to_vec());
            let cut = |s: &Structure| match s {
                Structure::Backbone(b) => Structure::Backbone(BackboneStructure { points: b.points[..n].to_vec() }),
                Structure::SideChain(s) => Structure::SideChain(SideChainStructure {
                    backbone: s.backbone[..n].to_vec(),
                    side_chains: s.side_chains[..n].to_vec(),
                }),
            };
            let pick = |i: u8| cut(&pool[i as usize].structure);
            (seq, [pick(idx[0]), pick(idx[1]), pick(idx[2])])
        })
}

/// Reflexivity, symmetry and transitivity of H-equivalence.
pub fn check_equivalence_laws(seq: &HpSequence, s: &[Structure; 3]) -> Result<(), TestCaseError> {
    let eq = |a: &Structure, b: &Structure| equivalent(seq, a, b).unwrap();
    for a in s {
        prop_assert!(eq(a, a));
        for b in s {
            prop_assert_eq!(eq(a, b), eq(b, a));
            for c in s {
                if eq(a, b) && eq(b, c) {
                    prop_assert!(eq(a, c));
                }
            }
        }
    }
    Ok(())
}

/// A small database of random cores plus a byte position to corrupt.
#[derive(Clone, Debug)]
pub struct DbCase {
    pub db: CoreDatabase,
    pub flip_at: usize,
    pub flip_to: u8,
}

pub fn db_case() -> impl Strategy<Value = DbCase> {
    (
        lattice_kind(),
        prop::collection::vec(prop::collection::vec(any::<u8>(), 0..8), 1..5),
        any::<usize>(),
        any::<u8>(),
    )
        .prop_map(|(lattice, entries, flip_at, flip_to)| {
            let lat = lattice.lattice();
            let dirs = lat.neighbor_vectors();
            let mut db = CoreDatabase::new(lattice, 0);
            for choices in entries {
                let mut pts = vec![Point::ORIGIN];
                let mut p = Point::ORIGIN;
                for c in choices {
                    p = p + dirs[c as usize % dirs.len()];
                    if !pts.contains(&p) {
                        pts.push(p);
                    }
                }
                let n_h = pts.len();
                let core = HCore::new(lat, &pts).unwrap();
                let layer = CoreLayer { layer: 0, contacts: core.contacts, cores: vec![core] };
                db.insert(n_h, vec![layer]);
            }
            DbCase { db, flip_at, flip_to }
        })
}

/// Text round trip is lossless and any single-byte change is rejected.
pub fn check_db_round_trip(c: &DbCase) -> Result<(), TestCaseError> {
    let text = c.db.to_text();
    prop_assert_eq!(&CoreDatabase::from_text(&text).unwrap(), &c.db);
    let mut bytes = text.clone().into_bytes();
    let at = c.flip_at % bytes.len();
    let replacement = if c.flip_to == bytes[at] { c.flip_to.wrapping_add(1) } else { c.flip_to };
    bytes[at] = replacement;
    match String::from_utf8(bytes) {
        Ok(tampered) => prop_assert!(CoreDatabase::from_text(&tampered).is_err()),
        Err(_) => {}
    }
    prop_assert!(CoreDatabase::from_text(&text[..text.len() - 2 - c.flip_at % 8]).is_err());
    Ok(())
}
