//! Frozen reference values computed by the exhaustive oracle, checked
//! against both the oracle and the core-directed predictor.

use hpkit::cores::{enumerate_cores, max_contacts, CoreDatabase, CoreLimits};
use hpkit::lattice::{LatticeKind, Point};
use hpkit::model::{Energy, HpSequence, ModelKind};
use hpkit::oracle::{brute_force_optimal, enumerate_saws, OracleLimits, OracleOptions};
use hpkit::predict::{predict, PredictMode, PredictOptions, Status};
use hpkit::solver::Count;

/// (sequence, lattice, model, energy, degeneracy, core-degeneracy)
const CASES: &[(&str, LatticeKind, ModelKind, i32, u64, u64)] = &[
    ("HPPH", LatticeKind::Cubic, ModelKind::Backbone, -1, 1, 1),
    ("HPPH", LatticeKind::Sqr, ModelKind::Backbone, -1, 1, 1),
    ("HHPPHH", LatticeKind::Cubic, ModelKind::Backbone, -2, 2, 1),
    ("HHPPHH", LatticeKind::Sqr, ModelKind::Backbone, -2, 1, 1),
    ("HPHPPHHPHPPH", LatticeKind::Cubic, ModelKind::Backbone, -5, 122, 38),
    ("HPHPPHHPHPPH", LatticeKind::Sqr, ModelKind::Backbone, -5, 2, 2),
    ("PHPPHPHHHP", LatticeKind::Cubic, ModelKind::Backbone, -3, 80, 5),
    ("PHPPHPHHHP", LatticeKind::Sqr, ModelKind::Backbone, -3, 2, 1),
    ("HPPH", LatticeKind::Fcc, ModelKind::Backbone, -1, 6, 1),
    ("HPHPH", LatticeKind::Fcc, ModelKind::Backbone, -3, 8, 1),
    ("HHPPHH", LatticeKind::Fcc, ModelKind::Backbone, -4, 12, 1),
    ("HPPH", LatticeKind::Cubic, ModelKind::SideChain, -1, 80, 1),
    ("HPHPH", LatticeKind::Cubic, ModelKind::SideChain, 0, 19402, 154),
    ("HHPPHH", LatticeKind::Cubic, ModelKind::SideChain, -4, 56, 1),
];

#[test]
fn oracle_reference_values() {
    for &(s, lattice, model, e, deg, core) in CASES {
        let seq = HpSequence::parse(s).unwrap();
        let r = brute_force_optimal(&seq, lattice, model, OracleOptions::default(), &OracleLimits::default()).unwrap();
        assert_eq!((r.optimal_energy, r.degeneracy, r.core_degeneracy), (Energy(e), deg, core), "{s} {lattice} {model}");
        assert_eq!(r.classes.iter().map(|c| c.size).sum::<u64>(), r.degeneracy);
    }
}

#[test]
fn predictor_reproduces_reference_values() {
    for &(s, lattice, model, e, deg, core) in CASES {
        let seq = HpSequence::parse(s).unwrap();
        let db = CoreDatabase::build(lattice, [seq.n_h()], 4, &CoreLimits::default()).unwrap().db;
        let options = PredictOptions { mode: PredictMode::Count, ..PredictOptions::default() };
        let r = predict(&seq, lattice, model, &db, options).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!(r.certified, "{s} {lattice} {model}");
        assert_eq!(
            (r.energy, r.degeneracy, r.core_degeneracy),
            (Energy(e), Some(Count::Exact(deg)), Some(Count::Exact(core))),
            "{s} {lattice} {model}"
        );
    }
}

#[test]
fn symmetry_reduced_walk_counts() {
    let lim = OracleLimits::default();
    let count = |n, kind| enumerate_saws(n, kind, true, &lim, |_| {}).unwrap();
    assert_eq!(count(1, LatticeKind::Cubic), 1);
    assert_eq!(count(2, LatticeKind::Cubic), 1);
    assert_eq!(count(3, LatticeKind::Cubic), 2);
    assert_eq!(count(4, LatticeKind::Cubic), 6);
    assert_eq!(count(6, LatticeKind::Cubic), 92);
    assert_eq!(count(8, LatticeKind::Cubic), 1832);
    assert_eq!(count(10, LatticeKind::Cubic), 39640);
}

#[test]
fn maximal_contacts() {
    let lim = CoreLimits::default();
    let cubic: Vec<u32> = (1..=14).map(|n| max_contacts(LatticeKind::Cubic, n, &lim).unwrap()).collect();
    assert_eq!(cubic, [0, 1, 2, 4, 5, 7, 9, 12, 13, 15, 17, 20, 21, 23]);
    let fcc: Vec<u32> = (1..=14).map(|n| max_contacts(LatticeKind::Fcc, n, &lim).unwrap()).collect();
    assert_eq!(fcc, [0, 1, 3, 6, 8, 12, 15, 18, 21, 25, 28, 32, 36, 40]);
    let sqr: Vec<u32> = (1..=9).map(|n| max_contacts(LatticeKind::Sqr, n, &lim).unwrap()).collect();
    assert_eq!(sqr, [0, 1, 2, 4, 5, 7, 8, 10, 12]);
}

#[test]
fn small_core_layers() {
    let lim = CoreLimits::default();
    let layer = |n, k| enumerate_cores(LatticeKind::Cubic, n, k, &lim).unwrap();
    assert_eq!(layer(2, 0).cores.len(), 1);
    let three = layer(3, 0);
    assert_eq!((three.contacts, three.cores.len()), (2, 2));
    let square = [Point::new(0, 0, 0), Point::new(0, 1, 0), Point::new(1, 0, 0), Point::new(1, 1, 0)];
    let four = layer(4, 0);
    assert_eq!(four.contacts, 4);
    let canon = LatticeKind::Cubic.lattice().canonicalize_point_set(&square).unwrap();
    assert!(four.cores.iter().any(|c| c.points == canon));
}
