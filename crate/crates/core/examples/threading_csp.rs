//! Threads a sequence onto its cores layer by layer, stopping at the first
//! layer that admits a threading, and compares restricted search (one
//! solution per H placement) with full enumeration.

use hpkit::cores::{enumerate_cores, CoreLimits};
use hpkit::lattice::LatticeKind;
use hpkit::model::{HpSequence, ModelKind};
use hpkit::predict::build_threading_csp;
use hpkit::solver::{solve, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq: HpSequence = "HPHPPHHPHPPH".parse()?;
    let lattice = LatticeKind::Cubic;
    for k in 0..4 {
        let layer = enumerate_cores(lattice, seq.n_h(), k, &CoreLimits::default())?;
        println!("layer {k}: {} cores with {} contacts", layer.cores.len(), layer.contacts);
        let mut threaded = false;
        for core in &layer.cores {
            let problem = build_threading_csp(&seq, core, ModelKind::Backbone, lattice, None)?;
            let (all, all_report) = solve(&problem.csp, Mode::All)?;
            let (reps, rep_report) = solve(&problem.csp, Mode::Restricted)?;
            println!(
                "  {:?}: {} threadings ({} nodes), {} H placements ({} nodes)",
                core.points.iter().map(|p| (p.x, p.y, p.z)).collect::<Vec<_>>(),
                all.len(),
                all_report.stats.nodes_expanded,
                reps.len(),
                rep_report.stats.nodes_expanded
            );
            threaded |= !all.is_empty();
        }
        if threaded {
            break;
        }
    }
    Ok(())
}
