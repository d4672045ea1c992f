//! Exhaustive enumeration of a short chain, listing each equivalence class.

use hpkit::cli::codec::encode;
use hpkit::lattice::LatticeKind;
use hpkit::model::{HpSequence, ModelKind};
use hpkit::oracle::{brute_force_optimal, OracleLimits, OracleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq: HpSequence = std::env::args().nth(1).as_deref().unwrap_or("HPHPPHHPHP").parse()?;
    let lattice = LatticeKind::Cubic;
    let r = brute_force_optimal(&seq, lattice, ModelKind::Backbone, OracleOptions::default(), &OracleLimits::default())?;
    println!("{seq}: energy {}, degeneracy {}, core-degeneracy {}", r.optimal_energy, r.degeneracy, r.core_degeneracy);
    for class in &r.classes {
        println!("{:6} structures, e.g. {}", class.size, encode(&class.member, lattice)?);
    }
    Ok(())
}
