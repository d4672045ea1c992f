//! One optimal structure per equivalence class, each a move string.
//!
//! cargo run --release --example representatives -- HPHPPHHPHP

use hpkit::cli::codec::encode;
use hpkit::cores::{CoreDatabase, CoreLimits};
use hpkit::lattice::LatticeKind;
use hpkit::model::{HpSequence, ModelKind};
use hpkit::predict::{enumerate_representatives, PredictOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq: HpSequence = std::env::args().nth(1).as_deref().unwrap_or("HPHPPHHPHP").parse()?;
    let lattice = LatticeKind::Cubic;
    let db = CoreDatabase::build(lattice, [seq.n_h()], 4, &CoreLimits::default())?.db;
    match enumerate_representatives(&seq, lattice, ModelKind::Backbone, &db, PredictOptions::default())? {
        Some(reps) => {
            println!("{} classes of optimal structures", reps.len());
            for r in &reps {
                println!("{}", encode(r, lattice)?);
            }
        }
        None => println!("optimum lies below the stored core layers"),
    }
    Ok(())
}
