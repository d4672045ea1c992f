//! Optimal energy, degeneracy and core-degeneracy of a sequence.
//!
//! cargo run --release --example predict_energy -- HPHPPHHPHPPH cubic bb

use hpkit::cores::{CoreDatabase, CoreLimits};
use hpkit::lattice::LatticeKind;
use hpkit::model::{HpSequence, ModelKind};
use hpkit::predict::{predict, PredictMode, PredictOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seq: HpSequence = args.next().as_deref().unwrap_or("HPHPPHHPHPPH").parse()?;
    let lattice: LatticeKind = args.next().as_deref().unwrap_or("cubic").parse()?;
    let model: ModelKind = args.next().as_deref().unwrap_or("bb").parse()?;

    let db = CoreDatabase::build(lattice, [seq.n_h()], 4, &CoreLimits::default())?.db;
    let options = PredictOptions { mode: PredictMode::Count, ..PredictOptions::default() };
    let r = predict(&seq, lattice, model, &db, options)?;

    println!("{seq} on {lattice} ({model})");
    println!("status          {:?}", r.status);
    println!("energy          {}", r.energy);
    println!("degeneracy      {:?}", r.degeneracy);
    println!("core-degeneracy {:?}", r.core_degeneracy);
    println!("layer           {} ({} cores threaded)", r.layers_descended, r.threaded_core_count);
    if let Some(s) = &r.structure {
        println!("structure       {}", hpkit::cli::codec::encode(s, lattice)?);
    }
    Ok(())
}
