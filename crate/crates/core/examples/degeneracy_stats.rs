//! Degeneracy versus core-degeneracy over random sequences.

use hpkit::cli::stats::{run_stats, StatsConfig};
use hpkit::cores::{CoreDatabase, CoreLimits};
use hpkit::lattice::LatticeKind;
use hpkit::model::ModelKind;
use hpkit::predict::PredictOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = StatsConfig {
        count: 30,
        length: 12,
        lattice: LatticeKind::Cubic,
        model: ModelKind::Backbone,
        seed: 42,
        options: PredictOptions::default(),
        threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let db = CoreDatabase::build(config.lattice, 1..=config.length, 6, &CoreLimits::default())?.db;
    let report = run_stats(&config, &db);
    print!("{}", report.to_text());
    Ok(())
}
