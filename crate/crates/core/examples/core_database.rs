//! Builds H-core layers, saves them, and reads them back.

use hpkit::cores::{is_certified, max_contacts, CoreDatabase, CoreLimits};
use hpkit::lattice::LatticeKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lattice = LatticeKind::Cubic;
    let limits = CoreLimits::default();
    let report = CoreDatabase::build(lattice, 4..=8, 3, &limits)?;
    for n_h in report.db.sizes() {
        let best = max_contacts(lattice, n_h, &limits)?;
        for layer in report.db.layers(n_h).unwrap_or_default() {
            println!(
                "nH {n_h:2} (max {best:2}) layer {} contacts {:2}: {:4} cores{}",
                layer.layer,
                layer.contacts,
                layer.cores.len(),
                if is_certified(lattice, n_h, layer.contacts) { "" } else { " (within the gap-free bound)" }
            );
        }
    }

    let path = std::env::temp_dir().join("hpkit-example-cores.db");
    report.db.save(&path)?;
    let loaded = CoreDatabase::load(&path)?;
    assert_eq!(loaded, report.db);
    println!("saved and reloaded {}", path.display());
    std::fs::remove_file(&path)?;
    Ok(())
}
