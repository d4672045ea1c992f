//! Decoding, validating and re-encoding move strings.

use hpkit::cli::codec::{decode, encode};
use hpkit::lattice::LatticeKind;
use hpkit::model::{energy, HpSequence, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq: HpSequence = "HPPH".parse()?;
    for (text, lattice, model) in [
        ("FLB", LatticeKind::Cubic, ModelKind::Backbone),
        ("FLFRBR", LatticeKind::Fcc, ModelKind::Backbone),
        ("(B)F(R)L(F)B(B)", LatticeKind::Cubic, ModelKind::SideChain),
        ("FB", LatticeKind::Cubic, ModelKind::Backbone),
    ] {
        match decode(text, lattice, model) {
            Ok(s) => println!(
                "{text:16} {lattice:5} {model}: energy {} re-encoded {}",
                energy(&seq, &s, lattice.lattice())?,
                encode(&s, lattice)?
            ),
            Err(e) => println!("{text:16} {lattice:5} {model}: {e}"),
        }
    }
    Ok(())
}
