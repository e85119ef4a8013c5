//! Limit interval masses for the two-cycle example, next to the masses of
//! the finite approximants they attract.

use kregular::corpus;
use kregular::ghost::{ghost_family, level_masses};
use kregular::spectral::LimitData;
use kregular::Scalar;

fn main() -> kregular::Result<()> {
    let rep = corpus::example_a();
    let fam = ghost_family(&LimitData::new(&rep)?, 3)?;
    for t in &fam.tables {
        println!("residue {}: level 1 = {:?}", t.residue, t.levels[1]);
    }
    for n in 8..12 {
        let m: Vec<f64> = level_masses(&rep, n, 1)?.iter().map(Scalar::to_f64).collect();
        println!("μ_{n} level 1 = {m:?}, deviation {:.2e}", fam.deviation_from(&rep, n)?);
    }
    Ok(())
}
