//! Finiteness certificates from the dominance analysis.

use kregular::corpus;
use kregular::graphfin::{finiteness_check, DEFAULT_BUDGET};

fn main() -> kregular::Result<()> {
    let cases = [
        ("point_mass_two_thirds", corpus::point_mass_two_thirds().mats().to_vec()),
        ("aperiodic", corpus::aperiodic_family(3)),
        ("stern", corpus::stern_family()),
    ];
    for (name, fam) in cases {
        let r = finiteness_check(&fam, DEFAULT_BUDGET)?;
        println!("{name:<22} m={} pure={} mixed={} {:?}", r.m, r.pure.len(), r.mixed.len(), r.finiteness);
    }
    Ok(())
}
