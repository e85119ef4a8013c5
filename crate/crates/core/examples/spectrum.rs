//! Peripheral spectrum, rotation group and nondegeneracy.

use kregular::corpus;
use kregular::spectral::LimitData;

fn main() -> kregular::Result<()> {
    for name in ["example_a", "degenerate", "trivial", "mixed_two_cycle", "stern"] {
        let rep = corpus::by_name(name).expect("corpus entry");
        let ld = LimitData::new(&rep)?;
        let s = ld.pd.summary();
        println!("{name:<16} rho={:.6} r={} group={:?} {:?}", s.rho, s.r, s.group, ld.nondegeneracy());
    }
    let rot = corpus::rotation(0.5f64.sqrt(), 1.0, 1.0);
    println!("rotation         group={:?}", LimitData::new(&rot)?.group());
    Ok(())
}
