//! Atoms of limit measures at rational points.

use kregular::corpus;
use kregular::ghost::point_mass;
use kregular::spectral::{GroupElement, LimitData};
use kregular::Scalar;
use kregular::Q;

fn main() -> kregular::Result<()> {
    let cases = [
        ("point_mass_two_thirds", 0, Q::from_ratio(2, 3)),
        ("point_mass_two_thirds", 0, Q::from_ratio(1, 3)),
        ("mixed_two_cycle", 0, Q::from_ratio(1, 3)),
        ("mixed_two_cycle", 1, Q::from_ratio(1, 3)),
        ("trivial", 0, Q::from_ratio(1, 3)),
    ];
    for (name, residue, y) in cases {
        let ld = LimitData::new(&corpus::by_name(name).expect("corpus entry"))?;
        println!("{name:<22} h=g^{residue} y={y}: {:?}", point_mass(&ld, GroupElement(residue), &y)?);
    }
    Ok(())
}
