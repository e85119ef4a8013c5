//! Build a representation with a unit atom at y and read the atom back.

use kregular::ghost::point_mass;
use kregular::graphfin::construct_delta;
use kregular::io::to_json;
use kregular::spectral::{GroupElement, LimitData};
use kregular::Scalar;
use kregular::Q;

fn main() -> kregular::Result<()> {
    let y = Q::from_ratio(2, 3);
    let rep = construct_delta(&y, 2)?;
    print!("{}", to_json(&rep));
    for (p, q) in [(2, 3), (1, 3), (5, 7), (0, 1)] {
        let y = Q::from_ratio(p, q);
        let ld = LimitData::new(&construct_delta(&y, 3)?)?;
        println!("k=3 y={y}: {:?}", point_mass(&ld, GroupElement(0), &y)?.value());
    }
    Ok(())
}
