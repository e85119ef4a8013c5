//! Distribution function of the Stern limit measure, as CSV.

use kregular::corpus;
use kregular::ghost::{cdf_grid, mass_table};
use kregular::spectral::{GroupElement, LimitData};
use kregular::Scalar;

fn main() -> kregular::Result<()> {
    let ld = LimitData::new(&corpus::stern())?;
    let table = mass_table(&ld, GroupElement(0), 8)?;
    println!("x,F");
    for (x, f) in cdf_grid(&table, 2).iter().step_by(8) {
        println!("{:.6},{f:.6}", x.to_f64());
    }
    Ok(())
}
