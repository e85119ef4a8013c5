//! Joint spectral radius and Lyapunov bounds for small families.

use kregular::corpus;
use kregular::graphfin::DEFAULT_BUDGET;
use kregular::semigroup::{jsr_bounds, lyapunov_mc, lyapunov_upper_sequence};

fn main() -> kregular::Result<()> {
    for (name, fam) in [("stern", corpus::stern_family()), ("zaremba", corpus::zaremba_family())] {
        let b = jsr_bounds(&fam, 8, DEFAULT_BUDGET)?;
        println!("{name}: {:.5} ≤ ρ* ≤ {:.5}, certificate {:?}", b.lower, b.upper, b.certificate);
        for (n, v) in lyapunov_upper_sequence(&fam, 10, DEFAULT_BUDGET)?.iter().step_by(3) {
            println!("  lyapunov bound n={n}: {v:.5}");
        }
        let mc = lyapunov_mc(&fam, 64, 2000, 1)?;
        println!("  monte carlo n=64: {:.5} ± {:.5}", mc.estimate, mc.stderr);
    }
    Ok(())
}
