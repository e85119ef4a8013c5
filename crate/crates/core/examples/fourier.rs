//! Fourier coefficients of a reduced representation against the DFT of an
//! approximant.

use kregular::corpus;
use kregular::ghost::{approximant, fourier_coefficient};

fn main() -> kregular::Result<()> {
    let rep = corpus::zaremba_reduced();
    let mu = approximant(&rep, 12)?;
    for m in 0..=8 {
        let c = fourier_coefficient(&rep, m, 20)?;
        let d = mu.fourier(m);
        println!("m={m}: product {:+.6}{:+.6}i  dft {:+.6}{:+.6}i", c.re, c.im, d.re, d.im);
    }
    Ok(())
}
