//! Spectral-type verdicts across the corpus.

use kregular::classify::{classify, ClassifyOptions};
use kregular::corpus;

fn main() {
    let opts = ClassifyOptions::default();
    for name in ["trivial", "stern", "zaremba", "point_mass_two_thirds", "mixed_two_cycle", "example_a"] {
        let rep = corpus::by_name(name).expect("corpus entry");
        match classify(&rep, &opts) {
            Ok(v) => println!("{name:<22} {:?} / {:?} via {}", v.spectral_type, v.continuity, v.rule),
            Err(e) => println!("{name:<22} error: {e}"),
        }
    }
}
