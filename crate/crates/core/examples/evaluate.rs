//! Sequence values, block sums and the minimality ranks of a few corpus entries.

use kregular::corpus;

fn main() {
    let b = corpus::example_b();
    let values: Vec<String> = (0..12).map(|n| b.evaluate(n).to_string()).collect();
    println!("f = 21^oo : {}", values.join(" "));

    let a = corpus::example_a();
    for n in 0..6 {
        println!("Σ({n}) = {} (direct {})", a.sum_block(n), a.sum_block_brute(n));
    }
    let m = a.minimality();
    println!("minimal: {} (forward {}, backward {})", m.minimal, m.forward_rank, m.backward_rank);

    let stern = corpus::stern();
    let s: Vec<String> = (0..17).map(|n| stern.evaluate(n).to_string()).collect();
    println!("stern: {}", s.join(" "));
}
