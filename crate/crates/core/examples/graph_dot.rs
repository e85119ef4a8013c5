//! The labeled digraph of a nonnegative family, in DOT.

use kregular::corpus;
use kregular::graphfin::{build_graph, scc};

fn main() -> kregular::Result<()> {
    let rep = corpus::mixed_two_cycle();
    let g = build_graph(rep.mats(), 0.0)?;
    print!("{}", g.to_dot());
    let s = scc(&g.adjacency());
    eprintln!("components {:?}, periods {:?}", s.components, s.periods);
    Ok(())
}
