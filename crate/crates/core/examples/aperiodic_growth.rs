//! Norm growth along the aperiodic digit sequence 1^{n_1}0 1^{n_2}0 ...

use kregular::corpus;
use kregular::graphfin::aperiodic_liminf_demo;

fn main() -> kregular::Result<()> {
    let schedule: Vec<u64> = (1..=4).map(|j| 4u64.pow(j)).collect();
    let rows = aperiodic_liminf_demo(&corpus::aperiodic_family(3), &schedule, 350)?;
    for r in rows.iter().filter(|r| r.offset == 0 || r.n % 50 == 0) {
        println!("n={:<4} blocks={} norm={} rate={:.6}", r.n, r.blocks, r.norm, r.rate);
    }
    Ok(())
}
