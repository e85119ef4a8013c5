//! The row space V and the limit subspace V̂.

use kregular::corpus;
use kregular::spectral::LimitData;
use kregular::subspace::compute_v;

fn main() -> kregular::Result<()> {
    for (name, rep) in corpus::named() {
        let v = compute_v(&rep);
        let hat = LimitData::new(&rep).and_then(|ld| ld.hat());
        match hat {
            Ok((h, _)) => println!("{name:<22} d={} dim V={} dim V̂={}", rep.dim(), v.dim(), h.dim),
            Err(e) => println!("{name:<22} d={} dim V={} ({e})", rep.dim(), v.dim()),
        }
    }
    Ok(())
}
