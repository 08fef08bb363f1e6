//! One-sided reflection of a piecewise-constant path.

use forkjoin::analytics::reflect;
use forkjoin::Path;

fn main() -> forkjoin::Result<()> {
    let x = Path::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![1.0, -1.0, 0.5, -2.0, 1.0])?;
    let (phi, psi) = reflect(&x);
    println!("{:>4} {:>6} {:>6} {:>6}", "t", "x", "phi", "psi");
    for t in x.times() {
        println!(
            "{t:>4} {:>6} {:>6} {:>6}",
            x.value_at(*t).unwrap(),
            phi.value_at(*t).unwrap(),
            psi.value_at(*t).unwrap()
        );
    }
    Ok(())
}
