use crate::path::Path;

/// One-sided reflection of `x` at zero: `psi(t) = sup_{s <= t} (-x(s))^+`
/// and `phi = x + psi`.
pub fn reflect(x: &Path) -> (Path, Path) {
    let mut run = 0.0f64;
    let mut phi: Option<Path> = None;
    let mut psi: Option<Path> = None;
    for (t, v) in x.times().iter().zip(x.values()) {
        run = run.max(-v);
        let (f, s) = (v + run, run);
        match (phi.as_mut(), psi.as_mut()) {
            (Some(p), Some(q)) => {
                p.push(*t, f);
                q.push(*t, s);
            }
            _ => {
                phi = Some(Path::starting_at(*t, f));
                psi = Some(Path::starting_at(*t, s));
            }
        }
    }
    (phi.expect("paths are nonempty"), psi.expect("paths are nonempty"))
}
