use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A right-continuous, piecewise-constant function of time.
///
/// `values[i]` holds on `[times[i], times[i + 1])`; the last value holds
/// forever. The path is undefined before `times[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Input(format!(
                "path needs equal, nonzero numbers of times and values (got {} and {})",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || values.iter().any(|v| v.is_nan()) {
            return Err(Error::Input("path contains non-finite breakpoints or NaN values".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("path breakpoints must be strictly increasing".into()));
        }
        Ok(Path { times, values })
    }

    pub fn constant(value: f64) -> Self {
        Path {
            times: vec![0.0],
            values: vec![value],
        }
    }

    /// Path starting at `t0` with value `v0`.
    pub fn starting_at(t0: f64, v0: f64) -> Self {
        Path {
            times: vec![t0],
            values: vec![v0],
        }
    }

    /// Records value `v` from time `t` on. Equal times overwrite, repeated
    /// values are merged.
    pub fn push(&mut self, t: f64, v: f64) {
        let last = self.times.len() - 1;
        debug_assert!(t >= self.times[last], "path times must be nondecreasing");
        if t == self.times[last] {
            self.values[last] = v;
            if last > 0 && self.values[last - 1] == v {
                self.times.pop();
                self.values.pop();
            }
        } else if self.values[last] != v {
            self.times.push(t);
            self.values.push(v);
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the segment containing `t`, or `None` before the start.
    fn segment(&self, t: f64) -> Option<usize> {
        match self.times.partition_point(|&x| x <= t) {
            0 => None,
            i => Some(i - 1),
        }
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.segment(t).map(|i| self.values[i])
    }

    /// Exact integral over `[t0, t1]`.
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(t1 >= t0) {
            return Err(Error::Input(format!("empty integration window [{t0}, {t1}]")));
        }
        if t0 < self.start() {
            return Err(Error::Input(format!(
                "window starts at {t0}, before the path start {}",
                self.start()
            )));
        }
        let mut i = self.segment(t0).expect("checked above");
        let mut acc = 0.0;
        let mut lo = t0;
        loop {
            let hi = self.times.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t1);
            acc += self.values[i] * (hi - lo);
            if hi >= t1 {
                return Ok(acc);
            }
            lo = hi;
            i += 1;
        }
    }

    /// Applies `f` pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Path {
        let mut out = Path::starting_at(self.times[0], f(self.values[0]));
        for (t, v) in self.times.iter().zip(&self.values).skip(1) {
            out.push(*t, f(*v));
        }
        out
    }

    /// Combines paths on the union of their breakpoints, from the later start.
    pub fn zip_with(paths: &[&Path], f: impl Fn(&[f64]) -> f64) -> Result<Path> {
        let first = paths
            .first()
            .ok_or_else(|| Error::Input("zip_with needs at least one path".into()))?;
        let start = paths.iter().map(|p| p.start()).fold(first.start(), f64::max);
        let mut times: Vec<f64> = paths
            .iter()
            .flat_map(|p| p.times.iter().copied())
            .filter(|t| *t >= start)
            .collect();
        times.push(start);
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut idx: Vec<usize> = paths.iter().map(|p| p.segment(start).expect("after start")).collect();
        let mut buf = vec![0.0; paths.len()];
        let mut out: Option<Path> = None;
        for t in times {
            for (k, p) in paths.iter().enumerate() {
                while idx[k] + 1 < p.times.len() && p.times[idx[k] + 1] <= t {
                    idx[k] += 1;
                }
                buf[k] = p.values[idx[k]];
            }
            let v = f(&buf);
            match out.as_mut() {
                None => out = Some(Path::starting_at(t, v)),
                Some(p) => p.push(t, v),
            }
        }
        Ok(out.expect("at least one breakpoint"))
    }

    /// `sup_{start <= t <= horizon} |self(t) - other(t)|`.
    pub fn sup_distance(&self, other: &Path, horizon: f64) -> Result<f64> {
        let d = Path::zip_with(&[self, other], |v| (v[0] - v[1]).abs())?;
        Ok(d.sup_abs(horizon))
    }

    /// `sup |self(t)|` over breakpoints up to `horizon`.
    pub fn sup_abs(&self, horizon: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.values)
            .take_while(|(t, _)| **t <= horizon)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Restricts to `[start, horizon]`, dropping later breakpoints.
    pub fn truncated(&self, horizon: f64) -> Path {
        let n = self.times.partition_point(|&t| t <= horizon).max(1);
        Path {
            times: self.times[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_is_right_continuous() {
        let p = Path::new(vec![0.0, 1.0, 2.0], vec![2.0, 0.0, 5.0]).unwrap();
        assert_eq!(p.value_at(-0.1), None);
        assert_eq!(p.value_at(0.0), Some(2.0));
        assert_eq!(p.value_at(0.999), Some(2.0));
        assert_eq!(p.value_at(1.0), Some(0.0));
        assert_eq!(p.value_at(10.0), Some(5.0));
    }

    #[test]
    fn integral_is_exact() {
        let p = Path::new(vec![0.0, 1.0], vec![2.0, 0.0]).unwrap();
        assert_eq!(p.integral(0.0, 2.0).unwrap(), 2.0);
        assert_eq!(p.integral(0.5, 0.75).unwrap(), 0.5);
        assert!(p.integral(1.0, 0.5).is_err());
    }

    #[test]
    fn push_merges_and_overwrites() {
        let mut p = Path::starting_at(0.0, 0.0);
        p.push(1.0, 1.0);
        p.push(1.0, 2.0);
        p.push(2.0, 2.0);
        p.push(3.0, 0.0);
        p.push(3.0, 2.0);
        assert_eq!(p.times(), &[0.0, 1.0]);
        assert_eq!(p.values(), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(Path::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Path::new(vec![], vec![]).is_err());
    }

    #[test]
    fn zip_uses_union_of_breakpoints() {
        let a = Path::new(vec![0.0, 2.0], vec![1.0, 3.0]).unwrap();
        let b = Path::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let s = Path::zip_with(&[&a, &b], |v| v[0] + v[1]).unwrap();
        assert_eq!(s.times(), &[0.0, 1.0, 2.0]);
        assert_eq!(s.values(), &[1.0, 2.0, 4.0]);
        assert_eq!(a.sup_distance(&b, 10.0).unwrap(), 2.0);
    }
}
