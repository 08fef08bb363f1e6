use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{three_type_regime, ThreeTypeRegime};

/// State of the path-wise control problem at the shared server.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcpInstance {
    pub q3: f64,
    pub q6: f64,
    pub w4: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub h_a: f64,
    pub h_b: f64,
}

impl DcpInstance {
    fn check(&self) -> Result<()> {
        let vals = [self.q3, self.q6, self.w4, self.h_a, self.h_b];
        if vals.iter().any(|v| !(*v >= 0.0)) || !(self.mu_a > 0.0 && self.mu_b > 0.0) {
            return Err(Error::Input(format!("control problem needs nonnegative state and positive rates: {self:?}")));
        }
        Ok(())
    }
}

/// `h_a (q4 - q3)^+ + h_b (q5 - q6)^+`.
pub fn dcp_objective(inst: &DcpInstance, q4: f64, q5: f64) -> f64 {
    inst.h_a * (q4 - inst.q3).max(0.0) + inst.h_b * (q5 - inst.q6).max(0.0)
}

/// `q4 = q3 ∧ w4`, `q5 = (mu_B / mu_A)(w4 - q3)^+`.
///
/// Requires `h_a mu_A >= h_b mu_B`; swap the roles of the two types otherwise.
pub fn lemma1_solve(inst: &DcpInstance) -> Result<(f64, f64)> {
    inst.check()?;
    if inst.h_a * inst.mu_a < inst.h_b * inst.mu_b {
        return Err(Error::Input(format!(
            "cost ordering h_a mu_A = {} < h_b mu_B = {}; swap the job types",
            inst.h_a * inst.mu_a,
            inst.h_b * inst.mu_b
        )));
    }
    Ok((
        inst.q3.min(inst.w4),
        inst.mu_b / inst.mu_a * (inst.w4 - inst.q3).max(0.0),
    ))
}

/// Grid points `0, step, 2 step, ..., hi`, always including `hi`.
fn grid(hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = (hi / step).floor() as usize;
    (0..=n)
        .map(move |i| i as f64 * step)
        .chain((n as f64 * step < hi).then_some(hi))
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) {
        return Err(Error::Input(format!("grid step {step} must be positive")));
    }
    Ok(())
}

/// Exhaustive minimization over `q4` on a grid, `q5` from the workload
/// constraint. Returns `(q4, q5, objective)`.
pub fn dcp_grid_oracle(inst: &DcpInstance, step: f64) -> Result<(f64, f64, f64)> {
    inst.check()?;
    check_step(step)?;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for q4 in grid(inst.w4, step) {
        let q5 = (inst.mu_b / inst.mu_a * (inst.w4 - q4)).max(0.0);
        let obj = dcp_objective(inst, q4, q5);
        if obj < best.2 {
            best = (q4, q5, obj);
        }
    }
    Ok(best)
}

/// The full instantaneous-downstream solution of the two-type network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSolution {
    pub q4: f64,
    pub q5: f64,
    pub q7: f64,
    pub q8: f64,
    pub q9: f64,
    pub q10: f64,
}

/// Buffers 4, 5 from [`lemma1_solve`] and the downstream buffers they imply
/// when servers 6 and 7 are instantaneous.
pub fn network_solution(inst: &DcpInstance) -> Result<NetworkSolution> {
    let (q4, q5) = lemma1_solve(inst)?;
    Ok(NetworkSolution {
        q4,
        q5,
        q7: 0.0,
        q8: (inst.q3 - inst.w4).max(0.0),
        q9: (inst.q6 - q5).max(0.0),
        q10: (q5 - inst.q6).max(0.0),
    })
}

/// Control problem for the network whose types fork into `g1 + 1` and
/// `g2 + 1` tasks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForkDcpInstance {
    pub w4: f64,
    /// Largest upstream queue on the type-a branches.
    pub max_ul: f64,
    /// Largest upstream queue on the type-b branches.
    pub max_ur: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub h_a: f64,
    pub h_b: f64,
    pub g1: usize,
    pub g2: usize,
}

impl ForkDcpInstance {
    pub fn effective_costs(&self) -> (f64, f64) {
        (self.h_a * (self.g1 + 1) as f64, self.h_b * (self.g2 + 1) as f64)
    }

    fn check(&self) -> Result<()> {
        let vals = [self.w4, self.max_ul, self.max_ur, self.h_a, self.h_b];
        if vals.iter().any(|v| !(*v >= 0.0)) || !(self.mu_a > 0.0 && self.mu_b > 0.0) {
            return Err(Error::Input(format!("control problem needs nonnegative state and positive rates: {self:?}")));
        }
        if self.g1 == 0 || self.g2 == 0 {
            return Err(Error::Input("fork counts g1, g2 must be at least 1".into()));
        }
        Ok(())
    }
}

/// `ha (q4 ∨ maxUL) + hb (q5 ∨ maxUR)` with the effective costs.
pub fn fork_dcp_objective(inst: &ForkDcpInstance, q4: f64, q5: f64) -> f64 {
    let (ha, hb) = inst.effective_costs();
    ha * q4.max(inst.max_ul) + hb * q5.max(inst.max_ur)
}

/// `q4 = w4 ∧ maxUL`, `q5 = (mu_B / mu_A)(w4 - maxUL)^+`.
pub fn fork_dcp_solve(inst: &ForkDcpInstance) -> Result<(f64, f64)> {
    inst.check()?;
    let (ha, hb) = inst.effective_costs();
    if ha * inst.mu_a < hb * inst.mu_b {
        return Err(Error::Input(format!(
            "effective cost ordering {} < {}; swap the job types",
            ha * inst.mu_a,
            hb * inst.mu_b
        )));
    }
    Ok((
        inst.w4.min(inst.max_ul),
        inst.mu_b / inst.mu_a * (inst.w4 - inst.max_ul).max(0.0),
    ))
}

pub fn fork_dcp_oracle(inst: &ForkDcpInstance, step: f64) -> Result<(f64, f64, f64)> {
    inst.check()?;
    check_step(step)?;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for q4 in grid(inst.w4, step) {
        let q5 = (inst.mu_b / inst.mu_a * (inst.w4 - q4)).max(0.0);
        let obj = fork_dcp_objective(inst, q4, q5);
        if obj < best.2 {
            best = (q4, q5, obj);
        }
    }
    Ok(best)
}

/// Control problem of the three-type network with two shared servers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeTypeDcpInstance {
    pub q4: f64,
    pub q9: f64,
    pub w5: f64,
    pub w6: f64,
    pub mu_a: f64,
    pub mu_b1: f64,
    pub mu_b2: f64,
    pub mu_c: f64,
    pub h_a: f64,
    pub h_b: f64,
    pub h_c: f64,
}

impl ThreeTypeDcpInstance {
    fn check(&self) -> Result<()> {
        let vals = [self.q4, self.q9, self.w5, self.w6, self.h_a, self.h_b, self.h_c];
        let rates = [self.mu_a, self.mu_b1, self.mu_b2, self.mu_c];
        if vals.iter().any(|v| !(*v >= 0.0)) || rates.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Input(format!("control problem needs nonnegative state and positive rates: {self:?}")));
        }
        Ok(())
    }

    pub fn regime(&self) -> ThreeTypeRegime {
        three_type_regime([self.h_a, self.h_b, self.h_c], self.mu_a, self.mu_b1, self.mu_b2, self.mu_c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeTypeSolution {
    pub q5: f64,
    pub q6: f64,
    pub q7: f64,
    pub q8: f64,
}

/// `h_a (q5 - q4)^+ + h_b (q6 ∨ q7) + h_c (q8 - q9)^+`.
pub fn threetype_dcp_objective(inst: &ThreeTypeDcpInstance, s: &ThreeTypeSolution) -> f64 {
    inst.h_a * (s.q5 - inst.q4).max(0.0) + inst.h_b * s.q6.max(s.q7) + inst.h_c * (s.q8 - inst.q9).max(0.0)
}

/// Closed-form optimizer for whichever cost regime `inst` falls in.
pub fn threetype_dcp_solve(inst: &ThreeTypeDcpInstance) -> Result<ThreeTypeSolution> {
    inst.check()?;
    let &ThreeTypeDcpInstance {
        q4,
        q9,
        w5,
        w6,
        mu_a,
        mu_b1,
        mu_b2,
        mu_c,
        ..
    } = inst;
    let r5 = mu_b1 / mu_a;
    let r6 = mu_c / mu_b2;
    let s = match inst.regime() {
        ThreeTypeRegime::First => {
            let q6 = r5 * (w5 - q4).max(0.0);
            let q7 = q6.min(w6);
            ThreeTypeSolution {
                q5: q4.min(w5),
                q6,
                q7,
                q8: r6 * (w6 - q7),
            }
        }
        ThreeTypeRegime::Second => ThreeTypeSolution {
            q5: q4.min(w5),
            q6: r5 * (w5 - q4).max(0.0),
            q7: (w6 - q9 / r6).max(0.0),
            q8: (r6 * w6).min(q9),
        },
        ThreeTypeRegime::ThirdStatic => ThreeTypeSolution {
            q5: w5,
            q6: 0.0,
            q7: 0.0,
            q8: r6 * w6,
        },
        ThreeTypeRegime::ThirdMatching => {
            let left = r5 * (w5 - q4).max(0.0);
            let right = (w6 - q9 / r6).max(0.0);
            let m = left.min(right);
            ThreeTypeSolution {
                q5: q4.min(w5).max(w5 - right / r5),
                q6: m,
                q7: m,
                q8: q9.min(r6 * w6).max(r6 * (w6 - left)),
            }
        }
        ThreeTypeRegime::Fourth => {
            let q8 = q9.min(r6 * w6);
            let q7 = (w6 - q9 / r6).max(0.0);
            let q6 = q7.min(r5 * w5);
            ThreeTypeSolution {
                q5: w5 - q6 / r5,
                q6,
                q7,
                q8,
            }
        }
    };
    Ok(s)
}

/// Exhaustive minimization over `(q6, q7)` on a grid (endpoints included),
/// with `q5`, `q8` from the workload constraints.
pub fn threetype_grid_oracle(inst: &ThreeTypeDcpInstance, step: f64) -> Result<(ThreeTypeSolution, f64)> {
    inst.check()?;
    check_step(step)?;
    let r5 = inst.mu_b1 / inst.mu_a;
    let r6 = inst.mu_c / inst.mu_b2;
    let q7s: Vec<f64> = grid(inst.w6, step).collect();
    let mut best = (
        ThreeTypeSolution {
            q5: 0.0,
            q6: 0.0,
            q7: 0.0,
            q8: 0.0,
        },
        f64::INFINITY,
    );
    for q6 in grid(r5 * inst.w5, step) {
        let q5 = (inst.w5 - q6 / r5).max(0.0);
        for &q7 in &q7s {
            let s = ThreeTypeSolution {
                q5,
                q6,
                q7,
                q8: (r6 * (inst.w6 - q7)).max(0.0),
            };
            let obj = threetype_dcp_objective(inst, &s);
            if obj < best.1 {
                best = (s, obj);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn unit(q3: f64, w4: f64) -> DcpInstance {
        DcpInstance {
            q3,
            q6: 0.0,
            w4,
            mu_a: 1.0,
            mu_b: 1.0,
            h_a: 2.0,
            h_b: 1.0,
        }
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_solve(&unit(2.0, 5.0)).unwrap(), (2.0, 3.0));
        assert_eq!(lemma1_solve(&unit(5.0, 3.0)).unwrap(), (3.0, 0.0));
        assert_eq!(lemma1_solve(&unit(0.0, 4.0)).unwrap(), (0.0, 4.0));
        let bad = DcpInstance { h_a: 0.5, ..unit(1.0, 1.0) };
        assert!(lemma1_solve(&bad).is_err());
    }

    #[test]
    fn oracle_examples() {
        let (q4, q5, obj) = dcp_grid_oracle(&unit(2.0, 5.0), 1e-3).unwrap();
        assert!((q4 - 2.0).abs() <= 1e-3 && (q5 - 3.0).abs() <= 1e-3, "{q4} {q5}");
        assert_abs_diff_eq!(obj, 3.0, epsilon = 1e-2);
        assert_eq!(dcp_grid_oracle(&unit(2.0, 0.0), 1e-3).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn network_solution_downstream_buffers() {
        let s = network_solution(&DcpInstance { q6: 1.0, ..unit(2.0, 5.0) }).unwrap();
        assert_eq!((s.q7, s.q8, s.q9, s.q10), (0.0, 0.0, 0.0, 2.0));
    }

    fn fork(w4: f64, max_ul: f64) -> ForkDcpInstance {
        ForkDcpInstance {
            w4,
            max_ul,
            max_ur: 0.0,
            mu_a: 1.0,
            mu_b: 1.0,
            h_a: 1.0,
            h_b: 1.0,
            g1: 1,
            g2: 1,
        }
    }

    #[test]
    fn fork_examples() {
        assert_eq!(fork_dcp_solve(&fork(5.0, 2.0)).unwrap(), (2.0, 3.0));
        assert_eq!(fork_dcp_solve(&fork(2.0, 3.0)).unwrap(), (2.0, 0.0));
        let skewed = ForkDcpInstance { g2: 3, ..fork(1.0, 1.0) };
        assert!(fork_dcp_solve(&skewed).is_err());
    }

    fn three(h_a: f64, h_b: f64, h_c: f64) -> ThreeTypeDcpInstance {
        ThreeTypeDcpInstance {
            q4: 1.0,
            q9: 0.5,
            w5: 4.0,
            w6: 2.0,
            mu_a: 1.0,
            mu_b1: 1.0,
            mu_b2: 1.0,
            mu_c: 1.0,
            h_a,
            h_b,
            h_c,
        }
    }

    #[test]
    fn threetype_static_case() {
        let i = three(1.0, 3.0, 1.0);
        let s = threetype_dcp_solve(&i).unwrap();
        assert_eq!((s.q5, s.q6, s.q7, s.q8), (4.0, 0.0, 0.0, 2.0));
    }

    #[test]
    fn threetype_matching_case() {
        let i = three(1.0, 1.5, 1.0);
        let s = threetype_dcp_solve(&i).unwrap();
        assert_eq!((s.q5, s.q6, s.q7, s.q8), (2.5, 1.5, 1.5, 0.5));
        let (_, obj) = threetype_grid_oracle(&i, 1e-2).unwrap();
        assert_abs_diff_eq!(obj, threetype_dcp_objective(&i, &s), epsilon = 0.06);
    }

    #[test]
    fn threetype_second_case() {
        let i = three(2.0, 1.0, 2.0);
        let s = threetype_dcp_solve(&i).unwrap();
        assert_eq!((s.q5, s.q6, s.q7, s.q8), (1.0, 3.0, 1.5, 0.5));
        let (_, obj) = threetype_grid_oracle(&i, 1e-2).unwrap();
        assert_abs_diff_eq!(obj, threetype_dcp_objective(&i, &s), epsilon = 0.06);
    }

    #[test]
    fn constraints_hold_in_every_regime() {
        for h in [[1.0, 3.0, 1.0], [1.0, 1.5, 1.0], [2.0, 1.0, 2.0], [2.0, 1.0, 0.5], [0.5, 1.0, 2.0]] {
            let i = ThreeTypeDcpInstance {
                mu_a: 1.3,
                mu_b1: 0.7,
                mu_b2: 1.1,
                mu_c: 0.9,
                ..three(h[0], h[1], h[2])
            };
            let s = threetype_dcp_solve(&i).unwrap();
            assert_abs_diff_eq!(s.q5 + i.mu_a / i.mu_b1 * s.q6, i.w5, epsilon = 1e-12);
            assert_abs_diff_eq!(s.q7 + i.mu_b2 / i.mu_c * s.q8, i.w6, epsilon = 1e-12);
            assert!([s.q5, s.q6, s.q7, s.q8].iter().all(|v| *v >= -1e-12), "{h:?} {s:?}");
        }
    }
}
