//! Closed-form control-problem solutions against brute-force grids.

use forkjoin::analytics::{
    dcp_grid_oracle, dcp_objective, fork_dcp_objective, fork_dcp_oracle, fork_dcp_solve, network_solution,
    threetype_dcp_objective, threetype_dcp_solve, threetype_grid_oracle, DcpInstance, ForkDcpInstance,
    ThreeTypeDcpInstance,
};

fn main() -> forkjoin::Result<()> {
    let two = DcpInstance {
        q3: 2.0,
        q6: 1.0,
        w4: 5.0,
        mu_a: 1.0,
        mu_b: 1.0,
        h_a: 2.0,
        h_b: 1.0,
    };
    let s = network_solution(&two)?;
    let (o4, o5, obj) = dcp_grid_oracle(&two, 1e-3)?;
    println!("two-type: closed form {s:?}");
    println!("          objective {:.4}, oracle ({o4:.3}, {o5:.3}) -> {obj:.4}", dcp_objective(&two, s.q4, s.q5));

    let fork = ForkDcpInstance {
        w4: 5.0,
        max_ul: 2.0,
        max_ur: 1.0,
        mu_a: 1.0,
        mu_b: 1.0,
        h_a: 1.0,
        h_b: 1.0,
        g1: 2,
        g2: 2,
    };
    let (q4, q5) = fork_dcp_solve(&fork)?;
    let (_, _, obj) = fork_dcp_oracle(&fork, 1e-3)?;
    println!("fork:     ({q4}, {q5}) -> {:.4}, oracle {obj:.4}", fork_dcp_objective(&fork, q4, q5));

    for h_b in [0.5, 1.5, 3.0] {
        let t = ThreeTypeDcpInstance {
            q4: 1.0,
            q9: 0.5,
            w5: 4.0,
            w6: 2.0,
            mu_a: 1.0,
            mu_b1: 1.0,
            mu_b2: 1.0,
            mu_c: 1.0,
            h_a: 1.0,
            h_b,
            h_c: 1.0,
        };
        let s = threetype_dcp_solve(&t)?;
        let (_, obj) = threetype_grid_oracle(&t, 1e-2)?;
        println!(
            "three-type h_b={h_b}: {:?} q=({:.2}, {:.2}, {:.2}, {:.2}) -> {:.4}, oracle {obj:.4}",
            t.regime(),
            s.q5,
            s.q6,
            s.q7,
            s.q8,
            threetype_dcp_objective(&t, &s)
        );
    }
    Ok(())
}
