use gqfpe::propagator::*;

fn config(gamma_s: f64, beta_s: f64, dim: usize, t_end: f64, dt: f64) -> PropagationConfig {
    PropagationConfig {
        basis: BasisSpec::new(dim, 1.0).unwrap(),
        t_end,
        dt,
        gamma_s,
        beta_s,
        q0: 0.0,
        cross_gamma_s: 0.0,
        monitors: Monitors { record_every: 100, min_eig: false, eps_pos: 1e-10 },
        symmetrize: false,
    }
}

#[test]
fn density_matrix_moments_follow_moment_equations() {
    let (gamma, beta) = (0.1, 1.0);
    let cfg = config(gamma, beta, 64, 6.0, 0.005);
    let v = PotentialModel::harmonic(1.0, 1.0).unwrap();
    let rho = initial_state_thermal(beta, 1.0, &cfg.basis).unwrap().rho;
    let traj = propagate(&rho, &cfg, &v).unwrap();
    let var0 = 0.5 / (0.5 * beta).tanh();
    let start = Moments { q: 0.0, p: 0.0, q_var: var0, p_var: var0, qp_cov: 0.0 };
    let m = moment_trajectory(start, &v, gamma, beta, 0.0, 0.0, 0.005, 1200).unwrap();
    for o in &traj.samples {
        let k = (o.t_s / 0.005).round() as usize;
        let e = m[k].1;
        let got = Moments::from_observables(o);
        for (a, b) in [(got.q, e.q), (got.p, e.p), (got.q_var, e.q_var), (got.p_var, e.p_var), (got.qp_cov, e.qp_cov)] {
            assert!((a - b).abs() < 1e-7, "t = {}: {a} vs {b}", o.t_s);
        }
    }
}

#[test]
fn basis_doubling_leaves_position_moments() {
    let v = PotentialModel::harmonic(1.0, 1.0).unwrap();
    let run = |dim: usize| {
        let cfg = config(0.1, 1.0, dim, 3.0, 0.005);
        let rho = initial_state_thermal(1.0, 1.0, &cfg.basis).unwrap().rho;
        *propagate(&rho, &cfg, &v).unwrap().samples.last().unwrap()
    };
    let (a, b) = (run(40), run(80));
    assert!((a.q_mean - b.q_mean).abs() < 1e-6);
    assert!((a.q2 - b.q2).abs() < 1e-6);
}

#[test]
fn quartic_potential_runs_and_keeps_trace() {
    let cfg = config(0.1, 1.0, 48, 2.0, 0.002);
    let v = PotentialModel::Quartic { omega_e: 1.0, shift: 0.5, quartic: 0.05 };
    let rho = initial_state_thermal(1.0, 1.0, &cfg.basis).unwrap().rho;
    let traj = propagate(&rho, &cfg, &v).unwrap();
    assert!(traj.max_trace_drift < 1e-10);
    assert!(traj.max_hermiticity < 1e-10);
    assert!(steady_moments(0.1, 1.0, &v).is_err());
}
