use std::f64::consts::PI;

use gradiplate_core::expm::Exponential3;
use gradiplate_core::functionals::{lagrange_functionals, phi_coefficients};
use gradiplate_core::resolvent::{energy_inner_re, energy_norm};
use gradiplate_core::*;
use gradiplate_oracles as oracle;
use nalgebra::{Complex, Matrix3, Vector3};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0.1f64..10.0,
        0.1f64..10.0,
        0.1f64..10.0,
        0.1f64..10.0,
        0.1f64..10.0,
        0.1f64..5.0,
        any::<bool>(),
    )
        .prop_map(|(rho, a, b, c, d, eta, neg)| {
            ModelParams::new(rho, a, b, c, d, if neg { -eta } else { eta }).unwrap()
        })
}

fn line() -> SpectralDomain {
    SpectralDomain::interval(PI).unwrap()
}

#[test]
fn mode_matrix_matches_finite_differences() {
    let p = ModelParams::new(2.0, 0.5, 1.5, 3.0, 0.7, -1.3).unwrap();
    for n in 1..4u32 {
        for backward in [false, true] {
            let fd =
                oracle::fd_mode_matrix(p.rho, p.a, p.b, p.c, p.d, p.eta, PI, n, 20_000, backward);
            let direction = if backward {
                Direction::Backward
            } else {
                Direction::Forward
            };
            let m = mode_matrix(&p, (n * n) as f64, direction).entries;
            for i in 0..3 {
                for j in 0..3 {
                    let scale = m[(i, j)].abs().max(1.0);
                    assert!(
                        (m[(i, j)] - fd[i][j]).abs() <= 1e-6 * scale,
                        "n={n} ({i},{j}): {} vs {}",
                        m[(i, j)],
                        fd[i][j]
                    );
                }
            }
        }
    }
    let unit = oracle::fd_mode_matrix(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, PI, 1, 20_000, false);
    let expected = [[0.0, 1.0, 0.0], [-1.0, 0.0, -1.0], [0.0, 1.0, -2.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((unit[i][j] - expected[i][j]).abs() < 1e-6);
        }
    }
}

#[test]
fn short_step_matches_runge_kutta() {
    let m = mode_matrix(&ModelParams::unit(), 1.0, Direction::Forward);
    let s = evolve_mode(&m, ModeState::new(1.0, 0.0, 0.0), 0.1).unwrap();
    let want =
        oracle::integrate_linear(&m.entries, &Vector3::new(1.0, 0.0, 0.0), 0.1, 1e-12, 1e-16);
    let err = (s.to_vector() - want).norm() / want.norm();
    assert!(err <= 1e-9, "{err}");
}

#[test]
fn energy_derivative_is_minus_dissipation() {
    let p = ModelParams::unit();
    let init = SpectralState::from_fn(line(), 3, |i, _| {
        ModeState::new(1.0, 0.5, 1.0 / (i + 1) as f64)
    });
    let max_err = |dt: f64| {
        let traj = evolve(&p, &init, &uniform_times(1.0, dt), Direction::Forward).unwrap();
        let e = traj.energies();
        (1..e.len() - 1)
            .map(|i| {
                ((e[i + 1] - e[i - 1]) / (2.0 * dt) + traj.samples[i].energy.dissipation_rate).abs()
            })
            .fold(0.0, f64::max)
    };
    let coarse = max_err(1e-3);
    let fine = max_err(5e-4);
    let order = (coarse / fine).log2();
    assert!(order > 1.9, "order {order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_sign_is_a_similarity(p in params_strategy(), lambda in 0.01f64..1e4) {
        let flipped = ModelParams { eta: -p.eta, ..p };
        let s = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        for dir in [Direction::Forward, Direction::Backward] {
            let m = mode_matrix(&p, lambda, dir).entries;
            prop_assert_eq!(mode_matrix(&flipped, lambda, dir).entries, s * m * s);
        }
    }

    #[test]
    fn directions_differ_only_in_heat_term(p in params_strategy(), lambda in 0.01f64..1e4) {
        let f = mode_matrix(&p, lambda, Direction::Forward).entries;
        let b = mode_matrix(&p, lambda, Direction::Backward).entries;
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) == (2, 2) {
                    prop_assert_eq!(f[(i, j)], -b[(i, j)]);
                } else {
                    prop_assert_eq!(f[(i, j)], b[(i, j)]);
                }
            }
        }
        prop_assert_eq!(f.trace(), -p.dissipation_symbol(lambda) / p.a);
        // Time reflection R = diag(1, −1, 1) maps one generator to minus the other.
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        prop_assert_eq!(-(r * f * r), b);
    }

    #[test]
    fn modes_evolve_independently(p in params_strategy(), x in prop::array::uniform6(-1.0f64..1.0), t in 0.01f64..1.0) {
        let init = SpectralState::from_fn(line(), 2, |i, _| ModeState::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]));
        let times = [0.0, t];
        let joint = evolve(&p, &init, &times, Direction::Forward).unwrap();
        for k in 0..2 {
            let single = SpectralState { domain: init.domain, modes: vec![init.modes[k]] };
            let alone = evolve(&p, &single, &times, Direction::Forward).unwrap();
            prop_assert_eq!(alone.samples[1].state.modes[0], joint.samples[1].state.modes[k]);
        }
    }

    #[test]
    fn energy_nonincreasing(p in params_strategy(), x in prop::array::uniform3(-1.0f64..1.0)) {
        let init = SpectralState::from_fn(line(), 1, |_, _| ModeState::new(x[0], x[1], x[2]));
        let traj = evolve(&p, &init, &uniform_times(2.0, 0.05), Direction::Forward).unwrap();
        let e = traj.energies();
        for w in e.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
        }
        prop_assert!(traj.samples.iter().all(|s| s.energy.dissipation_rate >= 0.0));
    }

    #[test]
    fn time_reflection_round_trip(x in prop::array::uniform3(-1.0f64..1.0), lambda in 0.5f64..10.0, t in 0.01f64..1.0) {
        let p = ModelParams::unit();
        let fwd = mode_matrix(&p, lambda, Direction::Forward);
        let bwd = mode_matrix(&p, lambda, Direction::Backward);
        let x0 = ModeState::new(x[0], x[1], x[2]);
        let xt = evolve_mode(&fwd, x0, t).unwrap();
        let reflected = ModeState::new(xt.u, -xt.v, xt.theta);
        let back = evolve_mode(&bwd, reflected, t).unwrap();
        let recovered = Vector3::new(back.u, -back.v, back.theta);
        let err = (recovered - x0.to_vector()).norm() / x0.to_vector().norm().max(1e-300);
        // Rounding in the forward step is amplified by the backward growth.
        let growth = Exponential3::new(&bwd.entries).matrix(t).norm() * Exponential3::new(&fwd.entries).matrix(t).norm();
        let tol = 1e-6f64.max(1e3 * f64::EPSILON * growth);
        prop_assert!(err <= tol, "err {} tol {}", err, tol);
    }

    #[test]
    fn stable_roots_in_left_half_plane(p in params_strategy(), e in -2.0f64..8.0) {
        let s = mode_eigenvalues(&p, 10f64.powf(e));
        prop_assert!(s.max_residual <= 1e-10);
        prop_assert!(s.max_real_part() < 0.0);
    }

    #[test]
    fn dissipation_identity_everywhere(p in params_strategy(), lambda in 0.1f64..1e4, omega in -1e4f64..1e4, g in prop::array::uniform6(-1.0f64..1.0)) {
        let rhs = ResolventRhs::new(Complex::new(g[0], g[1]), Complex::new(g[2], g[3]), Complex::new(g[4], g[5]));
        let x = solve_mode_resolvent(&p, lambda, omega, rhs).unwrap();
        let gs = ModeState { u: rhs.g1, v: rhs.g2, theta: rhs.g3 };
        let lhs = energy_inner_re(&p, lambda, &x, &gs);
        let want = p.dissipation_symbol(lambda) * x.theta.norm_sqr();
        let scale = energy_norm(&p, lambda, &x) * energy_norm(&p, lambda, &gs);
        prop_assert!((lhs - want).abs() <= 1e-10 * scale);
        prop_assert!(mode_resolvent_norm(&p, lambda, omega).unwrap().is_finite());
    }

    #[test]
    fn more_modes_never_lower_the_norm(omega in 0.0f64..500.0) {
        let p = ModelParams::unit();
        let a = resolvent_norm(&p, &line(), omega, 8).unwrap();
        let b = resolvent_norm(&p, &line(), omega, 16).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn closed_form_sequence_matches_direct_solve(p in params_strategy(), n in 1usize..40) {
        let point = nondiff_sequence(&p, &line(), n, Branch::Plus).unwrap();
        prop_assert!(point.residual_first <= 1e-12 && point.residual_second <= 1e-12);
        let direct = nondiff_direct_v_sq(&p, &point).unwrap();
        prop_assert!((direct - point.norm_v_sq).abs() <= 1e-10 * point.norm_v_sq);
    }

    #[test]
    fn functional_identities(p in params_strategy(), x in prop::array::uniform9(-1.0f64..1.0)) {
        let s = SpectralState::from_fn(line(), 3, |i, _| ModeState::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]));
        let l = lagrange_functionals(&p, &s, 0.5).unwrap();
        let heat: f64 = s.modes.iter().map(|(_, m)| p.a * m.theta * m.theta).sum();
        prop_assert!((l.l1 - l.l2 - heat).abs() <= 1e-14 * heat.max(l.l1.abs()).max(1e-300));
        prop_assert!(l.l1 >= l.l2.abs() * (1.0 - 1e-14));
        let phi = phi_coefficients(&p, &s);
        prop_assert!(phi.max_residual <= 1e-12);
        prop_assert!(phi.nu >= 0.0);
    }

    #[test]
    fn backward_zero_state_stays_zero(p in params_strategy()) {
        let traj = evolve(&p, &SpectralState::zero(line(), 4), &uniform_times(1.0, 0.1), Direction::Backward).unwrap();
        prop_assert!(traj.samples.iter().all(|s| s.state.is_zero()));
    }
}
