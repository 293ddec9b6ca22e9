use hfcavity::lindblad::{solve_point, CollapseMode, PointSolution, SolveOptions};
use hfcavity::model::{self, AtomicState, Basis, BasisState, Drive, Manifold, ModelScope, Operator, SystemParams};
use hfcavity::sweep::{pbg_params, toroid_params};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn toroid_point(probe: f64) -> SystemParams {
    SystemParams { cavity_detuning: -100.0, probe_detuning: probe, ..toroid_params() }
}

fn pbg_point(cavity: f64, probe: f64) -> SystemParams {
    SystemParams { cavity_detuning: cavity, probe_detuning: probe, ..pbg_params() }
}

fn solve_toroid(basis: &Basis, p: &SystemParams) -> PointSolution {
    let h = model::hamiltonian_h1(p, basis).unwrap();
    solve_point(&h, basis, p, CollapseMode::PerGroundManifold, &SolveOptions::default()).unwrap()
}

fn solve_pbg(basis: &Basis, p: &SystemParams, options: &SolveOptions) -> PointSolution {
    let h = model::hamiltonian_h3(p, basis).unwrap();
    solve_point(&h, basis, p, CollapseMode::GlobalCommon, options).unwrap()
}

fn full() -> Basis {
    Basis::new(ModelScope::Full, 1).unwrap()
}

/// Reflection `|F, m, n> -> s_F |F, -m, n>` with `s = (-1)^F` on ground and
/// `(-1)^(F'+1)` on excited manifolds; it maps `D_q` onto `D_-q`.
fn reflection(basis: &Basis) -> Operator {
    let triplets = basis.states().enumerate().map(|(i, s)| {
        let image = BasisState { atom: AtomicState { manifold: s.atom.manifold, m: -s.atom.m }, photons: s.photons };
        let f = s.atom.manifold.f();
        let exponent = if s.atom.manifold.is_excited() { f + 1 } else { f };
        let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
        (basis.index(&image).unwrap(), i, C64::new(sign, 0.0))
    });
    Operator::from_triplets(basis.dim(), triplets.collect::<Vec<_>>())
}

fn conjugate_dense(u: &Operator, rho: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = rho.len();
    let ud = u.to_dense();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                if ud[i][k] == C64::new(0.0, 0.0) {
                    continue;
                }
                for l in 0..n {
                    acc += ud[i][k] * rho[k][l] * ud[j][l].conj();
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn max_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn reflection_leaves_hamiltonians_and_steady_states_invariant() {
    let basis = full();
    let u = reflection(&basis);
    for (h, sol) in [
        {
            let p = toroid_point(-251.0);
            (model::hamiltonian_h1(&p, &basis).unwrap(), solve_toroid(&basis, &p))
        },
        {
            let p = pbg_point(20_000.0, -300.0);
            (model::hamiltonian_h3(&p, &basis).unwrap(), solve_pbg(&basis, &p, &SolveOptions::default()))
        },
    ] {
        let uhu = u.matmul(&h).matmul(&u.adjoint());
        assert!((&uhu - &h).max_abs() < 1e-9 * h.max_abs());
        let reflected = conjugate_dense(&u, &sol.state.rho);
        assert!(max_diff(&reflected, &sol.state.rho) < 1e-8);
        for m in 1..=4 {
            assert!((sol.observables.zeeman(4, m) - sol.observables.zeeman(4, -m)).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn global_rate_scaling(s in 0.05f64..20.0, probe in -300.0f64..-200.0) {
        let basis = Basis::new(ModelScope::ToroidCoupled, 1).unwrap();
        let p = toroid_point(probe);
        let a = solve_toroid(&basis, &p);
        let b = solve_toroid(&basis, &p.scaled(s));
        prop_assert!((a.observables.transmission - b.observables.transmission).abs() < 1e-9);
        prop_assert!(max_diff(&a.state.rho, &b.state.rho) < 1e-9);
    }

    #[test]
    fn drive_phase_invariance(phase in 0.0f64..std::f64::consts::TAU, probe in -300.0f64..-200.0) {
        let basis = Basis::new(ModelScope::ToroidCoupled, 1).unwrap();
        let p = toroid_point(probe);
        let q = SystemParams { epsilon: Drive { modulus: p.epsilon.modulus, phase }, ..p };
        let a = solve_toroid(&basis, &p).observables;
        let b = solve_toroid(&basis, &q).observables;
        prop_assert!((a.transmission - b.transmission).abs() < 1e-10);
        for (x, y) in a.zeeman_populations.values().zip(b.zeeman_populations.values()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn populations_sum_to_one(probe in -1_000.0f64..1_000.0) {
        let basis = full();
        let sol = solve_toroid(&basis, &toroid_point(probe));
        let total: f64 = sol.observables.manifold_populations.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let zeeman: f64 = sol.observables.zeeman_populations.values().sum();
        let ground = sol.observables.manifold(Manifold::Ground(3)) + sol.observables.manifold(Manifold::Ground(4));
        prop_assert!((zeeman - ground).abs() < 1e-12);
        prop_assert!(sol.state.cptp.is_physical(), "{:?}", sol.state.cptp);
    }
}

/// Photon number normalized by `|eps|^2` converges to its weak-drive limit
/// with a second-order correction: quartering `eps` shrinks the gap ~16x.
#[test]
fn weak_drive_correction_is_second_order() {
    let basis = full();
    let cases = [
        (toroid_point(-100.0), false),
        (toroid_point(0.0), false),
        (pbg_point(20_000.0, -300.0), true),
        (pbg_point(4_000.0, 9_000.0), true),
    ];
    for (p, pbg) in cases {
        let normalized = |s: f64| {
            let q = SystemParams { epsilon: Drive::real(p.epsilon.modulus * s), ..p };
            let sol = if pbg { solve_pbg(&basis, &q, &SolveOptions::default()) } else { solve_toroid(&basis, &q) };
            sol.observables.photon_number / q.epsilon.modulus.powi(2)
        };
        let [a, b, c] = [1.0, 0.25, 0.0625].map(normalized);
        let ratio = (a - b) / (b - c);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }
}

#[test]
fn sector_solve_matches_full_solve_for_common_reservoir() {
    let basis = full();
    let p = pbg_point(-13_000.0, 8_900.0);
    let a = solve_pbg(&basis, &p, &SolveOptions::default());
    let b = solve_pbg(&basis, &p, &SolveOptions { m_sector: true });
    assert!(max_diff(&a.state.rho, &b.state.rho) < 1e-9);
}

#[test]
fn empty_cavity_lorentzian() {
    let basis = Basis::from_states(ModelScope::Full, vec![AtomicState::new(Manifold::Ground(4), 0).unwrap()], 1);
    let kappa = 3.0;
    for k in 0..20 {
        let delta = -30.0 + 3.0 * f64::from(k);
        let p = SystemParams { kappa, epsilon: Drive::real(1e-5 * kappa), cavity_detuning: delta, ..SystemParams::default() };
        let t = solve_toroid(&basis, &p).observables.transmission;
        assert!((t - kappa * kappa / (kappa * kappa + delta * delta)).abs() < 1e-8);
    }
}
