use hfcavity::linalg::hermitian_eigenvalues;
use hfcavity::model::{self, Basis, Drive, ModelScope, Operator, SystemParams};
use hfcavity::spectra::{diagonalize_blocks, eigen_report, excitation_manifold, EigenOptions};
use hfcavity::sweep::{pbg_params, toroid_params};
use proptest::prelude::*;

fn toroid_h0(detuning: f64) -> (Operator, Basis) {
    let basis = Basis::new(ModelScope::ToroidCoupled, 1).unwrap();
    let p = SystemParams { cavity_detuning: detuning, ..toroid_params() };
    (model::hamiltonian_h0(&p, &basis).unwrap(), basis)
}

fn pbg_h2(detuning: f64) -> (Operator, Basis) {
    let basis = Basis::new(ModelScope::Full, 1).unwrap();
    let p = SystemParams { cavity_detuning: detuning, ..pbg_params() };
    (model::hamiltonian_h2(&p, &basis).unwrap(), basis)
}

fn manifold_energies(h: &Operator, basis: &Basis) -> Vec<f64> {
    let sub = excitation_manifold(h, basis, 1).unwrap();
    hermitian_eigenvalues(&h.restrict(&sub.indices)).unwrap()
}

fn arbitrary_params() -> impl Strategy<Value = SystemParams> {
    (1.0..5e4f64, 0.1..5e3f64, 0.1..10.0f64, 0.0..1.0f64, 0.0..6.3f64, 0.0..10.0f64, -3e4..3e4f64, -3e4..3e4f64).prop_map(
        |(g, kappa, gamma, eps, phase, repump, cavity, probe)| SystemParams {
            g,
            kappa,
            gamma,
            epsilon: Drive { modulus: eps, phase },
            repump_rabi: repump,
            repump_offset: -251.0,
            cavity_detuning: cavity,
            probe_detuning: probe,
            ..SystemParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn cluster_counts_are_tolerance_robust(detuning in -1_000.0..1_000.0f64, log_tol in -6.0..-2.0f64) {
        let options = EigenOptions { cluster_tol: 10f64.powf(log_tol), band_gap: None };
        let (h, basis) = toroid_h0(detuning);
        let sub = excitation_manifold(&h, &basis, 1).unwrap();
        let toroid = eigen_report(&h, &basis, &sub, &options).unwrap();
        prop_assert_eq!((toroid.dimension(), toroid.unique_count()), (36, 20));

        let (h, basis) = pbg_h2(detuning * 40.0);
        let sub = excitation_manifold(&h, &basis, 1).unwrap();
        let pbg = eigen_report(&h, &basis, &sub, &options).unwrap();
        prop_assert_eq!((pbg.dimension(), pbg.unique_count()), (48, 27));
    }

    /// `dH/d(cavity detuning)` is the photon number with norm 1, so by Weyl's
    /// inequality every sorted eigenvalue moves by at most the step.
    #[test]
    fn sorted_eigenvalues_are_lipschitz(detuning in -40_000.0..40_000.0f64, step in 0.0..500.0f64) {
        for build in [toroid_h0, pbg_h2] {
            let (a, basis) = build(detuning);
            let (b, _) = build(detuning + step);
            let ea = manifold_energies(&a, &basis);
            let eb = manifold_energies(&b, &basis);
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert!((y - x).abs() <= step + 1e-7, "{x} -> {y} over {step}");
            }
        }
    }

    #[test]
    fn cavity_likeness_sums_to_photon_states(detuning in -40_000.0..40_000.0f64) {
        for build in [toroid_h0, pbg_h2] {
            let (h, basis) = build(detuning);
            let sub = excitation_manifold(&h, &basis, 1).unwrap();
            let report = eigen_report(&h, &basis, &sub, &EigenOptions::default()).unwrap();
            let total: f64 = report.states.iter().map(|s| s.cavity_likeness).sum();
            let photon_states = sub.indices.iter().filter(|&&i| basis.state(i).photons == 1).count();
            prop_assert!((total - photon_states as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn m_blocks_mirror(detuning in -40_000.0..40_000.0f64) {
        for build in [toroid_h0, pbg_h2] {
            let (h, basis) = build(detuning);
            let sub = excitation_manifold(&h, &basis, 1).unwrap();
            let blocks = diagonalize_blocks(&h, &basis, &sub).unwrap();
            for b in &blocks {
                let mirror = blocks.iter().find(|o| o.m == -b.m).unwrap();
                for (x, y) in b.energies.iter().zip(&mirror.energies) {
                    prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
                }
            }
        }
    }

    #[test]
    fn hamiltonians_are_hermitian_and_conserve_m(p in arbitrary_params()) {
        let basis = Basis::new(ModelScope::Full, 2).unwrap();
        let m = model::total_m(&basis);
        let n = model::excitation_number(&basis);
        let builders: [(fn(&SystemParams, &Basis) -> Result<Operator, model::ModelError>, bool); 4] = [
            (model::hamiltonian_h0, true),
            (model::hamiltonian_h1, false),
            (model::hamiltonian_h2, true),
            (model::hamiltonian_h3, false),
        ];
        for (build, undriven) in builders {
            let h = build(&p, &basis).unwrap();
            let scale = h.max_abs().max(1.0);
            prop_assert!(h.hermiticity_error() <= 1e-12 * scale);
            prop_assert!(h.commutator(&m).max_abs() <= 1e-12 * scale);
            if undriven {
                prop_assert!(h.commutator(&n).max_abs() <= 1e-12 * scale);
            }
        }
    }
}
