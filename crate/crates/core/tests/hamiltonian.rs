use nalgebra::DMatrix;
use proptest::prelude::*;
use transmon_core::basis::{reverse_sites, ExcitationBasis};
use transmon_core::spinmodel::rwa_report;
use transmon_core::{build_hamiltonian, ChainSpec, ModelKind, PhysicalConstants, Resonance, SpinModelParameters};

fn random_params(omega: Vec<f64>, upper: Vec<f64>) -> SpinModelParameters {
    let n = omega.len();
    let mut g = DMatrix::zeros(n, n);
    let mut it = upper.into_iter();
    for a in 0..n {
        for b in (a + 1)..n {
            let x = it.next().unwrap();
            g[(a, b)] = x;
            g[(b, a)] = x;
        }
    }
    SpinModelParameters::from_parts(omega, g).unwrap()
}

fn params_strategy() -> impl Strategy<Value = SpinModelParameters> {
    (2usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(4.0f64..6.0, n),
            prop::collection::vec(-0.3f64..0.3, n * (n - 1) / 2),
        )
            .prop_map(|(o, g)| random_params(o, g))
    })
}

fn excitation_count(state: usize) -> u32 {
    state.count_ones()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_symmetric_and_conserves_excitations(p in params_strategy()) {
        for kind in ModelKind::ALL {
            let h = build_hamiltonian(&p, kind).unwrap().matrix();
            prop_assert_eq!(&h, &h.transpose());
            for i in 0..h.nrows() {
                for j in 0..h.ncols() {
                    if excitation_count(i) != excitation_count(j) {
                        prop_assert_eq!(h[(i, j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn nearest_neighbor_equals_masked_nonlocal(p in params_strategy()) {
        let n = p.n_qubits();
        let nn = build_hamiltonian(&p, ModelKind::NearestNeighbor).unwrap();
        let mut g = p.couplings().clone();
        for a in 0..n {
            for b in 0..n {
                if a.abs_diff(b) > 1 {
                    g[(a, b)] = 0.0;
                }
            }
        }
        let masked = SpinModelParameters::from_parts(p.omega().to_vec(), g).unwrap();
        let nl = build_hamiltonian(&masked, ModelKind::Nonlocal).unwrap();
        prop_assert_eq!(nn.matrix(), nl.matrix());
    }

    #[test]
    fn frequency_shift_adds_k_delta(p in params_strategy(), delta in -1.0f64..1.0) {
        let h0 = build_hamiltonian(&p, ModelKind::Nonlocal).unwrap().matrix();
        let h1 = build_hamiltonian(&p.shifted(delta), ModelKind::Nonlocal).unwrap().matrix();
        for i in 0..h0.nrows() {
            let k = excitation_count(i) as f64;
            prop_assert!((h1[(i, i)] - h0[(i, i)] - k * delta).abs() < 1e-12);
            for j in 0..h0.ncols() {
                if i != j {
                    prop_assert_eq!(h1[(i, j)], h0[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn sector_blocks_are_submatrices(p in params_strategy()) {
        let h = build_hamiltonian(&p, ModelKind::Nonlocal).unwrap();
        let full = h.matrix();
        let n = h.n_qubits();
        for k in 0..=n {
            let basis = ExcitationBasis::new(n, k);
            let block = h.sector_matrix(&basis);
            for (i, &s) in basis.states().iter().enumerate() {
                for (j, &t) in basis.states().iter().enumerate() {
                    prop_assert_eq!(block[(i, j)], full[(s as usize, t as usize)]);
                }
            }
        }
    }
}

#[test]
fn uniform_chain_commutes_with_site_reversal() {
    let consts = PhysicalConstants::si();
    for n in [4, 5, 7] {
        for kind in ModelKind::ALL {
            for resonance in [Resonance::Bare, Resonance::Calibrated] {
                let p = SpinModelParameters::from_chain(&ChainSpec::uniform(n, 100.0, 15.0), &consts, resonance).unwrap();
                let h = build_hamiltonian(&p, kind).unwrap();
                assert!(h.mirror_asymmetry() < 1e-12);
                let m = h.matrix();
                let dim = m.nrows();
                let r = DMatrix::from_fn(dim, dim, |i, j| if reverse_sites(j as u32, n) as usize == i { 1.0 } else { 0.0 });
                let comm = &r * &m - &m * &r;
                let scale = m.amax();
                assert!(comm.amax() <= 1e-12 * scale, "N={n} {kind:?}");
            }
        }
    }
}

#[test]
fn weak_coupling_models_nearly_coincide() {
    let consts = PhysicalConstants::si();
    let p = SpinModelParameters::from_chain(&ChainSpec::uniform(8, 100.0, 2.0), &consts, Resonance::Calibrated).unwrap();
    let nl = build_hamiltonian(&p, ModelKind::Nonlocal).unwrap().matrix();
    let nn = build_hamiltonian(&p, ModelKind::NearestNeighbor).unwrap().matrix();
    let diff = (nl - nn).amax() / p.mean_nn_coupling();
    assert!(diff < 0.03, "{diff}");
}

#[test]
fn calibration_equalises_frequencies() {
    let consts = PhysicalConstants::si();
    let spec = ChainSpec::uniform(9, 100.0, 20.0);
    let bare = SpinModelParameters::from_chain(&spec, &consts, Resonance::Bare).unwrap();
    let cal = SpinModelParameters::from_chain(&spec, &consts, Resonance::Calibrated).unwrap();
    let target = bare.omega()[0];
    for w in cal.omega() {
        assert!((w - target).abs() < 1e-9 * target);
    }
    // the bare chain is detuned in the bulk
    assert!(bare.omega()[4] > bare.omega()[0]);
}

#[test]
fn rotating_wave_ratio_grows_with_coupling() {
    let consts = PhysicalConstants::si();
    let mut prev = 0.0;
    for ratio in [0.01, 0.05, 0.1, 0.15, 0.2] {
        let spec = ChainSpec::uniform(13, 100.0, 100.0 * ratio);
        let p = SpinModelParameters::from_chain(&spec, &consts, Resonance::Bare).unwrap();
        let report = rwa_report(&p, 0.05);
        assert!(report.max_ratio > prev);
        if ratio <= 0.1 {
            assert!(!report.warning, "{ratio}: {}", report.max_ratio);
        }
        prev = report.max_ratio;
    }
}
