use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use transmon_core::basis::sigma_z;
use transmon_core::dynamics::{
    evolve_transfer, linear_times, otoc_series, single_excitation_block, EigenBlock, OtocMethod,
    SingleExcitationPropagator,
};
use transmon_core::{build_hamiltonian, ChainSpec, ModelKind, PhysicalConstants, Resonance, SpinHamiltonian, SpinModelParameters};

type CMat = DMatrix<Complex64>;

/// `exp(-i H t)` by scaling and squaring a Taylor series.
fn expm_oracle(h: &DMatrix<f64>, t: f64) -> CMat {
    let n = h.nrows();
    let a: CMat = h.map(|x| Complex64::new(0.0, -x * t));
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let a = a / Complex64::from(2f64.powi(squarings as i32));
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..30 {
        term = &term * &a / Complex64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn otoc_oracle(h: &SpinHamiltonian, w: usize, v: usize, t: f64) -> f64 {
    let n = h.n_qubits();
    let dim = h.dim();
    let diag = |site: usize| CMat::from_fn(dim, dim, |i, j| {
        Complex64::from(if i == j { sigma_z(i as u32, site) } else { 0.0 })
    });
    let u = expm_oracle(&h.matrix(), t);
    let wt = u.adjoint() * diag(w) * &u;
    let vm = diag(v);
    let tr = (&wt * &vm * &wt * &vm).trace() / dim as f64;
    assert!(tr.im.abs() < 1e-10);
    let _ = n;
    2.0 * (1.0 - tr.re)
}

fn synthetic(omega: &[f64], g: &[(usize, usize, f64)]) -> SpinHamiltonian {
    let n = omega.len();
    let mut m = DMatrix::zeros(n, n);
    for &(a, b, x) in g {
        m[(a, b)] = x;
        m[(b, a)] = x;
    }
    build_hamiltonian(&SpinModelParameters::from_parts(omega.to_vec(), m).unwrap(), ModelKind::Nonlocal).unwrap()
}

fn chain(n: usize, ratio: f64, kind: ModelKind) -> SpinHamiltonian {
    let p = SpinModelParameters::from_chain(
        &ChainSpec::uniform(n, 100.0, 100.0 * ratio),
        &PhysicalConstants::si(),
        Resonance::Calibrated,
    )
    .unwrap();
    build_hamiltonian(&p, kind).unwrap()
}

#[test]
fn two_qubit_otoc_matches_brute_force() {
    let h = synthetic(&[1.0, 1.3], &[(0, 1, 0.4)]);
    let times: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
    let s = otoc_series(&h, 1, 2, &times, OtocMethod::SectorExact).unwrap();
    for (c, &t) in s.values.iter().zip(&times) {
        assert!((c - otoc_oracle(&h, 1, 2, t)).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn three_qubit_nonlocal_otoc_matches_brute_force() {
    let h = synthetic(&[1.0, 0.9, 1.1], &[(0, 1, 0.3), (1, 2, 0.25), (0, 2, 0.07)]);
    let times: Vec<f64> = (0..25).map(|i| 0.4 * i as f64).collect();
    for (w, v) in [(1, 3), (2, 2), (3, 1)] {
        let s = otoc_series(&h, w, v, &times, OtocMethod::SectorExact).unwrap();
        for (c, &t) in s.values.iter().zip(&times) {
            assert!((c - otoc_oracle(&h, w, v, t)).abs() < 1e-10);
        }
    }
}

#[test]
fn sector_and_full_space_otoc_agree() {
    for n in [4, 6, 8] {
        for kind in ModelKind::ALL {
            let h = chain(n, 0.15, kind);
            let times = linear_times(30.0, 16, h.mean_nn_coupling());
            let a = otoc_series(&h, 1, n, &times, OtocMethod::SectorExact).unwrap();
            let b = otoc_series(&h, 1, n, &times, OtocMethod::FullSpace).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-9, "N={n}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn otoc_is_real_bounded_and_time_symmetric() {
    let h = chain(8, 0.2, ModelKind::Nonlocal);
    let times = linear_times(50.0, 200, h.mean_nn_coupling());
    let s = otoc_series(&h, 1, 8, &times, OtocMethod::SectorExact).unwrap();
    assert!(s.max_imag < 1e-10);
    assert!(s.values[0].abs() < 1e-12);
    assert!(s.values.iter().all(|&c| (-1e-12..=4.0 + 1e-12).contains(&c)));
    let back: Vec<f64> = times.iter().map(|t| -t).collect();
    let r = otoc_series(&h, 1, 8, &back, OtocMethod::SectorExact).unwrap();
    for (x, y) in s.values.iter().zip(&r.values) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn stochastic_estimate_tracks_exact() {
    let h = chain(8, 0.15, ModelKind::Nonlocal);
    let times = linear_times(20.0, 21, h.mean_nn_coupling());
    let exact = otoc_series(&h, 1, 8, &times, OtocMethod::SectorExact).unwrap();
    let method = OtocMethod::Stochastic { samples: 48, seed: 3 };
    let est = otoc_series(&h, 1, 8, &times, method).unwrap();
    let err = est.std_error.as_ref().unwrap();
    for i in 0..times.len() {
        assert!((est.values[i] - exact.values[i]).abs() <= 5.0 * err[i] + 1e-3, "t index {i}");
    }
    assert_eq!(est, otoc_series(&h, 1, 8, &times, method).unwrap());
}

#[test]
fn full_space_route_is_capped() {
    let h = chain(11, 0.1, ModelKind::NearestNeighbor);
    assert!(otoc_series(&h, 1, 11, &[0.0], OtocMethod::FullSpace).is_err());
}

#[test]
fn resonant_pair_rabi_oscillation() {
    let h = synthetic(&[5.0, 5.0], &[(0, 1, 0.2)]);
    let res = evolve_transfer(&h, 20.0 / 0.2, 0.01 / 0.2).unwrap();
    let peak = res.peak.unwrap();
    assert!((peak.p_max - 1.0).abs() < 1e-6);
    assert!((peak.tau0_s - std::f64::consts::PI / (2.0 * 0.2)).abs() < 1e-6 / 0.2);
}

#[test]
fn calibrated_chain_transfers_more() {
    let consts = PhysicalConstants::si();
    let spec = ChainSpec::uniform(13, 100.0, 20.0);
    let p_max = |resonance, kind| {
        let p = SpinModelParameters::from_chain(&spec, &consts, resonance).unwrap();
        let g = p.mean_nn_coupling();
        let res = evolve_transfer(&build_hamiltonian(&p, kind).unwrap(), 40.0 / g, 0.01 / g).unwrap();
        res.peak.unwrap().p_max
    };
    for kind in ModelKind::ALL {
        assert!(p_max(Resonance::Calibrated, kind) > p_max(Resonance::Bare, kind), "{kind:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagators_are_unitary(n in 2usize..7, ratio in 0.01f64..0.3, t in -50.0f64..50.0) {
        let h = chain(n, ratio, ModelKind::Nonlocal);
        let block = EigenBlock::new(single_excitation_block(&h));
        let u = block.propagator(t / h.mean_nn_coupling());
        let id = &u * u.adjoint();
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((id[(i, j)] - Complex64::from(e)).norm() < 1e-12);
            }
        }
        let full = EigenBlock::new(h.matrix());
        let uf = full.propagator(t / h.mean_nn_coupling());
        let idf = &uf * uf.adjoint();
        prop_assert!((idf - CMat::identity(h.dim(), h.dim())).iter().all(|z| z.norm() < 1e-11));
    }

    #[test]
    fn single_excitation_probability_is_conserved(n in 2usize..10, ratio in 0.01f64..0.3, t in 0.0f64..100.0, nn in any::<bool>()) {
        let kind = if nn { ModelKind::NearestNeighbor } else { ModelKind::Nonlocal };
        let h = chain(n, ratio, kind);
        let prop = SingleExcitationPropagator::new(&h);
        let total: f64 = prop.populations(1, t / h.mean_nn_coupling()).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_matches_taylor_oracle(t in 0.0f64..30.0) {
        let h = synthetic(&[1.0, 1.1, 0.95, 1.05], &[(0, 1, 0.2), (1, 2, 0.3), (2, 3, 0.2), (0, 3, 0.05)]);
        let block = EigenBlock::new(single_excitation_block(&h));
        let u = block.propagator(t);
        let oracle = expm_oracle(&single_excitation_block(&h), t);
        prop_assert!((u - oracle).iter().all(|z| z.norm() < 1e-10));
    }
}
