//! Two-level (XX) description of the transmon chain.
//!
//! Each transmon is truncated to its two lowest levels. The charging and
//! Josephson energies fix the qubit frequency
//! `hbar omega_m = sqrt(8 E_C,m E_J,m) - E_C,m` and the exchange coupling
//! `hbar g_nm = 4 E_C,nm / sqrt(4 xi_n xi_m)` with `xi_m = sqrt(2 E_C,m / E_J,m)`.
//! Hamiltonians are stored as `H / hbar`, i.e. in rad/s.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{ExcitationBasis, MAX_QUBITS};
use crate::capnet::{chain_energies, CapacitiveEnergies, ChainSpec};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Below this `E_J / E_C` the two-level transmon picture is suspect.
pub const TRANSMON_RATIO_FLOOR: f64 = 20.0;

/// Default bound on `g_nm / min(omega_n, omega_m)`.
pub const DEFAULT_RWA_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Every pair couples through the full inverse capacitance matrix.
    #[serde(alias = "non-local")]
    Nonlocal,
    /// Only `g_{n,n+1}` is kept.
    NearestNeighbor,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Nonlocal, ModelKind::NearestNeighbor];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Nonlocal => "nonlocal",
            ModelKind::NearestNeighbor => "nearest-neighbor",
        }
    }

    /// Numeric code used in CSV tables.
    pub fn code(self) -> f64 {
        match self {
            ModelKind::Nonlocal => 0.0,
            ModelKind::NearestNeighbor => 1.0,
        }
    }
}

/// Whether the per-qubit Josephson energies are retuned so every qubit sits
/// at the first qubit's frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resonance {
    Bare,
    Calibrated,
}

fn check_energy(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("energy must be positive, got {x:e}")))
    }
}

/// `xi = sqrt(2 E_C / E_J)`.
pub fn transmon_xi(e_c: f64, e_j: f64) -> f64 {
    (2.0 * e_c / e_j).sqrt()
}

/// Qubit angular frequency (rad/s) from charging and Josephson energies (J).
pub fn effective_frequency(e_c: f64, e_j: f64, consts: &PhysicalConstants) -> Result<f64> {
    check_energy("e_c", e_c)?;
    check_energy("e_j", e_j)?;
    if e_j / e_c < TRANSMON_RATIO_FLOOR {
        warn!(
            "E_J/E_C = {:.1} below the transmon floor {TRANSMON_RATIO_FLOOR}",
            e_j / e_c
        );
    }
    Ok(consts.energy_to_angular((8.0 * e_c * e_j).sqrt() - e_c))
}

/// Exchange couplings `g_nm` (rad/s), symmetric with zero diagonal.
pub fn coupling_matrix(
    energies: &CapacitiveEnergies,
    ej: &[f64],
    consts: &PhysicalConstants,
) -> Result<DMatrix<f64>> {
    let n = energies.n_qubits();
    if ej.len() != n {
        return Err(Error::validation(
            "ej",
            format!("expected {n} Josephson energies, got {}", ej.len()),
        ));
    }
    for m in 0..n {
        check_energy("e_c", energies.local[m])?;
        check_energy("e_j", ej[m])?;
    }
    let xi: Vec<f64> = (0..n).map(|m| transmon_xi(energies.local[m], ej[m])).collect();
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = 4.0 * energies.pairwise[(a, b)] / (4.0 * xi[a] * xi[b]).sqrt();
            let v = consts.energy_to_angular(v);
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    Ok(g)
}

/// Josephson energies that put every qubit at `target_omega`:
/// `E_J,m = (hbar omega + E_C,m)^2 / (8 E_C,m)`.
pub fn calibrate_resonance(
    energies: &CapacitiveEnergies,
    target_omega: f64,
    consts: &PhysicalConstants,
) -> Result<Vec<f64>> {
    if !(target_omega.is_finite() && target_omega > 0.0) {
        return Err(Error::validation(
            "target_omega",
            format!("must be positive, got {target_omega:e}"),
        ));
    }
    let target = consts.angular_to_energy(target_omega);
    energies
        .local
        .iter()
        .map(|&e_c| {
            check_energy("e_c", e_c)?;
            Ok((target + e_c).powi(2) / (8.0 * e_c))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinModelParameters {
    omega: Vec<f64>,
    g: DMatrix<f64>,
    xi: Vec<f64>,
    ej: Vec<f64>,
    mean_nn_coupling: f64,
    warnings: Vec<String>,
}

fn mean_nn(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    if n < 2 {
        return 0.0;
    }
    (0..n - 1).map(|i| g[(i, i + 1)]).sum::<f64>() / (n - 1) as f64
}

impl SpinModelParameters {
    pub fn new(energies: &CapacitiveEnergies, ej: &[f64], consts: &PhysicalConstants) -> Result<Self> {
        let g = coupling_matrix(energies, ej, consts)?;
        let n = energies.n_qubits();
        let mut warnings = Vec::new();
        let mut omega = Vec::with_capacity(n);
        let mut xi = Vec::with_capacity(n);
        for m in 0..n {
            let (e_c, e_j) = (energies.local[m], ej[m]);
            omega.push(effective_frequency(e_c, e_j, consts)?);
            xi.push(transmon_xi(e_c, e_j));
            if e_j / e_c < TRANSMON_RATIO_FLOOR {
                warnings.push(format!(
                    "qubit {}: E_J/E_C = {:.1} below transmon floor {TRANSMON_RATIO_FLOOR}",
                    m + 1,
                    e_j / e_c
                ));
            }
        }
        Ok(Self {
            mean_nn_coupling: mean_nn(&g),
            omega,
            g,
            xi,
            ej: ej.to_vec(),
            warnings,
        })
    }

    /// Builds the chain, inverts its capacitance matrix and derives the spin
    /// parameters. With [`Resonance::Calibrated`] all qubits are tuned to the
    /// bare frequency of qubit 1.
    pub fn from_chain(
        spec: &ChainSpec,
        consts: &PhysicalConstants,
        resonance: Resonance,
    ) -> Result<Self> {
        let energies = chain_energies(spec, consts)?;
        let bare_ej = spec.josephson_energies();
        let ej = match resonance {
            Resonance::Bare => bare_ej,
            Resonance::Calibrated => {
                let target = effective_frequency(energies.local[0], bare_ej[0], consts)?;
                calibrate_resonance(&energies, target, consts)?
            }
        };
        Self::new(&energies, &ej, consts)
    }

    /// Synthetic model from explicit frequencies and couplings (rad/s).
    /// `xi` and the Josephson energies are left empty.
    pub fn from_parts(omega: Vec<f64>, g: DMatrix<f64>) -> Result<Self> {
        let n = omega.len();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::validation("g", "coupling matrix must be N x N"));
        }
        for i in 0..n {
            if g[(i, i)] != 0.0 {
                return Err(Error::validation("g", "diagonal must be zero"));
            }
            for j in 0..i {
                if g[(i, j)] != g[(j, i)] {
                    return Err(Error::validation("g", "must be symmetric"));
                }
            }
        }
        Ok(Self {
            mean_nn_coupling: mean_nn(&g),
            omega,
            g,
            xi: Vec::new(),
            ej: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.omega.len()
    }

    /// Qubit frequencies, rad/s.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Exchange couplings, rad/s.
    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Josephson energies the parameters were derived with, J.
    pub fn josephson_energies(&self) -> &[f64] {
        &self.ej
    }

    /// Mean of `g_{n,n+1}` over the chain, rad/s.
    pub fn mean_nn_coupling(&self) -> f64 {
        self.mean_nn_coupling
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Same couplings, every frequency shifted by `delta` (rad/s).
    pub fn shifted(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.omega.iter_mut().for_each(|w| *w += delta);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RwaReport {
    /// Largest `g_nm / min(omega_n, omega_m)`.
    pub max_ratio: f64,
    /// 1-based pair attaining it.
    pub worst_pair: Option<(usize, usize)>,
    pub threshold: f64,
    pub warning: bool,
}

pub fn rwa_report(params: &SpinModelParameters, threshold: f64) -> RwaReport {
    let n = params.n_qubits();
    let mut max_ratio = 0.0;
    let mut worst_pair = None;
    for a in 0..n {
        for b in (a + 1)..n {
            let r = params.g[(a, b)].abs() / params.omega[a].min(params.omega[b]);
            if r > max_ratio {
                max_ratio = r;
                worst_pair = Some((a + 1, b + 1));
            }
        }
    }
    RwaReport {
        max_ratio,
        worst_pair,
        threshold,
        warning: max_ratio > threshold,
    }
}

/// XX Hamiltonian `sum_m omega_m n_m + sum_{m<n} g_nm (s-_n s+_m + h.c.)`
/// in units of rad/s, real symmetric in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    kind: ModelKind,
    omega: Vec<f64>,
    couplings: DMatrix<f64>,
    mean_nn_coupling: f64,
}

pub fn build_hamiltonian(params: &SpinModelParameters, kind: ModelKind) -> Result<SpinHamiltonian> {
    let n = params.n_qubits();
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "qubits in a 2^N Hamiltonian",
            required: n,
            limit: MAX_QUBITS,
        });
    }
    if n == 0 {
        return Err(Error::validation("n_qubits", "empty chain"));
    }
    let mut couplings = params.g.clone();
    if kind == ModelKind::NearestNeighbor {
        for a in 0..n {
            for b in 0..n {
                if a.abs_diff(b) != 1 {
                    couplings[(a, b)] = 0.0;
                }
            }
        }
    }
    Ok(SpinHamiltonian {
        kind,
        omega: params.omega.clone(),
        couplings,
        mean_nn_coupling: params.mean_nn_coupling,
    })
}

impl SpinHamiltonian {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.omega.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.omega
    }

    /// Couplings actually present in this Hamiltonian (rad/s).
    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    /// Mean nearest-neighbour coupling of the underlying parameters; sets the
    /// natural time unit `1 / g_bar`.
    pub fn mean_nn_coupling(&self) -> f64 {
        self.mean_nn_coupling
    }

    fn fill(&self, states: &[u32], index_of: impl Fn(u32) -> Option<usize>) -> DMatrix<f64> {
        let n = self.n_qubits();
        let dim = states.len();
        let mut h = DMatrix::zeros(dim, dim);
        for (col, &s) in states.iter().enumerate() {
            h[(col, col)] = (0..n).filter(|&m| s >> m & 1 == 1).map(|m| self.omega[m]).sum();
            for a in 0..n {
                for b in (a + 1)..n {
                    let g = self.couplings[(a, b)];
                    if g == 0.0 || (s >> a & 1) == (s >> b & 1) {
                        continue;
                    }
                    let t = s ^ (1 << a) ^ (1 << b);
                    let row = index_of(t).expect("exchange preserves excitation number");
                    h[(row, col)] += g;
                }
            }
        }
        h
    }

    /// Dense `2^N x 2^N` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let states: Vec<u32> = (0..self.dim() as u32).collect();
        self.fill(&states, |t| Some(t as usize))
    }

    /// Block of the Hamiltonian inside one excitation sector.
    pub fn sector_matrix(&self, basis: &ExcitationBasis) -> DMatrix<f64> {
        assert_eq!(basis.n_qubits(), self.n_qubits(), "basis for a different chain");
        self.fill(basis.states(), |t| basis.index_of(t))
    }

    /// Largest violation of site-reversal symmetry in the frequencies and
    /// couplings, relative to the largest parameter.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.n_qubits();
        let scale = self
            .omega
            .iter()
            .chain(self.couplings.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for a in 0..n {
            worst = worst.max((self.omega[a] - self.omega[n - 1 - a]).abs());
            for b in 0..n {
                worst = worst.max((self.couplings[(a, b)] - self.couplings[(n - 1 - a, n - 1 - b)]).abs());
            }
        }
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capnet::ChainSpec;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::si()
    }

    #[test]
    fn frequency_at_reference_energies() {
        let w = effective_frequency(1.2833e-25, 50e-24, &consts()).unwrap();
        let ghz = w / (2.0 * std::f64::consts::PI) / 1e9;
        assert!((ghz - 10.62).abs() < 0.01, "{ghz}");
    }

    #[test]
    fn quadrupled_josephson_energy_doubles_sqrt_term() {
        let c = consts();
        let (e_c, e_j) = (1.3e-25, 4e-23);
        let a = c.angular_to_energy(effective_frequency(e_c, e_j, &c).unwrap()) + e_c;
        let b = c.angular_to_energy(effective_frequency(e_c, 4.0 * e_j, &c).unwrap()) + e_c;
        assert!((b / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_energies() {
        assert!(effective_frequency(0.0, 1e-23, &consts()).is_err());
        assert!(effective_frequency(1e-25, -1.0, &consts()).is_err());
    }

    #[test]
    fn calibration_round_trip() {
        let c = consts();
        let energies = chain_energies(&ChainSpec::uniform(9, 100.0, 15.0), &c).unwrap();
        let target = 2.0 * std::f64::consts::PI * 6.3e9;
        let ej = calibrate_resonance(&energies, target, &c).unwrap();
        for (e_c, e_j) in energies.local.iter().zip(&ej) {
            let w = effective_frequency(*e_c, *e_j, &c).unwrap();
            assert!((w - target).abs() / target < 1e-12);
        }
    }

    #[test]
    fn uniform_charging_energy_gives_uniform_calibration() {
        let c = consts();
        let energies = CapacitiveEnergies {
            local: vec![1.2e-25; 4],
            pairwise: DMatrix::zeros(4, 4),
        };
        let ej = calibrate_resonance(&energies, 4e10, &c).unwrap();
        assert!(ej.iter().all(|&x| x == ej[0]));
    }

    #[test]
    fn zero_pairwise_energy_gives_zero_coupling() {
        let energies = CapacitiveEnergies {
            local: vec![1.2e-25; 3],
            pairwise: DMatrix::zeros(3, 3),
        };
        let g = coupling_matrix(&energies, &[5e-23; 3], &consts()).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn uniform_chain_couplings_are_mirror_symmetric() {
        let p = SpinModelParameters::from_chain(&ChainSpec::uniform(9, 100.0, 20.0), &consts(), Resonance::Bare)
            .unwrap();
        let g = p.couplings();
        assert!((g[(0, 1)] - g[(7, 8)]).abs() / g[(0, 1)] < 1e-12);
        let nn: f64 = (0..8).map(|i| g[(i, i + 1)]).sum::<f64>() / 8.0;
        assert_eq!(p.mean_nn_coupling(), nn);
        assert!(p.xi().iter().all(|&x| x > 0.0 && x < 1.0));
        assert!(p.warnings().is_empty());
    }

    #[test]
    fn next_nearest_coupling_ratio_near_fifteen_percent() {
        let p = SpinModelParameters::from_chain(&ChainSpec::uniform(13, 100.0, 20.0), &consts(), Resonance::Bare)
            .unwrap();
        let r = p.couplings()[(0, 2)] / p.couplings()[(0, 1)];
        assert!((r - 0.15).abs() < 0.01, "{r}");
    }

    #[test]
    fn rwa_report_edge_cases() {
        let zero = SpinModelParameters::from_parts(vec![1.0, 1.0], DMatrix::zeros(2, 2)).unwrap();
        let r = rwa_report(&zero, DEFAULT_RWA_THRESHOLD);
        assert_eq!(r.max_ratio, 0.0);
        assert!(!r.warning);
        assert!(!rwa_report(&zero, 0.0).warning);

        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1e-3, 1e-3, 0.0]);
        let weak = SpinModelParameters::from_parts(vec![1.0, 2.0], g).unwrap();
        let r = rwa_report(&weak, 0.0);
        assert!(r.warning);
        assert_eq!(r.worst_pair, Some((1, 2)));
        assert_eq!(r.max_ratio, 1e-3);
    }

    #[test]
    fn two_site_single_excitation_block() {
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
        let p = SpinModelParameters::from_parts(vec![2.0, 2.0], g).unwrap();
        let h = build_hamiltonian(&p, ModelKind::Nonlocal).unwrap().matrix();
        // basis |00>, |01> (qubit 1 excited), |10>, |11>
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 0.0, 0.0, //
                0.0, 2.0, 0.3, 0.0, //
                0.0, 0.3, 2.0, 0.0, //
                0.0, 0.0, 0.0, 4.0,
            ],
        );
        assert_eq!(h, expected);
    }

    #[test]
    fn capacity_limit() {
        let p = SpinModelParameters::from_parts(vec![1.0; 15], DMatrix::zeros(15, 15)).unwrap();
        assert!(matches!(
            build_hamiltonian(&p, ModelKind::Nonlocal),
            Err(Error::Capacity { required: 15, .. })
        ));
    }

    #[test]
    fn from_parts_validates_couplings() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(SpinModelParameters::from_parts(vec![1.0, 1.0], asym).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(SpinModelParameters::from_parts(vec![1.0, 1.0], diag).is_err());
    }
}
