//! Circuit-level capacitance network of a 1D transmon chain.
//!
//! A chain of `N` transmons with ground capacitance `C_q` and coupling
//! capacitors `C_C` between neighbours has a tridiagonal capacitance matrix.
//! Its inverse is dense, so every pair of qubits acquires a charging energy
//! `E_C,nm = e^2 (C^-1)_nm / 2` even without a direct capacitor between them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::dense::SquareMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Zero-flux Josephson energy used when none is configured (J).
pub const DEFAULT_JOSEPHSON_ENERGY: f64 = 50e-24;

/// How the two edge qubits are shunted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeConvention {
    /// Edge qubits carry `C_q + C_C`, so every diagonal entry is `C_q + 2 C_C`
    /// and the matrix is tridiagonal Toeplitz.
    #[default]
    ToeplitzEdges,
    /// Every qubit carries `C_q`; edge diagonals are `C_q + C_C`.
    IdenticalShunt,
}

/// Direct stray capacitance between two non-adjacent qubits (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParasiticLink {
    pub n: usize,
    pub m: usize,
    /// fF
    pub c_par: f64,
}

/// Per-qubit Josephson energies, either one value for the whole chain or an
/// explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JosephsonEnergies {
    Uniform(f64),
    PerQubit(Vec<f64>),
}

impl Default for JosephsonEnergies {
    fn default() -> Self {
        JosephsonEnergies::Uniform(DEFAULT_JOSEPHSON_ENERGY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n_qubits: usize,
    /// Qubit (ground) capacitance, fF.
    pub cq: f64,
    /// Nearest-neighbour coupling capacitance, fF.
    pub cc: f64,
    #[serde(default)]
    pub edge_convention: EdgeConvention,
    /// Josephson energy at the operating flux, J.
    #[serde(default, alias = "ej")]
    pub ej_zero_flux: JosephsonEnergies,
    #[serde(default)]
    pub parasitic_links: Vec<ParasiticLink>,
}

impl ChainSpec {
    /// Parasitic-free chain with the default Josephson energy.
    pub fn uniform(n_qubits: usize, cq: f64, cc: f64) -> Self {
        Self {
            n_qubits,
            cq,
            cc,
            edge_convention: EdgeConvention::ToeplitzEdges,
            ej_zero_flux: JosephsonEnergies::default(),
            parasitic_links: Vec::new(),
        }
    }

    pub fn with_convention(mut self, convention: EdgeConvention) -> Self {
        self.edge_convention = convention;
        self
    }

    /// Same chain with `C_C = ratio * C_q`.
    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.cc = ratio * self.cq;
        self
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.cc / self.cq
    }

    pub fn is_parasitic_free(&self) -> bool {
        self.parasitic_links.iter().all(|l| l.c_par == 0.0)
    }

    pub fn josephson_energies(&self) -> Vec<f64> {
        match &self.ej_zero_flux {
            JosephsonEnergies::Uniform(ej) => vec![*ej; self.n_qubits],
            JosephsonEnergies::PerQubit(v) => v.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be positive and finite, got {x}")))
            }
        };
        if self.n_qubits < 2 {
            return Err(Error::validation(
                "chain.n_qubits",
                format!("need at least 2 qubits, got {}", self.n_qubits),
            ));
        }
        positive("chain.cq", self.cq)?;
        positive("chain.cc", self.cc)?;
        match &self.ej_zero_flux {
            JosephsonEnergies::Uniform(ej) => positive("chain.ej_zero_flux", *ej)?,
            JosephsonEnergies::PerQubit(v) => {
                if v.len() != self.n_qubits {
                    return Err(Error::validation(
                        "chain.ej_zero_flux",
                        format!("expected {} entries, got {}", self.n_qubits, v.len()),
                    ));
                }
                for &ej in v {
                    positive("chain.ej_zero_flux", ej)?;
                }
            }
        }
        let mut seen = Vec::with_capacity(self.parasitic_links.len());
        for link in &self.parasitic_links {
            for idx in [link.n, link.m] {
                if idx == 0 || idx > self.n_qubits {
                    return Err(Error::IndexOutOfRange {
                        field: "chain.parasitic_links",
                        index: idx,
                        len: self.n_qubits,
                    });
                }
            }
            if link.n.abs_diff(link.m) < 2 {
                return Err(Error::validation(
                    "chain.parasitic_links",
                    format!("link ({}, {}) must join non-adjacent qubits", link.n, link.m),
                ));
            }
            if !(link.c_par.is_finite() && link.c_par >= 0.0) {
                return Err(Error::validation(
                    "chain.parasitic_links",
                    format!("c_par must be non-negative, got {}", link.c_par),
                ));
            }
            let key = (link.n.min(link.m), link.n.max(link.m));
            if seen.contains(&key) {
                return Err(Error::validation(
                    "chain.parasitic_links",
                    format!("duplicate link ({}, {})", key.0, key.1),
                ));
            }
            seen.push(key);
        }
        Ok(())
    }
}

/// Symmetric capacitance matrix in fF.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceMatrix<T>(SquareMatrix<T>);

/// Inverse capacitance matrix in fF^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCapacitanceMatrix<T>(SquareMatrix<T>);

impl<T: Scalar> CapacitanceMatrix<T> {
    /// Wraps a matrix, checking symmetry.
    pub fn new(entries: SquareMatrix<T>) -> Result<Self> {
        if !entries.is_symmetric() {
            return Err(Error::validation("capacitance", "matrix must be symmetric"));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &SquareMatrix<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Entry with 1-based indices.
    pub fn get(&self, n: usize, m: usize) -> &T {
        &self.0[(n - 1, m - 1)]
    }
}

impl<T: Scalar> InverseCapacitanceMatrix<T> {
    pub(crate) fn from_entries(entries: SquareMatrix<T>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &SquareMatrix<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Entry with 1-based indices.
    pub fn get(&self, n: usize, m: usize) -> &T {
        &self.0[(n - 1, m - 1)]
    }

    pub fn to_f64(&self) -> InverseCapacitanceMatrix<f64> {
        InverseCapacitanceMatrix(self.0.to_f64())
    }
}

fn convert<T: Scalar>(field: &str, x: f64) -> Result<T> {
    T::from_f64(x).ok_or_else(|| Error::validation(field, format!("{x} not representable")))
}

/// Assembles the chain's capacitance matrix.
pub fn build_capacitance_matrix<T: Scalar>(spec: &ChainSpec) -> Result<CapacitanceMatrix<T>> {
    spec.validate()?;
    let n = spec.n_qubits;
    let cq: T = convert("chain.cq", spec.cq)?;
    let cc: T = convert("chain.cc", spec.cc)?;
    let two = T::one() + T::one();
    let mut c = SquareMatrix::<T>::zeros(n);
    for i in 0..n {
        let is_edge = i == 0 || i == n - 1;
        c[(i, i)] = match spec.edge_convention {
            EdgeConvention::ToeplitzEdges => cq.clone() + two.clone() * cc.clone(),
            EdgeConvention::IdenticalShunt if is_edge => cq.clone() + cc.clone(),
            EdgeConvention::IdenticalShunt => cq.clone() + two.clone() * cc.clone(),
        };
        if i + 1 < n {
            c[(i, i + 1)] = -cc.clone();
            c[(i + 1, i)] = -cc.clone();
        }
    }
    for link in &spec.parasitic_links {
        let par: T = convert("chain.parasitic_links", link.c_par)?;
        let (a, b) = (link.n - 1, link.m - 1);
        c[(a, b)] = c[(a, b)].clone() - par.clone();
        c[(b, a)] = c[(b, a)].clone() - par.clone();
        c[(a, a)] = c[(a, a)].clone() + par.clone();
        c[(b, b)] = c[(b, b)].clone() + par;
    }
    Ok(CapacitanceMatrix(c))
}

/// Residual bound a floating-point inverse has to meet.
pub const INVERSE_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Dense inverse through an `L D L^T` factorisation.
///
/// The factorisation needs no square roots, so the same routine produces the
/// exact inverse for rational input. A non-positive pivot means the matrix is
/// not positive definite.
pub fn invert_numeric<T: Scalar>(c: &CapacitanceMatrix<T>) -> Result<InverseCapacitanceMatrix<T>> {
    let a = &c.0;
    let n = a.dim();
    let mut l = SquareMatrix::<T>::identity(n);
    let mut d: Vec<T> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = a[(j, j)].clone();
        for k in 0..j {
            dj = dj - l[(j, k)].clone() * l[(j, k)].clone() * d[k].clone();
        }
        if dj <= T::zero() {
            let magnitudes: Vec<f64> = d.iter().map(|x| x.abs().to_f64()).collect();
            let largest = magnitudes.iter().cloned().fold(dj.abs().to_f64(), f64::max);
            let condition = if dj.is_zero() {
                f64::INFINITY
            } else {
                largest / dj.abs().to_f64()
            };
            return Err(Error::NotPositiveDefinite {
                pivot: j + 1,
                value: dj.to_f64(),
                condition,
            });
        }
        for i in (j + 1)..n {
            let mut s = a[(i, j)].clone();
            for k in 0..j {
                s = s - l[(i, k)].clone() * l[(j, k)].clone() * d[k].clone();
            }
            l[(i, j)] = s / dj.clone();
        }
        d.push(dj);
    }

    let mut inv = SquareMatrix::<T>::zeros(n);
    let mut y = vec![T::zero(); n];
    for col in 0..n {
        // L y = e_col
        for i in 0..n {
            let mut s = if i == col { T::one() } else { T::zero() };
            for k in 0..i {
                s = s - l[(i, k)].clone() * y[k].clone();
            }
            y[i] = s;
        }
        for (yi, di) in y.iter_mut().zip(&d) {
            *yi = yi.clone() / di.clone();
        }
        // L^T x = y
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in (i + 1)..n {
                s = s - l[(k, i)].clone() * inv[(k, col)].clone();
            }
            inv[(i, col)] = s;
        }
    }
    // Exact symmetry; the two triangles agree up to rounding.
    for i in 0..n {
        for j in 0..i {
            let avg = (inv[(i, j)].clone() + inv[(j, i)].clone()) / (T::one() + T::one());
            inv[(i, j)] = avg.clone();
            inv[(j, i)] = avg;
        }
    }

    if T::LOG10_HEADROOM.is_some() {
        let residual = a.mul(&inv).max_abs_diff(&SquareMatrix::identity(n));
        if !(residual < INVERSE_RESIDUAL_TOLERANCE) {
            return Err(Error::IllConditioned {
                residual,
                tolerance: INVERSE_RESIDUAL_TOLERANCE,
                condition: a.norm_one() * inv.norm_one(),
            });
        }
    }
    Ok(InverseCapacitanceMatrix(inv))
}

/// Local and pairwise charging energies in joules.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitiveEnergies {
    /// `E_C,m = e^2 (C^-1)_mm / 2`.
    pub local: Vec<f64>,
    /// `E_C,nm = e^2 (C^-1)_nm / 2`, zero diagonal.
    pub pairwise: DMatrix<f64>,
}

impl CapacitiveEnergies {
    pub fn n_qubits(&self) -> usize {
        self.local.len()
    }
}

pub fn capacitive_energies<T: Scalar>(
    cinv: &InverseCapacitanceMatrix<T>,
    consts: &PhysicalConstants,
) -> CapacitiveEnergies {
    let n = cinv.dim();
    let m = cinv.0.to_f64();
    let local = (0..n).map(|i| consts.charging_energy(m[(i, i)])).collect();
    let pairwise = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            // Average the two triangles so the result is symmetric bit for bit.
            consts.charging_energy(0.5 * (m[(i, j)] + m[(j, i)]))
        }
    });
    CapacitiveEnergies { local, pairwise }
}

/// Relative charging-energy offset `E_C,n / E_C,1 - 1` of every qubit
/// with respect to the first edge qubit.
pub fn edge_detuning_profile(energies: &CapacitiveEnergies) -> Vec<f64> {
    let edge = energies.local[0];
    energies
        .local
        .iter()
        .enumerate()
        .map(|(i, &e)| if i == 0 { 0.0 } else { e / edge - 1.0 })
        .collect()
}

/// Builds the chain, inverts numerically in `f64` and returns the energies.
pub fn chain_energies(spec: &ChainSpec, consts: &PhysicalConstants) -> Result<CapacitiveEnergies> {
    let c = build_capacitance_matrix::<f64>(spec)?;
    let cinv = invert_numeric(&c)?;
    Ok(capacitive_energies(&cinv, consts))
}
