//! Closed-form inverse of the uniform chain's capacitance matrix.
//!
//! For a tridiagonal Toeplitz matrix with diagonal `C_q + 2 C_C` and
//! off-diagonal `-C_C` the leading minors are Chebyshev polynomials of the
//! second kind evaluated at `z = (C_q + 2 C_C) / (2 C_C)`, giving
//!
//! ```text
//! (C^-1)_nm = U_{n-1}(z) U_{N-m}(z) / (C_C U_N(z)),   n <= m.
//! ```
//!
//! With bare edges (`C_q + C_C` on the two corner entries) the minors become
//! `U_k - U_{k-1}` and the determinant `U_N - 2 U_{N-1} + U_{N-2}`.
//!
//! All routines are generic over [`Scalar`]; with `BigRational` they are exact.

use num_traits::pow;

use crate::capnet::{EdgeConvention, InverseCapacitanceMatrix};
use crate::dense::SquareMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `z = (C_q + 2 C_C) / (2 C_C)`, always greater than one.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevArgument<T>(T);

impl<T: Scalar> ChebyshevArgument<T> {
    pub fn new(cq: &T, cc: &T) -> Result<Self> {
        if *cq <= T::zero() {
            return Err(Error::validation("cq", "must be positive"));
        }
        if *cc <= T::zero() {
            return Err(Error::validation("cc", "must be positive"));
        }
        let two = T::one() + T::one();
        Ok(Self((cq.clone() + two.clone() * cc.clone()) / (two * cc.clone())))
    }

    pub fn value(&self) -> &T {
        &self.0
    }
}

fn check_headroom<T: Scalar>(degree: usize, z: &T) -> Result<()> {
    if let Some(headroom) = T::LOG10_HEADROOM {
        let two_z = 2.0 * z.abs().to_f64();
        if two_z > 1.0 {
            let magnitude = degree as f64 * two_z.log10();
            if magnitude > headroom {
                return Err(Error::ChebyshevRange {
                    degree,
                    magnitude,
                    headroom,
                });
            }
        }
    }
    Ok(())
}

/// `U_{-1}, U_0, ..., U_max` by forward recurrence; entry `k + 1` holds `U_k`.
fn u_table<T: Scalar>(max_degree: usize, z: &T) -> Result<Vec<T>> {
    check_headroom(max_degree, z)?;
    let two_z = (T::one() + T::one()) * z.clone();
    let mut table = Vec::with_capacity(max_degree + 2);
    table.push(T::zero());
    table.push(T::one());
    for k in 1..=max_degree {
        let next = two_z.clone() * table[k].clone() - table[k - 1].clone();
        table.push(next);
    }
    Ok(table)
}

/// Chebyshev polynomial of the second kind, `U_k(z)` for `k >= -1`, with
/// `U_{-1} = 0`.
pub fn chebyshev_u<T: Scalar>(k: i64, z: &T) -> Result<T> {
    if k < -1 {
        return Err(Error::validation("k", format!("degree must be >= -1, got {k}")));
    }
    if k == -1 {
        return Ok(T::zero());
    }
    let k = k as usize;
    Ok(u_table(k, z)?.swap_remove(k + 1))
}

/// Index pair into a uniform chain, normalised so that `n <= m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzInverseQuery<T> {
    n: usize,
    m: usize,
    n_qubits: usize,
    cq: T,
    cc: T,
}

impl<T: Scalar> ToeplitzInverseQuery<T> {
    pub fn new(n: usize, m: usize, n_qubits: usize, cq: T, cc: T) -> Result<Self> {
        for idx in [n, m] {
            if idx == 0 || idx > n_qubits {
                return Err(Error::IndexOutOfRange {
                    field: "qubit index",
                    index: idx,
                    len: n_qubits,
                });
            }
        }
        Ok(Self {
            n: n.min(m),
            m: n.max(m),
            n_qubits,
            cq,
            cc,
        })
    }

    pub fn indices(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    /// Number of coupling capacitors between the two qubits.
    pub fn manhattan_distance(&self) -> usize {
        self.m - self.n
    }

    fn table(&self) -> Result<(Vec<T>, T)> {
        let z = ChebyshevArgument::new(&self.cq, &self.cc)?;
        Ok((u_table(self.n_qubits, z.value())?, self.cc.clone()))
    }
}

/// `(C^-1)_nm` (fF^-1) for the Toeplitz-edge chain.
pub fn toeplitz_inverse_element<T: Scalar>(q: &ToeplitzInverseQuery<T>) -> Result<T> {
    let (u, cc) = q.table()?;
    let at = |k: usize| u[k + 1].clone();
    let big_n = q.n_qubits;
    Ok(at(q.n - 1) * at(big_n - q.m) / (cc * at(big_n)))
}

/// `(C^-1)_nm` (fF^-1) for the identical-shunt chain.
pub fn identical_shunt_inverse_element<T: Scalar>(q: &ToeplitzInverseQuery<T>) -> Result<T> {
    let (u, cc) = q.table()?;
    // theta_k = U_k - U_{k-1} for k >= 0
    let theta = |k: usize| u[k + 1].clone() - u[k].clone();
    let big_n = q.n_qubits;
    let two = T::one() + T::one();
    let det = u[big_n + 1].clone() - two * u[big_n].clone() + u[big_n - 1].clone();
    Ok(theta(q.n - 1) * theta(big_n - q.m) / (cc * det))
}

/// Power-law approximation `(1/C_q) (C_q/C_C)^(-|m-n|)` valid for `C_C << C_q`.
pub fn asymptotic_inverse_element<T: Scalar>(q: &ToeplitzInverseQuery<T>) -> T {
    let d = q.manhattan_distance();
    pow(q.cc.clone() / q.cq.clone(), d) / q.cq.clone()
}

/// Full closed-form inverse for a parasitic-free uniform chain.
pub fn closed_form_inverse<T: Scalar>(
    n_qubits: usize,
    cq: T,
    cc: T,
    convention: EdgeConvention,
) -> Result<InverseCapacitanceMatrix<T>> {
    if n_qubits < 2 {
        return Err(Error::validation("n_qubits", "need at least 2 qubits"));
    }
    let z = ChebyshevArgument::new(&cq, &cc)?;
    let u = u_table(n_qubits, z.value())?;
    let at = |k: usize| u[k + 1].clone();
    let two = T::one() + T::one();
    let big_n = n_qubits;
    let entries = match convention {
        EdgeConvention::ToeplitzEdges => {
            let denom = cc * at(big_n);
            SquareMatrix::from_fn(big_n, |i, j| {
                let (n, m) = (i.min(j) + 1, i.max(j) + 1);
                at(n - 1) * at(big_n - m) / denom.clone()
            })
        }
        EdgeConvention::IdenticalShunt => {
            let theta = |k: usize| u[k + 1].clone() - u[k].clone();
            let denom = cc * (u[big_n + 1].clone() - two * u[big_n].clone() + u[big_n - 1].clone());
            SquareMatrix::from_fn(big_n, |i, j| {
                let (n, m) = (i.min(j) + 1, i.max(j) + 1);
                theta(n - 1) * theta(big_n - m) / denom.clone()
            })
        }
    };
    Ok(InverseCapacitanceMatrix::from_entries(entries))
}
