//! Computational basis bookkeeping: qubit `m` (1-based) is bit `m - 1` of a
//! basis-state index, and a bit value of 1 means the qubit is excited.

/// Hard ceiling on the chain length for any 2^N representation.
pub const MAX_QUBITS: usize = 14;

/// Reverses the order of the lowest `n_qubits` bits (site reversal).
pub fn reverse_sites(state: u32, n_qubits: usize) -> u32 {
    state.reverse_bits() >> (32 - n_qubits as u32)
}

/// `+1` if qubit `site` (1-based) is in the ground state, `-1` if excited.
/// These are the diagonal entries of `sigma^z_site`.
pub fn sigma_z(state: u32, site: usize) -> f64 {
    if state >> (site - 1) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All basis states with exactly `k` excitations, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationBasis {
    n_qubits: usize,
    excitations: usize,
    states: Vec<u32>,
}

impl ExcitationBasis {
    pub fn new(n_qubits: usize, excitations: usize) -> Self {
        assert!(n_qubits <= 31, "basis states are stored in u32");
        assert!(excitations <= n_qubits, "more excitations than qubits");
        let mut states = Vec::with_capacity(binomial(n_qubits, excitations));
        if excitations == 0 {
            states.push(0);
        } else {
            // Gosper's hack: next integer with the same popcount.
            let limit = 1u64 << n_qubits;
            let mut s: u64 = (1u64 << excitations) - 1;
            while s < limit {
                states.push(s as u32);
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
        }
        Self {
            n_qubits,
            excitations,
            states,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes_are_binomial() {
        for n in 1..=10 {
            let total: usize = (0..=n).map(|k| ExcitationBasis::new(n, k).len()).sum();
            assert_eq!(total, 1 << n);
            for k in 0..=n {
                let b = ExcitationBasis::new(n, k);
                assert_eq!(b.len(), binomial(n, k));
                assert!(b.states().windows(2).all(|w| w[0] < w[1]));
                assert!(b.states().iter().all(|s| s.count_ones() as usize == k));
            }
        }
        assert_eq!(ExcitationBasis::new(14, 7).len(), 3432);
    }

    #[test]
    fn site_reversal() {
        assert_eq!(reverse_sites(0b0001, 4), 0b1000);
        assert_eq!(reverse_sites(0b0110, 4), 0b0110);
        assert_eq!(reverse_sites(0b011, 3), 0b110);
        for s in 0..(1u32 << 7) {
            assert_eq!(reverse_sites(reverse_sites(s, 7), 7), s);
        }
    }

    #[test]
    fn pauli_z_signs() {
        assert_eq!(sigma_z(0b01, 1), -1.0);
        assert_eq!(sigma_z(0b01, 2), 1.0);
    }
}
