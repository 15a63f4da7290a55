//! Time evolution of the XX chain: single-excitation transfer and
//! infinite-temperature OTOCs.
//!
//! Every propagator comes from a one-time eigendecomposition, so arbitrary
//! time grids cost one phase multiplication per point. The XX Hamiltonian
//! conserves the excitation number and `sigma^z` operators are diagonal, so
//! the OTOC trace splits into independent excitation sectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{sigma_z, ExcitationBasis};
use crate::error::{Error, Result};
use crate::spinmodel::SpinHamiltonian;

/// Populations below this are not accepted as a transfer maximum.
pub const TRANSFER_NOISE_FLOOR: f64 = 1e-6;
/// Largest tolerated `|Im tr(W(t) V W(t) V)| / 2^N` for exact OTOCs.
pub const OTOC_IMAG_TOLERANCE: f64 = 1e-10;
/// Above this chain length the exact OTOC is replaced by the stochastic
/// trace estimator unless requested explicitly.
pub const EXACT_OTOC_MAX_QUBITS: usize = 12;
/// Largest chain evolved without the sector decomposition.
pub const FULL_SPACE_MAX_QUBITS: usize = 10;

/// Default transfer window and step, in units of `1 / g_bar`.
pub const DEFAULT_TRANSFER_T_MAX: f64 = 20.0;
pub const DEFAULT_TRANSFER_DT: f64 = 0.01;
/// Default OTOC window in units of `1 / g_bar` and number of samples.
pub const DEFAULT_OTOC_T_MAX: f64 = 50.0;
pub const DEFAULT_OTOC_POINTS: usize = 2000;

/// Single-excitation block: row/column `n` is `|e>_{n+1}` with all other
/// qubits in the ground state.
pub fn single_excitation_block(h: &SpinHamiltonian) -> DMatrix<f64> {
    h.sector_matrix(&ExcitationBasis::new(h.n_qubits(), 1))
}

/// Eigendecomposition of a real symmetric block, reused for every time.
#[derive(Debug, Clone)]
pub struct EigenBlock {
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl EigenBlock {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(matrix);
        Self {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// `exp(-i H t)` in the block's original basis.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let q = &self.vectors;
        let d = self.dim();
        let (c, s): (Vec<f64>, Vec<f64>) =
            self.energies.iter().map(|&e| ((e * t).cos(), -(e * t).sin())).unzip();
        let qc = DMatrix::from_fn(d, d, |i, a| q[(i, a)] * c[a]);
        let qs = DMatrix::from_fn(d, d, |i, a| q[(i, a)] * s[a]);
        let re = &qc * q.transpose();
        let im = &qs * q.transpose();
        DMatrix::from_fn(d, d, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
    }

    /// `<row| exp(-i H t) |col>`.
    pub fn amplitude(&self, row: usize, col: usize, t: f64) -> Complex64 {
        let q = &self.vectors;
        self.energies
            .iter()
            .enumerate()
            .map(|(a, &e)| Complex64::from_polar(q[(row, a)] * q[(col, a)], -e * t))
            .sum()
    }
}

/// Propagator restricted to the single-excitation manifold.
#[derive(Debug, Clone)]
pub struct SingleExcitationPropagator {
    block: EigenBlock,
}

impl SingleExcitationPropagator {
    pub fn new(h: &SpinHamiltonian) -> Self {
        Self {
            block: EigenBlock::new(single_excitation_block(h)),
        }
    }

    /// Populations of every qubit at time `t` (s) after exciting `from_site`
    /// (1-based).
    pub fn populations(&self, from_site: usize, t: f64) -> Vec<f64> {
        (0..self.block.dim())
            .map(|n| self.block.amplitude(n, from_site - 1, t).norm_sqr())
            .collect()
    }

    pub fn population(&self, from_site: usize, to_site: usize, t: f64) -> f64 {
        self.block.amplitude(to_site - 1, from_site - 1, t).norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferPeak {
    /// `P_N` at the first maximum.
    pub p_max: f64,
    /// Time of the first maximum, s.
    pub tau0_s: f64,
    /// Same in units of `1 / g_bar`.
    pub tau0_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub times_s: Vec<f64>,
    pub times_norm: Vec<f64>,
    /// Population of the last qubit.
    pub population_last: Vec<f64>,
    /// Population left on the first qubit.
    pub population_first: Vec<f64>,
    /// `None` when the population never rises above the noise floor.
    pub peak: Option<TransferPeak>,
}

/// Index of the first interior sample with `p[i-1] < p[i] >= p[i+1]` above
/// `floor`.
pub fn first_maximum(series: &[f64], floor: f64) -> Option<usize> {
    (1..series.len().saturating_sub(1))
        .find(|&i| series[i - 1] < series[i] && series[i] >= series[i + 1] && series[i] > floor)
}

fn parabola_offset(left: f64, mid: f64, right: f64) -> f64 {
    let curvature = left - 2.0 * mid + right;
    if curvature >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / curvature).clamp(-1.0, 1.0)
}

/// Evolves `|e>_1 |g>...|g>` and tracks the population arriving on qubit `N`.
/// `t_max` and `dt` are in seconds.
pub fn evolve_transfer(h: &SpinHamiltonian, t_max: f64, dt: f64) -> Result<TransferResult> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::validation("t_max", format!("must be positive, got {t_max:e}")));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= t_max) {
        return Err(Error::validation("dt", format!("must be in (0, t_max], got {dt:e}")));
    }
    let n = h.n_qubits();
    let g_bar = h.mean_nn_coupling();
    let prop = SingleExcitationPropagator::new(h);
    let steps = (t_max / dt + 1e-9).floor() as usize;
    let times_s: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let population_last: Vec<f64> = times_s.iter().map(|&t| prop.population(1, n, t)).collect();
    let population_first: Vec<f64> = times_s.iter().map(|&t| prop.population(1, 1, t)).collect();

    let peak = match first_maximum(&population_last, TRANSFER_NOISE_FLOOR) {
        Some(i) => {
            let mut tau = times_s[i]
                + dt * parabola_offset(population_last[i - 1], population_last[i], population_last[i + 1]);
            // Successive parabolic steps on the exact population.
            let mut step = dt / 16.0;
            for _ in 0..3 {
                let p = |t: f64| prop.population(1, n, t);
                tau += step * parabola_offset(p(tau - step), p(tau), p(tau + step));
                step /= 16.0;
            }
            let refined = prop.population(1, n, tau);
            let (p_max, tau0_s) = if refined >= population_last[i] {
                (refined, tau)
            } else {
                (population_last[i], times_s[i])
            };
            Some(TransferPeak {
                p_max,
                tau0_s,
                tau0_norm: tau0_s * g_bar,
            })
        }
        None => {
            let peak = population_last.iter().cloned().fold(0.0, f64::max);
            if peak > TRANSFER_NOISE_FLOOR {
                return Err(Error::GridTooCoarse { peak });
            }
            None
        }
    };

    Ok(TransferResult {
        times_norm: times_s.iter().map(|t| t * g_bar).collect(),
        times_s,
        population_last,
        population_first,
        peak,
    })
}

/// `tr(A) / dim`: expectation value in the infinite-temperature state.
pub fn infinite_temperature_expectation(a: &DMatrix<Complex64>) -> Result<Complex64> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::validation("operator", "must be a non-empty square matrix"));
    }
    Ok(a.trace() / a.nrows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum OtocMethod {
    /// Exact trace, sector by sector.
    SectorExact,
    /// Exact trace on the undecomposed `2^N` space (cross-check route).
    FullSpace,
    /// Haar-random-state average of `<psi| W(t) V W(t) V |psi>`.
    Stochastic { samples: usize, seed: u64 },
}

impl OtocMethod {
    /// Exact up to [`EXACT_OTOC_MAX_QUBITS`], stochastic beyond.
    pub fn default_for(n_qubits: usize, seed: u64) -> Self {
        if n_qubits <= EXACT_OTOC_MAX_QUBITS {
            OtocMethod::SectorExact
        } else {
            OtocMethod::Stochastic { samples: 32, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtocSeries {
    pub times_s: Vec<f64>,
    pub times_norm: Vec<f64>,
    /// `C(t) = 2 [1 - Re <W(t) V W(t) V>]`.
    pub values: Vec<f64>,
    /// Largest `|Im <W(t) V W(t) V>|` seen on the grid.
    pub max_imag: f64,
    /// Standard error per point, stochastic estimator only.
    pub std_error: Option<Vec<f64>>,
    pub w_site: usize,
    pub v_site: usize,
}

/// One symmetry block prepared for OTOC evaluation.
struct OtocBlock {
    eig: EigenBlock,
    /// `W` in the eigenbasis, `Q^T W Q`.
    w_eigen: DMatrix<f64>,
    v_diag: Vec<f64>,
}

impl OtocBlock {
    fn new(states: &[u32], matrix: DMatrix<f64>, w_site: usize, v_site: usize) -> Self {
        let eig = EigenBlock::new(matrix);
        let w_diag: Vec<f64> = states.iter().map(|&s| sigma_z(s, w_site)).collect();
        let v_diag: Vec<f64> = states.iter().map(|&s| sigma_z(s, v_site)).collect();
        let q = &eig.vectors;
        let wq = DMatrix::from_fn(q.nrows(), q.ncols(), |i, a| w_diag[i] * q[(i, a)]);
        let w_eigen = q.transpose() * wq;
        Self {
            eig,
            w_eigen,
            v_diag,
        }
    }

    /// `W(t)` in the block's computational basis as (real, imaginary) parts.
    fn heisenberg_w(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let d = self.eig.dim();
        let phases: Vec<Complex64> = self
            .eig
            .energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, e * t))
            .collect();
        let mut mr = DMatrix::zeros(d, d);
        let mut mi = DMatrix::zeros(d, d);
        for b in 0..d {
            for a in 0..d {
                let ph = phases[a] * phases[b].conj();
                let w = self.w_eigen[(a, b)];
                mr[(a, b)] = w * ph.re;
                mi[(a, b)] = w * ph.im;
            }
        }
        let q = &self.eig.vectors;
        let qt = q.transpose();
        (q * mr * &qt, q * mi * &qt)
    }

    /// Unnormalised `tr(W(t) V W(t) V)` over the block.
    fn trace_wvwv(&self, t: f64) -> Complex64 {
        let (wr, wi) = self.heisenberg_w(t);
        let d = self.eig.dim();
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..d {
            for j in 0..d {
                let vv = self.v_diag[i] * self.v_diag[j];
                re += vv * (wr[(i, j)] * wr[(j, i)] - wi[(i, j)] * wi[(j, i)]);
                im += vv * (wr[(i, j)] * wi[(j, i)] + wi[(i, j)] * wr[(j, i)]);
            }
        }
        Complex64::new(re, im)
    }

    /// `W(t) x` for a block vector.
    fn apply_w(&self, x: &[Complex64], t: f64) -> Vec<Complex64> {
        let q = &self.eig.vectors;
        let d = self.eig.dim();
        let mut z: Vec<Complex64> = (0..d)
            .map(|a| {
                let s: Complex64 = (0..d).map(|i| x[i] * q[(i, a)]).sum();
                s * Complex64::from_polar(1.0, -self.eig.energies[a] * t)
            })
            .collect();
        z = (0..d)
            .map(|a| {
                let s: Complex64 = (0..d).map(|b| z[b] * self.w_eigen[(a, b)]).sum();
                s * Complex64::from_polar(1.0, self.eig.energies[a] * t)
            })
            .collect();
        (0..d).map(|i| (0..d).map(|a| z[a] * q[(i, a)]).sum()).collect()
    }
}

fn check_site(field: &'static str, site: usize, n: usize) -> Result<()> {
    if site == 0 || site > n {
        Err(Error::IndexOutOfRange { field, index: site, len: n })
    } else {
        Ok(())
    }
}

fn sector_blocks(h: &SpinHamiltonian, w_site: usize, v_site: usize) -> Vec<(Vec<u32>, OtocBlock)> {
    let n = h.n_qubits();
    (0..=n)
        .into_par_iter()
        .map(|k| {
            let basis = ExcitationBasis::new(n, k);
            let block = OtocBlock::new(basis.states(), h.sector_matrix(&basis), w_site, v_site);
            (basis.states().to_vec(), block)
        })
        .collect()
}

/// Infinite-temperature OTOC `C(t) = 2 [1 - <W(t) V W(t) V>]` with
/// `W = sigma^z_{w_site}` and `V = sigma^z_{v_site}` at the given times (s).
pub fn otoc_series(
    h: &SpinHamiltonian,
    w_site: usize,
    v_site: usize,
    times_s: &[f64],
    method: OtocMethod,
) -> Result<OtocSeries> {
    let n = h.n_qubits();
    check_site("w_site", w_site, n)?;
    check_site("v_site", v_site, n)?;
    let dim = h.dim() as f64;
    let g_bar = h.mean_nn_coupling();

    let (traces, std_error): (Vec<Complex64>, Option<Vec<f64>>) = match method {
        OtocMethod::SectorExact => {
            let blocks = sector_blocks(h, w_site, v_site);
            let traces = times_s
                .par_iter()
                .map(|&t| blocks.iter().map(|(_, b)| b.trace_wvwv(t)).sum::<Complex64>() / dim)
                .collect();
            (traces, None)
        }
        OtocMethod::FullSpace => {
            if n > FULL_SPACE_MAX_QUBITS {
                return Err(Error::Capacity {
                    what: "qubits for full-space OTOC",
                    required: n,
                    limit: FULL_SPACE_MAX_QUBITS,
                });
            }
            let states: Vec<u32> = (0..h.dim() as u32).collect();
            let block = OtocBlock::new(&states, h.matrix(), w_site, v_site);
            let traces = times_s.par_iter().map(|&t| block.trace_wvwv(t) / dim).collect();
            (traces, None)
        }
        OtocMethod::Stochastic { samples, seed } => {
            if samples == 0 {
                return Err(Error::validation("otoc.samples", "need at least one sample"));
            }
            let blocks = sector_blocks(h, w_site, v_site);
            let states_per_sample: Vec<Vec<Vec<Complex64>>> =
                (0..samples).map(|s| random_state(&blocks, seed, s as u64)).collect();
            let per_time: Vec<(Complex64, f64)> = times_s
                .par_iter()
                .map(|&t| {
                    let values: Vec<Complex64> = states_per_sample
                        .iter()
                        .map(|psi| {
                            blocks
                                .iter()
                                .zip(psi)
                                .map(|((_, b), x)| {
                                    // <V W(t) psi | W(t) V psi>
                                    let vx: Vec<Complex64> =
                                        x.iter().zip(&b.v_diag).map(|(a, v)| a * v).collect();
                                    let right = b.apply_w(&vx, t);
                                    let wt = b.apply_w(x, t);
                                    wt.iter()
                                        .zip(&b.v_diag)
                                        .zip(&right)
                                        .map(|((l, v), r)| (l * v).conj() * r)
                                        .sum::<Complex64>()
                                })
                                .sum()
                        })
                        .collect();
                    let mean = values.iter().sum::<Complex64>() / samples as f64;
                    let var = if samples > 1 {
                        values.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (samples - 1) as f64
                    } else {
                        0.0
                    };
                    (mean, 2.0 * (var / samples as f64).sqrt())
                })
                .collect();
            let (traces, errs) = per_time.into_iter().unzip();
            (traces, Some(errs))
        }
    };

    let mut max_imag = 0.0f64;
    let mut values = Vec::with_capacity(traces.len());
    for (tr, &t) in traces.iter().zip(times_s) {
        max_imag = max_imag.max(tr.im.abs());
        if std_error.is_none() && tr.im.abs() > OTOC_IMAG_TOLERANCE {
            return Err(Error::ComplexOtoc { imag: tr.im, time: t });
        }
        values.push(2.0 * (1.0 - tr.re));
    }
    Ok(OtocSeries {
        times_norm: times_s.iter().map(|t| t * g_bar).collect(),
        times_s: times_s.to_vec(),
        values,
        max_imag,
        std_error,
        w_site,
        v_site,
    })
}

/// Haar-random state over the full space, split into sector pieces. The
/// generator depends only on `(seed, sample)`.
fn random_state(blocks: &[(Vec<u32>, OtocBlock)], seed: u64, sample: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    let mut pieces: Vec<Vec<Complex64>> = blocks
        .iter()
        .map(|(states, _)| {
            states
                .iter()
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    let norm: f64 = pieces.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    pieces.iter_mut().flatten().for_each(|z| *z /= norm);
    pieces
}

/// Evenly spaced grid `0, dt, ..., t_max` in units of `1 / g_bar`, returned
/// in seconds.
pub fn linear_times(t_max_norm: f64, points: usize, g_bar: f64) -> Vec<f64> {
    if points < 2 {
        return vec![0.0; points];
    }
    (0..points)
        .map(|i| t_max_norm * i as f64 / (points - 1) as f64 / g_bar)
        .collect()
}

/// Logarithmic grid from `t_min_norm` to `t_max_norm` (units of `1 / g_bar`),
/// returned in seconds.
pub fn log_times(t_min_norm: f64, t_max_norm: f64, points: usize, g_bar: f64) -> Vec<f64> {
    if points < 2 {
        return vec![t_min_norm / g_bar; points];
    }
    let (a, b) = (t_min_norm.ln(), t_max_norm.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp() / g_bar)
        .collect()
}
