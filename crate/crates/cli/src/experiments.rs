//! One runner per experiment. Each returns a numeric table plus summary
//! scalars and warnings; writing is left to [`crate::output`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use transmon_core::capnet::{chain_energies, edge_detuning_profile, invert_numeric};
use transmon_core::chebinv::closed_form_inverse;
use transmon_core::dynamics::{evolve_transfer, linear_times, log_times, otoc_series, OtocMethod};
use transmon_core::spectral::{r_vs_coupling_sweep, LevelStatsOptions, GOE_MEAN_R, POISSON_MEAN_R};
use transmon_core::spinmodel::rwa_report;
use transmon_core::{build_hamiltonian, ChainSpec, ModelKind, PhysicalConstants, Resonance, SpinModelParameters};

use crate::config::{Experiment, OtocMethodChoice, RunConfig, TimeGrid};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// RFC 3339, UTC. Excluded from reproducibility comparisons.
    pub timestamp: String,
    pub seed: u64,
}

impl Provenance {
    pub fn now(seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
    pub summary: BTreeMap<String, f64>,
}

impl ExperimentResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Default)]
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    warnings: Vec<String>,
    summary: BTreeMap<String, f64>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    fn note(&mut self, warnings: impl IntoIterator<Item = String>) {
        for w in warnings {
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
    }
}

/// Validates and runs one experiment.
pub fn run(cfg: &RunConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let consts = PhysicalConstants::si();
    let table = match cfg.experiment {
        Experiment::CouplingProfile => coupling_profile(cfg, &consts)?,
        Experiment::FreqProfile => freq_profile(cfg, &consts)?,
        Experiment::Transfer => transfer(cfg, &consts)?,
        Experiment::TransferSweep => transfer_sweep(cfg, &consts)?,
        Experiment::Otoc => otoc(cfg, &consts)?,
        Experiment::LevelStats => level_stats(cfg, &consts)?,
    };
    for w in &table.warnings {
        log::warn!("{w}");
    }
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.experiment,
        config: cfg.clone(),
        columns: table.columns,
        rows: table.rows,
        provenance: Provenance::now(cfg.seed),
        warnings: table.warnings,
        summary: table.summary,
    })
}

fn parameters(
    spec: &ChainSpec,
    resonance: Resonance,
    rwa_threshold: f64,
    consts: &PhysicalConstants,
) -> Result<(SpinModelParameters, Vec<String>)> {
    let params = SpinModelParameters::from_chain(spec, consts, resonance)?;
    let mut warnings = params.warnings().to_vec();
    let rwa = rwa_report(&params, rwa_threshold);
    if rwa.warning {
        let (a, b) = rwa.worst_pair.unwrap_or((0, 0));
        warnings.push(format!(
            "C_C/C_q = {}: g/omega = {:.4} on pair ({a}, {b}) exceeds the rotating-wave threshold {}",
            spec.coupling_ratio(),
            rwa.max_ratio,
            rwa.threshold
        ));
    }
    Ok((params, warnings))
}

fn coupling_profile(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<Table> {
    let spec = cfg.chain.spec();
    let n = spec.n_qubits;
    let r = cfg.coupling_profile.reference;
    let cinv = invert_numeric(&transmon_core::build_capacitance_matrix::<f64>(&spec)?)?;
    let closed = if spec.is_parasitic_free() {
        Some(closed_form_inverse(n, spec.cq, spec.cc, spec.edge_convention)?)
    } else {
        None
    };
    let energies = transmon_core::capnet::capacitive_energies(&cinv, consts);
    let (params, warnings) = parameters(&spec, cfg.model.resonance(), cfg.model.rwa_threshold, consts)?;

    let mut columns = vec!["m", "distance", "inverse_capacitance_per_ff"];
    if closed.is_some() {
        columns.push("closed_form_per_ff");
    }
    columns.extend(["e_c_nm_j", "e_c_ratio", "g_rad_s"]);
    let mut t = Table::new(&columns);
    t.note(warnings);

    // nearest neighbour on the side facing the chain interior
    let nn = if r < n { r + 1 } else { r - 1 };
    let e_nn = energies.pairwise[(r - 1, nn - 1)];
    for m in (1..=n).filter(|&m| m != r) {
        let mut row = vec![m as f64, r.abs_diff(m) as f64, *cinv.get(r, m)];
        if let Some(c) = &closed {
            row.push(*c.get(r, m));
        }
        let e = energies.pairwise[(r - 1, m - 1)];
        row.extend([e, e / e_nn, params.couplings()[(r - 1, m - 1)]]);
        t.rows.push(row);
    }
    for d in 2..=3 {
        if let Some(m) = [r + d, r.wrapping_sub(d)].into_iter().find(|&m| (1..=n).contains(&m)) {
            t.summary.insert(format!("e_c_ratio_d{d}"), energies.pairwise[(r - 1, m - 1)] / e_nn);
        }
    }
    t.summary.insert("coupling_ratio".into(), spec.coupling_ratio());
    Ok(t)
}

fn freq_profile(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<Table> {
    let mut t = Table::new(&["ratio", "n", "e_c_j", "delta_e_c", "omega_rad_s", "freq_ghz"]);
    let base = cfg.chain.spec();
    let n = base.n_qubits;
    let mut worst_asym = 0.0f64;
    for &ratio in &cfg.ratios {
        let spec = base.clone().with_ratio(ratio);
        let energies = chain_energies(&spec, consts)?;
        let delta = edge_detuning_profile(&energies);
        let (params, warnings) = parameters(&spec, Resonance::Bare, cfg.model.rwa_threshold, consts)?;
        t.note(warnings);
        for m in 0..n {
            let w = params.omega()[m];
            t.rows.push(vec![
                ratio,
                (m + 1) as f64,
                energies.local[m],
                delta[m],
                w,
                w / (2.0 * std::f64::consts::PI) / 1e9,
            ]);
            let mirror = energies.local[n - 1 - m];
            worst_asym = worst_asym.max((energies.local[m] - mirror).abs() / mirror);
        }
        t.summary.insert(format!("bulk_detuning@{ratio}"), delta[n / 2]);
    }
    t.summary.insert("max_mirror_deviation".into(), worst_asym);
    Ok(t)
}

fn transfer(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<Table> {
    let spec = cfg.chain.spec();
    let (params, warnings) = parameters(&spec, cfg.model.resonance(), cfg.model.rwa_threshold, consts)?;
    let mut t = Table::new(&["kind", "t_s", "t_norm", "population_last", "population_first"]);
    t.note(warnings);
    let g_bar = params.mean_nn_coupling();
    for &kind in &cfg.model.kinds {
        let h = build_hamiltonian(&params, kind)?;
        let res = evolve_transfer(&h, cfg.transfer.t_max / g_bar, cfg.transfer.dt / g_bar)?;
        for i in 0..res.times_s.len() {
            t.rows.push(vec![
                kind.code(),
                res.times_s[i],
                res.times_norm[i],
                res.population_last[i],
                res.population_first[i],
            ]);
        }
        match res.peak {
            Some(p) => {
                t.summary.insert(format!("p_max.{}", kind.label()), p.p_max);
                t.summary.insert(format!("tau0_s.{}", kind.label()), p.tau0_s);
                t.summary.insert(format!("tau0_norm.{}", kind.label()), p.tau0_norm);
            }
            None => t.note([format!("{}: no population reached qubit N", kind.label())]),
        }
    }
    t.summary.insert("g_bar_rad_s".into(), g_bar);
    Ok(t)
}

/// `P_max` and `tau0` for every ratio, kind and both resonance settings.
fn transfer_sweep(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<Table> {
    let mut t = Table::new(&["ratio", "kind", "calibrated", "p_max", "tau0_s", "tau0_norm"]);
    let base = cfg.chain.spec();
    let jobs: Vec<(f64, ModelKind, Resonance)> = cfg
        .ratios
        .iter()
        .flat_map(|&r| {
            cfg.model
                .kinds
                .iter()
                .flat_map(move |&k| [(r, k, Resonance::Calibrated), (r, k, Resonance::Bare)])
        })
        .collect();
    let results: Vec<(Vec<f64>, Vec<String>)> = jobs
        .into_par_iter()
        .map(|(ratio, kind, resonance)| {
            let spec = base.clone().with_ratio(ratio);
            let (params, mut warnings) = parameters(&spec, resonance, cfg.model.rwa_threshold, consts)?;
            let g_bar = params.mean_nn_coupling();
            let h = build_hamiltonian(&params, kind)?;
            let res = evolve_transfer(&h, cfg.transfer.t_max / g_bar, cfg.transfer.dt / g_bar)?;
            let calibrated = if resonance == Resonance::Calibrated { 1.0 } else { 0.0 };
            let row = match res.peak {
                Some(p) => vec![ratio, kind.code(), calibrated, p.p_max, p.tau0_s, p.tau0_norm],
                None => {
                    warnings.push(format!("C_C/C_q = {ratio}, {}: no population reached qubit N", kind.label()));
                    vec![ratio, kind.code(), calibrated, 0.0, 0.0, 0.0]
                }
            };
            Ok((row, warnings))
        })
        .collect::<Result<_>>()?;
    for (row, warnings) in results {
        t.rows.push(row);
        t.note(warnings);
    }
    Ok(t)
}

fn otoc(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<Table> {
    let spec = cfg.chain.spec();
    let n = spec.n_qubits;
    let (params, warnings) = parameters(&spec, cfg.model.resonance(), cfg.model.rwa_threshold, consts)?;
    let oc = &cfg.otoc;
    let method = match oc.method {
        OtocMethodChoice::Auto => OtocMethod::default_for(n, cfg.seed),
        OtocMethodChoice::SectorExact => OtocMethod::SectorExact,
        OtocMethodChoice::FullSpace => OtocMethod::FullSpace,
        OtocMethodChoice::Stochastic => OtocMethod::Stochastic {
            samples: oc.samples,
            seed: cfg.seed,
        },
    };
    let stochastic = matches!(method, OtocMethod::Stochastic { .. });
    let mut columns = vec!["kind", "t_s", "t_norm", "c"];
    if stochastic {
        columns.push("std_error");
    }
    let mut t = Table::new(&columns);
    t.note(warnings);
    let g_bar = params.mean_nn_coupling();
    let times = match oc.grid {
        TimeGrid::Linear => linear_times(oc.t_max, oc.points, g_bar),
        TimeGrid::Log => log_times(oc.t_min, oc.t_max, oc.points, g_bar),
    };
    let v_site = oc.v_site.unwrap_or(n);
    for &kind in &cfg.model.kinds {
        let h = build_hamiltonian(&params, kind)?;
        let s = otoc_series(&h, oc.w_site, v_site, &times, method)?;
        for i in 0..times.len() {
            let mut row = vec![kind.code(), s.times_s[i], s.times_norm[i], s.values[i]];
            if let Some(err) = &s.std_error {
                row.push(err[i]);
            }
            t.rows.push(row);
        }
        let label = kind.label();
        t.summary.insert(format!("c_max.{label}"), s.values.iter().cloned().fold(f64::MIN, f64::max));
        t.summary.insert(format!("c_final.{label}"), *s.values.last().unwrap_or(&0.0));
        t.summary.insert(format!("max_imag.{label}"), s.max_imag);
    }
    if stochastic {
        t.note([format!("OTOC estimated from random states (method {method:?}); see std_error")]);
    }
    t.summary.insert("g_bar_rad_s".into(), g_bar);
    Ok(t)
}

fn level_stats(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<Table> {
    let opts = LevelStatsOptions {
        sector: cfg.sector,
        resonance: cfg.model.resonance(),
        spacing: cfg.spacing,
    };
    let rows = r_vs_coupling_sweep(&cfg.chain.spec(), &cfg.ratios, &cfg.model.kinds, &opts, consts)?;
    let mut t = Table::new(&["ratio", "kind", "mean_r", "n_ratios", "n_discarded", "sector_dim"]);
    for r in rows {
        t.rows.push(vec![
            r.ratio,
            r.kind.code(),
            r.mean_r,
            r.n_ratios as f64,
            r.n_discarded as f64,
            r.sector_dim as f64,
        ]);
    }
    t.summary.insert("poisson_mean_r".into(), POISSON_MEAN_R);
    t.summary.insert("goe_mean_r".into(), GOE_MEAN_R);
    Ok(t)
}
