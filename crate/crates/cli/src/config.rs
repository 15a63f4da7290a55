//! Run configuration: a TOML document with one table per concern. Every
//! field has a default, so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use transmon_core::basis::MAX_QUBITS;
use transmon_core::capnet::{EdgeConvention, JosephsonEnergies, ParasiticLink};
use transmon_core::spectral::{Parity, SectorSpec, SpacingOptions};
use transmon_core::{ChainSpec, ModelKind, Resonance};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CouplingProfile,
    FreqProfile,
    Transfer,
    TransferSweep,
    Otoc,
    LevelStats,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::CouplingProfile => "coupling-profile",
            Experiment::FreqProfile => "freq-profile",
            Experiment::Transfer => "transfer",
            Experiment::TransferSweep => "transfer-sweep",
            Experiment::Otoc => "otoc",
            Experiment::LevelStats => "level-stats",
        }
    }

    fn needs_hamiltonian(self) -> bool {
        !matches!(self, Experiment::CouplingProfile | Experiment::FreqProfile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub n_qubits: usize,
    /// fF
    pub cq: f64,
    /// fF
    pub cc: f64,
    pub edge_convention: EdgeConvention,
    /// J, one value or one per qubit.
    #[serde(alias = "ej")]
    pub ej_zero_flux: JosephsonEnergies,
    pub parasitic_links: Vec<ParasiticLink>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_qubits: 7,
            cq: 100.0,
            cc: 20.0,
            edge_convention: EdgeConvention::default(),
            ej_zero_flux: JosephsonEnergies::default(),
            parasitic_links: Vec::new(),
        }
    }
}

impl ChainConfig {
    pub fn spec(&self) -> ChainSpec {
        ChainSpec {
            n_qubits: self.n_qubits,
            cq: self.cq,
            cc: self.cc,
            edge_convention: self.edge_convention,
            ej_zero_flux: self.ej_zero_flux.clone(),
            parasitic_links: self.parasitic_links.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kinds: Vec<ModelKind>,
    /// Retune every qubit to the bare frequency of qubit 1.
    pub calibration: bool,
    pub rwa_threshold: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kinds: ModelKind::ALL.to_vec(),
            calibration: true,
            rwa_threshold: transmon_core::spinmodel::DEFAULT_RWA_THRESHOLD,
        }
    }
}

impl ModelConfig {
    pub fn resonance(&self) -> Resonance {
        if self.calibration {
            Resonance::Calibrated
        } else {
            Resonance::Bare
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingProfileConfig {
    /// Qubit whose couplings to the rest of the chain are tabulated.
    pub reference: usize,
}

impl Default for CouplingProfileConfig {
    fn default() -> Self {
        Self { reference: 1 }
    }
}

/// Times are in units of `1 / g_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub t_max: f64,
    pub dt: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            t_max: transmon_core::dynamics::DEFAULT_TRANSFER_T_MAX,
            dt: transmon_core::dynamics::DEFAULT_TRANSFER_DT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeGrid {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtocMethodChoice {
    /// Exact up to 12 qubits, stochastic above.
    #[default]
    Auto,
    SectorExact,
    FullSpace,
    Stochastic,
}

/// Times are in units of `1 / g_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OtocConfig {
    pub t_max: f64,
    pub points: usize,
    pub grid: TimeGrid,
    /// First point of a logarithmic grid.
    pub t_min: f64,
    pub w_site: usize,
    /// Defaults to the last qubit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_site: Option<usize>,
    pub method: OtocMethodChoice,
    pub samples: usize,
}

impl Default for OtocConfig {
    fn default() -> Self {
        Self {
            t_max: transmon_core::dynamics::DEFAULT_OTOC_T_MAX,
            points: transmon_core::dynamics::DEFAULT_OTOC_POINTS,
            grid: TimeGrid::Linear,
            t_min: 0.01,
            w_site: 1,
            v_site: None,
            method: OtocMethodChoice::Auto,
            samples: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// `C_C / C_q`; sets `cc` from the current `cq`.
    Ratio,
    NQubits,
    Cc,
    Cq,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Ratio => "ratio",
            SweepAxis::NQubits => "n_qubits",
            SweepAxis::Cc => "cc",
            SweepAxis::Cq => "cq",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::Ratio => cfg.chain.cc = value * cfg.chain.cq,
            SweepAxis::Cc => cfg.chain.cc = value,
            SweepAxis::Cq => cfg.chain.cq = value,
            SweepAxis::NQubits => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(CliError::config("sweep.values", format!("n_qubits must be a whole number, got {value}")));
                }
                cfg.chain.n_qubits = value as usize;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// `C_C / C_q` values for freq-profile, transfer-sweep and level-stats.
    pub ratios: Vec<f64>,
    pub chain: ChainConfig,
    pub model: ModelConfig,
    pub coupling_profile: CouplingProfileConfig,
    pub transfer: TransferConfig,
    pub otoc: OtocConfig,
    pub sector: SectorSpec,
    pub spacing: SpacingOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Transfer,
            seed: 0,
            ratios: vec![0.01, 0.05, 0.1, 0.15, 0.2],
            chain: ChainConfig::default(),
            model: ModelConfig::default(),
            coupling_profile: CouplingProfileConfig::default(),
            transfer: TransferConfig::default(),
            otoc: OtocConfig::default(),
            sector: SectorSpec {
                n_excitations: None,
                parity: Parity::Even,
            },
            spacing: SpacingOptions::default(),
            sweep: None,
            output: OutputConfig::default(),
        }
    }
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be positive and finite, got {x}")))
    }
}

fn site(field: &str, s: usize, n: usize) -> Result<()> {
    if (1..=n).contains(&s) {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must lie in 1..={n}, got {s}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::config("config", e.message().to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| CliError::config("config", e.message().to_string()))
    }

    /// Reads `path` (if any), applies `key=value` overrides and deserializes.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                toml::from_str(&text).map_err(|e| CliError::config(p.display().to_string(), e.message().to_string()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        Self::from_table(table)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.chain.spec();
        spec.validate()?;
        let n = spec.n_qubits;
        if self.experiment.needs_hamiltonian() && n > MAX_QUBITS {
            return Err(transmon_core::Error::Capacity {
                what: "qubits in a 2^N Hamiltonian",
                required: n,
                limit: MAX_QUBITS,
            }
            .into());
        }
        if self.model.kinds.is_empty() {
            return Err(CliError::config("model.kinds", "at least one model kind is required"));
        }
        positive("model.rwa_threshold", self.model.rwa_threshold)?;
        for (i, &r) in self.ratios.iter().enumerate() {
            positive(&format!("ratios[{i}]"), r)?;
        }
        site("coupling_profile.reference", self.coupling_profile.reference, n)?;
        positive("transfer.t_max", self.transfer.t_max)?;
        positive("transfer.dt", self.transfer.dt)?;
        if self.transfer.dt > self.transfer.t_max {
            return Err(CliError::config("transfer.dt", "must not exceed transfer.t_max"));
        }
        positive("otoc.t_max", self.otoc.t_max)?;
        if self.otoc.points == 0 {
            return Err(CliError::config("otoc.points", "must be at least 1"));
        }
        if self.otoc.grid == TimeGrid::Log {
            positive("otoc.t_min", self.otoc.t_min)?;
            if self.otoc.t_min >= self.otoc.t_max {
                return Err(CliError::config("otoc.t_min", "must be below otoc.t_max"));
            }
        }
        site("otoc.w_site", self.otoc.w_site, n)?;
        site("otoc.v_site", self.otoc.v_site.unwrap_or(n), n)?;
        if self.otoc.samples == 0 {
            return Err(CliError::config("otoc.samples", "must be at least 1"));
        }
        if let Some(k) = self.sector.n_excitations {
            if k > n {
                return Err(CliError::config("sector.n_excitations", format!("{k} exceeds n_qubits = {n}")));
            }
        }
        if !(0.0..0.5).contains(&self.spacing.trim_fraction) {
            return Err(CliError::config("spacing.trim_fraction", "must lie in [0, 0.5)"));
        }
        if !(self.spacing.degeneracy_tol >= 0.0 && self.spacing.degeneracy_tol.is_finite()) {
            return Err(CliError::config("spacing.degeneracy_tol", "must be non-negative"));
        }
        Ok(())
    }
}

/// Parses a `--set` value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies one `dotted.key=value` override to a TOML table.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::config(item, "override must have the form key=value"))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty key segment"));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut node = table;
    for p in parents {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(key, format!("`{p}` is not a table")))?;
    }
    node.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml_str("[chain]\nn_qbits = 5\n").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("n_qbits"), "{err}");
        assert!(RunConfig::from_toml_str("colour = 1").is_err());
    }

    #[test]
    fn overrides_reach_nested_tables() {
        let cfg = RunConfig::load(
            None,
            &[
                "chain.cc=15".into(),
                "experiment=otoc".into(),
                "model.kinds=[\"nearest-neighbor\"]".into(),
                "sector.parity=odd".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.chain.cc, 15.0);
        assert_eq!(cfg.experiment, Experiment::Otoc);
        assert_eq!(cfg.model.kinds, vec![ModelKind::NearestNeighbor]);
        assert_eq!(cfg.sector.parity, Parity::Odd);
        assert!(RunConfig::load(None, &["chain".into()]).is_err());
        assert!(RunConfig::load(None, &["chain.cc.x=1".into()]).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = RunConfig::default();
        cfg.chain.cc = 0.0;
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("chain.cc"), "{err}");

        let mut cfg = RunConfig::default();
        cfg.otoc.v_site = Some(9);
        assert!(cfg.validate().unwrap_err().to_string().contains("otoc.v_site"));

        let mut cfg = RunConfig::default();
        cfg.chain.n_qubits = 20;
        cfg.experiment = Experiment::Otoc;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        cfg.experiment = Experiment::CouplingProfile;
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.otoc.v_site = Some(3);
        cfg.chain.ej_zero_flux = JosephsonEnergies::PerQubit(vec![5e-23; 7]);
        cfg.sweep = Some(SweepConfig {
            axis: SweepAxis::Ratio,
            values: vec![0.1, 0.2],
        });
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn sweep_axes_edit_the_chain() {
        let base = RunConfig::default();
        assert_eq!(SweepAxis::Ratio.apply(&base, 0.1).unwrap().chain.cc, 10.0);
        assert_eq!(SweepAxis::NQubits.apply(&base, 5.0).unwrap().chain.n_qubits, 5);
        assert!(SweepAxis::NQubits.apply(&base, 5.5).is_err());
        assert_eq!(SweepAxis::Cq.apply(&base, 50.0).unwrap().chain.cq, 50.0);
    }
}
