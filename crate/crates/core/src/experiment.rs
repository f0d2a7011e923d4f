//! Config-driven experiments: ground-truth simulation, training,
//! evaluation on a disjoint sample set, TX-power sweeps and file export.
//!
//! Every random quantity is derived from the master `seed`:
//!
//! | stream | use                                  |
//! |--------|--------------------------------------|
//! | 0      | generated TX-chain taps and PIM kernel |
//! | 1, 2   | training waveforms (CC1, CC2)        |
//! | 3, 4   | evaluation waveforms (CC1, CC2)      |
//! | 5      | receiver noise (when generated)      |
//!
//! Training noise uses the front end's `rng_seed`; evaluation noise uses
//! `derive_seed(rng_seed, 1)`.
//!
//! Each set is simulated with a guard interval on both sides and only the
//! interior rows are used, so zero-padding at the sequence edges never
//! enters training or evaluation.

use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{
    build_data_matrix, enumerate_basis, terms_to_text, BasisTerm, ModelKind, ModelSpec,
};
use crate::canceller::cancel_block;
use crate::error::{Error, Result};
use crate::estimator::{fit, CoefficientVector, EstimatorConfig, LsDiagnostics};
use crate::frontend::{simulate_rx_components, FrontEndModel, PimKernel, TxChainModel};
use crate::metrics::{
    band_power_db_with, fitted_settings, make_report, welch_psd, CancellationReport, PsdEstimate,
    PsdSettings,
};
use crate::rng::derive_seed;
use crate::signal::{db_to_linear, generate_cc, CarrierConfig, IqSequence};
use crate::Complex;

const STREAM_TRUTH: u64 = 0;
const STREAM_TRAIN: u64 = 1;
const STREAM_EVAL: u64 = 3;
const STREAM_NOISE: u64 = 5;

/// Transmit carrier as configured; its waveform seed comes from the master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarrierSection {
    pub bandwidth_hz: f64,
    pub num_subcarriers: usize,
    pub power_dbfs: f64,
}

impl Default for CarrierSection {
    fn default() -> Self {
        Self {
            bandwidth_hz: 5.0e6,
            num_subcarriers: 300,
            power_dbfs: -15.0,
        }
    }
}

/// Generator for the ground-truth front end, used unless an explicit
/// `[frontend]` table is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthSection {
    pub tx_pre: u32,
    pub tx_post: u32,
    pub kernel_pre: u32,
    pub kernel_post: u32,
    pub kernel_scale: f64,
    pub noise_floor_dbfs: f64,
    pub ota_isolation_db: f64,
}

impl Default for TruthSection {
    fn default() -> Self {
        Self {
            tx_pre: 1,
            tx_post: 1,
            kernel_pre: 3,
            kernel_post: 4,
            kernel_scale: 1.0,
            noise_floor_dbfs: -80.0,
            ota_isolation_db: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CancellerSection {
    pub model: ModelKind,
    pub pre: u32,
    pub post: u32,
    /// Ignored by the memoryless-TX model.
    pub tx_pre: u32,
    pub tx_post: u32,
}

impl Default for CancellerSection {
    fn default() -> Self {
        Self {
            model: ModelKind::TxWithMemory,
            pre: 3,
            post: 4,
            tx_pre: 1,
            tx_post: 1,
        }
    }
}

impl CancellerSection {
    pub fn spec(&self) -> ModelSpec {
        match self.model {
            ModelKind::MemorylessTx => ModelSpec::memoryless(self.pre, self.post),
            ModelKind::TxWithMemory => {
                ModelSpec::tx_memory(self.pre, self.post, self.tx_pre, self.tx_post)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub nfft: usize,
    pub overlap: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// Adds an `rf_freq_hz` column to the PSD files.
    pub rf_column: bool,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            nfft: 4096,
            overlap: 0.5,
            band_lo_hz: -7.5e6,
            band_hi_hz: 7.5e6,
            rf_column: false,
        }
    }
}

impl MetricsSection {
    pub fn settings(&self) -> PsdSettings {
        PsdSettings {
            nfft: self.nfft,
            overlap: self.overlap,
        }
    }
}

/// RF link annotations. Only `gain_db` enters the simulation (as a gain on
/// the received PIM); the losses and powers are carried into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub total_tx_power_dbm: f64,
    pub post_pa_loss_db: f64,
    pub duplexer_loss_db: f64,
    pub switch_loss_db: f64,
    pub gain_db: f64,
    pub rx_center_hz: f64,
    /// dBFS to dBm calibration; reports gain dBm fields when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbm_offset_db: Option<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            total_tx_power_dbm: 24.0,
            post_pa_loss_db: 4.0,
            duplexer_loss_db: 3.0,
            switch_loss_db: 1.0,
            gain_db: 0.0,
            rx_center_hz: 2140.0e6,
            dbm_offset_db: None,
        }
    }
}

pub const SWEEP_TX_POWER: &str = "tx_power_dbfs";

/// Per-carrier TX power sweep (both carriers get each value).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: SWEEP_TX_POWER.into(),
            values: vec![-21.0, -19.0, -17.0, -15.0, -13.0, -11.0, -9.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub diversity: bool,
    pub sample_rate_hz: f64,
    pub train_samples: usize,
    pub eval_samples: usize,
    pub carrier1: CarrierSection,
    pub carrier2: CarrierSection,
    pub truth: TruthSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frontend: Option<FrontEndModel<f64>>,
    pub canceller: CancellerSection,
    pub estimator: EstimatorConfig,
    pub metrics: MetricsSection,
    pub link: LinkSection,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            diversity: false,
            sample_rate_hz: 30.72e6,
            train_samples: 90_000,
            eval_samples: 90_000,
            carrier1: CarrierSection::default(),
            carrier2: CarrierSection::default(),
            truth: TruthSection::default(),
            frontend: None,
            canceller: CancellerSection::default(),
            estimator: EstimatorConfig::default(),
            metrics: MetricsSection::default(),
            link: LinkSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text`, applies `key=value` overrides on dotted paths and
    /// validates the result.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: Self = toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed must be at most {}", i64::MAX)));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Config("sample_rate_hz must be positive".into()));
        }
        if self.train_samples == 0 || self.eval_samples == 0 {
            return Err(Error::Config(
                "train_samples and eval_samples must be positive".into(),
            ));
        }
        for (name, c) in [("carrier1", &self.carrier1), ("carrier2", &self.carrier2)] {
            if !c.power_dbfs.is_finite() {
                return Err(Error::Config(format!("{name}.power_dbfs must be finite")));
            }
        }
        if !self.link.gain_db.is_finite() {
            return Err(Error::Config("link.gain_db must be finite".into()));
        }
        if let Some(fe) = &self.frontend {
            fe.validate()?;
        }
        self.canceller.spec().validate()?;
        self.estimator.validate()?;
        let m = &self.metrics;
        if !(m.band_lo_hz < m.band_hi_hz) {
            return Err(Error::Config(
                "metrics band must have band_lo_hz < band_hi_hz".into(),
            ));
        }
        if m.nfft < 2 || !(0.0..1.0).contains(&m.overlap) {
            return Err(Error::Config(
                "metrics.nfft must be >= 2 and overlap in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Replaces the canceller structure, keeping the configured tap counts.
    pub fn set_model(&mut self, kind: ModelKind) {
        self.canceller.model = kind;
    }

    fn with_tx_power(&self, dbfs: f64) -> Self {
        let mut c = self.clone();
        c.carrier1.power_dbfs = dbfs;
        c.carrier2.power_dbfs = dbfs;
        c
    }
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// The ground-truth front end: the explicit `[frontend]` table if given,
/// otherwise generated from `[truth]` and the master seed.
pub fn resolve_frontend(cfg: &ExperimentConfig) -> Result<FrontEndModel<f64>> {
    if let Some(fe) = &cfg.frontend {
        return Ok(fe.clone());
    }
    let t = &cfg.truth;
    let seed = derive_seed(cfg.seed, STREAM_TRUTH);
    let fe = FrontEndModel {
        tx1: TxChainModel::decaying(t.tx_pre, t.tx_post, derive_seed(seed, 1)),
        tx2: TxChainModel::decaying(t.tx_pre, t.tx_post, derive_seed(seed, 2)),
        pim: PimKernel::decaying(
            ModelSpec::memoryless(t.kernel_pre, t.kernel_post),
            t.kernel_scale,
            derive_seed(seed, 3),
        )?,
        noise_floor_dbfs: t.noise_floor_dbfs,
        ota_isolation_db: t.ota_isolation_db,
        // TOML integers are signed
        rng_seed: derive_seed(cfg.seed, STREAM_NOISE) >> 1,
    };
    fe.validate()?;
    Ok(fe)
}

fn reach(lo: i32, hi: i32) -> usize {
    lo.unsigned_abs().max(hi.unsigned_abs()) as usize
}

/// Samples simulated on each side of the used rows.
fn guard_len(fe: &FrontEndModel<f64>, canceller: &ModelSpec) -> usize {
    let (klo, khi) = fe.pim.window().delay_window();
    let chains = fe.tx1.pre.max(fe.tx1.post).max(fe.tx2.pre).max(fe.tx2.post) as usize;
    let (clo, chi) = canceller.delay_window();
    2 * (reach(klo, khi) + chains + reach(clo, chi)) + 8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleSet {
    Train,
    Eval,
}

/// One simulated sample set; `rows` indexes the usable interior.
#[derive(Clone, Debug)]
pub struct SimulatedSet {
    pub s1: IqSequence<f64>,
    pub s2: IqSequence<f64>,
    pub pim: IqSequence<f64>,
    pub noise: IqSequence<f64>,
    pub rows: Range<usize>,
}

impl SimulatedSet {
    pub fn received(&self) -> Result<IqSequence<f64>> {
        self.pim.add(&self.noise)?.slice(self.rows.clone())
    }

    pub fn pim_rows(&self) -> Result<IqSequence<f64>> {
        self.pim.slice(self.rows.clone())
    }

    pub fn noise_rows(&self) -> Result<IqSequence<f64>> {
        self.noise.slice(self.rows.clone())
    }
}

pub fn simulate_set(
    cfg: &ExperimentConfig,
    fe: &FrontEndModel<f64>,
    set: SampleSet,
) -> Result<SimulatedSet> {
    let (n, stream, noise_seed) = match set {
        SampleSet::Train => (cfg.train_samples, STREAM_TRAIN, fe.rng_seed),
        SampleSet::Eval => (cfg.eval_samples, STREAM_EVAL, derive_seed(fe.rng_seed, 1)),
    };
    let guard = guard_len(fe, &cfg.canceller.spec());
    let len = n + 2 * guard;
    let fs = cfg.sample_rate_hz;
    let carrier = |c: &CarrierSection, s: u64| CarrierConfig {
        bandwidth_hz: c.bandwidth_hz,
        num_subcarriers: c.num_subcarriers,
        power_dbfs: c.power_dbfs,
        seed: derive_seed(cfg.seed, s),
    };
    let s1 = generate_cc::<f64>(&carrier(&cfg.carrier1, stream), len, fs)?;
    let s2 = generate_cc::<f64>(&carrier(&cfg.carrier2, stream + 1), len, fs)?;
    let model = FrontEndModel {
        rng_seed: noise_seed,
        ..fe.clone()
    };
    let rx = simulate_rx_components(&model, &s1, &s2, cfg.diversity)?;
    let pim = if cfg.link.gain_db == 0.0 {
        rx.pim
    } else {
        rx.pim
            .scaled(Complex::new(db_to_linear(cfg.link.gain_db).sqrt(), 0.0))
    };
    Ok(SimulatedSet {
        s1,
        s2,
        pim,
        noise: rx.noise,
        rows: guard..guard + n,
    })
}

/// Fitted canceller plus LS diagnostics (block LS only).
#[derive(Clone, Debug)]
pub struct Training {
    pub coefficients: CoefficientVector<f64>,
    pub diagnostics: Option<LsDiagnostics>,
}

pub fn train(cfg: &ExperimentConfig, fe: &FrontEndModel<f64>) -> Result<Training> {
    let terms = enumerate_basis(&cfg.canceller.spec())?;
    let set = simulate_set(cfg, fe, SampleSet::Train)?;
    let a = build_data_matrix(&set.s1, &set.s2, &terms, set.rows.clone())?;
    let y = set.received()?;
    let (coefficients, diagnostics) = fit(&a, y.samples(), &cfg.estimator)?;
    Ok(Training {
        coefficients,
        diagnostics,
    })
}

/// dBm view of a report's powers under the configured calibration offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbmAnnotation {
    pub offset_db: f64,
    pub pim_power_dbm: f64,
    pub pre_power_dbm: f64,
    pub post_power_dbm: f64,
    pub noise_floor_dbm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub receiver: String,
    pub seed: u64,
    pub tx_power_dbfs: [f64; 2],
    pub canceller: ModelSpec,
    pub terms: usize,
    pub train_samples: usize,
    pub eval_samples: usize,
    /// In-band power of the PIM component alone (no noise) before cancellation.
    pub pim_power_db: f64,
    #[serde(flatten)]
    pub cancellation: CancellationReport,
    pub link: LinkSection,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dbm: Option<DbmAnnotation>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a run produces, before anything touches the file system.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub frontend: FrontEndModel<f64>,
    pub coefficients: CoefficientVector<f64>,
    pub report: ExperimentReport,
    pub psd_pre: PsdEstimate,
    pub psd_post: PsdEstimate,
    pub psd_noise: PsdEstimate,
}

/// Cancels the evaluation set with `training` and measures the result.
pub fn evaluate(
    cfg: &ExperimentConfig,
    fe: &FrontEndModel<f64>,
    training: &Training,
) -> Result<RunOutcome> {
    let spec = cfg.canceller.spec();
    let terms = &training.coefficients.terms;
    let set = simulate_set(cfg, fe, SampleSet::Eval)?;
    let a = build_data_matrix(&set.s1, &set.s2, terms, set.rows.clone())?;
    let y = set.received()?;
    let residual = cancel_block(&y, &a, &training.coefficients)?;
    drop(a);

    let m = &cfg.metrics;
    let settings = fitted_settings(m.settings(), y.len());
    let band = (m.band_lo_hz, m.band_hi_hz);
    let noise = set.noise_rows()?;
    let noise_floor = band_power_db_with(&noise, band.0, band.1, settings)?;
    let pim_power = band_power_db_with(&set.pim_rows()?, band.0, band.1, settings)?;
    let mut cancellation = make_report(&y, &residual, noise_floor, band, settings)?;
    cancellation.diagnostics = training.diagnostics.clone();

    let dbm = cfg.link.dbm_offset_db.map(|o| DbmAnnotation {
        offset_db: o,
        pim_power_dbm: pim_power + o,
        pre_power_dbm: cancellation.pre_power_db + o,
        post_power_dbm: cancellation.post_power_db + o,
        noise_floor_dbm: noise_floor + o,
    });
    let report = ExperimentReport {
        receiver: if cfg.diversity { "diversity" } else { "main" }.into(),
        seed: cfg.seed,
        tx_power_dbfs: [cfg.carrier1.power_dbfs, cfg.carrier2.power_dbfs],
        canceller: spec,
        terms: terms.len(),
        train_samples: cfg.train_samples,
        eval_samples: cfg.eval_samples,
        pim_power_db: pim_power,
        cancellation,
        link: cfg.link.clone(),
        dbm,
    };
    Ok(RunOutcome {
        config: cfg.clone(),
        frontend: fe.clone(),
        coefficients: training.coefficients.clone(),
        report,
        psd_pre: welch_psd(&y, settings.nfft, settings.overlap)?,
        psd_post: welch_psd(&residual, settings.nfft, settings.overlap)?,
        psd_noise: welch_psd(&noise, settings.nfft, settings.overlap)?,
    })
}

/// Simulate, train on the training set, cancel the evaluation set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let fe = resolve_frontend(cfg)?;
    let training = train(cfg, &fe)?;
    evaluate(cfg, &fe, &training)
}

/// Like [`run_experiment`] but with fixed coefficients instead of training.
pub fn run_with_coefficients(
    cfg: &ExperimentConfig,
    coefficients: CoefficientVector<f64>,
) -> Result<RunOutcome> {
    cfg.validate()?;
    coefficients.validate()?;
    let fe = resolve_frontend(cfg)?;
    evaluate(
        cfg,
        &fe,
        &Training {
            coefficients,
            diagnostics: None,
        },
    )
}

/// Scenario summary without any cancellation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub receiver: String,
    pub seed: u64,
    pub tx_power_dbfs: [f64; 2],
    pub band_hz: [f64; 2],
    pub pim_power_db: f64,
    pub noise_floor_db: f64,
    pub received_power_db: f64,
}

#[derive(Clone, Debug)]
pub struct SimulationOutcome {
    pub frontend: FrontEndModel<f64>,
    pub summary: SimulationSummary,
    pub psd_rx: PsdEstimate,
    pub psd_noise: PsdEstimate,
}

/// Simulates the evaluation set only.
pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulationOutcome> {
    cfg.validate()?;
    let fe = resolve_frontend(cfg)?;
    let set = simulate_set(cfg, &fe, SampleSet::Eval)?;
    let y = set.received()?;
    let noise = set.noise_rows()?;
    let m = &cfg.metrics;
    let s = fitted_settings(m.settings(), y.len());
    let (lo, hi) = (m.band_lo_hz, m.band_hi_hz);
    let summary = SimulationSummary {
        receiver: if cfg.diversity { "diversity" } else { "main" }.into(),
        seed: cfg.seed,
        tx_power_dbfs: [cfg.carrier1.power_dbfs, cfg.carrier2.power_dbfs],
        band_hz: [lo, hi],
        pim_power_db: band_power_db_with(&set.pim_rows()?, lo, hi, s)?,
        noise_floor_db: band_power_db_with(&noise, lo, hi, s)?,
        received_power_db: band_power_db_with(&y, lo, hi, s)?,
    };
    Ok(SimulationOutcome {
        frontend: fe,
        summary,
        psd_rx: welch_psd(&y, s.nfft, s.overlap)?,
        psd_noise: welch_psd(&noise, s.nfft, s.overlap)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tx_power_db: f64,
    pub pim_power_db: f64,
    pub residual_db: f64,
    pub suppression_db: f64,
}

pub const SWEEP_HEADER: &str = "tx_power_db,pim_power_db,residual_db,suppression_db";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.tx_power_db, r.pim_power_db, r.residual_db, r.suppression_db
        ));
    }
    out
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<ExperimentReport>,
}

/// Re-trains and evaluates at every sweep value. All points share the
/// master seed, so waveforms and noise realizations are common across
/// points and only the TX power changes.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let sweep = &cfg.sweep;
    if sweep.parameter != SWEEP_TX_POWER {
        return Err(Error::Config(format!(
            "unsupported sweep parameter `{}` (only `{SWEEP_TX_POWER}`)",
            sweep.parameter
        )));
    }
    if sweep.values.is_empty() || sweep.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "sweep.values must be non-empty and finite".into(),
        ));
    }
    let increasing = sweep.values.windows(2).all(|w| w[0] < w[1]);
    let decreasing = sweep.values.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::Config(
            "sweep.values must be strictly monotone".into(),
        ));
    }
    let reports: Vec<ExperimentReport> = sweep
        .values
        .par_iter()
        .map(|&p| run_experiment(&cfg.with_tx_power(p)).map(|o| o.report))
        .collect::<Result<_>>()?;
    let rows = reports
        .iter()
        .map(|r| SweepRow {
            tx_power_db: r.tx_power_dbfs[0],
            pim_power_db: r.pim_power_db,
            residual_db: r.cancellation.post_power_db,
            suppression_db: r.cancellation.suppression_db,
        })
        .collect();
    Ok(SweepOutcome { rows, reports })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and an atomic rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes `(file name, contents)` pairs into `dir`, creating it first.
pub fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            write_atomic(&p, body.as_bytes())?;
            Ok(p)
        })
        .collect()
}

fn frontend_toml(fe: &FrontEndModel<f64>) -> Result<String> {
    toml::to_string(fe).map_err(|e| Error::Config(e.to_string()))
}

fn psd_csv(psd: &PsdEstimate, cfg: &ExperimentConfig) -> String {
    psd.to_csv(cfg.metrics.rf_column.then_some(cfg.link.rx_center_hz))
}

/// File set of a full run: config snapshot, front end, coefficients,
/// report and the three PSDs.
pub fn run_files(outcome: &RunOutcome) -> Result<Vec<(&'static str, String)>> {
    let cfg = &outcome.config;
    Ok(vec![
        ("config.toml", cfg.to_toml()?),
        ("frontend.toml", frontend_toml(&outcome.frontend)?),
        ("coefficients.json", outcome.coefficients.to_json()?),
        ("terms.txt", terms_to_text(&outcome.coefficients.terms)),
        ("report.json", outcome.report.to_json()),
        ("psd_pre.csv", psd_csv(&outcome.psd_pre, cfg)),
        ("psd_post.csv", psd_csv(&outcome.psd_post, cfg)),
        ("psd_noise.csv", psd_csv(&outcome.psd_noise, cfg)),
    ])
}

pub fn simulation_files(
    cfg: &ExperimentConfig,
    outcome: &SimulationOutcome,
) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        ("config.toml", cfg.to_toml()?),
        ("frontend.toml", frontend_toml(&outcome.frontend)?),
        (
            "simulation.json",
            serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"),
        ),
        ("psd_rx.csv", psd_csv(&outcome.psd_rx, cfg)),
        ("psd_noise.csv", psd_csv(&outcome.psd_noise, cfg)),
    ])
}

pub fn training_files(
    cfg: &ExperimentConfig,
    fe: &FrontEndModel<f64>,
    training: &Training,
) -> Result<Vec<(&'static str, String)>> {
    let mut files = vec![
        ("config.toml", cfg.to_toml()?),
        ("frontend.toml", frontend_toml(fe)?),
        ("coefficients.json", training.coefficients.to_json()?),
        ("terms.txt", terms_to_text(&training.coefficients.terms)),
    ];
    if let Some(d) = &training.diagnostics {
        files.push((
            "diagnostics.json",
            serde_json::to_string_pretty(d).expect("diagnostics serialize"),
        ));
    }
    Ok(files)
}

pub fn sweep_files(
    cfg: &ExperimentConfig,
    outcome: &SweepOutcome,
) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        ("config.toml", cfg.to_toml()?),
        ("sweep.csv", sweep_csv(&outcome.rows)),
        (
            "sweep.json",
            serde_json::to_string_pretty(&outcome.reports).expect("reports serialize"),
        ),
    ])
}

/// Basis terms of the configured canceller.
pub fn canceller_terms(cfg: &ExperimentConfig) -> Result<Vec<BasisTerm>> {
    enumerate_basis(&cfg.canceller.spec())
}
