//! Fast invariant checks on small instances, run by `pimcancel selftest`.

use serde::Serialize;

use crate::basis::{build_data_matrix, enumerate_basis, ModelSpec};
use crate::canceller::{cancel_block, cancel_streaming, StreamingState};
use crate::error::Result;
use crate::estimator::fit_block_ls;
use crate::freqplan::{hits_band, im3_products, BandTable, Overlap};
use crate::frontend::{
    awgn, generate_pim, memoryless_pim, simulate_rx_components, FrontEndModel, PimKernel,
    TxChainModel,
};
use crate::metrics::{welch_psd, PsdSettings};
use crate::rng::Rng;
use crate::signal::{generate_cc, mean_power, mean_power_db, CarrierConfig, IqSequence};
use crate::{Complex, C64};

const FS: f64 = 30.72e6;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn check(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match body() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn carriers(n: usize, power: f64, seed: u64) -> Result<(IqSequence<f64>, IqSequence<f64>)> {
    let s1 = generate_cc(&CarrierConfig::lte5(power, seed), n, FS)?;
    let s2 = generate_cc(&CarrierConfig::lte5(power, seed + 1), n, FS)?;
    Ok((s1, s2))
}

fn random_complex(rng: &mut Rng) -> C64 {
    Complex::new(rng.normal(), rng.normal())
}

/// Runs every check; the suite passes when all entries pass.
pub fn run() -> Vec<Check> {
    vec![
        check("basis-counts", || {
            let a = enumerate_basis(&ModelSpec::memoryless(1, 1))?.len();
            let b = enumerate_basis(&ModelSpec::tx_memory(1, 1, 1, 1))?.len();
            Ok((
                a == 3 && b == 42,
                format!("memoryless {a}, with TX memory {b}"),
            ))
        }),
        check("model-consistency", || {
            let (s1, s2) = carriers(2048, -10.0, 11)?;
            let mut rng = Rng::new(5);
            let gammas: Vec<C64> = (0..4).map(|_| random_complex(&mut rng)).collect();
            let direct = memoryless_pim(&s1, &s2, &gammas, 1)?;
            let general = generate_pim(&s1, &s2, &PimKernel::diagonal(1, &gammas)?)?;
            let err = max_rel_diff(direct.samples(), general.samples());
            Ok((err <= 1e-12, format!("max relative difference {err:.2e}")))
        }),
        check("noiseless-recovery", || {
            let (s1, s2) = carriers(3000, -10.0, 21)?;
            let terms = enumerate_basis(&ModelSpec::memoryless(3, 4))?;
            let mut rng = Rng::new(9);
            let theta: Vec<C64> = terms.iter().map(|_| random_complex(&mut rng)).collect();
            let a = build_data_matrix(&s1, &s2, &terms, 0..s1.len())?;
            let y = a.mul_vec(&theta)?;
            let (fit, _) = fit_block_ls(&a, &y, 0.0)?;
            let err = rel_err(&fit.values, &theta);
            Ok((err < 1e-8, format!("relative coefficient error {err:.2e}")))
        }),
        check("streaming-equals-block", || {
            let (s1, s2) = carriers(2000, -10.0, 31)?;
            let terms = enumerate_basis(&ModelSpec::tx_memory(2, 2, 1, 1))?;
            let mut rng = Rng::new(3);
            let theta = crate::estimator::CoefficientVector::new(
                terms.clone(),
                terms.iter().map(|_| random_complex(&mut rng)).collect(),
            )?;
            let y = awgn::<f64>(s1.len(), -20.0, 4, FS)?;
            let a = build_data_matrix(&s1, &s2, &terms, 0..s1.len())?;
            let block = cancel_block(&y, &a, &theta)?;
            let mut state = StreamingState::new(&theta)?;
            let stream = cancel_streaming(s1.samples(), s2.samples(), y.samples(), &mut state)?;
            let worst = block
                .samples()
                .iter()
                .zip(&stream)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            Ok((
                stream.len() == block.len() && worst <= 1e-12,
                format!(
                    "latency {}, max abs difference {worst:.2e}",
                    state.latency()
                ),
            ))
        }),
        check("diversity-isolation", || {
            let (s1, s2) = carriers(4096, -10.0, 41)?;
            let fe = FrontEndModel {
                tx1: TxChainModel::decaying(1, 1, 1),
                tx2: TxChainModel::decaying(1, 1, 2),
                pim: PimKernel::decaying(ModelSpec::memoryless(1, 1), 1.0, 3)?,
                noise_floor_dbfs: f64::NEG_INFINITY,
                ota_isolation_db: 10.0,
                rng_seed: 0,
            };
            let main = simulate_rx_components(&fe, &s1, &s2, false)?.pim;
            let div = simulate_rx_components(&fe, &s1, &s2, true)?.pim;
            let delta = mean_power_db(&main)? - mean_power_db(&div)?;
            Ok((
                (delta - 10.0).abs() < 1e-9,
                format!("attenuation {delta:.9} dB"),
            ))
        }),
        check("third-order-slope", || {
            let (lo1, lo2) = carriers(4096, -20.0, 51)?;
            let (hi1, hi2) = carriers(4096, -10.0, 51)?;
            let g = [Complex::new(1.0, 0.0)];
            let p_lo = mean_power_db(&memoryless_pim(&lo1, &lo2, &g, 0)?)?;
            let p_hi = mean_power_db(&memoryless_pim(&hi1, &hi2, &g, 0)?)?;
            let slope = (p_hi - p_lo) / 10.0;
            Ok((
                (slope - 3.0).abs() < 1e-6,
                format!("slope {slope:.6} dB/dB"),
            ))
        }),
        check("parseval", || {
            let noise = awgn::<f64>(65536, -30.0, 61, FS)?;
            let s = PsdSettings::default();
            let psd = welch_psd(&noise, s.nfft, s.overlap)?;
            let diff = psd.total_power_db() - mean_power_db(&noise)?;
            Ok((
                diff.abs() <= 0.3,
                format!("integrated minus mean power {diff:+.3} dB"),
            ))
        }),
        check("planner-b1-b3", || {
            let table = BandTable::builtin();
            let b1 = table.get("B1")?;
            let [upper, lower] = im3_products(1950.0, 5.0, 1745.0, 5.0)?;
            let ok = upper.center_mhz == 2155.0
                && upper.bandwidth_mhz == 15.0
                && matches!(hits_band(&upper, b1), Overlap::Full { .. })
                && hits_band(&lower, b1) == Overlap::None;
            Ok((
                ok,
                format!(
                    "upper {} MHz / {} MHz wide",
                    upper.center_mhz, upper.bandwidth_mhz
                ),
            ))
        }),
        check("waveform-determinism", || {
            let a = carriers(4096, -12.0, 71)?;
            let b = carriers(4096, -12.0, 71)?;
            let p = mean_power(&a.0)?;
            Ok((a.0 == b.0 && a.1 == b.1, format!("mean power {p:.6}")))
        }),
    ]
}

fn max_rel_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}
