//! Welch PSD, in-band power and cancellation reports.
//!
//! PSD densities are normalized so that `Σ density·Δf` over all bins equals
//! the mean power of the input (dBFS/Hz after conversion).

use std::fmt::Write as _;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::LsDiagnostics;
use crate::signal::IqSequence;
use crate::Real;

/// Density reported for bins with no power.
pub const DENSITY_FLOOR_DB: f64 = -300.0;

pub const DEFAULT_NFFT: usize = 4096;
pub const DEFAULT_OVERLAP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsdSettings {
    pub nfft: usize,
    pub overlap: f64,
}

impl Default for PsdSettings {
    fn default() -> Self {
        Self {
            nfft: DEFAULT_NFFT,
            overlap: DEFAULT_OVERLAP,
        }
    }
}

/// Two-sided PSD with bins ordered from just above `−fs/2` up to `fs/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdEstimate {
    pub freq_bins_hz: Vec<f64>,
    /// Linear density, full-scale power per Hz.
    pub density_per_hz: Vec<f64>,
    pub nfft: usize,
    pub overlap_fraction: f64,
    pub sample_rate_hz: f64,
    pub segments: usize,
}

impl PsdEstimate {
    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz / self.nfft as f64
    }

    pub fn density_db_per_hz(&self) -> Vec<f64> {
        self.density_per_hz
            .iter()
            .map(|&d| {
                if d > 0.0 {
                    (10.0 * d.log10()).max(DENSITY_FLOOR_DB)
                } else {
                    DENSITY_FLOOR_DB
                }
            })
            .collect()
    }

    /// Riemann sum of the density over all bins, in dB.
    pub fn total_power_db(&self) -> f64 {
        10.0 * (self.density_per_hz.iter().sum::<f64>() * self.bin_width_hz()).log10()
    }

    /// Power of the bins with `f_lo ≤ f ≤ f_hi`, in dB.
    pub fn band_power_db(&self, f_lo: f64, f_hi: f64) -> Result<f64> {
        check_band(f_lo, f_hi, self.sample_rate_hz)?;
        let sum: f64 = self
            .freq_bins_hz
            .iter()
            .zip(&self.density_per_hz)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .map(|(_, d)| d)
            .sum();
        Ok(10.0 * (sum * self.bin_width_hz()).log10())
    }

    /// CSV with columns `freq_hz,psd_db_per_hz`, plus `rf_freq_hz` when an
    /// RF center frequency is given.
    pub fn to_csv(&self, rf_center_hz: Option<f64>) -> String {
        let mut out = String::from("freq_hz,psd_db_per_hz");
        if rf_center_hz.is_some() {
            out.push_str(",rf_freq_hz");
        }
        out.push('\n');
        for (f, d) in self.freq_bins_hz.iter().zip(self.density_db_per_hz()) {
            match rf_center_hz {
                Some(rf) => writeln!(out, "{f},{d},{}", rf + f),
                None => writeln!(out, "{f},{d}"),
            }
            .expect("write to string");
        }
        out
    }
}

fn check_band(f_lo: f64, f_hi: f64, fs: f64) -> Result<()> {
    let half = fs / 2.0;
    let reason = if !(f_lo.is_finite() && f_hi.is_finite()) {
        Some("edges must be finite".to_string())
    } else if f_lo >= f_hi {
        Some("lower edge must be below upper edge".to_string())
    } else if f_lo < -half || f_hi > half {
        Some(format!("edges must lie within ±{half} Hz"))
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::InvalidBand {
            lo: f_lo,
            hi: f_hi,
            reason,
        }),
        None => Ok(()),
    }
}

/// Hann-windowed, overlapped, averaged periodogram.
pub fn welch_psd<T: Real>(seq: &IqSequence<T>, nfft: usize, overlap: f64) -> Result<PsdEstimate> {
    if nfft < 2 {
        return Err(Error::InvalidArgument(format!(
            "nfft must be at least 2, got {nfft}"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidArgument(format!(
            "overlap must be in [0, 1), got {overlap}"
        )));
    }
    if seq.len() < nfft {
        return Err(Error::InvalidLength(format!(
            "sequence of {} samples is shorter than nfft = {nfft}",
            seq.len()
        )));
    }
    let fs = seq.sample_rate_hz();
    let step = ((nfft as f64 * (1.0 - overlap)).round() as usize).max(1);

    // periodic Hann
    let window: Vec<T> = (0..nfft)
        .map(|i| T::lit(0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / nfft as f64).cos()))
        .collect();
    let window_energy: f64 = window.iter().map(|w| (*w * *w).to_f64_lossy()).sum();

    let fft = FftPlanner::<T>::new().plan_fft_forward(nfft);
    let mut acc = vec![0.0f64; nfft];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nfft];
    let mut segments = 0;
    let x = seq.samples();
    let mut start = 0;
    while start + nfft <= x.len() {
        for ((b, &s), &w) in buf.iter_mut().zip(&x[start..start + nfft]).zip(&window) {
            *b = s * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr().to_f64_lossy();
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (segments as f64 * fs * window_energy);
    let half = nfft as i64 / 2;
    let lowest = if nfft.is_multiple_of(2) {
        -half + 1
    } else {
        -half
    };
    let (freq_bins_hz, density_per_hz) = (lowest..=half)
        .map(|k| {
            let bin = k.rem_euclid(nfft as i64) as usize;
            (k as f64 * fs / nfft as f64, acc[bin] * scale)
        })
        .unzip();

    Ok(PsdEstimate {
        freq_bins_hz,
        density_per_hz,
        nfft,
        overlap_fraction: overlap,
        sample_rate_hz: fs,
        segments,
    })
}

/// PSD settings clipped so that `nfft` fits the sequence (largest power of
/// two not above its length).
pub fn fitted_settings(settings: PsdSettings, len: usize) -> PsdSettings {
    if len >= settings.nfft {
        return settings;
    }
    let mut nfft = 2;
    while nfft * 2 <= len {
        nfft *= 2;
    }
    PsdSettings { nfft, ..settings }
}

/// Signal power inside `[f_lo, f_hi]` via default-setting PSD integration.
pub fn band_power_db<T: Real>(seq: &IqSequence<T>, f_lo: f64, f_hi: f64) -> Result<f64> {
    band_power_db_with(seq, f_lo, f_hi, PsdSettings::default())
}

pub fn band_power_db_with<T: Real>(
    seq: &IqSequence<T>,
    f_lo: f64,
    f_hi: f64,
    settings: PsdSettings,
) -> Result<f64> {
    check_band(f_lo, f_hi, seq.sample_rate_hz())?;
    let s = fitted_settings(settings, seq.len());
    welch_psd(seq, s.nfft, s.overlap)?.band_power_db(f_lo, f_hi)
}

/// Pre/post cancellation powers in a measurement band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub band_hz: [f64; 2],
    pub pre_power_db: f64,
    pub post_power_db: f64,
    pub suppression_db: f64,
    pub noise_floor_db: f64,
    pub residual_margin_db: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<LsDiagnostics>,
}

impl CancellationReport {
    /// Builds a report from band powers; the derived fields follow from
    /// `suppression = pre − post` and `margin = post − noise`.
    pub fn from_powers(
        band_hz: [f64; 2],
        pre_power_db: f64,
        post_power_db: f64,
        noise_floor_db: f64,
    ) -> Self {
        Self {
            band_hz,
            pre_power_db,
            post_power_db,
            suppression_db: pre_power_db - post_power_db,
            noise_floor_db,
            residual_margin_db: post_power_db - noise_floor_db,
            diagnostics: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn make_report<T: Real>(
    y_pre: &IqSequence<T>,
    y_post: &IqSequence<T>,
    noise_floor_db: f64,
    band: (f64, f64),
    settings: PsdSettings,
) -> Result<CancellationReport> {
    if y_pre.len() != y_post.len() {
        return Err(Error::LengthMismatch {
            left: y_pre.len(),
            right: y_post.len(),
        });
    }
    let pre = band_power_db_with(y_pre, band.0, band.1, settings)?;
    let post = band_power_db_with(y_post, band.0, band.1, settings)?;
    Ok(CancellationReport::from_powers(
        [band.0, band.1],
        pre,
        post,
        noise_floor_db,
    ))
}
