//! Complex baseband waveforms, the multicarrier generator and dBFS power
//! handling.

use std::ops::Range;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::Real;

/// Largest carrier bandwidth accepted by [`generate_cc`], as a fraction of
/// the sample rate.
pub const MAX_OCCUPANCY: f64 = 0.8;

/// Uniformly sampled complex baseband waveform in full-scale units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqSequence<T> {
    samples: Vec<Complex<T>>,
    sample_rate_hz: f64,
}

impl<T: Real> IqSequence<T> {
    pub fn new(samples: Vec<Complex<T>>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFinite("IQ samples"));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(
            vec![Complex::new(T::zero(), T::zero()); len],
            sample_rate_hz,
        )
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sub-sequence over `range`, keeping the sample rate.
    pub fn slice(&self, range: Range<usize>) -> Result<Self> {
        if range.start > range.end || range.end > self.len() {
            return Err(Error::InvalidLength(format!(
                "range {range:?} outside sequence of length {}",
                self.len()
            )));
        }
        Ok(Self {
            samples: self.samples[range].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: Complex<T>) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| s * gain).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Sample-wise sum; lengths and rates must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_aligned(self, other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| a + b)
                .collect(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Sample-wise difference; lengths and rates must agree.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_aligned(self, other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| a - b)
                .collect(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Converts the sample precision.
    pub fn cast<U: Real>(&self) -> IqSequence<U> {
        IqSequence {
            samples: self
                .samples
                .iter()
                .map(|s| Complex::new(U::lit(s.re.to_f64_lossy()), U::lit(s.im.to_f64_lossy())))
                .collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Fails unless both sequences have equal length and sample rate.
pub fn check_aligned<T: Real>(a: &IqSequence<T>, b: &IqSequence<T>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::RateMismatch {
            left: a.sample_rate_hz(),
            right: b.sample_rate_hz(),
        });
    }
    Ok(())
}

/// One transmit component carrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierConfig {
    pub bandwidth_hz: f64,
    #[serde(default = "default_subcarriers")]
    pub num_subcarriers: usize,
    /// Mean power in dB relative to full scale.
    pub power_dbfs: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_subcarriers() -> usize {
    300
}

impl CarrierConfig {
    /// 5 MHz carrier with 300 subcarriers.
    pub fn lte5(power_dbfs: f64, seed: u64) -> Self {
        Self {
            bandwidth_hz: 5.0e6,
            num_subcarriers: default_subcarriers(),
            power_dbfs,
            seed,
        }
    }
}

/// Generates a multicarrier waveform: `num_subcarriers` equal-amplitude
/// tones with seeded uniform phases, placed on evenly spread DFT bins
/// strictly inside `±bandwidth/2`, then scaled to `power_dbfs`.
///
/// The waveform is periodic in `num_samples`, so its spectrum has no
/// leakage outside the occupied bins.
pub fn generate_cc<T: Real>(
    config: &CarrierConfig,
    num_samples: usize,
    sample_rate_hz: f64,
) -> Result<IqSequence<T>> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let limit = MAX_OCCUPANCY * sample_rate_hz;
    if !(config.bandwidth_hz > 0.0 && config.bandwidth_hz <= limit) {
        return Err(Error::InvalidBandwidth {
            bandwidth_hz: config.bandwidth_hz,
            limit_hz: limit,
        });
    }
    if !config.power_dbfs.is_finite() {
        return Err(Error::InvalidArgument(
            "carrier power must be finite".into(),
        ));
    }
    if config.num_subcarriers == 0 {
        return Err(Error::InvalidLength(
            "num_subcarriers must be at least 1".into(),
        ));
    }
    if num_samples < config.num_subcarriers {
        return Err(Error::InvalidLength(format!(
            "{num_samples} samples cannot hold {} subcarriers",
            config.num_subcarriers
        )));
    }

    // Bins k with |k·fs/N| < bw/2.
    let half_bins = config.bandwidth_hz / 2.0 * num_samples as f64 / sample_rate_hz;
    let k_max = (half_bins.ceil() as i64 - 1).max(0);
    let available = (2 * k_max + 1) as usize;
    if available < config.num_subcarriers {
        return Err(Error::InvalidLength(format!(
            "{num_samples} samples give only {available} bins inside the band, need {}",
            config.num_subcarriers
        )));
    }

    let mut rng = Rng::new(config.seed);
    let mut spectrum = vec![Complex::new(T::zero(), T::zero()); num_samples];
    for i in 0..config.num_subcarriers {
        let idx = ((2 * i + 1) * available) / (2 * config.num_subcarriers);
        let k = idx as i64 - k_max;
        let bin = k.rem_euclid(num_samples as i64) as usize;
        let phi = rng.phase();
        spectrum[bin] = Complex::new(T::lit(phi.cos()), T::lit(phi.sin()));
    }

    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_inverse(num_samples).process(&mut spectrum);

    let seq = IqSequence::new(spectrum, sample_rate_hz)?;
    scale_to_power(&seq, config.power_dbfs)
}

/// Rescales `seq` by a real positive gain so its mean power is `target_dbfs`.
pub fn scale_to_power<T: Real>(seq: &IqSequence<T>, target_dbfs: f64) -> Result<IqSequence<T>> {
    let current = mean_power(seq)?;
    if current <= 0.0 {
        return Err(Error::ZeroPower);
    }
    if !target_dbfs.is_finite() {
        return Err(Error::InvalidArgument("target power must be finite".into()));
    }
    let gain = (10f64.powf(target_dbfs / 10.0) / current).sqrt();
    Ok(seq.scaled(Complex::new(T::lit(gain), T::zero())))
}

/// Mean of `|x[n]|²` (linear, full-scale units).
pub fn mean_power<T: Real>(seq: &IqSequence<T>) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = seq
        .samples()
        .iter()
        .map(|s| s.norm_sqr().to_f64_lossy())
        .sum();
    Ok(sum / seq.len() as f64)
}

/// `10·log10(mean |x[n]|²)`; an all-zero sequence gives `-inf`.
pub fn mean_power_db<T: Real>(seq: &IqSequence<T>) -> Result<f64> {
    Ok(10.0 * mean_power(seq)?.log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    const FS: f64 = 30.72e6;

    fn constant(v: C64, n: usize) -> IqSequence<f64> {
        IqSequence::new(vec![v; n], FS).unwrap()
    }

    #[test]
    fn generated_power_matches_config() {
        let cfg = CarrierConfig::lte5(-15.0, 1);
        let s = generate_cc::<f64>(&cfg, 90_000, FS).unwrap();
        assert_eq!(s.len(), 90_000);
        let p = mean_power_db(&s).unwrap();
        assert!((p + 15.0).abs() <= 0.1, "{p}");
    }

    #[test]
    fn generation_is_bit_identical() {
        let cfg = CarrierConfig::lte5(-15.0, 1);
        let a = generate_cc::<f64>(&cfg, 4096, FS).unwrap();
        let b = generate_cc::<f64>(&cfg, 4096, FS).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        let c = generate_cc::<f64>(&CarrierConfig { seed: 2, ..cfg }, 4096, FS).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bandwidth_limit() {
        let cfg = CarrierConfig::lte5(-15.0, 1);
        let err = generate_cc::<f64>(&cfg, 4096, 4.0e6).unwrap_err();
        assert!(matches!(err, Error::InvalidBandwidth { .. }));
    }

    #[test]
    fn too_few_samples() {
        let cfg = CarrierConfig::lte5(-15.0, 1);
        assert!(matches!(
            generate_cc::<f64>(&cfg, 100, FS),
            Err(Error::InvalidLength(_))
        ));
        // enough samples overall but too few bins inside 5 MHz
        assert!(matches!(
            generate_cc::<f64>(&cfg, 1000, FS),
            Err(Error::InvalidLength(_))
        ));
    }

    #[test]
    fn single_precision_generation() {
        let cfg = CarrierConfig::lte5(-10.0, 3);
        let s = generate_cc::<f32>(&cfg, 8192, FS).unwrap();
        assert!((mean_power_db(&s).unwrap() + 10.0).abs() < 0.01);
    }

    #[test]
    fn scale_all_ones_to_half() {
        let s = constant(C64::new(1.0, 0.0), 64);
        let out = scale_to_power(&s, 20.0 * 0.5f64.log10()).unwrap();
        for x in out.samples() {
            assert!((x - C64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn scale_to_current_power_is_identity() {
        let cfg = CarrierConfig::lte5(-7.0, 9);
        let s = generate_cc::<f64>(&cfg, 4096, FS).unwrap();
        let p = mean_power_db(&s).unwrap();
        let out = scale_to_power(&s, p).unwrap();
        for (a, b) in s.samples().iter().zip(out.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn scale_zero_sequence_fails() {
        let s = constant(C64::new(0.0, 0.0), 16);
        assert!(matches!(scale_to_power(&s, -10.0), Err(Error::ZeroPower)));
    }

    #[test]
    fn mean_power_examples() {
        assert_eq!(
            mean_power_db(&constant(C64::new(1.0, 0.0), 8)).unwrap(),
            0.0
        );
        let half = mean_power_db(&constant(C64::new(0.5, 0.0), 8)).unwrap();
        assert!((half + 6.020_599_913_279_624).abs() < 1e-9);
        let alt: Vec<C64> = (0..10)
            .map(|n| {
                if n % 2 == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 1.0)
                }
            })
            .collect();
        assert_eq!(
            mean_power_db(&IqSequence::new(alt, FS).unwrap()).unwrap(),
            0.0
        );
        let empty = IqSequence::<f64>::new(vec![], FS).unwrap();
        assert!(matches!(mean_power_db(&empty), Err(Error::EmptyInput)));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(IqSequence::new(vec![C64::new(f64::NAN, 0.0)], FS).is_err());
        assert!(IqSequence::<f64>::new(vec![], 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn power_contract(seed in any::<u64>(), power in -60.0f64..0.0) {
                let cfg = CarrierConfig { seed, ..CarrierConfig::lte5(power, 0) };
                let s = generate_cc::<f64>(&cfg, 4096, FS).unwrap();
                prop_assert!((mean_power_db(&s).unwrap() - power).abs() <= 0.1);
            }

            #[test]
            fn scaling_is_idempotent(seed in any::<u64>(), target in -80.0f64..10.0) {
                let s = generate_cc::<f64>(&CarrierConfig::lte5(-20.0, seed), 2048, FS).unwrap();
                let once = scale_to_power(&s, target).unwrap();
                let twice = scale_to_power(&once, target).unwrap();
                prop_assert!((mean_power_db(&once).unwrap() - target).abs() < 1e-9);
                for (a, b) in once.samples().iter().zip(twice.samples()) {
                    prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
                }
            }
        }
    }
}
