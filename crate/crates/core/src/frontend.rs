//! Ground-truth transceiver model: linear TX chains, the third-order PIM
//! source, receiver noise and over-the-air coupling to a diversity RX.
//!
//! The RX local oscillator sits exactly at `2ω1 − ω2`, so the PIM lands at
//! baseband DC and no residual frequency offset is applied.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_basis, BasisTerm, ModelSpec};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::signal::{check_aligned, IqSequence};
use crate::Real;

/// Magnitude ratio between successive taps of the seeded fixtures.
pub const DECAY_RATIO: f64 = 0.5;

/// Linear TX chain `y[n] = Σ_{m=−pre}^{post} taps[m+pre]·x[n−m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxChainModel<T> {
    pub taps: Vec<Complex<T>>,
    pub pre: u32,
    pub post: u32,
}

impl<T: Real> TxChainModel<T> {
    pub fn new(taps: Vec<Complex<T>>, pre: u32, post: u32) -> Result<Self> {
        let chain = Self { taps, pre, post };
        chain.validate()?;
        Ok(chain)
    }

    /// Memoryless unit gain.
    pub fn identity() -> Self {
        Self {
            taps: vec![Complex::new(T::one(), T::zero())],
            pre: 0,
            post: 0,
        }
    }

    /// Unit center tap; tap `m` has magnitude `0.5^|m|` and a seeded phase.
    pub fn decaying(pre: u32, post: u32, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let taps = (-(pre as i64)..=post as i64)
            .map(|m| {
                if m == 0 {
                    Complex::new(T::one(), T::zero())
                } else {
                    let mag = DECAY_RATIO.powi(m.unsigned_abs() as i32);
                    let phi = rng.phase();
                    Complex::new(T::lit(mag * phi.cos()), T::lit(mag * phi.sin()))
                }
            })
            .collect();
        Self { taps, pre, post }
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.len() != (self.pre + self.post + 1) as usize {
            return Err(Error::InvalidModel(format!(
                "TX chain needs {} taps, has {}",
                self.pre + self.post + 1,
                self.taps.len()
            )));
        }
        if self
            .taps
            .iter()
            .any(|t| !(t.re.is_finite() && t.im.is_finite()))
        {
            return Err(Error::NonFinite("TX chain taps"));
        }
        if self.taps.iter().all(|t| t.norm_sqr() == T::zero()) {
            return Err(Error::InvalidModel("TX chain taps are all zero".into()));
        }
        Ok(())
    }
}

/// Third-order PIM kernel: one coefficient per basis monomial.
///
/// `window` bounds the admissible delays of the keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr<T>", into = "KernelRepr<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct PimKernel<T> {
    window: ModelSpec,
    coefficients: BTreeMap<BasisTerm, Complex<T>>,
}

impl<T: Real> PimKernel<T> {
    pub fn new(window: ModelSpec, coefficients: BTreeMap<BasisTerm, Complex<T>>) -> Result<Self> {
        window.validate()?;
        if let Some(t) = coefficients.keys().find(|t| !window.contains(t)) {
            return Err(Error::InvalidModel(format!(
                "kernel term ({t}) outside delay window {:?}",
                window.delay_window()
            )));
        }
        if coefficients
            .values()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite("PIM kernel"));
        }
        if coefficients.values().all(|c| c.norm_sqr() == T::zero()) {
            return Err(Error::InvalidModel(
                "PIM kernel has no nonzero coefficient".into(),
            ));
        }
        Ok(Self {
            window,
            coefficients,
        })
    }

    /// Memoryless-TX kernel `Σ_l γ_l s1[n−l]² conj(s2[n−l])` with
    /// `gammas[i]` at lag `i − pre`.
    pub fn diagonal(pre: u32, gammas: &[Complex<T>]) -> Result<Self> {
        if gammas.len() < pre as usize + 1 {
            return Err(Error::InvalidModel(format!(
                "{} coefficients cannot cover {pre} pre-cursor taps",
                gammas.len()
            )));
        }
        let post = (gammas.len() - 1 - pre as usize) as u32;
        let coefficients = gammas
            .iter()
            .enumerate()
            .map(|(i, &g)| (BasisTerm::diagonal(i as i32 - pre as i32), g))
            .collect();
        Self::new(ModelSpec::memoryless(pre, post), coefficients)
    }

    /// Every term of `spec` with magnitude `scale·0.5^max|delay|` and a
    /// seeded uniform phase; the zero-delay term is real.
    pub fn decaying(spec: ModelSpec, scale: f64, seed: u64) -> Result<Self> {
        let mut rng = Rng::new(seed);
        let coefficients = enumerate_basis(&spec)?
            .into_iter()
            .map(|t| {
                let reach = t
                    .min_delay()
                    .unsigned_abs()
                    .max(t.max_delay().unsigned_abs());
                let mag = scale * DECAY_RATIO.powi(reach as i32);
                let phi = if reach == 0 { 0.0 } else { rng.phase() };
                (
                    t,
                    Complex::new(T::lit(mag * phi.cos()), T::lit(mag * phi.sin())),
                )
            })
            .collect();
        Self::new(spec, coefficients)
    }

    pub fn window(&self) -> &ModelSpec {
        &self.window
    }

    pub fn coefficients(&self) -> &BTreeMap<BasisTerm, Complex<T>> {
        &self.coefficients
    }

    pub fn terms(&self) -> Vec<BasisTerm> {
        self.coefficients.keys().copied().collect()
    }

    pub fn values(&self) -> Vec<Complex<T>> {
        self.coefficients.values().copied().collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRepr<T> {
    window: ModelSpec,
    entries: Vec<KernelEntry<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelEntry<T> {
    delays: BasisTerm,
    value: Complex<T>,
}

impl<T: Real> TryFrom<KernelRepr<T>> for PimKernel<T> {
    type Error = Error;

    fn try_from(r: KernelRepr<T>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in r.entries {
            if map.insert(e.delays, e.value).is_some() {
                return Err(Error::InvalidModel(format!(
                    "duplicate kernel term ({})",
                    e.delays
                )));
            }
        }
        Self::new(r.window, map)
    }
}

impl<T: Real> From<PimKernel<T>> for KernelRepr<T> {
    fn from(k: PimKernel<T>) -> Self {
        Self {
            window: k.window,
            entries: k
                .coefficients
                .into_iter()
                .map(|(delays, value)| KernelEntry { delays, value })
                .collect(),
        }
    }
}

/// Complete ground-truth front end.
///
/// `noise_floor_dbfs = -inf` disables receiver noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct FrontEndModel<T> {
    pub tx1: TxChainModel<T>,
    pub tx2: TxChainModel<T>,
    pub pim: PimKernel<T>,
    pub noise_floor_dbfs: f64,
    pub ota_isolation_db: f64,
    pub rng_seed: u64,
}

impl<T: Real> FrontEndModel<T> {
    pub fn validate(&self) -> Result<()> {
        self.tx1.validate()?;
        self.tx2.validate()?;
        if !(self.ota_isolation_db.is_finite() && self.ota_isolation_db >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "OTA isolation must be a non-negative number of dB, got {}",
                self.ota_isolation_db
            )));
        }
        if self.noise_floor_dbfs.is_nan() || self.noise_floor_dbfs == f64::INFINITY {
            return Err(Error::InvalidModel(format!(
                "noise floor must be finite or -inf, got {}",
                self.noise_floor_dbfs
            )));
        }
        Ok(())
    }

    pub fn noise_enabled(&self) -> bool {
        self.noise_floor_dbfs.is_finite()
    }
}

/// Convolves `seq` with the chain taps; out-of-range inputs read as zero.
pub fn apply_tx_chain<T: Real>(
    seq: &IqSequence<T>,
    chain: &TxChainModel<T>,
) -> Result<IqSequence<T>> {
    chain.validate()?;
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let x = seq.samples();
    let len = x.len() as i64;
    let pre = chain.pre as i64;
    let out = (0..len)
        .map(|n| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, &tap) in chain.taps.iter().enumerate() {
                let idx = n - (i as i64 - pre);
                if (0..len).contains(&idx) {
                    acc = acc + tap * x[idx as usize];
                }
            }
            acc
        })
        .collect();
    IqSequence::new(out, seq.sample_rate_hz())
}

/// `Σ_t γ_t·s1[n−a]·s1[n−b]·conj(s2[n−c])` over the kernel entries.
pub fn generate_pim<T: Real>(
    s1: &IqSequence<T>,
    s2: &IqSequence<T>,
    pim: &PimKernel<T>,
) -> Result<IqSequence<T>> {
    check_aligned(s1, s2)?;
    let (x1, x2) = (s1.samples(), s2.samples());
    let entries: Vec<(BasisTerm, Complex<T>)> =
        pim.coefficients().iter().map(|(t, &g)| (*t, g)).collect();
    let out = (0..x1.len())
        .map(|n| {
            entries
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (t, g)| {
                    acc + *g * t.eval(x1, x2, n)
                })
        })
        .collect();
    IqSequence::new(out, s1.sample_rate_hz())
}

/// Memoryless-TX generator `Σ_{l=−pre}^{post} γ_l s1[n−l]² conj(s2[n−l])`
/// written out directly, with `gammas[i]` at lag `i − pre`.
pub fn memoryless_pim<T: Real>(
    s1: &IqSequence<T>,
    s2: &IqSequence<T>,
    gammas: &[Complex<T>],
    pre: u32,
) -> Result<IqSequence<T>> {
    check_aligned(s1, s2)?;
    let (x1, x2) = (s1.samples(), s2.samples());
    let len = x1.len() as i64;
    let out = (0..len)
        .map(|n| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, &g) in gammas.iter().enumerate() {
                let idx = n - (i as i64 - pre as i64);
                if (0..len).contains(&idx) {
                    let a = x1[idx as usize];
                    acc = acc + g * a * a * x2[idx as usize].conj();
                }
            }
            acc
        })
        .collect();
    IqSequence::new(out, s1.sample_rate_hz())
}

/// Complex white Gaussian noise with mean power `power_dbfs`; each sample
/// draws the real then the imaginary part, each with variance `P/2`.
pub fn awgn<T: Real>(
    len: usize,
    power_dbfs: f64,
    seed: u64,
    sample_rate_hz: f64,
) -> Result<IqSequence<T>> {
    if !power_dbfs.is_finite() {
        return IqSequence::zeros(len, sample_rate_hz);
    }
    let sigma = (10f64.powf(power_dbfs / 10.0) / 2.0).sqrt();
    let mut rng = Rng::new(seed);
    let samples = (0..len)
        .map(|_| {
            let re = rng.normal() * sigma;
            let im = rng.normal() * sigma;
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    IqSequence::new(samples, sample_rate_hz)
}

/// Received-signal parts kept separate for measurement.
#[derive(Clone, Debug)]
pub struct RxComponents<T> {
    /// PIM after the OTA attenuation (if any).
    pub pim: IqSequence<T>,
    pub noise: IqSequence<T>,
}

impl<T: Real> RxComponents<T> {
    pub fn total(&self) -> Result<IqSequence<T>> {
        self.pim.add(&self.noise)
    }
}

pub fn simulate_rx_components<T: Real>(
    model: &FrontEndModel<T>,
    s1: &IqSequence<T>,
    s2: &IqSequence<T>,
    diversity: bool,
) -> Result<RxComponents<T>> {
    model.validate()?;
    check_aligned(s1, s2)?;
    let x1 = apply_tx_chain(s1, &model.tx1)?;
    let x2 = apply_tx_chain(s2, &model.tx2)?;
    let mut pim = generate_pim(&x1, &x2, &model.pim)?;
    if diversity {
        let gain = 10f64.powf(-model.ota_isolation_db / 20.0);
        pim = pim.scaled(Complex::new(T::lit(gain), T::zero()));
    }
    let noise = awgn(
        s1.len(),
        model.noise_floor_dbfs,
        model.rng_seed,
        s1.sample_rate_hz(),
    )?;
    Ok(RxComponents { pim, noise })
}

/// PIM (attenuated on the diversity path) plus seeded receiver noise.
pub fn simulate_rx<T: Real>(
    model: &FrontEndModel<T>,
    s1: &IqSequence<T>,
    s2: &IqSequence<T>,
    diversity: bool,
) -> Result<IqSequence<T>> {
    simulate_rx_components(model, s1, s2, diversity)?.total()
}
