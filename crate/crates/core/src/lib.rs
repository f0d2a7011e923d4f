//! Baseband simulation and digital cancellation of passive intermodulation
//! (PIM) in inter-band carrier-aggregation FDD transceivers.
//!
//! Two transmit component carriers `s1`, `s2` mix in a passive nonlinearity
//! and leak third-order products `s1·s1·conj(s2)` into the receiver band
//! centered at `2ω1 − ω2`. The crate provides:
//!
//! * [`signal`]: seeded multicarrier waveforms and dBFS power handling,
//! * [`frontend`]: the ground-truth simulator (TX chains, PIM source, noise,
//!   over-the-air coupling to a diversity receiver),
//! * [`basis`]: basis-function enumeration for the memoryless-TX and
//!   TX-with-memory models and the data matrix,
//! * [`estimator`]: block least squares via orthogonal factorization plus
//!   RLS/LMS adaptive variants,
//! * [`canceller`]: block and streaming replica subtraction,
//! * [`metrics`]: Welch PSD, band power and cancellation reports,
//! * [`freqplan`]: IM3 product placement against receiver bands,
//! * [`experiment`]: config-driven runs and TX-power sweeps.
//!
//! All numerical modules are generic over the real scalar type through
//! [`Real`]; the aliases at the crate root fix it to `f64`.
//!
//! ```
//! use pimcancel::basis::{build_data_matrix, enumerate_basis, ModelSpec};
//! use pimcancel::canceller::cancel_block;
//! use pimcancel::estimator::fit_block_ls;
//! use pimcancel::frontend::{simulate_rx, PimKernel, TxChainModel};
//! use pimcancel::signal::{generate_cc, mean_power_db, CarrierConfig};
//! use pimcancel::FrontEnd;
//!
//! let (fs, n) = (30.72e6, 8192);
//! let s1 = generate_cc::<f64>(&CarrierConfig::lte5(-15.0, 1), n, fs)?;
//! let s2 = generate_cc::<f64>(&CarrierConfig::lte5(-15.0, 2), n, fs)?;
//! let truth = FrontEnd {
//!     tx1: TxChainModel::identity(),
//!     tx2: TxChainModel::identity(),
//!     pim: PimKernel::decaying(ModelSpec::memoryless(3, 4), 1.0, 3)?,
//!     noise_floor_dbfs: -90.0,
//!     ota_isolation_db: 10.0,
//!     rng_seed: 4,
//! };
//! let y = simulate_rx(&truth, &s1, &s2, false)?;
//!
//! let terms = enumerate_basis(&ModelSpec::memoryless(3, 4))?;
//! let a = build_data_matrix(&s1, &s2, &terms, 0..n)?;
//! let (theta, _diagnostics) = fit_block_ls(&a, y.samples(), 0.0)?;
//! let residual = cancel_block(&y, &a, &theta)?;
//! assert!(mean_power_db(&residual)? < -89.0);
//! # Ok::<(), pimcancel::Error>(())
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod canceller;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod freqplan;
pub mod frontend;
pub mod metrics;
pub mod rng;
pub mod selftest;
pub mod signal;

mod linalg;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use num_complex::Complex;

pub use basis::{BasisTerm, DataMatrix, ModelKind, ModelSpec};
pub use canceller::StreamingState;
pub use error::{Error, Result};
pub use estimator::{CoefficientVector, EstimatorConfig, EstimatorMethod, LsDiagnostics};
pub use frontend::{FrontEndModel, PimKernel, TxChainModel};
pub use metrics::{CancellationReport, PsdEstimate};
pub use signal::{CarrierConfig, IqSequence};

/// Real scalar type the numerical code is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for literals and RNG draws.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + rustfft::FftNum
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Double-precision complex sample.
pub type C64 = Complex<f64>;
/// Single-precision complex sample.
pub type C32 = Complex<f32>;

pub type Iq = IqSequence<f64>;
pub type Iq32 = IqSequence<f32>;
pub type TxChain = TxChainModel<f64>;
pub type Kernel = PimKernel<f64>;
pub type FrontEnd = FrontEndModel<f64>;
pub type Matrix = DataMatrix<f64>;
pub type Coefficients = CoefficientVector<f64>;
pub type Streaming = StreamingState<f64>;
