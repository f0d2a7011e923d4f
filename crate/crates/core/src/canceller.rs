//! Replica regeneration and subtraction, `y[n] − aᵀ[n]·θ`.
//!
//! The streaming canceller evaluates the same monomials as
//! [`build_data_matrix`](crate::basis::build_data_matrix) in the same
//! accumulation order, so block and streaming outputs agree bit for bit.
//! Pre-cursor (negative-delay) terms are served by delaying the output.

use std::collections::VecDeque;

use num_complex::Complex;

use crate::basis::{self, BasisTerm, DataMatrix};
use crate::error::{Error, Result};
use crate::estimator::CoefficientVector;
use crate::signal::IqSequence;
use crate::Real;

fn check_terms<T: Real>(terms: &[BasisTerm], theta: &CoefficientVector<T>) -> Result<()> {
    theta.validate()?;
    if terms != theta.terms.as_slice() {
        return Err(Error::TermMismatch(format!(
            "{} data-matrix terms vs {} coefficient terms (or different order)",
            terms.len(),
            theta.len()
        )));
    }
    Ok(())
}

/// Subtracts `A·θ` from `y` row by row.
pub fn cancel_block<T: Real>(
    y: &IqSequence<T>,
    a: &DataMatrix<T>,
    theta: &CoefficientVector<T>,
) -> Result<IqSequence<T>> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} received samples for {} matrix rows",
            y.len(),
            a.rows()
        )));
    }
    check_terms(a.terms(), theta)?;
    let replica = a.mul_vec(&theta.values)?;
    let out = y
        .samples()
        .iter()
        .zip(&replica)
        .map(|(&v, &r)| v - r)
        .collect();
    IqSequence::new(out, y.sample_rate_hz())
}

/// Sample-by-sample canceller state.
///
/// Holds `history` past and `latency` future transmit samples. Each pushed
/// sample releases the cancelled output for the sample `latency` steps
/// earlier; [`StreamingState::flush`] drains the tail by feeding zeros.
#[derive(Clone, Debug)]
pub struct StreamingState<T> {
    terms: Vec<BasisTerm>,
    theta: Vec<Complex<T>>,
    latency: usize,
    s1: VecDeque<Complex<T>>,
    s2: VecDeque<Complex<T>>,
    pending_y: VecDeque<Complex<T>>,
    capacity: usize,
    /// Samples pushed so far.
    consumed: u64,
    /// Real (non-flush) samples pushed.
    real_inputs: u64,
    emitted: u64,
}

impl<T: Real> StreamingState<T> {
    pub fn new(theta: &CoefficientVector<T>) -> Result<Self> {
        theta.validate()?;
        if theta.is_empty() {
            return Err(Error::TermMismatch("empty term list".into()));
        }
        let latency = basis::lookahead(&theta.terms);
        let capacity = basis::history(&theta.terms) + latency + 1;
        Ok(Self {
            terms: theta.terms.clone(),
            theta: theta.values.clone(),
            latency,
            s1: VecDeque::with_capacity(capacity),
            s2: VecDeque::with_capacity(capacity),
            pending_y: VecDeque::with_capacity(latency + 1),
            capacity,
            consumed: 0,
            real_inputs: 0,
            emitted: 0,
        })
    }

    /// Fixed output delay in samples (the largest pre-cursor reach).
    pub fn latency(&self) -> usize {
        self.latency
    }

    pub fn terms(&self) -> &[BasisTerm] {
        &self.terms
    }

    /// Swaps in re-estimated coefficients without touching the buffers.
    pub fn set_coefficients(&mut self, theta: &CoefficientVector<T>) -> Result<()> {
        check_terms(&self.terms, theta)?;
        self.theta.clone_from(&theta.values);
        Ok(())
    }

    fn at(buf: &VecDeque<Complex<T>>, front_time: i64, time: i64) -> Complex<T> {
        if time < front_time {
            // before the stream start
            return Complex::new(T::zero(), T::zero());
        }
        buf[(time - front_time) as usize]
    }

    fn feed(&mut self, s1: Complex<T>, s2: Complex<T>, y: Complex<T>) -> Option<Complex<T>> {
        if self.s1.len() == self.capacity {
            self.s1.pop_front();
            self.s2.pop_front();
        }
        self.s1.push_back(s1);
        self.s2.push_back(s2);
        self.pending_y.push_back(y);
        self.consumed += 1;

        if self.consumed <= self.latency as u64 {
            return None;
        }
        let t = (self.consumed - 1 - self.latency as u64) as i64;
        let front = self.consumed as i64 - self.s1.len() as i64;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (term, &th) in self.terms.iter().zip(&self.theta) {
            let (da, db, dc) = term.delays();
            let a = Self::at(&self.s1, front, t - da as i64);
            let b = Self::at(&self.s1, front, t - db as i64);
            let c = Self::at(&self.s2, front, t - dc as i64);
            acc = acc + a * b * c.conj() * th;
        }
        let y_t = self.pending_y.pop_front().expect("pending sample");
        self.emitted += 1;
        Some(y_t - acc)
    }

    /// Pushes one aligned input triple; returns the cancelled sample for
    /// time `n − latency` once the pipeline is full.
    pub fn push(&mut self, s1: Complex<T>, s2: Complex<T>, y: Complex<T>) -> Option<Complex<T>> {
        self.real_inputs += 1;
        self.feed(s1, s2, y)
    }

    /// Emits the outputs still held back by the latency, treating samples
    /// past the end of the stream as zero.
    pub fn flush(&mut self) -> Vec<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = Vec::new();
        while self.emitted < self.real_inputs {
            if let Some(v) = self.feed(zero, zero, zero) {
                out.push(v);
            }
        }
        out
    }
}

/// Runs the streaming canceller over whole input slices (including the final
/// flush) and returns one output per input sample.
pub fn cancel_streaming<T: Real>(
    s1: &[Complex<T>],
    s2: &[Complex<T>],
    y: &[Complex<T>],
    state: &mut StreamingState<T>,
) -> Result<Vec<Complex<T>>> {
    if s1.len() != s2.len() || s1.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: s1.len(),
            right: if s1.len() != s2.len() {
                s2.len()
            } else {
                y.len()
            },
        });
    }
    let mut out = Vec::with_capacity(y.len());
    for ((&a, &b), &v) in s1.iter().zip(s2).zip(y) {
        if let Some(o) = state.push(a, b, v) {
            out.push(o);
        }
    }
    out.extend(state.flush());
    Ok(out)
}
