//! Third-order basis functions `s1[n−a]·s1[n−b]·conj(s2[n−c])` for the two
//! PIM models, and the data matrix built from them.
//!
//! Negative delays read future samples (pre-cursor taps), positive delays
//! past samples (post-cursor taps). Samples outside the sequence read as
//! zero.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{check_aligned, IqSequence};
use crate::Real;

/// Delay triple of one monomial `s1[n−d_a]·s1[n−d_b]·conj(s2[n−d_c])`.
///
/// The two `s1` factors commute, so the canonical form keeps `d_a ≤ d_b`.
/// Ordering is lexicographic on `(d_a, d_b, d_c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 3]", into = "[i32; 3]")]
pub struct BasisTerm {
    d_a: i32,
    d_b: i32,
    d_c: i32,
}

impl BasisTerm {
    /// Canonicalizing constructor.
    pub fn new(s1_delay: i32, s1_other_delay: i32, s2_delay: i32) -> Self {
        Self {
            d_a: s1_delay.min(s1_other_delay),
            d_b: s1_delay.max(s1_other_delay),
            d_c: s2_delay,
        }
    }

    /// The memoryless-TX term `s1[n−l]²·conj(s2[n−l])`.
    pub fn diagonal(lag: i32) -> Self {
        Self::new(lag, lag, lag)
    }

    pub fn delays(&self) -> (i32, i32, i32) {
        (self.d_a, self.d_b, self.d_c)
    }

    pub fn min_delay(&self) -> i32 {
        self.d_a.min(self.d_c)
    }

    pub fn max_delay(&self) -> i32 {
        self.d_b.max(self.d_c)
    }

    pub fn is_diagonal(&self) -> bool {
        self.d_a == self.d_b && self.d_b == self.d_c
    }

    /// Monomial value at time `n` with zero padding outside the inputs.
    ///
    /// `s1` and `s2` must have equal length.
    #[inline]
    pub fn eval<T: Real>(&self, s1: &[Complex<T>], s2: &[Complex<T>], n: usize) -> Complex<T> {
        let n = n as i64;
        let a = sample_at(s1, n - self.d_a as i64);
        let b = sample_at(s1, n - self.d_b as i64);
        let c = sample_at(s2, n - self.d_c as i64);
        a * b * c.conj()
    }
}

#[inline]
fn sample_at<T: Real>(s: &[Complex<T>], idx: i64) -> Complex<T> {
    if idx >= 0 && (idx as usize) < s.len() {
        s[idx as usize]
    } else {
        Complex::new(T::zero(), T::zero())
    }
}

impl From<[i32; 3]> for BasisTerm {
    fn from(d: [i32; 3]) -> Self {
        Self::new(d[0], d[1], d[2])
    }
}

impl From<BasisTerm> for [i32; 3] {
    fn from(t: BasisTerm) -> Self {
        [t.d_a, t.d_b, t.d_c]
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.d_a, self.d_b, self.d_c)
    }
}

impl FromStr for BasisTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i32> = s
            .split_whitespace()
            .map(|p| p.parse::<i32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad term {s:?}: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => Ok(Self::new(*a, *b, *c)),
            _ => Err(Error::InvalidArgument(format!(
                "term {s:?} needs exactly three delays"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Linear memoryless TX chains; PIM memory only.
    MemorylessTx,
    /// TX chains with their own memory ahead of the PIM source.
    TxWithMemory,
}

/// Canceller model structure.
///
/// `pre`/`post` are the PIM-stage pre- and post-cursor tap counts,
/// `tx_pre`/`tx_post` the TX-chain ones (zero for [`ModelKind::MemorylessTx`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub pre: u32,
    pub post: u32,
    #[serde(default)]
    pub tx_pre: u32,
    #[serde(default)]
    pub tx_post: u32,
}

impl ModelSpec {
    pub fn memoryless(pre: u32, post: u32) -> Self {
        Self {
            kind: ModelKind::MemorylessTx,
            pre,
            post,
            tx_pre: 0,
            tx_post: 0,
        }
    }

    pub fn tx_memory(pre: u32, post: u32, tx_pre: u32, tx_post: u32) -> Self {
        Self {
            kind: ModelKind::TxWithMemory,
            pre,
            post,
            tx_pre,
            tx_post,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ModelKind::MemorylessTx && (self.tx_pre != 0 || self.tx_post != 0) {
            return Err(Error::InvalidModel(
                "memoryless TX model requires tx_pre = tx_post = 0".into(),
            ));
        }
        // keep delays comfortably inside i32
        if self.pre + self.tx_pre > 1 << 20 || self.post + self.tx_post > 1 << 20 {
            return Err(Error::InvalidModel("memory depth too large".into()));
        }
        Ok(())
    }

    /// Inclusive delay range `[−(pre+tx_pre), post+tx_post]`.
    pub fn delay_window(&self) -> (i32, i32) {
        (
            -((self.pre + self.tx_pre) as i32),
            (self.post + self.tx_post) as i32,
        )
    }

    pub fn contains(&self, term: &BasisTerm) -> bool {
        let (lo, hi) = self.delay_window();
        term.min_delay() >= lo && term.max_delay() <= hi
    }

    /// Number of index tuples before merging duplicate monomials:
    /// `(pre+post+1)·C(M+2, 2)·(M+1)` with `M = tx_pre + tx_post`.
    pub fn raw_term_count(&self) -> u64 {
        let lags = (self.pre + self.post + 1) as u64;
        let m = (self.tx_pre + self.tx_post) as u64;
        lags * (m + 2) * (m + 1) / 2 * (m + 1)
    }
}

/// Distinct basis terms of `spec`, sorted lexicographically.
///
/// For every PIM lag `l` the two `s1` factors and the `s2` factor are
/// distributed over the TX-chain tap offsets `m ∈ [−tx_pre, tx_post]`; each
/// factor then sits at delay `l + m`. Index tuples mapping to the same
/// monomial collapse into one term.
pub fn enumerate_basis(spec: &ModelSpec) -> Result<Vec<BasisTerm>> {
    spec.validate()?;
    let lags = -(spec.pre as i32)..=spec.post as i32;
    let taps: Vec<i32> = (-(spec.tx_pre as i32)..=spec.tx_post as i32).collect();
    let mut set = BTreeSet::new();
    for l in lags {
        for (i, &ma) in taps.iter().enumerate() {
            // s1 has degree two: unordered pairs of tap positions
            for &mb in &taps[i..] {
                for &mc in &taps {
                    set.insert(BasisTerm::new(l + ma, l + mb, l + mc));
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Future samples needed to evaluate `terms` at time `n`.
pub fn lookahead(terms: &[BasisTerm]) -> usize {
    terms
        .iter()
        .map(|t| (-t.min_delay()).max(0) as usize)
        .max()
        .unwrap_or(0)
}

/// Past samples needed to evaluate `terms` at time `n`.
pub fn history(terms: &[BasisTerm]) -> usize {
    terms
        .iter()
        .map(|t| t.max_delay().max(0) as usize)
        .max()
        .unwrap_or(0)
}

/// One triple per line, `d_a d_b d_c`.
pub fn terms_to_text(terms: &[BasisTerm]) -> String {
    let mut out = String::new();
    for t in terms {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

/// Parses [`terms_to_text`] output; blank lines and `#` comments are skipped.
pub fn terms_from_text(text: &str) -> Result<Vec<BasisTerm>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

/// Column-major `N×K` matrix of basis-function samples.
///
/// Row `i` corresponds to absolute time `row_start + i` of the source
/// sequences; column `j` to `terms[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix<T> {
    rows: usize,
    terms: Vec<BasisTerm>,
    row_start: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DataMatrix<T> {
    /// Wraps column-major `data`; used for synthetic matrices in tests and
    /// tools. Terms are informational here.
    pub fn from_columns(rows: usize, terms: Vec<BasisTerm>, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || terms.is_empty() {
            return Err(Error::DimensionMismatch("matrix must be non-empty".into()));
        }
        if data.len() != rows * terms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{} matrix",
                data.len(),
                terms.len()
            )));
        }
        Ok(Self {
            rows,
            terms,
            row_start: 0,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[BasisTerm] {
        &self.terms
    }

    pub fn row_start(&self) -> usize {
        self.row_start
    }

    pub fn column(&self, j: usize) -> &[Complex<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[col * self.rows + row]
    }

    pub fn row(&self, row: usize) -> Vec<Complex<T>> {
        (0..self.cols()).map(|j| self.get(row, j)).collect()
    }

    /// `A·θ`, accumulating each row in column order from zero.
    pub fn mul_vec(&self, theta: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if theta.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} columns",
                theta.len(),
                self.cols()
            )));
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for (n, o) in out.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, &th) in theta.iter().enumerate() {
                acc = acc + self.get(n, j) * th;
            }
            *o = acc;
        }
        Ok(out)
    }

    /// Same matrix with columns reordered by `perm` (new column `j` is old
    /// column `perm[j]`).
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let k = self.cols();
        let mut seen = vec![false; k];
        if perm.len() != k
            || perm
                .iter()
                .any(|&p| p >= k || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            data.extend_from_slice(self.column(p));
        }
        Ok(Self {
            rows: self.rows,
            terms: perm.iter().map(|&p| self.terms[p]).collect(),
            row_start: self.row_start,
            data,
        })
    }
}

/// Evaluates `terms` on rows `row_range` of the aligned inputs. Reads
/// outside the sequences are zero; reads outside `row_range` but inside
/// the sequences use the actual samples.
pub fn build_data_matrix<T: Real>(
    s1: &IqSequence<T>,
    s2: &IqSequence<T>,
    terms: &[BasisTerm],
    row_range: Range<usize>,
) -> Result<DataMatrix<T>> {
    check_aligned(s1, s2)?;
    if row_range.start >= row_range.end {
        return Err(Error::InvalidLength(format!(
            "empty row range {row_range:?}"
        )));
    }
    if row_range.end > s1.len() {
        return Err(Error::InvalidLength(format!(
            "row range {row_range:?} exceeds sequence length {}",
            s1.len()
        )));
    }
    if terms.is_empty() {
        return Err(Error::DimensionMismatch("empty term list".into()));
    }
    let (x1, x2) = (s1.samples(), s2.samples());
    let rows = row_range.len();
    let columns: Vec<Vec<Complex<T>>> = terms
        .par_iter()
        .map(|term| row_range.clone().map(|n| term.eval(x1, x2, n)).collect())
        .collect();
    Ok(DataMatrix {
        rows,
        terms: terms.to_vec(),
        row_start: row_range.start,
        data: columns.concat(),
    })
}
