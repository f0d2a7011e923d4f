//! Reference implementations written independently of the library code
//! they check.

#![allow(dead_code)]

use pimcancel::C64;

/// Delay triples `(a, b, c)` of `s1[n−a]·s1[n−b]·conj(s2[n−c])` for the
/// TX-memory model with one tap on every side, listed by hand in
/// lexicographic order.
pub const REFERENCE_TERMS_42: [[i32; 3]; 42] = [
    [-2, -2, -2],
    [-2, -2, -1],
    [-2, -2, 0],
    [-2, -1, -2],
    [-2, -1, -1],
    [-2, -1, 0],
    [-2, 0, -2],
    [-2, 0, -1],
    [-2, 0, 0],
    [-1, -1, -2],
    [-1, -1, -1],
    [-1, -1, 0],
    [-1, -1, 1],
    [-1, 0, -2],
    [-1, 0, -1],
    [-1, 0, 0],
    [-1, 0, 1],
    [-1, 1, -1],
    [-1, 1, 0],
    [-1, 1, 1],
    [0, 0, -2],
    [0, 0, -1],
    [0, 0, 0],
    [0, 0, 1],
    [0, 0, 2],
    [0, 1, -1],
    [0, 1, 0],
    [0, 1, 1],
    [0, 1, 2],
    [0, 2, 0],
    [0, 2, 1],
    [0, 2, 2],
    [1, 1, -1],
    [1, 1, 0],
    [1, 1, 1],
    [1, 1, 2],
    [1, 2, 0],
    [1, 2, 1],
    [1, 2, 2],
    [2, 2, 0],
    [2, 2, 1],
    [2, 2, 2],
];

/// The memoryless model's three terms for one pre- and one post-cursor tap.
pub const REFERENCE_TERMS_3: [[i32; 3]; 3] = [[-1, -1, -1], [0, 0, 0], [1, 1, 1]];

fn at(x: &[C64], n: i64) -> C64 {
    if n >= 0 && (n as usize) < x.len() {
        x[n as usize]
    } else {
        C64::new(0.0, 0.0)
    }
}

/// `Σ_t θ_t·s1[n−a_t]·s1[n−b_t]·conj(s2[n−c_t])` by explicit indexing.
pub fn pim_direct(s1: &[C64], s2: &[C64], terms: &[[i32; 3]], theta: &[C64]) -> Vec<C64> {
    (0..s1.len() as i64)
        .map(|n| {
            terms
                .iter()
                .zip(theta)
                .fold(C64::new(0.0, 0.0), |acc, (d, &g)| {
                    acc + g
                        * at(s1, n - d[0] as i64)
                        * at(s1, n - d[1] as i64)
                        * at(s2, n - d[2] as i64).conj()
                })
        })
        .collect()
}

/// Least squares for two unknowns through the closed-form inverse of the
/// 2×2 Gram matrix, `θ = (AᴴA)⁻¹Aᴴy`.
pub fn lstsq_two(col0: &[C64], col1: &[C64], y: &[C64]) -> [C64; 2] {
    let dot = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
    let (g00, g01, g11) = (dot(col0, col0), dot(col0, col1), dot(col1, col1));
    let g10 = g01.conj();
    let (b0, b1) = (dot(col0, y), dot(col1, y));
    let det = g00 * g11 - g01 * g10;
    [(g11 * b0 - g01 * b1) / det, (g00 * b1 - g10 * b0) / det]
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn mean_power(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn rel_err(est: &[C64], truth: &[C64]) -> f64 {
    let num: f64 = est.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = truth.iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}
