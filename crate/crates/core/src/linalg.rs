//! Complex Householder QR for tall least-squares problems, accumulated over
//! row blocks so the full orthogonal factor is never stored.

use num_complex::Complex;

use crate::Real;

/// Running `R` factor and `Qᴴy` for `min ‖y − Aθ‖` with `A` fed in row
/// blocks. Each block is stacked under the current `R` and re-factored.
pub(crate) struct QrAccumulator<T> {
    k: usize,
    /// `k×k` upper triangle, column-major.
    r: Vec<Complex<T>>,
    qty: Vec<Complex<T>>,
    residual_ss: f64,
}

impl<T: Real> QrAccumulator<T> {
    pub(crate) fn new(k: usize) -> Self {
        Self {
            k,
            r: vec![zero(); k * k],
            qty: vec![zero(); k],
            residual_ss: 0.0,
        }
    }

    /// Absorbs `rows` new rows. `column(j)` yields the block's column `j`.
    pub(crate) fn absorb<'a, F>(&mut self, rows: usize, column: F, y: &[Complex<T>])
    where
        F: Fn(usize) -> &'a [Complex<T>],
        T: 'a,
    {
        let k = self.k;
        let m = k + rows;
        let mut w = vec![zero::<T>(); m * k];
        for j in 0..k {
            let col = &mut w[j * m..(j + 1) * m];
            col[..k].copy_from_slice(&self.r[j * k..(j + 1) * k]);
            col[k..].copy_from_slice(&column(j)[..rows]);
        }
        let mut wy = Vec::with_capacity(m);
        wy.extend_from_slice(&self.qty);
        wy.extend_from_slice(&y[..rows]);

        householder_in_place(&mut w, &mut wy, m, k);

        for j in 0..k {
            self.r[j * k..(j + 1) * k].copy_from_slice(&w[j * m..j * m + k]);
        }
        self.qty.copy_from_slice(&wy[..k]);
        self.residual_ss += wy[k..]
            .iter()
            .map(|v| v.norm_sqr().to_f64_lossy())
            .sum::<f64>();
    }

    pub(crate) fn r_diag(&self, j: usize) -> Complex<T> {
        self.r[j * self.k + j]
    }

    /// Back substitution `R θ = Qᴴy`. Zero pivots yield non-finite output;
    /// callers check the diagonal first.
    pub(crate) fn solve(&self) -> Vec<Complex<T>> {
        back_substitute(&self.r, &self.qty, self.k)
    }

    /// `min ‖y − Aθ‖²` implied by the factorization.
    #[cfg(test)]
    pub(crate) fn residual_sum_squares(&self) -> f64 {
        self.residual_ss
    }

    /// Two-norm condition number estimate of `R` (hence of `A`), from power
    /// iteration on `RᴴR` and inverse iteration through two triangular
    /// solves.
    pub(crate) fn condition_estimate(&self, iterations: usize) -> f64 {
        let k = self.k;
        if (0..k).any(|j| self.r_diag(j).norm_sqr() == T::zero()) {
            return f64::INFINITY;
        }
        let start = vec![Complex::new(T::lit(1.0 / (k as f64).sqrt()), T::zero()); k];

        let mut v = start.clone();
        let mut big = 0.0;
        for _ in 0..iterations {
            let w = mul_rh(&self.r, &mul_r(&self.r, &v, k), k);
            big = norm(&w);
            if big == 0.0 {
                return f64::INFINITY;
            }
            v = w.iter().map(|x| *x / T::lit(big)).collect();
        }

        let mut v = start;
        let mut inv = 0.0;
        for _ in 0..iterations {
            let w = back_substitute(&self.r, &forward_substitute_rh(&self.r, &v, k), k);
            inv = norm(&w);
            if !inv.is_finite() || inv == 0.0 {
                return f64::INFINITY;
            }
            v = w.iter().map(|x| *x / T::lit(inv)).collect();
        }
        // big ≈ σmax², inv ≈ 1/σmin²
        (big * inv).sqrt()
    }
}

#[inline]
fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn norm<T: Real>(v: &[Complex<T>]) -> f64 {
    v.iter()
        .map(|x| x.norm_sqr().to_f64_lossy())
        .sum::<f64>()
        .sqrt()
}

/// Reduces the column-major `m×k` matrix `w` to upper-triangular form with
/// Householder reflectors, applying each reflector to `y` as well.
fn householder_in_place<T: Real>(w: &mut [Complex<T>], y: &mut [Complex<T>], m: usize, k: usize) {
    for j in 0..k.min(m) {
        let (head, tail) = w.split_at_mut((j + 1) * m);
        let col = &mut head[j * m..];
        let x = &mut col[j..];
        let sq: T = x.iter().map(|v| v.norm_sqr()).sum();
        if sq == T::zero() {
            continue;
        }
        let nrm = sq.sqrt();
        let x0 = x[0];
        let x0_abs = x0.norm();
        let phase = if x0_abs > T::zero() {
            x0 / x0_abs
        } else {
            Complex::new(T::one(), T::zero())
        };
        // v = x + phase·‖x‖·e1, H = I − τ v vᴴ, H x = −phase·‖x‖·e1
        x[0] = x0 + phase * nrm;
        let tau = T::one() / (nrm * (nrm + x0_abs));
        let v: &[Complex<T>] = x;

        for q in 0..(k - j - 1) {
            let target = &mut tail[q * m + j..(q + 1) * m];
            reflect(v, target, tau);
        }
        reflect(v, &mut y[j..], tau);

        col[j] = -(phase * nrm);
        for e in &mut col[j + 1..] {
            *e = zero();
        }
    }
}

#[inline]
fn reflect<T: Real>(v: &[Complex<T>], target: &mut [Complex<T>], tau: T) {
    let mut s = zero::<T>();
    for (vi, ti) in v.iter().zip(target.iter()) {
        s = s + vi.conj() * *ti;
    }
    let s = s * tau;
    for (vi, ti) in v.iter().zip(target.iter_mut()) {
        *ti = *ti - *vi * s;
    }
}

fn back_substitute<T: Real>(r: &[Complex<T>], b: &[Complex<T>], k: usize) -> Vec<Complex<T>> {
    let mut x = b.to_vec();
    for i in (0..k).rev() {
        let mut acc = x[i];
        for j in i + 1..k {
            acc = acc - r[j * k + i] * x[j];
        }
        x[i] = acc / r[i * k + i];
    }
    x
}

/// Solves `Rᴴ x = b` (lower triangular).
fn forward_substitute_rh<T: Real>(r: &[Complex<T>], b: &[Complex<T>], k: usize) -> Vec<Complex<T>> {
    let mut x = b.to_vec();
    for i in 0..k {
        let mut acc = x[i];
        for j in 0..i {
            // (Rᴴ)[i][j] = conj(R[j][i])
            acc = acc - r[i * k + j].conj() * x[j];
        }
        x[i] = acc / r[i * k + i].conj();
    }
    x
}

fn mul_r<T: Real>(r: &[Complex<T>], v: &[Complex<T>], k: usize) -> Vec<Complex<T>> {
    let mut out = vec![zero(); k];
    for j in 0..k {
        for i in 0..=j {
            out[i] = out[i] + r[j * k + i] * v[j];
        }
    }
    out
}

fn mul_rh<T: Real>(r: &[Complex<T>], v: &[Complex<T>], k: usize) -> Vec<Complex<T>> {
    (0..k)
        .map(|j| (0..=j).fold(zero(), |acc, i| acc + r[j * k + i].conj() * v[i]))
        .collect()
}
