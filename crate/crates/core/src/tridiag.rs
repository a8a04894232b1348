//! Spectra of hollow symmetric tridiagonal (Jacobi) matrices.
//!
//! Eigenvalues come from Sturm-sequence bisection on `[0, ρ]` with `ρ` the
//! largest row sum. A hollow tridiagonal matrix is similar to its negation
//! (conjugate by `diag(1, −1, 1, …)`), so only the positive half is bisected;
//! the negative half is its mirror and odd dimensions get an exact zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::subspace::{CouplingMatrix, SubspaceIndex};

/// Below this dimension the bisection runs on the calling thread.
const PARALLEL_MIN_DIM: usize = 512;

const MAX_BISECTION_STEPS: usize = 200;

/// Inverse-iteration passes before giving up.
pub const INVERSE_ITERATION_CAP: usize = 5;

/// Relative slack accepted by [`SpectrumSet::is_paired`].
pub const PAIRING_TOLERANCE: f64 = 1e-9;

/// Largest absolute row sum; bounds the spectral radius.
pub fn max_row_sum(off_diag: &[f64]) -> f64 {
    let n = off_diag.len() + 1;
    (0..n)
        .map(|i| {
            let left = if i > 0 { off_diag[i - 1].abs() } else { 0.0 };
            let right = off_diag.get(i).map_or(0.0, |e| e.abs());
            left + right
        })
        .fold(0.0, f64::max)
}

fn pivot_floor(off_diag: &[f64]) -> f64 {
    let max_sq = off_diag.iter().map(|e| e * e).fold(1.0, f64::max);
    f64::MIN_POSITIVE * max_sq
}

/// Number of eigenvalues strictly below `x` (negative LDLᵀ pivots of
/// `L − xI`).
pub fn sturm_count(off_diag: &[f64], x: f64) -> usize {
    sturm_count_with_floor(off_diag, x, pivot_floor(off_diag))
}

fn sturm_count_with_floor(off_diag: &[f64], x: f64, floor: f64) -> usize {
    let mut q = -x;
    if q.abs() < floor {
        q = -floor;
    }
    let mut count = usize::from(q < 0.0);
    for &e in off_diag {
        q = -x - e * e / q;
        if q.abs() < floor {
            q = -floor;
        }
        count += usize::from(q < 0.0);
    }
    count
}

/// The `idx`-th smallest eigenvalue (0-based), given `count(lo) ≤ idx < count(hi)`.
/// Runs until the bracket stops shrinking.
fn bisect(off_diag: &[f64], idx: usize, mut lo: f64, mut hi: f64, floor: f64) -> f64 {
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if sturm_count_with_floor(off_diag, mid, floor) <= idx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues of the hollow symmetric tridiagonal matrix with the given
/// off-diagonal, ascending, exactly sign-paired.
pub fn hollow_eigenvalues(off_diag: &[f64]) -> Vec<f64> {
    let n = off_diag.len() + 1;
    if n == 1 {
        return vec![0.0];
    }
    let floor = pivot_floor(off_diag);
    let upper = max_row_sum(off_diag) * (1.0 + 1e-12) + floor;
    let n_pos = n / 2;
    // Positive eigenvalue i (ascending) sits at global index n − n_pos + i.
    let solve = |i: usize| bisect(off_diag, n - n_pos + i, 0.0, upper, floor);
    let positive: Vec<f64> = if n >= PARALLEL_MIN_DIM {
        (0..n_pos).into_par_iter().map(solve).collect()
    } else {
        (0..n_pos).map(solve).collect()
    };

    let mut out = Vec::with_capacity(n);
    out.extend(positive.iter().rev().map(|&x| -x));
    if n % 2 == 1 {
        out.push(0.0);
    }
    out.extend_from_slice(&positive);
    out
}

/// Largest eigenvalue alone (0 for a 1×1 block).
pub fn hollow_max_eigenvalue(off_diag: &[f64]) -> f64 {
    let n = off_diag.len() + 1;
    if n == 1 {
        return 0.0;
    }
    let floor = pivot_floor(off_diag);
    let upper = max_row_sum(off_diag) * (1.0 + 1e-12) + floor;
    bisect(off_diag, n - 1, 0.0, upper, floor)
}

/// Sorted eigenvalue set `Λ(j, k)` in units of `g0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    pub index: SubspaceIndex,
    pub eigenvalues: Vec<f64>,
    pub pairing_tolerance: f64,
}

impl SpectrumSet {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `Σ λ^t`.
    pub fn power_sum(&self, t: u32) -> f64 {
        self.eigenvalues.iter().map(|x| x.powi(t as i32)).sum()
    }

    pub fn is_paired(&self) -> bool {
        let n = self.dim();
        let tol = self.pairing_tolerance * self.max_eigenvalue().abs().max(1.0);
        (0..n).all(|i| (self.eigenvalues[i] + self.eigenvalues[n - 1 - i]).abs() <= tol)
    }

    /// Smallest gap between consecutive eigenvalues (∞ for one eigenvalue).
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_simple(&self) -> bool {
        self.min_gap() > 0.0
    }
}

pub fn eigenvalues(m: &CouplingMatrix) -> SpectrumSet {
    SpectrumSet {
        index: m.index(),
        eigenvalues: hollow_eigenvalues(m.off_diag()),
        pairing_tolerance: PAIRING_TOLERANCE,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    /// Unit norm, first non-negligible component positive.
    pub vector: Vec<f64>,
}

/// `‖L v − λ v‖∞` for the hollow matrix with this off-diagonal.
pub fn residual_inf(off_diag: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut lv = 0.0;
            if i > 0 {
                lv += off_diag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                lv += off_diag[i] * v[i + 1];
            }
            (lv - lambda * v[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Solve `(L − λI) x = rhs` by the Thomas algorithm, nudging vanishing pivots.
fn shifted_thomas_solve(off_diag: &[f64], lambda: f64, rhs: &[f64], guard: f64) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let safe = |p: f64| {
        if p.abs() < guard {
            guard.copysign(p)
        } else {
            p
        }
    };

    let mut pivot = safe(-lambda);
    for i in 0..n {
        if i > 0 {
            pivot = safe(-lambda - off_diag[i - 1] * c[i - 1]);
            d[i] = (rhs[i] - off_diag[i - 1] * d[i - 1]) / pivot;
        } else {
            d[0] = rhs[0] / pivot;
        }
        if i + 1 < n {
            c[i] = off_diag[i] / pivot;
        }
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn fix_sign(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * big) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenvector for a known eigenvalue of a hollow tridiagonal matrix by
/// shifted inverse iteration from the all-ones vector.
pub fn hollow_eigenvector(off_diag: &[f64], lambda: f64) -> Result<EigenPair> {
    let n = off_diag.len() + 1;
    if n == 1 {
        return Ok(EigenPair {
            eigenvalue: lambda,
            vector: vec![1.0],
        });
    }
    let max_off = off_diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * lambda.abs().max(1.0) * max_off;
    let guard = f64::EPSILON * (lambda.abs() + max_off);

    let mut v = vec![1.0; n];
    normalize(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..INVERSE_ITERATION_CAP {
        v = shifted_thomas_solve(off_diag, lambda, &v, guard);
        normalize(&mut v);
        residual = residual_inf(off_diag, lambda, &v);
        if residual <= tol {
            fix_sign(&mut v);
            return Ok(EigenPair {
                eigenvalue: lambda,
                vector: v,
            });
        }
    }
    Err(Error::NoConvergence {
        shift: lambda,
        residual,
    })
}

pub fn eigenvector(m: &CouplingMatrix, lambda: f64) -> Result<EigenPair> {
    hollow_eigenvector(m.off_diag(), lambda)
}

/// Determinant in `(sign, ln|det|)` form; `sign == 0` for a singular matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    pub sign: i8,
    pub ln_abs: f64,
}

impl Determinant {
    /// May overflow to ±∞ for large dimensions.
    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }
}

/// Odd dimension: exactly zero. Even dimension `n + 1`:
/// `(−1)^{(n+1)/2} l_n² l_{n−2}² ⋯ l_1²`.
pub fn hollow_determinant(off_diag: &[f64]) -> Determinant {
    let dim = off_diag.len() + 1;
    if dim % 2 == 1 {
        return Determinant {
            sign: 0,
            ln_abs: f64::NEG_INFINITY,
        };
    }
    let ln_abs = off_diag.iter().step_by(2).map(|l| 2.0 * l.abs().ln()).sum();
    let sign = if (dim / 2).is_multiple_of(2) { 1 } else { -1 };
    Determinant { sign, ln_abs }
}

pub fn determinant(m: &CouplingMatrix) -> Determinant {
    hollow_determinant(m.off_diag())
}

/// `det(L − xI)` via the three-term recurrence
/// `p_{i+1} = −x p_i − l_i² p_{i−1}`.
pub fn hollow_char_poly(off_diag: &[f64], x: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = -x;
    for &e in off_diag {
        let next = -x * cur - e * e * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn char_poly_eval(m: &CouplingMatrix, x: f64) -> f64 {
    hollow_char_poly(m.off_diag(), x)
}

/// Determinant through the recurrence at `x = 0`, for cross-checking.
pub fn determinant_recurrence(m: &CouplingMatrix) -> f64 {
    hollow_char_poly(m.off_diag(), 0.0)
}
