//! Degeneracy combinatorics of the `N`-spin space.
//!
//! `d_j = N! (2j+1) / ((N/2 − j)! (N/2 + j + 1)!)` copies of the spin-`j`
//! irrep appear in `(C²)^{⊗N}`, and `Σ_j (2j+1) d_j = 2^N`. Exact counts are
//! kept up to [`EXACT_LIMIT`] spins; the log-gamma path is always available.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::subspace::allowed_twice_j;

/// Largest `N` for which tables carry exact integer counts.
pub const EXACT_LIMIT: u32 = 256;

fn check_twice_j(n_spins: u32, twice_j: u32) -> Result<()> {
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    if twice_j > n_spins || !(n_spins - twice_j).is_multiple_of(2) {
        return Err(Error::InvalidIndex { n_spins, twice_j });
    }
    Ok(())
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, r: u32) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 1..=r {
        acc *= n - r + i;
        acc /= i;
    }
    acc
}

pub(crate) fn ln_binomial(n: u32, r: u32) -> f64 {
    let (n, r) = (f64::from(n), f64::from(r));
    ln_gamma(n + 1.0) - ln_gamma(r + 1.0) - ln_gamma(n - r + 1.0)
}

/// Natural log of an arbitrary-precision integer (−∞ for zero).
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact `d_j`.
pub fn degeneracy(n_spins: u32, twice_j: u32) -> Result<BigUint> {
    check_twice_j(n_spins, twice_j)?;
    // d_j = (2j+1)/(N/2+j+1) · C(N, N/2+j)
    let upper = (n_spins + twice_j) / 2;
    Ok(binomial(n_spins, upper) * (twice_j + 1) / (upper + 1))
}

/// `ln d_j` through log-gamma.
pub fn ln_degeneracy(n_spins: u32, twice_j: u32) -> Result<f64> {
    check_twice_j(n_spins, twice_j)?;
    let n = f64::from(n_spins);
    let lower = f64::from((n_spins - twice_j) / 2);
    let upper = f64::from((n_spins + twice_j) / 2);
    Ok(f64::from(twice_j + 1).ln() + ln_gamma(n + 1.0)
        - ln_gamma(lower + 1.0)
        - ln_gamma(upper + 2.0))
}

/// `D_k = Σ_{k'≤k} C(N, k')`, the number of states holding `k` excitations.
pub fn states_with_k_excitations(n_spins: u32, k: u64) -> BigUint {
    let top = k.min(u64::from(n_spins)) as u32;
    let mut term = BigUint::one();
    let mut acc = BigUint::one();
    for i in 0..top {
        term = term * (n_spins - i) / (i + 1);
        acc += &term;
    }
    acc
}

/// `ln D_k`, exact-derived up to [`EXACT_LIMIT`] spins and log-summed beyond.
pub fn ln_states_with_k_excitations(n_spins: u32, k: u64) -> f64 {
    if n_spins <= EXACT_LIMIT {
        return ln_biguint(&states_with_k_excitations(n_spins, k));
    }
    let top = k.min(u64::from(n_spins)) as u32;
    (0..=top)
        .map(|i| ln_binomial(n_spins, i))
        .fold(f64::NEG_INFINITY, log_add)
}

/// `ln D_k` for `k = 0..=k_max`, built incrementally.
pub fn ln_state_counts(n_spins: u32, k_max: u64) -> Vec<f64> {
    let top = k_max.min(u64::from(n_spins)) as u32;
    let mut out = Vec::with_capacity(k_max as usize + 1);
    if n_spins <= EXACT_LIMIT {
        let mut term = BigUint::one();
        let mut acc = BigUint::one();
        out.push(0.0);
        for i in 0..top {
            term = term * (n_spins - i) / (i + 1);
            acc += &term;
            out.push(ln_biguint(&acc));
        }
    } else {
        let mut acc = f64::NEG_INFINITY;
        for i in 0..=top {
            acc = log_add(acc, ln_binomial(n_spins, i));
            out.push(acc);
        }
    }
    let last = *out.last().unwrap();
    out.resize(k_max as usize + 1, last);
    out
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Whether `d_{j+1} > d_j`, decided in integers from the consecutive ratio
/// `(2j+3)(N−2j) / ((2j+1)(N+2j+4))`.
fn next_is_larger(n_spins: u32, twice_j: u32) -> bool {
    let (n, t) = (u64::from(n_spins), u64::from(twice_j));
    (t + 3) * (n - t) > (t + 1) * (n + t + 4)
}

/// `2j*`, the allowed `2j` with the largest `d_j`. Ties go to the smaller `j`.
pub fn j_star_exact(n_spins: u32) -> u32 {
    let mut twice_j = n_spins % 2;
    while twice_j + 2 <= n_spins && next_is_larger(n_spins, twice_j) {
        twice_j += 2;
    }
    twice_j
}

/// `√N/2 − 1/2 + 1/(6√N)`.
pub fn j_star_asymptotic(n_spins: u32) -> f64 {
    let s = f64::from(n_spins).sqrt();
    s / 2.0 - 0.5 + 1.0 / (6.0 * s)
}

/// `d_j / d_{j+1}` through the log domain.
pub fn adjacent_ratio(n_spins: u32, twice_j: u32) -> Result<f64> {
    check_twice_j(n_spins, twice_j)?;
    if twice_j + 2 > n_spins {
        return Err(domain(format!(
            "2j + 2 = {} exceeds N = {n_spins}",
            twice_j + 2
        )));
    }
    Ok((ln_degeneracy(n_spins, twice_j)? - ln_degeneracy(n_spins, twice_j + 2)?).exp())
}

/// `max_j d_j / 2^N`.
pub fn max_degeneracy_fraction(n_spins: u32) -> f64 {
    let tj = j_star_exact(n_spins);
    let ln_d = ln_degeneracy(n_spins, tj).expect("j* is allowed");
    (ln_d - f64::from(n_spins) * std::f64::consts::LN_2).exp()
}

/// Smallest `2j` window `[N mod 2, twice_j_max]` holding at least `mass` of
/// the `2^N` spin states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportWindow {
    pub mass: f64,
    pub twice_j_max: u32,
}

impl SupportWindow {
    pub fn j_max(&self) -> f64 {
        f64::from(self.twice_j_max) / 2.0
    }
}

pub fn strong_support(n_spins: u32, mass: f64) -> Result<SupportWindow> {
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(domain(format!(
            "support mass must lie in (0, 1], got {mass}"
        )));
    }
    if mass == 1.0 {
        return Ok(SupportWindow {
            mass,
            twice_j_max: n_spins,
        });
    }
    let table = DegeneracyTable::new(n_spins);
    let twice_j_max = table
        .cumulative_state_fractions()
        .into_iter()
        .find(|&(_, frac)| frac >= mass)
        .map_or(n_spins, |(tj, _)| tj);
    Ok(SupportWindow { mass, twice_j_max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyEntry {
    pub twice_j: u32,
    /// Present for `N ≤ EXACT_LIMIT`.
    pub exact_count: Option<BigUint>,
    pub log_count: f64,
}

/// All `d_j` for a fixed `N`, ascending in `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyTable {
    n_spins: u32,
    entries: Vec<DegeneracyEntry>,
}

impl DegeneracyTable {
    pub fn new(n_spins: u32) -> Self {
        assert!(n_spins > 0, "number of spins must be positive");
        let exact = n_spins <= EXACT_LIMIT;
        let entries = allowed_twice_j(n_spins)
            .map(|twice_j| {
                let exact_count = exact.then(|| degeneracy(n_spins, twice_j).unwrap());
                let log_count = match &exact_count {
                    Some(d) => ln_biguint(d),
                    None => ln_degeneracy(n_spins, twice_j).unwrap(),
                };
                DegeneracyEntry {
                    twice_j,
                    exact_count,
                    log_count,
                }
            })
            .collect();
        Self { n_spins, entries }
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn entries(&self) -> &[DegeneracyEntry] {
        &self.entries
    }

    pub fn get(&self, twice_j: u32) -> Option<&DegeneracyEntry> {
        if twice_j > self.n_spins || !(self.n_spins - twice_j).is_multiple_of(2) {
            return None;
        }
        self.entries
            .get(((twice_j - self.n_spins % 2) / 2) as usize)
    }

    /// `Σ (2j+1) d_j == 2^N`, checked exactly; `None` without exact counts.
    pub fn dimension_identity_holds(&self) -> Option<bool> {
        let mut total = BigUint::zero();
        for e in &self.entries {
            total += e.exact_count.as_ref()? * (e.twice_j + 1);
        }
        Some(total == BigUint::one() << self.n_spins)
    }

    /// Running fraction of the `2^N` states held by `j ≤ j'`, for each `2j'`.
    pub fn cumulative_state_fractions(&self) -> Vec<(u32, f64)> {
        let n = self.n_spins;
        if self.entries.iter().all(|e| e.exact_count.is_some()) {
            let full = (BigUint::one() << n).to_f64().unwrap();
            let mut acc = BigUint::zero();
            return self
                .entries
                .iter()
                .map(|e| {
                    acc += e.exact_count.as_ref().unwrap() * (e.twice_j + 1);
                    (e.twice_j, acc.to_f64().unwrap() / full)
                })
                .collect();
        }
        let ln_full = f64::from(n) * std::f64::consts::LN_2;
        let mut acc = 0.0;
        let mut comp = 0.0;
        self.entries
            .iter()
            .map(|e| {
                let x = (f64::from(e.twice_j + 1).ln() + e.log_count - ln_full).exp();
                // Neumaier
                let t = acc + x;
                comp += if acc.abs() >= x.abs() {
                    (acc - t) + x
                } else {
                    (x - t) + acc
                };
                acc = t;
                (e.twice_j, acc + comp)
            })
            .collect()
    }
}
