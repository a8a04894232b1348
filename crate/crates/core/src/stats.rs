//! Lamb-shift statistics per block and averaged over a `k` manifold.
//!
//! Manifold averages weight block `j` by its multiplicity `d_j` and divide by
//! `D_k`. Sums over `j` always run in ascending order so results do not depend
//! on how work was scheduled.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::degeneracy::{ln_state_counts, states_with_k_excitations, DegeneracyTable, EXACT_LIMIT};
use crate::error::{domain, Error, Result};
use crate::subspace::{nonempty_subspaces, CouplingMatrix, PhysicalParams, SubspaceIndex};
use crate::tridiag::{hollow_eigenvalues, hollow_max_eigenvalue, max_row_sum};

/// Highest moment order accepted.
pub const MAX_MOMENT_ORDER: u32 = 12;

/// Default `g0 · maxΛ / ω0` ceiling for the rotating-wave check.
pub const DEFAULT_RWA_THRESHOLD: f64 = 0.1;

/// Default spin-state mass kept by the truncated scan.
pub const DEFAULT_SUPPORT_MASS: f64 = 0.999_999;

/// Ratio between `2j` and `k'` beyond which an asymptotic expansion applies.
pub const REGIME_RATIO: f64 = 10.0;

fn check_order(t: u32) -> Result<()> {
    if t == 0 || t > MAX_MOMENT_ORDER {
        return Err(domain(format!(
            "moment order must lie in 1..={MAX_MOMENT_ORDER}, got {t}"
        )));
    }
    Ok(())
}

fn non_empty(index: SubspaceIndex) -> Result<()> {
    if index.is_empty() {
        return Err(Error::EmptySubspace {
            n_spins: index.n_spins(),
            twice_j: index.twice_j(),
            k: index.k(),
        });
    }
    Ok(())
}

/// `Tr L^t` from the eigenvalues; odd orders are zero by symmetry.
fn trace_power(index: SubspaceIndex, t: u32) -> f64 {
    if t % 2 == 1 || index.is_empty() {
        return 0.0;
    }
    if t == 2 {
        return trace_sq_closed(index) as f64;
    }
    let m = CouplingMatrix::build(index).expect("non-empty");
    hollow_eigenvalues(m.off_diag())
        .iter()
        .map(|x| x.powi(t as i32))
        .sum()
}

/// `⟨Λ(j,k)^t⟩ = Σ λ^t / |B|` from the eigenvalue set.
pub fn subspace_moment(index: SubspaceIndex, t: u32) -> Result<f64> {
    check_order(t)?;
    non_empty(index)?;
    if t % 2 == 1 {
        return Ok(0.0);
    }
    let m = CouplingMatrix::build(index)?;
    let sum: f64 = hollow_eigenvalues(m.off_diag())
        .iter()
        .map(|x| x.powi(t as i32))
        .sum();
    Ok(sum / m.dim() as f64)
}

/// `2 Σ l_α² / |B|`, the second moment without diagonalizing.
pub fn subspace_second_moment_trace(index: SubspaceIndex) -> Result<f64> {
    non_empty(index)?;
    Ok(index.trace_sq() as f64 / index.basis_dim() as f64)
}

/// Closed-form block variance as a polynomial in `|B|`, `2j` and `k'`.
///
/// ```text
/// 6 Var = 3B³ − 2B²(2k' + 2(2j) + 7) + B(6(2j)k' + 12k' + 12(2j) + 21)
///         − 2(3(2j)k' + 4(2j) + 4k' + 5)
/// ```
pub fn subspace_variance_closed_form(index: SubspaceIndex) -> Result<f64> {
    non_empty(index)?;
    Ok(six_variance(index) as f64 / 6.0)
}

fn six_variance(index: SubspaceIndex) -> i128 {
    let b = index.basis_dim() as i128;
    let tj = i128::from(index.twice_j());
    let kp = i128::from(index.excess().expect("non-empty"));
    3 * b * b * b - 2 * b * b * (2 * kp + 2 * tj + 7) + b * (6 * tj * kp + 12 * kp + 12 * tj + 21)
        - 2 * (3 * tj * kp + 4 * tj + 4 * kp + 5)
}

/// `Tr L(j,k)²` in O(1) from the closed-form variance.
pub fn trace_sq_closed(index: SubspaceIndex) -> u128 {
    if index.is_empty() {
        return 0;
    }
    (index.basis_dim() as i128 * six_variance(index) / 6) as u128
}

/// Which expansion of the largest-eigenvalue estimate applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRegime {
    /// `k' ≥ 10 · 2j`.
    LargeExcitation,
    /// `2j ≥ 10 · k'`.
    SmallExcitation,
    General,
}

impl BoundRegime {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LargeExcitation => "large_excitation",
            Self::SmallExcitation => "small_excitation",
            Self::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub index: SubspaceIndex,
    /// `min(l_1, l_{dim−1})`.
    pub pf_lower: f64,
    /// Largest row sum.
    pub pf_upper: f64,
    /// `(2/√3) √((2j + k') j k')`.
    pub asymptotic_upper: f64,
    /// `2(j√k' − j²/(2√k') + j⁴/(8 k'^{5/2}))`.
    pub large_excitation_upper: f64,
    /// `2(k'√j/√2 − k'²/(8√2 √j) + k'⁴/(512 j^{5/2}))`.
    pub small_excitation_upper: f64,
    pub regime: BoundRegime,
}

impl BoundsReport {
    /// The expansion matching [`Self::regime`].
    pub fn regime_upper(&self) -> f64 {
        match self.regime {
            BoundRegime::LargeExcitation => self.large_excitation_upper,
            BoundRegime::SmallExcitation => self.small_excitation_upper,
            BoundRegime::General => self.asymptotic_upper,
        }
    }
}

fn regime_of(twice_j: f64, kp: f64) -> BoundRegime {
    if kp >= REGIME_RATIO * twice_j {
        BoundRegime::LargeExcitation
    } else if twice_j >= REGIME_RATIO * kp {
        BoundRegime::SmallExcitation
    } else {
        BoundRegime::General
    }
}

/// Row-sum bounds on the spectral radius of `L(j,k)` and the asymptotic
/// estimates. Blocks with fewer than two states report all zeros.
pub fn pf_bounds(index: SubspaceIndex) -> BoundsReport {
    let j = index.j();
    let kp = index.excess().unwrap_or(0) as f64;
    let regime = regime_of(2.0 * j, kp);
    if index.basis_dim() < 2 {
        return BoundsReport {
            index,
            pf_lower: 0.0,
            pf_upper: 0.0,
            asymptotic_upper: 0.0,
            large_excitation_upper: 0.0,
            small_excitation_upper: 0.0,
            regime,
        };
    }
    let m = CouplingMatrix::build(index).expect("non-empty");
    let off = m.off_diag();
    let pf_lower = off[0].min(off[off.len() - 1]);
    let pf_upper = max_row_sum(off);
    let asymptotic_upper = 2.0 / 3f64.sqrt() * ((2.0 * j + kp) * j * kp).sqrt();
    let sk = kp.sqrt();
    let large_excitation_upper =
        2.0 * (j * sk - 0.5 * j * j / sk + j.powi(4) / (8.0 * kp.powf(2.5)));
    let sj = j.sqrt();
    let r2 = std::f64::consts::SQRT_2;
    let small_excitation_upper =
        2.0 * (kp * sj / r2 - kp * kp / (8.0 * r2 * sj) + kp.powi(4) / (512.0 * j.powf(2.5)));
    BoundsReport {
        index,
        pf_lower,
        pf_upper,
        asymptotic_upper,
        large_excitation_upper,
        small_excitation_upper,
        regime,
    }
}

/// `max_j maxΛ(j,k)` in units of `g0`.
pub fn max_lamb_shift(n_spins: u32, k: u64) -> f64 {
    nonempty_subspaces(n_spins, k)
        .map(|idx| {
            let m = CouplingMatrix::build(idx).expect("non-empty");
            hollow_max_eigenvalue(m.off_diag())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwaReport {
    pub n_spins: u32,
    pub k: u64,
    pub params: PhysicalParams,
    /// `g0 · max_j maxΛ(j,k)`, frequency units.
    pub max_shift: f64,
    /// `max_shift / ω0`.
    pub ratio: f64,
    pub threshold: f64,
    pub valid: bool,
}

pub fn rwa_check(
    n_spins: u32,
    k: u64,
    params: PhysicalParams,
    threshold: f64,
) -> Result<RwaReport> {
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(domain(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let max_shift = params.g0() * max_lamb_shift(n_spins, k);
    let ratio = max_shift / params.omega0();
    Ok(RwaReport {
        n_spins,
        k,
        params,
        max_shift,
        ratio,
        threshold,
        valid: ratio < threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentScope {
    Subspace(SubspaceIndex),
    Manifold { n_spins: u32, k: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub scope: MomentScope,
    pub moments: BTreeMap<u32, f64>,
    /// `|B_{j,k}|` or `D_k`.
    pub state_count: BigUint,
}

/// Weights `d_j / D_k` for every `2j` in `table`, ascending.
struct ManifoldWeights {
    twice_j: Vec<u32>,
    log_counts: Vec<f64>,
    counts: Option<Vec<f64>>,
}

impl ManifoldWeights {
    fn new(table: &DegeneracyTable) -> Self {
        let twice_j = table.entries().iter().map(|e| e.twice_j).collect();
        let log_counts = table.entries().iter().map(|e| e.log_count).collect();
        let counts = (table.n_spins() <= EXACT_LIMIT).then(|| {
            table
                .entries()
                .iter()
                .map(|e| e.exact_count.as_ref().unwrap().to_f64().unwrap())
                .collect()
        });
        Self {
            twice_j,
            log_counts,
            counts,
        }
    }

    fn weight(&self, i: usize, ln_dk: f64) -> f64 {
        match &self.counts {
            Some(c) => c[i] / ln_dk.exp(),
            None => (self.log_counts[i] - ln_dk).exp(),
        }
    }
}

fn exact_weight(d: &BigUint, dk: &BigUint) -> f64 {
    d.to_f64().unwrap() / dk.to_f64().unwrap()
}

/// `(1/D_k) Σ_j d_j Tr L(j,k)^t`.
pub fn aggregated_moment(n_spins: u32, k: u64, t: u32) -> Result<MomentReport> {
    check_order(t)?;
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    let state_count = states_with_k_excitations(n_spins, k);
    let mut moments = BTreeMap::new();
    if t % 2 == 1 {
        moments.insert(t, 0.0);
    } else {
        let table = DegeneracyTable::new(n_spins);
        let ln_dk = ln_state_counts(n_spins, k)[k as usize];
        let mut acc = 0.0;
        for (idx, entry) in nonempty_subspaces(n_spins, k).map(|idx| {
            let e = table.get(idx.twice_j()).expect("allowed");
            (idx, e)
        }) {
            let w = match &entry.exact_count {
                Some(d) => exact_weight(d, &state_count),
                None => (entry.log_count - ln_dk).exp(),
            };
            acc += w * trace_power(idx, t);
        }
        moments.insert(t, acc);
    }
    Ok(MomentReport {
        scope: MomentScope::Manifold { n_spins, k },
        moments,
        state_count,
    })
}

/// Same quantity as `aggregated_moment(n, k, 2)` but summed over full
/// eigendecompositions of every block.
pub fn aggregated_variance_by_eigenvalues(n_spins: u32, k: u64) -> f64 {
    let table = DegeneracyTable::new(n_spins);
    let ln_dk = ln_state_counts(n_spins, k)[k as usize];
    let weights = ManifoldWeights::new(&table);
    nonempty_subspaces(n_spins, k)
        .map(|idx| {
            let i = weights.twice_j.binary_search(&idx.twice_j()).unwrap();
            let m = CouplingMatrix::build(idx).expect("non-empty");
            let s: f64 = hollow_eigenvalues(m.off_diag()).iter().map(|x| x * x).sum();
            weights.weight(i, ln_dk) * s
        })
        .sum()
}

/// How many `j` blocks enter each manifold variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    Full,
    /// Keep the lowest blocks until they hold `mass` of the `D_k` states.
    Truncated {
        mass: f64,
    },
}

/// Manifold variance `⟨Λ(k)²⟩` for `k = 0..=k_max` from the closed trace.
pub fn variance_scan(n_spins: u32, k_max: u64, mode: ScanMode) -> Result<Vec<(u64, f64)>> {
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    let mass = match mode {
        ScanMode::Full => 1.0,
        ScanMode::Truncated { mass } => {
            if !(mass > 0.0 && mass <= 1.0) {
                return Err(domain(format!(
                    "support mass must lie in (0, 1], got {mass}"
                )));
            }
            mass
        }
    };
    let table = DegeneracyTable::new(n_spins);
    let weights = ManifoldWeights::new(&table);
    let ln_dk = ln_state_counts(n_spins, k_max);
    let exact_dk: Option<Vec<BigUint>> = (n_spins <= EXACT_LIMIT).then(|| {
        let top = k_max.min(u64::from(n_spins));
        (0..=top)
            .map(|k| states_with_k_excitations(n_spins, k))
            .collect()
    });
    let exact_d: Option<Vec<&BigUint>> = (n_spins <= EXACT_LIMIT).then(|| {
        table
            .entries()
            .iter()
            .map(|e| e.exact_count.as_ref().unwrap())
            .collect()
    });

    let one = |k: u64| -> (u64, f64) {
        let mut var = 0.0;
        let mut held = 0.0;
        for idx in nonempty_subspaces(n_spins, k) {
            let i = weights.twice_j.binary_search(&idx.twice_j()).unwrap();
            let w = match (&exact_d, &exact_dk) {
                (Some(d), Some(dk)) => exact_weight(d[i], &dk[k.min(u64::from(n_spins)) as usize]),
                _ => weights.weight(i, ln_dk[k as usize]),
            };
            var += w * trace_sq_closed(idx) as f64;
            held += w * idx.basis_dim() as f64;
            if mass < 1.0 && held >= mass {
                break;
            }
        }
        (k, var)
    };
    Ok((0..=k_max).into_par_iter().map(one).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub n_spins: u32,
    pub k_lo: u64,
    pub k_hi: u64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`, with `r²` clamped to `[0, 1]`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(domain("least squares needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(domain("least squares needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r_squared))
}

/// Fit of the manifold variance against `k` over `[k_lo, k_hi]`.
pub fn slope_fit(n_spins: u32, k_lo: u64, k_hi: u64, mode: ScanMode) -> Result<SlopeFit> {
    if k_hi <= k_lo + 10 {
        return Err(domain(format!(
            "fit range [{k_lo}, {k_hi}] must span more than 10 values of k"
        )));
    }
    let scan = variance_scan(n_spins, k_hi, mode)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = scan[k_lo as usize..]
        .iter()
        .map(|&(k, v)| (k as f64, v))
        .unzip();
    let (slope, intercept, r_squared) = ols(&xs, &ys)?;
    Ok(SlopeFit {
        n_spins,
        k_lo,
        k_hi,
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(n: u32, tj: u32, k: u64) -> SubspaceIndex {
        SubspaceIndex::new(n, tj, k).unwrap()
    }

    #[test]
    fn moment_examples() {
        assert!((subspace_moment(idx(3, 3, 3), 2).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(subspace_second_moment_trace(idx(3, 3, 3)).unwrap(), 10.0);
        assert_eq!(subspace_moment(idx(7, 3, 9), 1).unwrap(), 0.0);
        assert!((subspace_moment(idx(1, 1, 9), 4).unwrap() - 81.0).abs() < 1e-10);
        assert!(subspace_moment(idx(3, 3, 3), 0).is_err());
        assert!(subspace_moment(idx(3, 3, 3), 13).is_err());
        assert!(subspace_moment(idx(3, 1, 0), 2).is_err());
    }

    #[test]
    fn closed_form_variance_examples() {
        assert_eq!(subspace_variance_closed_form(idx(1, 1, 1)).unwrap(), 1.0);
        assert_eq!(subspace_variance_closed_form(idx(3, 3, 3)).unwrap(), 10.0);
        for k in 1..30 {
            assert_eq!(
                subspace_variance_closed_form(idx(3, 1, k)).unwrap(),
                (k - 1) as f64
            );
        }
        assert!(subspace_variance_closed_form(idx(3, 1, 0)).is_err());
    }

    #[test]
    fn closed_trace_matches_sum() {
        for n in 1..=12u32 {
            for tj in crate::subspace::allowed_twice_j(n) {
                for k in 0..40 {
                    let i = idx(n, tj, k);
                    assert_eq!(trace_sq_closed(i), i.trace_sq(), "{n} {tj} {k}");
                }
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let b = pf_bounds(idx(3, 3, 3));
        assert!((b.pf_lower - 3f64.sqrt()).abs() < 1e-15);
        assert!((b.asymptotic_upper - 6.0).abs() < 1e-12);
        assert_eq!(b.regime, BoundRegime::General);
        let b = pf_bounds(idx(3, 3, 2));
        assert!((b.pf_upper - (6f64.sqrt() + 2.0)).abs() < 1e-12);
        let b = pf_bounds(idx(1, 1, 7));
        assert_eq!(b.pf_lower, b.pf_upper);
        assert!((b.pf_lower - 7f64.sqrt()).abs() < 1e-15);
        let b = pf_bounds(idx(2, 0, 7));
        assert_eq!((b.pf_lower, b.pf_upper), (0.0, 0.0));
    }

    #[test]
    fn regimes_switch_at_tenfold() {
        assert_eq!(
            pf_bounds(idx(2, 2, 30)).regime,
            BoundRegime::LargeExcitation
        );
        assert_eq!(
            pf_bounds(idx(40, 40, 2)).regime,
            BoundRegime::SmallExcitation
        );
    }

    #[test]
    fn rwa_examples() {
        let p = PhysicalParams::from_ratio(500.0).unwrap();
        assert!(rwa_check(20, 5, p, DEFAULT_RWA_THRESHOLD).unwrap().valid);
        let p = PhysicalParams::from_ratio(100.0).unwrap();
        let r = rwa_check(20, 40, p, DEFAULT_RWA_THRESHOLD).unwrap();
        assert!(!r.valid && r.ratio > 0.5);
        let r = rwa_check(20, 0, p, DEFAULT_RWA_THRESHOLD).unwrap();
        assert_eq!(r.max_shift, 0.0);
        assert!(r.valid);
        assert!(rwa_check(20, 0, p, 0.0).is_err());
    }

    #[test]
    fn aggregated_examples() {
        for k in 3..20 {
            let r = aggregated_moment(3, k, 2).unwrap();
            assert!((r.moments[&2] - 3.0 * (k - 1) as f64).abs() < 1e-12);
            assert_eq!(r.state_count, BigUint::from(8u32));
        }
        assert_eq!(aggregated_moment(10, 7, 3).unwrap().moments[&3], 0.0);
        assert!(aggregated_moment(10, 7, 14).is_err());
    }

    #[test]
    fn scan_examples() {
        let s = variance_scan(3, 10, ScanMode::Full).unwrap();
        assert_eq!(s.len(), 11);
        assert!((s[5].1 - 12.0).abs() < 1e-12);
        assert_eq!(variance_scan(2, 0, ScanMode::Full).unwrap(), vec![(0, 0.0)]);
    }

    #[test]
    fn slope_examples() {
        let f = slope_fit(3, 3, 50, ScanMode::Full).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-10);
        assert!((f.intercept + 3.0).abs() < 1e-8);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(slope_fit(3, 3, 13, ScanMode::Full).is_err());
    }

    #[test]
    fn ols_shift_invariant() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x * x - x).collect();
        let shifted: Vec<f64> = ys.iter().map(|y| y + 17.5).collect();
        let a = ols(&xs, &ys).unwrap();
        let b = ols(&xs, &shifted).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12);
        assert!((b.1 - a.1 - 17.5).abs() < 1e-10);
    }
}
