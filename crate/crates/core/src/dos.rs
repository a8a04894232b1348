//! Broadened density of states over the excitation manifolds `k ≤ k_max`.
//!
//! Every eigenvalue `λ` of every non-empty block sits at `E = k + λ g0/ω0`
//! (energies in units of `ω0`) with weight `d_j`. Each delta is spread by a
//! Gaussian of width `σ`, cut at `±8σ` and renormalized to unit mass.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use statrs::function::erf::erf;

use crate::degeneracy::{states_with_k_excitations, DegeneracyTable};
use crate::error::{domain, Result};
use crate::export::{fmt_g17, Json};
use crate::stats::max_lamb_shift;
use crate::subspace::{nonempty_subspaces, CouplingMatrix, PhysicalParams};
use crate::tridiag::hollow_eigenvalues;

/// Kernel half-width in units of `σ`.
pub const KERNEL_CUTOFF: f64 = 8.0;

pub const MIN_BINS: usize = 10;

pub const DEFAULT_BINS: usize = 2000;

/// Broadening in units of `ω0`.
pub const DEFAULT_SIGMA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DosHistogram {
    pub n_spins: u32,
    pub k_max: u64,
    pub params: PhysicalParams,
    /// `bins + 1` ascending edges, units of `ω0`.
    pub bin_edges: Vec<f64>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

impl DosHistogram {
    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center,weight\n");
        for (c, w) in self.bin_centers().into_iter().zip(&self.weights) {
            out.push_str(&fmt_g17(c));
            out.push(',');
            out.push_str(&fmt_g17(*w));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Json {
        let bins: Vec<Json> = self
            .bin_centers()
            .into_iter()
            .zip(&self.weights)
            .map(|(c, &w)| Json::object().with("center", c).with("weight", w))
            .collect();
        Json::object()
            .with("n", self.n_spins)
            .with("k_max", self.k_max)
            .with("omega_over_g", self.params.omega_over_g())
            .with("sigma", self.sigma)
            .with("bins", Json::Array(bins))
    }
}

/// `Σ_{k ≤ k_max} D_k` as a real.
pub fn expected_mass(n_spins: u32, k_max: u64) -> f64 {
    (0..=k_max)
        .map(|k| {
            states_with_k_excitations(n_spins, k)
                .to_f64()
                .unwrap_or(f64::INFINITY)
        })
        .sum()
}

/// `(energy, weight)` for all deltas of manifold `k`, ascending in `j`.
fn cluster_deltas(n_spins: u32, k: u64, scale: f64, d: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for idx in nonempty_subspaces(n_spins, k) {
        let w = d[(idx.twice_j() / 2) as usize];
        let m = CouplingMatrix::build(idx).expect("non-empty");
        for lambda in hollow_eigenvalues(m.off_diag()) {
            out.push((k as f64 + lambda * scale, w));
        }
    }
    out
}

struct Grid {
    lo: f64,
    width: f64,
    bins: usize,
}

impl Grid {
    fn edge(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.width
    }

    fn bin_of(&self, e: f64) -> usize {
        let i = ((e - self.lo) / self.width).floor();
        (i.max(0.0) as usize).min(self.bins - 1)
    }
}

/// Smear one cluster's deltas into a partial histogram starting at bin `first`.
fn deposit(grid: &Grid, deltas: &[(f64, f64)], sigma: f64) -> (usize, Vec<f64>) {
    if deltas.is_empty() {
        return (0, Vec::new());
    }
    let reach = KERNEL_CUTOFF * sigma;
    let e_min = deltas.iter().map(|d| d.0).fold(f64::INFINITY, f64::min);
    let e_max = deltas.iter().map(|d| d.0).fold(f64::NEG_INFINITY, f64::max);
    let first = grid.bin_of(e_min - reach);
    let last = grid.bin_of(e_max + reach);
    let mut part = vec![0.0; last - first + 1];
    let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
    let mut kernel = Vec::new();
    for &(e, w) in deltas {
        let a = grid.bin_of(e - reach);
        let b = grid.bin_of(e + reach);
        kernel.clear();
        let mut prev = erf((grid.edge(a) - e) * scale);
        for i in a..=b {
            let next = erf((grid.edge(i + 1) - e) * scale);
            kernel.push(0.5 * (next - prev));
            prev = next;
        }
        let total: f64 = kernel.iter().sum();
        for (off, m) in kernel.iter().enumerate() {
            part[a + off - first] += w * m / total;
        }
    }
    (first, part)
}

pub fn build_dos(
    n_spins: u32,
    k_max: u64,
    params: PhysicalParams,
    bins: usize,
    sigma: f64,
) -> Result<DosHistogram> {
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    if bins < MIN_BINS {
        return Err(domain(format!("need at least {MIN_BINS} bins, got {bins}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(domain(format!("broadening must be positive, got {sigma}")));
    }
    let table = DegeneracyTable::new(n_spins);
    let d: Vec<f64> = table.entries().iter().map(|e| e.log_count.exp()).collect();
    if d.iter().any(|w| !w.is_finite()) {
        return Err(domain(format!(
            "degeneracies of {n_spins} spins overflow doubles"
        )));
    }
    let d: Vec<f64> = table
        .entries()
        .iter()
        .zip(d)
        .map(|(e, w)| e.exact_count.as_ref().map_or(w, |c| c.to_f64().unwrap()))
        .collect();
    let scale = 1.0 / params.omega_over_g();

    let clusters: Vec<Vec<(f64, f64)>> = (0..=k_max)
        .into_par_iter()
        .map(|k| cluster_deltas(n_spins, k, scale, &d))
        .collect();
    let (e_min, e_max) = clusters
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(e, _)| {
            (lo.min(e), hi.max(e))
        });
    let lo = e_min - KERNEL_CUTOFF * sigma;
    let hi = e_max + KERNEL_CUTOFF * sigma;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(domain("empty energy range"));
    }
    let grid = Grid {
        lo,
        width: (hi - lo) / bins as f64,
        bins,
    };

    let partials: Vec<(usize, Vec<f64>)> = clusters
        .par_iter()
        .map(|c| deposit(&grid, c, sigma))
        .collect();
    let mut weights = vec![0.0; bins];
    for (first, part) in partials {
        for (i, w) in part.into_iter().enumerate() {
            weights[first + i] += w;
        }
    }
    let bin_edges = (0..=bins).map(|i| grid.edge(i)).collect();
    Ok(DosHistogram {
        n_spins,
        k_max,
        params,
        bin_edges,
        weights,
        sigma,
    })
}

/// Separation between neighbouring clusters in units of `ω0`:
/// `gap(k) = 1 − (maxΛ(k) + maxΛ(k+1)) g0/ω0` for `k < k_max`.
/// Negative values mean the clusters overlap.
pub fn cluster_gaps(n_spins: u32, k_max: u64, params: PhysicalParams) -> Result<Vec<(u64, f64)>> {
    if n_spins == 0 {
        return Err(domain("number of spins must be positive"));
    }
    if k_max < 1 {
        return Err(domain("cluster gaps need k_max ≥ 1"));
    }
    let scale = 1.0 / params.omega_over_g();
    let top: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| max_lamb_shift(n_spins, k))
        .collect();
    Ok((0..k_max)
        .map(|k| (k, 1.0 - (top[k as usize] + top[k as usize + 1]) * scale))
        .collect())
}
