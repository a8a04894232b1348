//! Reference spectra for testing: closed forms for one to three spins, and a
//! dense diagonalization of the interaction on a whole `k` manifold in the
//! product (Zeeman) basis.

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

use crate::degeneracy::degeneracy;
use crate::error::{domain, Error, Result};
use crate::subspace::{nonempty_subspaces, CouplingMatrix, SubspaceIndex};
use crate::tridiag::hollow_eigenvalues;

/// Largest spin count the dense path accepts.
pub const DENSE_LIMIT: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub twice_j: u32,
    pub multiplicity: u64,
    /// Ascending, units of `g0`.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub n_spins: u32,
    pub k: u64,
    /// Non-empty blocks only, descending in `j`.
    pub entries: Vec<OracleEntry>,
}

impl OracleSpectrum {
    /// Every eigenvalue repeated by its multiplicity, ascending.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| {
                e.eigenvalues
                    .iter()
                    .flat_map(move |&x| std::iter::repeat_n(x, e.multiplicity as usize))
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn entry(&self, twice_j: u32) -> Option<&OracleEntry> {
        self.entries.iter().find(|e| e.twice_j == twice_j)
    }
}

fn entry(twice_j: u32, multiplicity: u64, mut eigenvalues: Vec<f64>) -> OracleEntry {
    eigenvalues.sort_by(f64::total_cmp);
    OracleEntry {
        twice_j,
        multiplicity,
        eigenvalues,
    }
}

fn pm(x: f64) -> [f64; 2] {
    [-x, x]
}

/// One spin: `{0}` at `k = 0`, `{±√k}` otherwise.
pub fn oracle_n1(k: u64) -> OracleSpectrum {
    let e = if k == 0 {
        entry(1, 1, vec![0.0])
    } else {
        entry(1, 1, pm((k as f64).sqrt()).to_vec())
    };
    OracleSpectrum {
        n_spins: 1,
        k,
        entries: vec![e],
    }
}

/// Two spins: triplet `{0, ±√2 √(2k−1)}` (truncated at low `k`) and a
/// singlet `{0}` from `k = 1`.
pub fn oracle_n2(k: u64) -> OracleSpectrum {
    let kf = k as f64;
    let mut entries = Vec::new();
    entries.push(match k {
        0 => entry(2, 1, vec![0.0]),
        1 => entry(2, 1, pm(2f64.sqrt()).to_vec()),
        _ => {
            let [a, b] = pm(2f64.sqrt() * (2.0 * kf - 1.0).sqrt());
            entry(2, 1, vec![a, 0.0, b])
        }
    });
    if k >= 1 {
        entries.push(entry(0, 1, vec![0.0]));
    }
    OracleSpectrum {
        n_spins: 2,
        k,
        entries,
    }
}

/// Three spins: the symmetric quartet and two `j = 1/2` doublets.
pub fn oracle_n3(k: u64) -> OracleSpectrum {
    let kf = k as f64;
    let mut entries = Vec::new();
    entries.push(match k {
        0 => entry(3, 1, vec![0.0]),
        1 => entry(3, 1, pm(3f64.sqrt()).to_vec()),
        2 => {
            let [a, b] = pm(10f64.sqrt());
            entry(3, 1, vec![a, 0.0, b])
        }
        _ => {
            let root = (16.0 * kf * kf - 32.0 * kf + 25.0).sqrt();
            let inner = (5.0 * kf - 5.0 - root).sqrt();
            let outer = (5.0 * kf - 5.0 + root).sqrt();
            entry(3, 1, vec![-outer, -inner, inner, outer])
        }
    });
    match k {
        0 => {}
        1 => entries.push(entry(1, 2, vec![0.0])),
        _ => entries.push(entry(1, 2, pm((kf - 1.0).sqrt()).to_vec())),
    }
    OracleSpectrum {
        n_spins: 3,
        k,
        entries,
    }
}

/// Product basis of the `k` manifold: spin bitmask (bit set = excited) with
/// `k − popcount` photons.
pub struct ManifoldBasis {
    pub n_spins: u32,
    pub k: u64,
    pub states: Vec<u32>,
    lookup: Vec<usize>,
}

impl ManifoldBasis {
    pub fn new(n_spins: u32, k: u64) -> Result<Self> {
        if n_spins == 0 {
            return Err(domain("number of spins must be positive"));
        }
        if n_spins > DENSE_LIMIT {
            return Err(Error::TooLarge(n_spins));
        }
        let states: Vec<u32> = (0..1u32 << n_spins)
            .filter(|s| u64::from(s.count_ones()) <= k)
            .collect();
        let mut lookup = vec![usize::MAX; 1 << n_spins];
        for (i, &s) in states.iter().enumerate() {
            lookup[s as usize] = i;
        }
        Ok(Self {
            n_spins,
            k,
            states,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, spins: u32) -> Option<usize> {
        self.lookup
            .get(spins as usize)
            .copied()
            .filter(|&i| i != usize::MAX)
    }

    pub fn photons(&self, spins: u32) -> u64 {
        self.k - u64::from(spins.count_ones())
    }
}

/// Interaction `Σ_i (a σ_i⁺ + a† σ_i⁻)` in units of `g0` on the `k` manifold.
pub fn manifold_matrix(basis: &ManifoldBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let mut h = DMatrix::zeros(n, n);
    for (col, &s) in basis.states.iter().enumerate() {
        let photons = basis.photons(s);
        if photons == 0 {
            continue;
        }
        let amp = (photons as f64).sqrt();
        for i in 0..basis.n_spins {
            if s & (1 << i) == 0 {
                let row = basis.index_of(s | (1 << i)).expect("in manifold");
                h[(row, col)] = amp;
                h[(col, row)] = amp;
            }
        }
    }
    h
}

/// All eigenvalues of the `k` manifold by dense diagonalization, ascending.
pub fn dense_oracle(n_spins: u32, k: u64) -> Result<Vec<f64>> {
    let basis = ManifoldBasis::new(n_spins, k)?;
    let mut ev: Vec<f64> = manifold_matrix(&basis)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// The block spectra of manifold `k`, each repeated `d_j` times, ascending.
pub fn direct_sum_spectrum(n_spins: u32, k: u64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for idx in nonempty_subspaces(n_spins, k) {
        let d = degeneracy(n_spins, idx.twice_j())?
            .to_usize()
            .ok_or(Error::TooLarge(n_spins))?;
        let m = CouplingMatrix::build(idx)?;
        for x in hollow_eigenvalues(m.off_diag()) {
            out.extend(std::iter::repeat_n(x, d));
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Largest elementwise gap between the dense manifold spectrum and the
/// direct sum of block spectra.
pub fn direct_sum_discrepancy(n_spins: u32, k: u64) -> Result<f64> {
    let dense = dense_oracle(n_spins, k)?;
    let blocks = direct_sum_spectrum(n_spins, k)?;
    if dense.len() != blocks.len() {
        return Err(domain(format!(
            "manifold has {} states but the blocks hold {}",
            dense.len(),
            blocks.len()
        )));
    }
    Ok(dense
        .iter()
        .zip(&blocks)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `J⁺ = Σ_i σ_i⁺` on a spin-space vector.
fn raise(n_spins: u32, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for (s, &amp) in v.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        for i in 0..n_spins {
            if s & (1 << i) == 0 {
                out[s | (1 << i)] += amp;
            }
        }
    }
    out
}

/// `|j, −j⟩` built as `(N − 2j)/2` singlets on spin pairs `(0,1), (2,3), …`
/// with the remaining spins unexcited.
pub fn lowest_weight_state(n_spins: u32, twice_j: u32) -> Result<DVector<f64>> {
    SubspaceIndex::new(n_spins, twice_j, 0)?;
    if n_spins > DENSE_LIMIT {
        return Err(Error::TooLarge(n_spins));
    }
    let pairs = (n_spins - twice_j) / 2;
    let mut v = DVector::zeros(1 << n_spins);
    v[0] = 1.0;
    for p in 0..pairs {
        let (a, b) = (1usize << (2 * p), 1usize << (2 * p + 1));
        let mut next = DVector::zeros(v.len());
        for (s, &amp) in v.iter().enumerate() {
            if amp != 0.0 {
                next[s | a] += amp;
                next[s | b] -= amp;
            }
        }
        v = next;
    }
    Ok(v.normalize())
}

/// Builds the block basis `|j, −j+β⟩ ⊗ |k − k0 − β⟩` inside the product basis
/// and returns `max_α |⟨β=α| H |β=α−1⟩ − l_α|`.
pub fn collective_coupling_discrepancy(index: SubspaceIndex) -> Result<f64> {
    let n = index.n_spins();
    let dim = index.basis_dim();
    if dim == 0 {
        return Err(Error::EmptySubspace {
            n_spins: n,
            twice_j: index.twice_j(),
            k: index.k(),
        });
    }
    let basis = ManifoldBasis::new(n, index.k())?;
    let h = manifold_matrix(&basis);
    let mut spin = lowest_weight_state(n, index.twice_j())?;
    let mut embedded = Vec::with_capacity(dim);
    for beta in 0..dim {
        if beta > 0 {
            spin = raise(n, &spin).normalize();
        }
        let mut u = DVector::zeros(basis.dim());
        for (s, &amp) in spin.iter().enumerate() {
            if amp != 0.0 {
                let i = basis.index_of(s as u32).expect("in manifold");
                u[i] = amp;
            }
        }
        embedded.push(u);
    }
    let mut worst: f64 = 0.0;
    for alpha in 1..dim {
        let element = embedded[alpha].dot(&(&h * &embedded[alpha - 1]));
        worst = worst.max((element - index.coupling_element(alpha)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn n1_examples() {
        assert_eq!(oracle_n1(1).all_eigenvalues(), vec![-1.0, 1.0]);
        assert_eq!(oracle_n1(0).all_eigenvalues(), vec![0.0]);
        assert_eq!(oracle_n1(9).all_eigenvalues(), vec![-3.0, 3.0]);
    }

    #[test]
    fn n2_examples() {
        let s2 = 2f64.sqrt();
        assert!(close(
            &oracle_n2(1).all_eigenvalues(),
            &[-s2, 0.0, s2],
            1e-15
        ));
        let s10 = 10f64.sqrt();
        assert!(close(
            &oracle_n2(3).all_eigenvalues(),
            &[-s10, 0.0, 0.0, s10],
            1e-14
        ));
        assert_eq!(oracle_n2(0).all_eigenvalues(), vec![0.0]);
    }

    #[test]
    fn n3_examples() {
        let e = oracle_n3(3);
        let q = &e.entry(3).unwrap().eigenvalues;
        let r = 73f64.sqrt();
        assert!(close(
            q,
            &[
                -(10.0 + r).sqrt(),
                -(10.0 - r).sqrt(),
                (10.0 - r).sqrt(),
                (10.0 + r).sqrt()
            ],
            1e-14
        ));
        let s10 = 10f64.sqrt();
        assert!(close(
            &oracle_n3(2).all_eigenvalues(),
            &[-s10, -1.0, -1.0, 0.0, 1.0, 1.0, s10],
            1e-14
        ));
        let s3 = 3f64.sqrt();
        assert!(close(
            &oracle_n3(1).all_eigenvalues(),
            &[-s3, 0.0, 0.0, s3],
            1e-15
        ));
    }

    #[test]
    fn dense_examples() {
        let d = dense_oracle(3, 3).unwrap();
        assert_eq!(d.len(), 8);
        assert!(close(&d, &oracle_n3(3).all_eigenvalues(), 1e-10));
        let s6 = 6f64.sqrt();
        assert!(close(
            &dense_oracle(2, 2).unwrap(),
            &[-s6, 0.0, 0.0, s6],
            1e-12
        ));
        assert!(close(&dense_oracle(1, 1).unwrap(), &[-1.0, 1.0], 1e-12));
        assert_eq!(dense_oracle(13, 1), Err(Error::TooLarge(13)));
    }

    #[test]
    fn collective_basis_reproduces_couplings() {
        for n in 1..=6u32 {
            for tj in crate::subspace::allowed_twice_j(n) {
                for k in 0..=(n as u64 + 3) {
                    let idx = SubspaceIndex::new(n, tj, k).unwrap();
                    if idx.is_empty() {
                        continue;
                    }
                    let err = collective_coupling_discrepancy(idx).unwrap();
                    assert!(err < 1e-12, "n={n} tj={tj} k={k} err={err}");
                }
            }
        }
    }
}
