//! Index arithmetic for the `(j, k)` decomposition and the Lamb-shift
//! coupling matrices.
//!
//! A block is addressed by `(N, 2j, k)`. Its basis pairs the spin ladder
//! state `|j, -j + β⟩` with `k - k0(j) - β` photons, where `k0(j) = N/2 - j`
//! is the excitation count of the block's lowest state. Consecutive basis
//! states are coupled by
//!
//! ```text
//! l_α(j, k)² = (2αj − α(α−1)) · (k − k0(j) − α + 1),   α = 1..dim−1
//! ```
//!
//! which is an integer once `j` is written as `2j / 2`:
//! `α · (2j − α + 1) · (k' − α + 1)` with `k' = k − k0(j)`.

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};

/// One `(N, j, k)` block of the direct sum, with `j` stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubspaceIndex {
    n_spins: u32,
    twice_j: u32,
    k: u64,
}

impl SubspaceIndex {
    pub fn new(n_spins: u32, twice_j: u32, k: u64) -> Result<Self> {
        if n_spins == 0 {
            return Err(domain("number of spins must be positive"));
        }
        if twice_j > n_spins || !(n_spins - twice_j).is_multiple_of(2) {
            return Err(Error::InvalidIndex { n_spins, twice_j });
        }
        Ok(Self {
            n_spins,
            twice_j,
            k,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn j(&self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    /// Same `(N, j)` at a different excitation number.
    pub fn with_k(&self, k: u64) -> Self {
        Self { k, ..*self }
    }

    /// Excitations carried by the lowest state of the `j` ladder, `N/2 − j`.
    pub fn k0(&self) -> u64 {
        u64::from((self.n_spins - self.twice_j) / 2)
    }

    /// `k' = k − k0(j)`, or `None` when the block is empty.
    pub fn excess(&self) -> Option<u64> {
        self.k.checked_sub(self.k0())
    }

    /// `|B_{j,k}| = min(2j + 1, k − k0 + 1)`; zero when `k < k0`.
    pub fn basis_dim(&self) -> usize {
        match self.excess() {
            None => 0,
            Some(kp) => (u64::from(self.twice_j) + 1).min(kp + 1) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.basis_dim() == 0
    }

    /// `l_α²` as an exact integer.
    pub fn coupling_element_sq(&self, alpha: usize) -> Result<u128> {
        let dim = self.basis_dim();
        if alpha == 0 || alpha >= dim {
            return Err(Error::IndexOutOfRange {
                alpha,
                max: dim.saturating_sub(1),
            });
        }
        Ok(self.coupling_sq_unchecked(alpha as u128))
    }

    pub fn coupling_element(&self, alpha: usize) -> Result<f64> {
        self.coupling_element_sq(alpha).map(|sq| (sq as f64).sqrt())
    }

    // alpha in 1..dim, so every factor is positive.
    fn coupling_sq_unchecked(&self, alpha: u128) -> u128 {
        let twice_j = u128::from(self.twice_j);
        let kp = u128::from(self.excess().unwrap_or(0));
        alpha * (twice_j + 1 - alpha) * (kp + 1 - alpha)
    }

    /// `Tr L(j,k)² = 2 Σ l_α²`, exact.
    pub fn trace_sq(&self) -> u128 {
        let dim = self.basis_dim() as u128;
        (1..dim).map(|a| 2 * self.coupling_sq_unchecked(a)).sum()
    }
}

/// Allowed values of `2j` for `N` spins in ascending order: `N mod 2, …, N`.
pub fn allowed_twice_j(n_spins: u32) -> impl Iterator<Item = u32> + Clone {
    (n_spins % 2..=n_spins).step_by(2)
}

/// Non-empty blocks at excitation `k`, ascending in `j`.
pub fn nonempty_subspaces(n_spins: u32, k: u64) -> impl Iterator<Item = SubspaceIndex> {
    allowed_twice_j(n_spins)
        .map(move |twice_j| SubspaceIndex {
            n_spins,
            twice_j,
            k,
        })
        .filter(|idx| !idx.is_empty())
}

/// The hollow symmetric tridiagonal matrix `L(j, k)`, kept as its
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    index: SubspaceIndex,
    off_diag: Vec<f64>,
}

impl CouplingMatrix {
    pub fn build(index: SubspaceIndex) -> Result<Self> {
        let dim = index.basis_dim();
        if dim == 0 {
            return Err(Error::EmptySubspace {
                n_spins: index.n_spins,
                twice_j: index.twice_j,
                k: index.k,
            });
        }
        let off_diag = (1..dim as u128)
            .map(|a| (index.coupling_sq_unchecked(a) as f64).sqrt())
            .collect();
        Ok(Self { index, off_diag })
    }

    pub fn index(&self) -> SubspaceIndex {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.off_diag.len() + 1
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off_diag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, &l) in self.off_diag.iter().enumerate() {
            m[(i, i + 1)] = l;
            m[(i + 1, i)] = l;
        }
        m
    }
}

/// Resonant cavity/spin frequency and single-spin coupling, in the same
/// angular-frequency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    omega0: f64,
    g0: f64,
}

impl PhysicalParams {
    pub fn new(omega0: f64, g0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(domain(format!("omega0 must be positive, got {omega0}")));
        }
        if !(g0.is_finite() && g0 > 0.0) {
            return Err(domain(format!("g0 must be positive, got {g0}")));
        }
        Ok(Self { omega0, g0 })
    }

    /// `g0 = 1`, `omega0 = ratio`.
    pub fn from_ratio(omega_over_g: f64) -> Result<Self> {
        Self::new(omega_over_g, 1.0)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn omega_over_g(&self) -> f64 {
        self.omega0 / self.g0
    }

    /// Collectively enhanced coupling `g0 √N`.
    pub fn g_eff(&self, n_spins: u32) -> f64 {
        self.g0 * f64::from(n_spins).sqrt()
    }
}
