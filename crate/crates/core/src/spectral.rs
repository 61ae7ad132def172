//! Dense spectral matrices on the truncated Fourier basis — the numeric
//! oracle representation of every operator in the crate.
//!
//! The basis is `{e^{ikx} e_j : |k| ≤ M, 0 ≤ j < d}` ordered by mode then
//! component; columns are the operator applied to basis elements, truncated
//! back to the cap. Composition maps to matrix products exactly for
//! differential and composition operators and approximately (edge-mode
//! leakage) otherwise.

use nalgebra::DMatrix;

use crate::exec;
use crate::scalar::C64;
use crate::symbol::Symbol;
use crate::trig::TrigVec;
use crate::Result;

/// Dense `(2M+1)d × (2M+1)d` complex matrix of an operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrix {
    pub mode_cap: usize,
    pub dim: usize,
    pub mat: DMatrix<C64>,
}

impl SpectralMatrix {
    pub fn size(mode_cap: usize, dim: usize) -> usize {
        (2 * mode_cap + 1) * dim
    }

    #[inline]
    pub fn index(&self, k: i64, j: usize) -> usize {
        ((k + self.mode_cap as i64) as usize) * self.dim + j
    }

    pub fn identity(mode_cap: usize, dim: usize) -> Self {
        let n = Self::size(mode_cap, dim);
        SpectralMatrix { mode_cap, dim, mat: DMatrix::identity(n, n) }
    }

    /// Build from an operator action, one column per basis element.
    /// Columns are independent, so this runs through the parallel map.
    pub fn from_action<F>(mode_cap: usize, dim: usize, hard_cap: usize, action: F) -> Result<Self>
    where
        F: Fn(&TrigVec<C64>) -> Result<TrigVec<C64>> + Sync + Send,
    {
        let n = Self::size(mode_cap, dim);
        let cols: Vec<Result<Vec<C64>>> = exec::map_indexed(n, |col| {
            let k = (col / dim) as i64 - mode_cap as i64;
            let j = col % dim;
            let basis = TrigVec::basis(dim, k, j, hard_cap);
            let image = action(&basis)?;
            let mut out = vec![C64::new(0.0, 0.0); n];
            for kk in -(mode_cap as i64)..=mode_cap as i64 {
                let coeff = image.coeff(kk);
                for (jj, v) in coeff.iter().enumerate() {
                    out[((kk + mode_cap as i64) as usize) * dim + jj] = *v;
                }
            }
            Ok(out)
        });
        let mut mat = DMatrix::zeros(n, n);
        for (col, data) in cols.into_iter().enumerate() {
            let data = data?;
            for (row, v) in data.into_iter().enumerate() {
                mat[(row, col)] = v;
            }
        }
        Ok(SpectralMatrix { mode_cap, dim, mat })
    }

    /// Sequential variant of [`SpectralMatrix::from_action`], kept for the
    /// bench suite.
    pub fn from_action_seq<F>(mode_cap: usize, dim: usize, hard_cap: usize, action: F) -> Result<Self>
    where
        F: Fn(&TrigVec<C64>) -> Result<TrigVec<C64>>,
    {
        let n = Self::size(mode_cap, dim);
        let mut mat = DMatrix::zeros(n, n);
        for col in 0..n {
            let k = (col / dim) as i64 - mode_cap as i64;
            let j = col % dim;
            let basis = TrigVec::basis(dim, k, j, hard_cap);
            let image = action(&basis)?;
            for kk in -(mode_cap as i64)..=mode_cap as i64 {
                let coeff = image.coeff(kk);
                for (jj, v) in coeff.iter().enumerate() {
                    mat[(((kk + mode_cap as i64) as usize) * dim + jj, col)] = *v;
                }
            }
        }
        Ok(SpectralMatrix { mode_cap, dim, mat })
    }

    pub fn from_symbol(sym: &Symbol<C64>, mode_cap: usize) -> Result<Self> {
        Self::from_action(mode_cap, sym.dim, sym.hard_cap.max(4 * mode_cap), |f| sym.apply(f))
    }

    /// Apply to a truncated function (modes beyond the cap are dropped).
    pub fn apply(&self, f: &TrigVec<C64>) -> TrigVec<C64> {
        let n = Self::size(self.mode_cap, self.dim);
        let mut vin = DMatrix::zeros(n, 1);
        for k in -(self.mode_cap as i64)..=self.mode_cap as i64 {
            for (j, v) in f.coeff(k).iter().enumerate() {
                vin[(self.index(k, j), 0)] = *v;
            }
        }
        let vout = &self.mat * vin;
        let mut out = TrigVec::zeros(self.dim, self.mode_cap, f.hard_cap);
        for k in -(self.mode_cap as i64)..=self.mode_cap as i64 {
            let v = (0..self.dim).map(|j| vout[(self.index(k, j), 0)]).collect();
            out.set_coeff(k, v);
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        SpectralMatrix { mode_cap: self.mode_cap, dim: self.dim, mat: &self.mat * &rhs.mat }
    }

    pub fn sub_norm(&self, rhs: &Self) -> f64 {
        (&self.mat - &rhs.mat).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entry deviation restricted to interior modes `|k| ≤ cap`.
    pub fn interior_gap(&self, rhs: &Self, cap: usize) -> f64 {
        let mut gap: f64 = 0.0;
        for kr in -(cap as i64)..=cap as i64 {
            for kc in -(cap as i64)..=cap as i64 {
                for jr in 0..self.dim {
                    for jc in 0..self.dim {
                        let r = self.index(kr, jr);
                        let c = self.index(kc, jc);
                        gap = gap.max((self.mat[(r, c)] - rhs.mat[(r, c)]).norm());
                    }
                }
            }
        }
        gap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::trig::{MatTrigPoly, DEFAULT_HARD_CAP};

    const HC: usize = DEFAULT_HARD_CAP;

    #[test]
    fn derivative_is_diagonal_ik() {
        let dx = Symbol::dx(1, -3, HC);
        let m = SpectralMatrix::from_symbol(&dx, 4).unwrap();
        for k in -4i64..=4 {
            let idx = m.index(k, 0);
            assert!((m.mat[(idx, idx)] - C64::new(0.0, k as f64)).norm() < 1e-14);
        }
        assert!((m.mat.map(|z| z.norm()).sum() - 2.0 * (1.0 + 2.0 + 3.0 + 4.0)) < 1e-12);
    }

    #[test]
    fn composition_matches_matrix_product_for_differential_ops() {
        let floor = -3;
        let mut r = sample::rng(3);
        let mut a = Symbol::dx(1, floor, HC);
        a.set_comp(0, sample::rand_trig(&mut r, 1, 2, HC, 0.4));
        let mut b = Symbol::zero(1, floor, HC);
        b.set_comp(1, sample::rand_trig(&mut r, 1, 2, HC, 0.4));
        b.set_comp(0, MatTrigPoly::identity(1, HC));
        let cap = 8;
        let ma = SpectralMatrix::from_symbol(&a, cap).unwrap();
        let mb = SpectralMatrix::from_symbol(&b, cap).unwrap();
        let mab = SpectralMatrix::from_symbol(&a.compose(&b).unwrap(), cap).unwrap();
        let gap = mab.interior_gap(&ma.matmul(&mb), cap / 2);
        assert!(gap < 1e-8, "interior gap = {gap}");
    }

    #[test]
    fn parallel_and_sequential_builds_agree() {
        let dx = Symbol::dx(1, -3, HC);
        let a = SpectralMatrix::from_action(4, 1, HC, |f| dx.apply(f)).unwrap();
        let b = SpectralMatrix::from_action_seq(4, 1, HC, |f| dx.apply(f)).unwrap();
        assert_eq!(a, b);
    }
}
