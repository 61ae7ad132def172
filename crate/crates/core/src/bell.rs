//! Partial Bell polynomials, the combinatorial core of the higher chain rule.

use crate::error::Error;
use crate::Result;

/// Ordinary binomial coefficient as f64.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Partial Bell polynomial `B_{n,k}(u_1, ..., u_{n-k+1})` by the recurrence
/// `B_{n,k} = Σ_j C(n-1, j-1) u_j B_{n-j,k-1}`.
pub fn bell(n: usize, k: usize, u: &[f64]) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::IndexError(format!("bell requires 1 ≤ k ≤ n, got n={n}, k={k}")));
    }
    if u.len() < n - k + 1 {
        return Err(Error::IndexError(format!(
            "bell(n={n}, k={k}) needs {} jet values, got {}",
            n - k + 1,
            u.len()
        )));
    }
    Ok(table(n, u)[n][k])
}

/// Full table `B_{m,j}` for `m ≤ n`, `j ≤ m`.
pub fn table(n: usize, u: &[f64]) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    t[0][0] = 1.0;
    for m in 1..=n {
        for j in 1..=m {
            let mut acc = 0.0;
            for i in 1..=m - j + 1 {
                if i <= u.len() {
                    acc += binomial((m - 1) as u64, (i - 1) as u64) * u[i - 1] * t[m - i][j - 1];
                }
            }
            t[m][j] = acc;
        }
    }
    t
}

/// Precomputed table of partial Bell polynomial values at fixed jet values.
#[derive(Clone, Debug)]
pub struct BellTable {
    pub n_max: usize,
    pub values: Vec<Vec<f64>>,
}

impl BellTable {
    pub fn new(n_max: usize, u: &[f64]) -> Self {
        BellTable { n_max, values: table(n_max, u) }
    }

    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.values[n][k]
    }
}
