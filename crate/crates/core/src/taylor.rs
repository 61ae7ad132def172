//! Bridge between the Taylor expansion of `c = S₀⁻¹(f) ∘ g` and the
//! h-deformed flow operator: the `a_k` series built from partial Bell
//! polynomials of the jet of `g`, the logarithmic time change, and the
//! order-by-order comparison of both sides.

use serde::Serialize;

use crate::bell;
use crate::error::Error;
use crate::fio::Diffeo;
use crate::hseries::HSeries;
use crate::jet::HJetSeries;
use crate::scalar::C64;
use crate::symbol::Symbol;
use crate::trig::{grid_points, refit_vec, TrigVec, TAU};
use crate::Result;

/// `a_k = Σ_{n ≥ k} h^{n-k}/n! · B_{n,k}(u_1(x₀), …)`, truncated at
/// `h^{N-k}`, with `u_i` the exact `i`-th derivative of `g` at `x₀`.
/// Index 0 holds the constant series `a_0 = 1`.
pub fn a_coeffs(g: &Diffeo, x0: f64, n: usize) -> Vec<HJetSeries> {
    let u = g.jet_at(x0, n.max(1));
    let mut out = Vec::with_capacity(n + 1);
    out.push(HJetSeries::one(n));
    let mut fact = 1.0;
    let mut facts = vec![1.0; n + 1];
    for (i, f) in facts.iter_mut().enumerate().skip(1) {
        fact *= i as f64;
        *f = fact;
    }
    for k in 1..=n {
        let mut a = HJetSeries::zero(n - k);
        for m in k..=n {
            let b = bell::bell(m, k, &u).expect("valid Bell indices");
            a.coeffs[m - k] = C64::new(b / facts[m], 0.0);
        }
        out.push(a);
    }
    out
}

fn x_series_mul(a: &[HJetSeries], b: &[HJetSeries], n: usize, h_order: usize) -> Vec<HJetSeries> {
    let mut out = vec![HJetSeries::zero(h_order); n + 1];
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if ai.max_abs() == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > n {
                break;
            }
            out[i + j] = out[i + j].add(&ai.mul(bj)).truncate(h_order);
        }
    }
    out
}

/// Time change: `t_n` is the `Xⁿ` coefficient of `log(Σ a_k Xᵏ)`.
/// Index 0 of the result is zero.
pub fn time_change(a: &[HJetSeries]) -> Result<Vec<HJetSeries>> {
    let n = a.len() - 1;
    let h_order = a.iter().map(|s| s.order()).max().unwrap_or(0);
    if (a[0].coeff(0) - C64::new(1.0, 0.0)).norm() > 1e-12 || a[0].max_abs() > 1.0 + 1e-12 {
        return Err(Error::NonUnitConstantTerm);
    }
    // R = Σ_{k≥1} a_k X^k; log(1+R) = Σ (-1)^{j+1} R^j / j
    let mut r: Vec<HJetSeries> = a.iter().map(|s| s.truncate(h_order)).collect();
    r[0] = HJetSeries::zero(h_order);
    r.resize(n + 1, HJetSeries::zero(h_order));
    let mut out = vec![HJetSeries::zero(h_order); n + 1];
    let mut pow = r.clone();
    for j in 1..=n {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        for (slot, p) in out.iter_mut().zip(&pow) {
            *slot = slot.add(&p.scale(C64::new(sign / j as f64, 0.0)));
        }
        if j < n {
            pow = x_series_mul(&pow, &r, n, h_order);
        }
    }
    Ok(out)
}

/// Inverse of [`time_change`]: `a_k` from `exp(Σ t_n Xⁿ)`.
pub fn times_to_a(t: &[HJetSeries]) -> Vec<HJetSeries> {
    let n = t.len() - 1;
    let h_order = t.iter().map(|s| s.order()).max().unwrap_or(0);
    let mut r: Vec<HJetSeries> = t.iter().map(|s| s.truncate(h_order)).collect();
    r[0] = HJetSeries::zero(h_order);
    let mut out = vec![HJetSeries::zero(h_order); n + 1];
    out[0] = HJetSeries::one(h_order);
    let mut pow = out.clone();
    let mut fact = 1.0;
    for j in 1..=n {
        pow = x_series_mul(&pow, &r, n, h_order);
        fact *= j as f64;
        for (slot, p) in out.iter_mut().zip(&pow) {
            *slot = slot.add(&p.scale(C64::new(1.0 / fact, 0.0)));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderDiff {
    pub n: usize,
    pub lhs: Vec<(f64, f64)>,
    pub rhs: Vec<(f64, f64)>,
    pub abs_diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaylorReport {
    pub orders: Vec<OrderDiff>,
    pub refit_residual: f64,
}

impl TaylorReport {
    pub fn max_diff(&self) -> f64 {
        self.orders.iter().map(|o| o.abs_diff).fold(0.0, f64::max)
    }
}

/// Order-by-order comparison of the Taylor expansion of `c = S₀⁻¹(f)∘g`
/// at `x₀` against the flow-operator side evaluated at the changed times.
///
/// `k_modes` is the refit cap for the composition on the left side; the
/// smoothing tail of the general case shrinks as it grows.
pub fn verify_taylor_theorem(
    s0: &Symbol<C64>,
    g: &Diffeo,
    f: &TrigVec<C64>,
    x0: f64,
    n: usize,
    k_modes: usize,
) -> Result<TaylorReport> {
    if s0.top_order() != Some(0) {
        return Err(Error::NotAUnit("S₀ must be a unit at order 0".into()));
    }
    let dim = s0.dim;
    if f.dim != dim {
        return Err(Error::DimensionMismatch(f.dim, dim));
    }
    let s0_inv = s0.invert()?;
    let u_func = s0_inv.apply(f)?;
    let gx0 = g.eval(x0).rem_euclid(TAU);

    // left side: compose on a grid, refit, differentiate exactly
    let cap = k_modes.max(1);
    let grid = grid_points(4 * cap + 1);
    let samples: Vec<Vec<C64>> = grid
        .iter()
        .map(|&x| u_func.eval(g.eval(x).rem_euclid(TAU)))
        .collect();
    let c_poly = refit_vec(&samples, dim, cap, f.hard_cap.max(s0.hard_cap));
    let refit_residual = crate::trig::refit_residual_vec(&c_poly, &samples, &grid);
    let mut lhs = Vec::with_capacity(n + 1);
    let mut dc = c_poly.clone();
    let mut fact = 1.0;
    for j in 0..=n {
        if j > 0 {
            dc = dc.derivative();
            fact *= j as f64;
        }
        let v = dc.eval(x0);
        lhs.push(v.into_iter().map(|z| z / fact).collect::<Vec<_>>());
    }

    // right side: times from the jet of g, with the dressing moved through
    // the exponential first — S₀⁻¹·exp(Σ tₙ L₀ⁿ) = exp(Σ tₙ (h∂)ⁿ)·S₀⁻¹
    // exactly, and the transported form is a constant-coefficient
    // differential exponential, exact in the truncated algebra; realizing
    // the factors of the untransported product separately instead only
    // agrees asymptotically at low modes
    let times = time_change(&a_coeffs(g, x0, n))?;
    let dx = Symbol::dx(dim, s0.floor, s0.hard_cap);
    let mut exponent = HSeries::zero(n, dim, s0.floor, s0.hard_cap);
    let mut d_pow = Symbol::identity(dim, s0.floor, s0.hard_cap);
    for (flow, t_n) in times.iter().enumerate().skip(1) {
        if flow > n {
            break;
        }
        d_pow = d_pow.compose(&dx)?;
        for j in flow..=n {
            let c = t_n.coeff(j - flow);
            if c.norm() == 0.0 {
                continue;
            }
            let term = exponent.terms[j].add(&d_pow.scale(c))?;
            exponent.terms[j] = term;
        }
    }
    let w_h = exponent.hexp()?;
    let mut rhs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        // the transported operator is purely differential, so its action on
        // S₀⁻¹f realizes exactly — the same S₀⁻¹f the left side expands
        rhs.push(w_h.terms[j].apply(&u_func)?.eval(gx0));
    }

    let orders = (0..=n)
        .map(|j| {
            let abs_diff = lhs[j]
                .iter()
                .zip(&rhs[j])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            OrderDiff {
                n: j,
                lhs: lhs[j].iter().map(|z| (z.re, z.im)).collect(),
                rhs: rhs[j].iter().map(|z| (z.re, z.im)).collect(),
                abs_diff,
            }
        })
        .collect();
    Ok(TaylorReport { orders, refit_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    /// `d t_n/dε` at ε = 0, evaluated at h = 0, for n = 1..N.
    pub slopes: Vec<(f64, f64)>,
    /// Richardson convergence-order fit per time; `NaN` when the slope
    /// sequence is already exact to rounding.
    pub fit_orders: Vec<f64>,
}

/// Finite-difference smoothness probe of `ε ↦ t_n(g_ε)` — the one place
/// finite differences are allowed, as an oracle external to the exact
/// mode-data derivatives used everywhere else.
pub fn times_smoothness_probe<F>(family: F, x0: f64, n: usize) -> Result<SmoothnessReport>
where
    F: Fn(f64) -> Result<Diffeo>,
{
    let t_at = |eps: f64| -> Result<Vec<C64>> {
        let g = family(eps)?;
        let t = time_change(&a_coeffs(&g, x0, n))?;
        Ok(t.iter().skip(1).map(|s| s.coeff(0)).collect())
    };
    let slope = |e: f64| -> Result<Vec<C64>> {
        let plus = t_at(e)?;
        let minus = t_at(-e)?;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / C64::new(2.0 * e, 0.0))
            .collect())
    };
    let e0 = 1e-2;
    let d1 = slope(e0)?;
    let d2 = slope(e0 / 2.0)?;
    let d3 = slope(e0 / 4.0)?;
    let mut fit_orders = Vec::with_capacity(n);
    for i in 0..n {
        let g1 = (d1[i] - d2[i]).norm();
        let g2 = (d2[i] - d3[i]).norm();
        fit_orders.push(if g2 < 1e-13 { f64::NAN } else { (g1 / g2).log2() });
    }
    Ok(SmoothnessReport {
        slopes: d3.into_iter().map(|z| (z.re, z.im)).collect(),
        fit_orders,
    })
}
