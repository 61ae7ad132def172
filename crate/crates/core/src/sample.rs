//! Seeded random instances for tests, sweeps, and benches.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hseries::HSeries;
use crate::scalar::C64;
use crate::symbol::Symbol;
use crate::trig::{Mat, MatTrigPoly, TrigVec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real-valued matrix trigonometric polynomial with modes `|k| ≤ m`.
pub fn rand_trig(r: &mut ChaCha8Rng, d: usize, m: usize, hard_cap: usize, amp: f64) -> MatTrigPoly<C64> {
    let mut out = MatTrigPoly::zeros(d, m, hard_cap);
    for k in 0..=m as i64 {
        let mut coeff = Mat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let re = r.gen_range(-amp..amp);
                let im = if k == 0 { 0.0 } else { r.gen_range(-amp..amp) };
                coeff.set(i, j, C64::new(re, im));
            }
        }
        out.coeffs[(k + m as i64) as usize] = coeff.clone();
        out.coeffs[(-k + m as i64) as usize] = coeff.conj();
    }
    out.recheck_real();
    out
}

/// Random symbol with orders in `[low, top]`.
pub fn rand_symbol(
    r: &mut ChaCha8Rng,
    d: usize,
    top: i64,
    low: i64,
    floor: i64,
    m: usize,
    hard_cap: usize,
    amp: f64,
) -> Symbol<C64> {
    let mut s = Symbol::zero(d, floor, hard_cap);
    for n in low.max(floor)..=top {
        s.set_comp(n, rand_trig(r, d, m, hard_cap, amp));
    }
    s
}

/// Random unit h-series with `u_0 = 1` satisfying the growth condition.
pub fn rand_unit_hseries(
    r: &mut ChaCha8Rng,
    h_order: usize,
    d: usize,
    floor: i64,
    m: usize,
    hard_cap: usize,
    amp: f64,
) -> HSeries<C64> {
    let mut u = HSeries::one(h_order, d, floor, hard_cap);
    for n in 1..=h_order {
        let top = (n as i64).min(2);
        u.terms[n] = rand_symbol(r, d, top, floor, floor, m, hard_cap, amp);
    }
    u
}

/// Random order ≤ -1 perturbation exponent for dressing operators.
pub fn rand_dressing_exponent(
    r: &mut ChaCha8Rng,
    d: usize,
    floor: i64,
    m: usize,
    hard_cap: usize,
    amp: f64,
) -> Symbol<C64> {
    rand_symbol(r, d, -1, (-2i64).max(floor), floor, m, hard_cap, amp)
}

/// Random `V`-valued test function.
pub fn rand_vec(r: &mut ChaCha8Rng, d: usize, m: usize, hard_cap: usize, amp: f64) -> TrigVec<C64> {
    let mut out = TrigVec::zeros(d, m, hard_cap);
    for k in -(m as i64)..=m as i64 {
        let v = (0..d)
            .map(|_| C64::new(r.gen_range(-amp..amp), r.gen_range(-amp..amp)))
            .collect();
        out.set_coeff(k, v);
    }
    out
}

/// Random orientation-preserving perturbation `p` with `1 + p' > 0`.
pub fn rand_diffeo_perturbation(
    r: &mut ChaCha8Rng,
    m: usize,
    hard_cap: usize,
    amp: f64,
) -> MatTrigPoly<C64> {
    // Σ_k |k·c_k| small keeps the derivative bound safe
    let scale = amp / (m as f64 * (m as f64 + 1.0));
    rand_trig(r, 1, m, hard_cap, scale)
}
