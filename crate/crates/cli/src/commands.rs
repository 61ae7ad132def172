//! The five batch suites. Each returns a [`Report`] whose checks carry the
//! measured residuals; failures are flagged against the configured
//! tolerances, and hard errors from the calculus bubble up as
//! `hkp_core::Error`.

use std::time::Instant;

use hkp_core::bell;
use hkp_core::exec;
use hkp_core::fio::{self, Diffeo};
use hkp_core::hseries::{birkhoff_factor, HFactorization, HSeries};
use hkp_core::kp::{self, TimeContext};
use hkp_core::sample;
use hkp_core::scalar::C64;
use hkp_core::symbol::Symbol;
use hkp_core::taylor;
use hkp_core::trig::MatTrigPoly;
use hkp_core::Result;

use crate::config::RunConfig;
use crate::report::{Check, Report};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `amp·cos(x)` times the identity matrix in dimension `d`.
fn cos_identity(d: usize, amp: f64, hard_cap: usize) -> MatTrigPoly<C64> {
    let mut out = MatTrigPoly::zeros(d, 1, hard_cap);
    out.set_coeff(1, hkp_core::trig::Mat::scalar(d, c(amp / 2.0)));
    out.set_coeff(-1, hkp_core::trig::Mat::scalar(d, c(amp / 2.0)));
    out
}

fn finish(command: &str, cfg: &RunConfig, checks: Vec<Check>, start: Instant) -> Report {
    Report {
        command: command.into(),
        config: cfg.clone(),
        checks,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn roundtrip_gap(u: &HSeries<C64>, f: &HFactorization<C64>) -> Result<f64> {
    let back = f.recompose()?;
    let mut gap: f64 = 0.0;
    for (a, b) in back.terms.iter().zip(&u.terms) {
        gap = gap.max(a.sub(b)?.max_abs());
    }
    Ok(gap)
}

/// Birkhoff factorization suite: preset unit, seeded random units, the
/// structure audit, and a deliberately corrupted factorization as a
/// negative control.
pub fn cmd_factorize(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let (n, d, floor, hc) = (cfg.h_order, cfg.dim, -cfg.floor, cfg.hard_cap);
    let m = cfg.modes_or(2);
    let mut checks = Vec::new();

    // preset U = 1 factors as S = Y = 1 with zero residual
    let one = HSeries::one(n, d, floor, hc);
    let f_one = birkhoff_factor(&one)?;
    checks.push(Check::bounded("preset_unit_roundtrip", roundtrip_gap(&one, &f_one)?, 0.0));
    checks.push(Check::new("preset_unit_structure", 0.0, f_one.structure_ok()));

    // seeded random suite; the trials are independent and run in parallel
    let results = exec::map_indexed(cfg.trials, |i| -> Result<(f64, bool)> {
        let mut r = sample::rng(cfg.seed.wrapping_add(i as u64));
        let u = sample::rand_unit_hseries(&mut r, n, d, floor, m, hc, cfg.amplitude);
        let f = birkhoff_factor(&u)?;
        let deterministic = birkhoff_factor(&u)? == f;
        Ok((roundtrip_gap(&u, &f)?, f.structure_ok() && deterministic))
    });
    let mut worst: f64 = 0.0;
    let mut sound = true;
    for res in results {
        let (gap, ok) = res?;
        worst = worst.max(gap);
        sound &= ok;
    }
    checks.push(Check::bounded("random_roundtrip", worst, cfg.tolerances.roundtrip));
    checks.push(Check::new("random_structure_and_determinism", 0.0, sound));

    // negative control: raising the differential order of y_1 above its
    // flow index must trip the structure audit
    let mut r = sample::rng(cfg.seed);
    let u = sample::rand_unit_hseries(&mut r, n, d, floor, m, hc, cfg.amplitude);
    let f = birkhoff_factor(&u)?;
    let mut y_bad = f.y_factor.clone();
    let y_floor = y_bad.terms[1].floor;
    y_bad.terms[1] = y_bad
        .terms[1]
        .add(&Symbol::monomial(2, MatTrigPoly::identity(d, hc), y_floor))?;
    let corrupted = HFactorization {
        s_factor: f.s_factor.clone(),
        y_factor: y_bad,
        nominal_floor: f.nominal_floor,
    };
    checks.push(Check::new("corrupted_factor_flagged", 0.0, !corrupted.structure_ok()));

    Ok(finish("factorize", cfg, checks, start))
}

/// KP suite: trivial dressing, then Lax residuals, bracket agreement,
/// proof identities and the finite-difference cross-oracle for n ≤ 3.
pub fn cmd_kp(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let (n, d, floor, hc) = (cfg.h_order, cfg.dim, -cfg.floor, cfg.hard_cap);
    let m = cfg.modes_or(2);
    let t = &cfg.tolerances;
    let mut checks = Vec::new();

    let times = vec![0.12, -0.07, 0.05];
    let max_flow = n.min(3).max(1);

    // trivial dressing: every residual vanishes
    let trivial = Symbol::identity(d, floor, hc);
    let ctx1 = TimeContext::with_jet(times.clone(), 1);
    let rep = kp::lax_residual(&trivial, n, &ctx1, 1)?;
    checks.push(Check::bounded(
        "trivial_dressing_lax",
        rep.residual_d.max(rep.residual_s),
        t.lax,
    ));

    let mut r = sample::rng(cfg.seed);
    let e = sample::rand_dressing_exponent(&mut r, d, floor, m, hc, cfg.amplitude);
    let s0 = e.exp_neg()?;
    for flow in 1..=max_flow {
        let ctx = TimeContext::with_jet(times.clone(), flow);
        let lax = kp::lax_residual(&s0, n, &ctx, flow)?;
        checks.push(Check::bounded(
            format!("lax_flow_{flow}"),
            lax.residual_d.max(lax.residual_s),
            t.lax,
        ));
        checks.push(Check::bounded(format!("bracket_flow_{flow}"), lax.bracket_gap, t.bracket));
        let proof = kp::proof_identities(&s0, n, &ctx, flow)?;
        checks.push(Check::bounded(
            format!("proof_flow_{flow}"),
            proof.d_identity_gap.max(proof.s_identity_gap).max(proof.sum_identity_gap),
            t.proof,
        ));
    }
    let ctx = TimeContext::with_jet(times, 1);
    checks.push(Check::bounded(
        "fd_cross_check",
        kp::lax_fd_gap(&s0, n, &ctx, 1, 1e-5)?,
        t.fd,
    ));

    Ok(finish("kp", cfg, checks, start))
}

/// Taylor-bridge suite: the identity-diffeomorphism collapse, the trivial
/// dressing (pure higher chain rule), and refit-refinement of the general
/// case.
pub fn cmd_taylor(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let (n, d, floor, hc) = (cfg.h_order.max(2), cfg.dim, -cfg.floor, cfg.hard_cap);
    let t = &cfg.tolerances;
    let cap = cfg.grid_factor * n.max(4);
    let mut checks = Vec::new();

    let alpha = cos_identity(d, 0.3, hc);
    let s0 = Symbol::monomial(-1, alpha, floor).exp_neg()?;
    let f = sample::rand_vec(&mut sample::rng(cfg.seed), d, 2, hc, cfg.amplitude);
    let g = Diffeo::new(MatTrigPoly::sine(1, hc).scale(c(0.25)))?;

    let identity = taylor::verify_taylor_theorem(&s0, &Diffeo::identity(hc), &f, 0.9, n, cap)?;
    checks.push(Check::bounded("identity_diffeo", identity.max_diff(), t.taylor_identity));

    let chain = taylor::verify_taylor_theorem(&Symbol::identity(d, floor, hc), &g, &f, 0.6, n, cap)?;
    checks.push(Check::bounded("trivial_dressing", chain.max_diff(), t.taylor_chain));

    let coarse = taylor::verify_taylor_theorem(&s0, &g, &f, 0.5, n, n)?.max_diff();
    let fine = taylor::verify_taylor_theorem(&s0, &g, &f, 0.5, n, cap)?.max_diff();
    checks.push(Check::new(
        "general_refinement",
        fine,
        fine <= t.taylor_general && fine <= coarse + 1e-12,
    ));

    Ok(finish("taylor", cfg, checks, start))
}

/// Flow-factorization suite: spectral defect of the factorized flow plus
/// the RK convergence order under step halving.
pub fn cmd_prop4(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let hc = cfg.hard_cap;
    let floor = -cfg.floor;
    let mode_cap = cfg.modes_or(8);
    let mut checks = Vec::new();

    let b = MatTrigPoly::cosine(1, hc).scale(c(cfg.amplitude));
    let l = Symbol::dx(1, floor, hc).add(&Symbol::monomial(-1, b, floor))?;

    let defect = fio::prop4_check(&l, 0.5, mode_cap, cfg.steps)?.defect;
    checks.push(Check::bounded("flow_defect", defect, cfg.tolerances.defect));

    let coarse = fio::prop4_check(&l, 0.5, mode_cap, 8)?.defect;
    let fine = fio::prop4_check(&l, 0.5, mode_cap, 16)?.defect;
    let order = (coarse / fine).log2();
    checks.push(Check::new("rk_convergence_order", order, order.is_finite() && order >= 1.9));

    Ok(finish("prop4", cfg, checks, start))
}

/// Direct enumeration of set partitions by restricted-growth assignment,
/// multiplying the jet values by block size.
fn bell_by_enumeration(n: usize, k: usize, u: &[f64]) -> f64 {
    fn rec(i: usize, n: usize, k: usize, sizes: &mut Vec<usize>, u: &[f64], acc: &mut f64) {
        if i == n {
            if sizes.len() == k {
                *acc += sizes.iter().map(|&s| u[s - 1]).product::<f64>();
            }
            return;
        }
        for j in 0..sizes.len() {
            sizes[j] += 1;
            rec(i + 1, n, k, sizes, u, acc);
            sizes[j] -= 1;
        }
        if sizes.len() < k {
            sizes.push(1);
            rec(i + 1, n, k, sizes, u, acc);
            sizes.pop();
        }
    }
    let mut acc = 0.0;
    rec(0, n, k, &mut Vec::new(), u, &mut acc);
    acc
}

/// Bell-polynomial suite: recurrence table against set-partition
/// enumeration plus the exact degenerate families.
pub fn cmd_bell(cfg: &RunConfig) -> Result<Report> {
    use rand::Rng;
    let start = Instant::now();
    let n_max = cfg.h_order.clamp(4, 8);
    let mut r = sample::rng(cfg.seed);
    let mut checks = Vec::new();

    let mut worst: f64 = 0.0;
    let mut degenerate = true;
    for n in 1..=n_max {
        let u: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
        for k in 1..=n {
            worst = worst.max((bell::bell(n, k, &u)? - bell_by_enumeration(n, k, &u)).abs());
        }
        let mut u1_pow = 1.0;
        for _ in 0..n {
            u1_pow *= u[0];
        }
        degenerate &= bell::bell(n, n, &u)? == u1_pow;
        degenerate &= bell::bell(n, 1, &u)? == u[n - 1];
        let delta: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        for k in 1..=n {
            degenerate &= bell::bell(n, k, &delta)? == if k == n { 1.0 } else { 0.0 };
        }
    }
    checks.push(Check::bounded("enumeration_gap", worst, cfg.tolerances.bell));
    checks.push(Check::new("degenerate_families_exact", 0.0, degenerate));

    Ok(finish("bell", cfg, checks, start))
}
