//! End-to-end acceptance gate: one criterion per numbered check, each
//! printing a single pass/fail line with its measured extremes. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines on a
//! passing build; on failure the captured output is replayed by the harness.

use std::time::Instant;

use hkp_core::bell;
use hkp_core::fio::{self, sy_factor, Diffeo, FioOp, SemidirectElem};
use hkp_core::hseries::birkhoff_factor;
use hkp_core::kp::{self, TimeContext};
use hkp_core::sample;
use hkp_core::scalar::C64;
use hkp_core::symbol::Symbol;
use hkp_core::taylor;
use hkp_core::trig::{MatTrigPoly, DEFAULT_HARD_CAP};

const HC: usize = DEFAULT_HARD_CAP;

struct Outcome {
    name: &'static str,
    pass: bool,
    details: String,
}

fn check(name: &'static str, budget_s: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (mut pass, mut details) = f();
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > budget_s {
        pass = false;
        details = format!("{details}; OVER TIME BUDGET {elapsed:.1}s > {budget_s}s");
    } else {
        details = format!("{details}; {elapsed:.1}s");
    }
    Outcome { name, pass, details }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

// -- 1: symbol-ring soundness ------------------------------------------------

fn criterion_1() -> Outcome {
    check("1 symbol-ring soundness", 10.0, || {
        let mut worst: f64 = 0.0;
        let mut order_ok = true;
        for seed in 0..100u64 {
            let mut r = sample::rng(1000 + seed);
            let d = 1 + (seed % 2) as usize;
            let top = (seed % 3) as i64;
            let floor = -(3 + (seed % 4) as i64);
            let m = 1 + (seed % 4) as usize;

            // associativity, compared at the nominal floor after computing
            // with a working margin covering the total positive order
            let margin = 3 * top.max(0) + 4;
            let deep = floor - margin;
            let amp = 0.25 / m as f64;
            let a = sample::rand_symbol(&mut r, d, top, -2, deep, m, HC, amp);
            let b = sample::rand_symbol(&mut r, d, top, -2, deep, m, HC, amp);
            let cc = sample::rand_symbol(&mut r, d, top, -2, deep, m, HC, amp);
            let left = a.compose(&b).unwrap().compose(&cc).unwrap().with_floor(floor);
            let right = a.compose(&b.compose(&cc).unwrap()).unwrap().with_floor(floor);
            worst = worst.max(left.sub(&right).unwrap().max_abs());

            // Leibniz rule ∂∘γ = γ∂ + γ'
            let gamma = sample::rand_trig(&mut r, d, m, HC, 0.8);
            let dx: Symbol<C64> = Symbol::dx(d, floor, HC);
            let lhs = dx.compose(&Symbol::mul_op(gamma.clone(), floor)).unwrap();
            let rhs = Symbol::mul_op(gamma.clone(), floor)
                .compose(&dx)
                .unwrap()
                .add(&Symbol::mul_op(gamma.derivative(), floor))
                .unwrap();
            worst = worst.max(lhs.sub(&rhs).unwrap().max_abs());

            // order additivity
            let (na, ga) = a.principal().unwrap();
            let (nb, gb) = b.principal().unwrap();
            let prod = a.compose(&b).unwrap();
            if let Some(np) = prod.top_order() {
                order_ok &= np <= na + nb;
                if ga.mul(&gb).unwrap().max_abs() > 1e-10 {
                    order_ok &= np == na + nb;
                }
            }

            // split complementarity
            let split = a.split_ds();
            let back = split.d_part.add(&split.s_part).unwrap();
            worst = worst.max(back.sub(&a).unwrap().max_abs());
            order_ok &= split.d_part.top_order().map_or(true, |n| n >= 0);
            order_ok &= split.s_part.top_order().map_or(true, |n| n <= -1);
        }
        (worst < 1e-10 && order_ok, format!("max identity gap {worst:.2e} over 100 seeds"))
    })
}

// -- 2: Birkhoff round-trip --------------------------------------------------

fn criterion_2() -> Outcome {
    check("2 Birkhoff-Mulase round-trip", 30.0, || {
        let mut worst: f64 = 0.0;
        let mut structural = true;
        let mut deterministic = true;
        for seed in 0..50u64 {
            let mut r = sample::rng(2000 + seed);
            let d = 1 + (seed % 2) as usize;
            let n = 4 + (seed % 3) as usize;
            let floor = -(n as i64);
            let u = sample::rand_unit_hseries(&mut r, n, d, floor, 2, HC, 0.2);
            let f = birkhoff_factor(&u).unwrap();
            let back = f.recompose().unwrap();
            for k in 0..=n {
                worst = worst.max(back.terms[k].sub(&u.terms[k]).unwrap().max_abs());
            }
            structural &= f.structure_ok();
            deterministic &= birkhoff_factor(&u).unwrap() == f;
        }
        (
            worst < 1e-9 && structural && deterministic,
            format!(
                "max round-trip gap {worst:.2e} over 50 seeds; structure {}; bitwise determinism {}",
                if structural { "ok" } else { "VIOLATED" },
                if deterministic { "ok" } else { "VIOLATED" }
            ),
        )
    })
}

// -- 3 & 4: KP Lax equations and proof identities ----------------------------

fn kp_suite() -> Vec<(Symbol<C64>, TimeContext, usize, usize)> {
    let mut suite = Vec::new();
    for seed in 0..10u64 {
        let mut r = sample::rng(3000 + seed);
        let d = 1 + (seed % 2) as usize;
        let n = 4 + (seed % 2) as usize;
        let floor = -(n as i64);
        let e = sample::rand_dressing_exponent(&mut r, d, floor, 1 + (seed % 2) as usize, HC, 0.25);
        let s0 = e.exp_neg().unwrap();
        let times = vec![
            0.15 - 0.01 * seed as f64,
            -0.08 + 0.005 * seed as f64,
            0.06 + 0.004 * seed as f64,
        ];
        for flow in 1..=3usize {
            suite.push((s0.clone(), TimeContext::with_jet(times.clone(), flow), n, flow));
        }
    }
    suite
}

fn criterion_3() -> Outcome {
    check("3 KP Lax equations", 60.0, || {
        let mut worst_lax: f64 = 0.0;
        let mut worst_bracket: f64 = 0.0;
        let mut worst_fd: f64 = 0.0;
        for (i, (s0, ctx, n, flow)) in kp_suite().iter().enumerate() {
            let rep = kp::lax_residual(s0, *n, ctx, *flow).unwrap();
            worst_lax = worst_lax.max(rep.residual_d).max(rep.residual_s);
            worst_bracket = worst_bracket.max(rep.bracket_gap);
            // the finite-difference cross-oracle is slower; sample the suite
            if i % 5 == 0 {
                worst_fd = worst_fd.max(kp::lax_fd_gap(s0, *n, ctx, *flow, 1e-5).unwrap());
            }
        }
        (
            worst_lax < 1e-8 && worst_bracket < 1e-12 && worst_fd < 1e-4,
            format!(
                "max Lax residual {worst_lax:.2e}, bracket gap {worst_bracket:.2e}, FD gap {worst_fd:.2e}"
            ),
        )
    })
}

fn criterion_4() -> Outcome {
    check("4 factorization proof identities", 60.0, || {
        let mut worst: f64 = 0.0;
        for (s0, ctx, n, flow) in kp_suite() {
            let rep = kp::proof_identities(&s0, n, &ctx, flow).unwrap();
            worst = worst.max(rep.d_identity_gap).max(rep.s_identity_gap).max(rep.sum_identity_gap);
        }
        (worst < 1e-8, format!("max identity gap {worst:.2e}"))
    })
}

// -- 5: FIO factorization ----------------------------------------------------

fn criterion_5() -> Outcome {
    check("5 FIO factorization", 10.0, || {
        let floor = -3;
        let mut r = sample::rng(5001);
        let mut b = Symbol::identity(1, floor, HC);
        b.set_comp(0, b.comp(0).add(&sample::rand_trig(&mut r, 1, 2, HC, 0.15)).unwrap());
        b.set_comp(-1, sample::rand_trig(&mut r, 1, 2, HC, 0.3));
        b.set_comp(-2, sample::rand_trig(&mut r, 1, 2, HC, 0.2));
        let g = Diffeo::new(sample::rand_diffeo_perturbation(&mut r, 2, HC, 0.3)).unwrap();
        let a = FioOp { op: b, phase: g };
        let (s, y) = sy_factor(&a).unwrap();

        // principal symbol exactly the identity
        let sigma0_exact =
            s.comp(0).sub(&MatTrigPoly::identity(1, HC)).unwrap().max_abs() == 0.0;

        // action of the recomposed operator on 5 random test functions
        let a_d = Symbol::mul_op(y.mult.clone(), floor);
        let recomposed = FioOp { op: s.compose(&a_d).unwrap(), phase: y.phase.clone() };
        let mut worst: f64 = 0.0;
        for trial in 0..5u64 {
            let f = sample::rand_vec(&mut sample::rng(5100 + trial), 1, 3, HC, 0.5);
            let cap = 8;
            let (direct, _) = a.apply(&f, cap).unwrap();
            let (re, _) = recomposed.apply(&f, cap).unwrap();
            for k in -(cap as i64)..=cap as i64 {
                worst = worst.max((direct.coeff(k)[0] - re.coeff(k)[0]).norm());
            }
        }

        // section multiplicativity: products of D-subgroup elements factor
        // with S = 1 exactly
        let m1 = MatTrigPoly::identity(1, HC)
            .add(&sample::rand_trig(&mut r, 1, 1, HC, 0.2))
            .unwrap();
        let m2 = MatTrigPoly::identity(1, HC)
            .add(&sample::rand_trig(&mut r, 1, 1, HC, 0.2))
            .unwrap();
        let g1 = Diffeo::new(sample::rand_diffeo_perturbation(&mut r, 1, HC, 0.2)).unwrap();
        let g2 = Diffeo::new(sample::rand_diffeo_perturbation(&mut r, 1, HC, 0.2)).unwrap();
        let prod = SemidirectElem::new(m1, g1).unwrap().mul(&SemidirectElem::new(m2, g2).unwrap()).unwrap();
        let prod_op = FioOp { op: Symbol::mul_op(prod.mult.clone(), floor), phase: prod.phase };
        let (s_prod, _) = sy_factor(&prod_op).unwrap();
        let section_exact =
            s_prod.sub(&Symbol::identity(1, floor, HC)).unwrap().max_abs() == 0.0;

        (
            sigma0_exact && section_exact && worst < 1e-8,
            format!(
                "max action gap {worst:.2e}; sigma0 {}; section {}",
                if sigma0_exact { "exact" } else { "NOT EXACT" },
                if section_exact { "exact" } else { "NOT EXACT" }
            ),
        )
    })
}

// -- 6: exponential-path factorization at operator level ---------------------

fn criterion_6() -> Outcome {
    check("6 flow factorization at operator level", 60.0, || {
        let floor = -3;
        let b = MatTrigPoly::cosine(1, HC).scale(c(0.4));
        let l = Symbol::dx(1, floor, HC)
            .add(&Symbol::monomial(-1, b.clone(), floor))
            .unwrap();
        let defect = fio::prop4_check(&l, 0.5, 8, 200).unwrap().defect;

        // RK convergence order under step halving, in the regime where the
        // integrator error dominates
        let d1 = fio::prop4_check(&l, 0.5, 8, 8).unwrap().defect;
        let d2 = fio::prop4_check(&l, 0.5, 8, 16).unwrap().defect;
        let order = (d1 / d2).log2();

        // recorded counterexample to the naive in-algebra transport
        let fix = kp::naive_flow_gap(&b.scale(c(1.25)), 0.4, -4).unwrap();
        let fix_const = kp::naive_flow_gap(
            &MatTrigPoly::constant(hkp_core::trig::Mat::scalar(1, c(0.7)), HC),
            0.4,
            -4,
        )
        .unwrap();
        let fixture_ok = fix.h2_gap < 1e-12
            && fix.h3_gap > 1e-4
            && fix_const.h2_gap < 1e-12
            && fix_const.h3_gap < 1e-12;

        (
            defect <= 1e-5 && order >= 1.9 && fixture_ok,
            format!(
                "defect {defect:.2e}, RK order {order:.2}, h3 fixture gap {:.2e} (const {:.2e})",
                fix.h3_gap, fix_const.h3_gap
            ),
        )
    })
}

// -- 7: Taylor-series bridge -------------------------------------------------

fn criterion_7() -> Outcome {
    check("7 Taylor bridge", 60.0, || {
        // (a) identity diffeomorphism, nontrivial dressing: exact collapse
        let alpha = MatTrigPoly::cosine(1, HC).scale(c(0.3));
        let s0 = Symbol::monomial(-1, alpha.clone(), -8).exp_neg().unwrap();
        let f = sample::rand_vec(&mut sample::rng(7001), 1, 2, HC, 0.5);
        let a_diff = taylor::verify_taylor_theorem(&s0, &Diffeo::identity(HC), &f, 0.9, 6, 16)
            .unwrap()
            .max_diff();

        // (b) trivial dressing, general diffeomorphism: pure higher chain rule
        let g = Diffeo::new(MatTrigPoly::sine(1, HC).scale(c(0.25))).unwrap();
        let f2 = sample::rand_vec(&mut sample::rng(7002), 1, 3, HC, 0.5);
        let b_diff = taylor::verify_taylor_theorem(
            &Symbol::identity(1, -8, HC),
            &g,
            &f2,
            0.6,
            6,
            24,
        )
        .unwrap()
        .max_diff();

        // (c) general case: the residual comes from the finite-resolution
        // refit of the composed function on the left side, and shrinks
        // monotonically as the refit cap K runs over {N, ..., N+4}
        let n = 4;
        let s0g = Symbol::monomial(-1, alpha.clone(), -10).exp_neg().unwrap();
        let residuals: Vec<f64> = (n..=n + 4)
            .map(|k| {
                taylor::verify_taylor_theorem(&s0g, &g, &f, 0.5, n, k)
                    .unwrap()
                    .max_diff()
            })
            .collect();
        let monotone = residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12);

        (
            a_diff < 1e-10 && b_diff < 1e-9 && monotone,
            format!(
                "identity case {a_diff:.2e}, chain-rule case {b_diff:.2e}, depth sweep {:?} monotone {}",
                residuals.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
                monotone
            ),
        )
    })
}

// -- 8: Bell polynomials -----------------------------------------------------

/// Independent oracle: direct enumeration of set partitions of `{1..n}`
/// into `k` blocks by restricted-growth assignment, multiplying `u` by
/// block sizes.
fn bell_enumeration(n: usize, k: usize, u: &[f64]) -> f64 {
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

fn criterion_8() -> Outcome {
    check("8 Bell polynomials", 5.0, || {
        use rand::Rng;
        let mut r = sample::rng(8001);
        let mut worst: f64 = 0.0;
        let mut exact = true;
        for n in 1..=8usize {
            let u: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
            for k in 1..=n {
                let lib = bell::bell(n, k, &u).unwrap();
                let oracle = bell_enumeration(n, k, &u);
                worst = worst.max((lib - oracle).abs());
            }
            // degenerate families are exact (expected value built by the
            // same left-to-right product order the recurrence uses)
            let mut u1_pow = 1.0;
            for _ in 0..n {
                u1_pow *= u[0];
            }
            exact &= bell::bell(n, n, &u).unwrap() == u1_pow;
            exact &= bell::bell(n, 1, &u).unwrap() == u[n - 1];
            let delta: Vec<f64> =
                (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
            for k in 1..=n {
                exact &= bell::bell(n, k, &delta).unwrap() == if k == n { 1.0 } else { 0.0 };
            }
        }
        (
            worst < 1e-9 && exact,
            format!("max enumeration gap {worst:.2e}; degenerate families {}",
                if exact { "exact" } else { "NOT EXACT" }),
        )
    })
}

#[test]
fn acceptance() {
    let outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    let mut all = true;
    for o in &outcomes {
        println!(
            "[{}] criterion {} — {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.details
        );
        all &= o.pass;
    }
    assert!(all, "acceptance criteria failed");
}
