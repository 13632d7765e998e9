//! Acceptance criteria 1–9. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use tentomo_core::normalops::{
    divergence_normal_compiled, fd_divergence, max_residual, normal_convolution, normal_momentum_compiled,
    solenoidal_decompose, spectral_divergence, spectral_symmetric_derivative, ucp_experiment, verify_lemma_mrt,
    verify_prop_mrt, verify_smoothness, GridTensorField, UcpConfig, UcpScenario,
};
use tentomo_core::poly::Polynomial;
use tentomo_core::polyfield::{
    printed_w_to_r_constant, r_to_w, random_field, solve_w_to_r_constant, w_to_r, w_to_r_with, PolyBumpField, Support,
};
use tentomo_core::rng::{exponents_up_to, Sampler};
use tentomo_core::scalar::{int, Rational};
use tentomo_core::spherequad::{build_rule, c_constant, verify_ibp, HomogeneousRational};
use tentomo_core::symtensor::{i_metric, inner, j_metric, sym_dim, DenseTensor, SymTensor};
use tentomo_core::xray::{verify_john_relation, FieldDerivatives, Line};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ball() -> Support {
    Support::ball(int(1))
}

fn rsym(s: &mut Sampler, n: usize, m: usize) -> SymTensor<Rational> {
    SymTensor::from_fn(n, m, |_| int(s.int_in(-6, 6)))
}

/// `r(d_{i+1}) ≤ r(d_i)` unless both sit at the rounding floor.
fn monotone(rs: &[f64]) -> bool {
    rs.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-12)
}

fn fmt_list(rs: &[f64]) -> String {
    rs.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>().join(" > ")
}

fn criterion_1() -> Outcome {
    let mut fields = 0;
    let mut ok = true;
    for (case, (n, m)) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)].into_iter().enumerate() {
        for t in 0..9u64 {
            let mut s = Sampler::new(100 + case as u64, t);
            let dense = DenseTensor::from_fn(n, m, |_| int(s.int_in(-6, 6)));
            let once = dense.symmetrize::<Rational>();
            ok &= once.expand().symmetrize::<Rational>() == once;
            let f = rsym(&mut s, n, m);
            let g = rsym(&mut s, n, m + 2);
            ok &= inner(&i_metric::<Rational, Rational>(&f), &g).unwrap()
                == inner(&f, &j_metric::<Rational, Rational>(&g)).unwrap();
            let field = random_field(&mut s, n, m, 1, ball(), m as u32 + 1);
            ok &= field.operator_r().unwrap().has_pair_symmetries();
            let dv = random_field(&mut s, n, m - 1, 1, ball(), m as u32 + 2).inner_derivative().unwrap();
            ok &= dv.saint_venant_w().unwrap().is_zero();
            ok &= dv.operator_r().unwrap().is_zero();
            fields += 2;
        }
    }
    Outcome { pass: ok, detail: format!("{fields} random fields, n in 2..=3, m in 1..=3, exact") }
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut count = 0;
    for (case, (n, m)) in [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)].into_iter().enumerate() {
        for t in 0..4u64 {
            let f = random_field(&mut Sampler::new(200 + case as u64, t), n, m, 2, ball(), m as u32 + 1);
            let r = f.operator_r().unwrap();
            let w = f.saint_venant_w().unwrap();
            ok &= r_to_w(&r).unwrap().same_field(&w) && w_to_r(&w).unwrap().same_field(&r);
            count += 1;
        }
    }
    let (m, k) = (2, 1);
    let printed = printed_w_to_r_constant(m, k);
    let mut solved_all = Vec::new();
    let mut printed_ok = true;
    for t in 0..20u64 {
        let f = random_field(&mut Sampler::new(250, t), 2, m, 2, ball(), 3);
        let rk = f.generalized_r(k).unwrap();
        let wk = f.generalized_w(k).unwrap();
        ok &= r_to_w(&rk).unwrap().same_field(&wk);
        printed_ok &= w_to_r_with(&wk, &printed).unwrap().same_field(&rk);
        match solve_w_to_r_constant(&wk, &rk).unwrap() {
            Some(c) => {
                ok &= w_to_r_with(&wk, &c).unwrap().same_field(&rk);
                solved_all.push(c);
            }
            None => ok = false,
        }
    }
    solved_all.dedup();
    ok &= solved_all.len() == 1;
    let solved = solved_all.first().map_or("none".to_string(), |c| c.to_string());
    Outcome {
        pass: ok,
        detail: format!(
            "RtoW/WtoR exact on {count} fields; GRtoGW exact on 20 fields (m=2, k=1); GWtoGR printed constant {printed} {}, solved constant {solved} round-trips exactly",
            if printed_ok { "holds" } else { "fails" }
        ),
    }
}

fn random_homogeneous(s: &mut Sampler, n: usize, d: u32) -> Polynomial<Rational> {
    loop {
        let terms: Vec<(Vec<u32>, Rational)> = exponents_up_to(n, d)
            .into_iter()
            .filter(|e| e.iter().sum::<u32>() == d)
            .map(|e| (e, int(s.int_in(-4, 4))))
            .collect();
        let p = Polynomial::from_terms(n, terms);
        if !p.is_zero() {
            return p;
        }
    }
}

fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| (0..n).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut checks = 0;
    for n in [2usize, 3] {
        for s_ord in 1..=4usize {
            for t in 0..20u64 {
                let mut s = Sampler::new(300 + (10 * n + s_ord) as u64, t);
                let r = (t % 3) as u32;
                let g = HomogeneousRational::new(random_homogeneous(&mut s, n, s_ord as u32 - 1 + 2 * r), r).unwrap();
                for idx in tuples(n, s_ord) {
                    ok &= verify_ibp(&g, &idx).unwrap().is_zero();
                    checks += 1;
                }
            }
        }
        ok &= c_constant(0, 1, n as u32).unwrap() == int(n as i64 - 1);
        let prod: i64 = (0..3).map(|p| n as i64 - 1 + 2 * p).product();
        ok &= c_constant(0, 3, n as u32).unwrap() == int(prod);
    }
    Outcome {
        pass: ok,
        detail: format!("{checks} exact residuals (s <= 4, n in {{2,3}}, 20 g per case); c_{{0,1}} = n-1, c_{{0,3}} checked"),
    }
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, tol) in [(1usize, 1e-9), (2, 1e-8)] {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for t in 0..20u64 {
            let mut s = Sampler::new(400 + m as u64, t);
            let f = random_field(&mut s, 2, m, 2, ball(), 2 * m as u32 + 1);
            let rf = f.operator_r().unwrap();
            let line = Line::new(s.in_ball(2, 0.8), s.unit_vector(2)).unwrap();
            let res = verify_john_relation(&FieldDerivatives::new(f), &rf, &line).unwrap();
            count += res.len();
            worst = worst.max(res.iter().map(|r| r.residual()).fold(0.0, f64::max));
        }
        ok &= worst <= tol;
        parts.push(format!("m={m}: max {worst:.1e} <= {tol:.0e} over {count} line x component"));
    }
    Outcome { pass: ok, detail: parts.join("; ") }
}

/// Maximum residual over `points` at each rule degree.
fn identity_sweep(
    fd: &FieldDerivatives,
    points: &[Vec<f64>],
    degrees: &[usize],
    f: impl Fn(&FieldDerivatives, &[f64], &tentomo_core::spherequad::SphereRule) -> f64,
) -> Vec<f64> {
    degrees
        .iter()
        .map(|&d| {
            let rule = build_rule(2, d).unwrap();
            points.iter().map(|x| f(fd, x, &rule)).fold(0.0, f64::max)
        })
        .collect()
}

fn sample_points(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut s = Sampler::new(seed, 99);
    (0..count).map(|_| s.in_ball(2, 1.5)).collect()
}

const DEGREES: [usize; 3] = [20, 40, 60];

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 1..=2usize {
        let fd = FieldDerivatives::new(random_field(&mut Sampler::new(500, m as u64), 2, m, 2, ball(), 6));
        let pts = sample_points(500 + m as u64, 10);
        let rs = identity_sweep(&fd, &pts, &DEGREES, |fd, x, rule| max_residual(&verify_prop_mrt(fd, x, 0, rule).unwrap()));
        ok &= rs[2] <= 1e-5 && monotone(&rs);
        parts.push(format!("m={m}: {}", fmt_list(&rs)));
    }
    // The discrete identity holds at every rule degree for k = 0, so the
    // degree sweep sits at the rounding floor; the k = 1 sweep below shows the
    // spectral trend of the same machinery at an exterior point.
    let fd = FieldDerivatives::new(random_field(&mut Sampler::new(500, 7), 2, 2, 2, ball(), 4));
    let trend = identity_sweep(&fd, &[vec![1.1, 0.4]], &[4, 8, 16], |fd, x, rule| {
        max_residual(&verify_prop_mrt(fd, x, 1, rule).unwrap())
    });
    ok &= trend[2] < trend[1] && trend[1] < trend[0];
    parts.push(format!("trend at degrees 4/8/16 (k=1, x outside supp f): {}", fmt_list(&trend)));
    Outcome { pass: ok, detail: format!("degrees 20/40/60, 10 points |x| <= 1.5: {}", parts.join("; ")) }
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 1..=2usize {
        let fd = FieldDerivatives::new(random_field(&mut Sampler::new(600, m as u64), 2, m, 2, ball(), 6));
        let pts = sample_points(600 + m as u64, 6);
        for k in 0..=m {
            let rs = identity_sweep(&fd, &pts, &DEGREES, |fd, x, rule| max_residual(&verify_lemma_mrt(fd, x, k, rule).unwrap()));
            ok &= rs[2] <= 1e-5 && monotone(&rs);
            parts.push(format!("lemma m={m} k={k}: {}", fmt_list(&rs)));
        }
        let rs = identity_sweep(&fd, &pts, &DEGREES, |fd, x, rule| max_residual(&verify_prop_mrt(fd, x, 1, rule).unwrap()));
        ok &= rs[2] <= 1e-5 && monotone(&rs);
        parts.push(format!("prop m={m} k=1: {}", fmt_list(&rs)));
    }
    Outcome { pass: ok, detail: parts.join("; ") }
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let len = 4.0;
    let rule = build_rule(2, 256).unwrap();
    for (m, k) in [(0usize, 0usize), (1, 0), (1, 1), (2, 1)] {
        let f = random_field(&mut Sampler::new(700, (10 * m + k) as u64), 2, m, 2, ball(), 6).compile();
        let coarse = GridTensorField::sample(&f, 128, len).unwrap();
        let fine = GridTensorField::sample(&f, 256, len).unwrap();
        let nc = normal_convolution(&coarse, k).unwrap();
        let nf = normal_convolution(&fine, k).unwrap();
        // The fine grid contains every coarse node at even indices.
        let nodes: Vec<usize> = (0..coarse.nodes()).collect();
        let angular: Vec<SymTensor<f64>> = {
            use rayon::prelude::*;
            nodes.par_iter().map(|&j| normal_momentum_compiled(&f, &coarse.coords(j), k as u32, &rule).unwrap()).collect()
        };
        let (mut ec, mut ef, mut norm) = (0.0, 0.0, 0.0);
        let space = coarse.space();
        for &j in &nodes {
            let ij = coarse.node_index(j);
            let jf = 2 * ij[0] * 256 + 2 * ij[1];
            for p in 0..space.len() {
                let w = space.multiplicity(p) as f64;
                let a = angular[j].entries()[p];
                ec += w * (nc.component(p)[j] - a).powi(2);
                ef += w * (nf.component(p)[jf] - a).powi(2);
                norm += w * a * a;
            }
        }
        let (rc, rf) = ((ec / norm).sqrt(), (ef / norm).sqrt());
        ok &= rc <= 1e-3 && rf < rc;
        parts.push(format!("m={m} k={k}: N=128 {rc:.1e}, N=256 {rf:.1e}"));
    }
    let mut worst: f64 = 0.0;
    let rule = build_rule(2, 60).unwrap();
    for (m, k) in [(1usize, 0u32), (2, 0), (2, 1)] {
        let f = random_field(&mut Sampler::new(750, (10 * m) as u64 + k as u64), 2, m, 2, ball(), 6).compile();
        let mut s = Sampler::new(751, m as u64);
        let mut sq = 0.0;
        let count = 20;
        for _ in 0..count {
            let x = s.in_ball(2, 1.3);
            ok &= divergence_normal_compiled(&f, &x, k, k + 1, &rule).is_ok_and(|t| t.max_abs() == 0.0);
            let d = fd_divergence(&x, 1e-3, |y| divergence_normal_compiled(&f, y, k, k, &rule)).unwrap();
            sq += d.norm().powi(2);
        }
        worst = worst.max((sq / count as f64).sqrt());
    }
    ok &= worst <= 1e-5;
    parts.push(format!("finite-difference delta^(k+1) N^k rms {worst:.1e} <= 1e-5"));
    Outcome { pass: ok, detail: parts.join("; ") }
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let (size, len) = (128, 4.0);
    for m in 1..=2usize {
        let psi = FieldDerivatives::new(random_field(&mut Sampler::new(800, m as u64), 2, 0, 2, ball(), 6));
        let v0: PolyBumpField = random_field(&mut Sampler::new(801, m as u64), 2, m - 1, 2, ball(), 6);
        for o in [[0u32, 1], [1, 0], [0, 2], [1, 1], [2, 0]] {
            psi.get(&o).unwrap();
        }
        let d = |o: [u32; 2], x: &[f64]| psi.get(&o).unwrap().component(0, x);
        let w = GridTensorField::from_fn(2, m, size, len, |x| match m {
            1 => SymTensor::vector(&[d([0, 1], x), -d([1, 0], x)]),
            _ => SymTensor::from_vec(2, 2, vec![d([0, 2], x), -d([1, 1], x), d([2, 0], x)]),
        })
        .unwrap();
        let f = w.add(&GridTensorField::sample(&v0.inner_derivative().unwrap().compile(), size, len).unwrap()).unwrap();
        let dec = solenoidal_decompose(&f).unwrap();
        let div = spectral_divergence(&dec.solenoidal).unwrap().l2_norm() / f.l2_norm();
        let dv = spectral_symmetric_derivative(&dec.potential).unwrap();
        let rec = f.sub(&dec.solenoidal.add(&dv).unwrap()).unwrap().max_abs();
        let nf = normal_convolution(&f, 0).unwrap();
        let nrel = nf.sub(&normal_convolution(&dec.solenoidal, 0).unwrap()).unwrap().l2_norm() / nf.l2_norm();
        let (sm, lhs) = verify_smoothness(&f).unwrap();
        ok &= div <= 1e-9 && rec <= 1e-10 && nrel <= 1e-6;
        parts.push(format!(
            "m={m}: div/|f| {div:.1e}, reconstruction {rec:.1e}, N f vs N sf {nrel:.1e} (smoothness identity {:.1e}, informational)",
            sm.l2_norm() / lhs.l2_norm()
        ));
    }
    Outcome { pass: ok, detail: format!("N=128, L=4: {}", parts.join("; ")) }
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let runs = [
        (UcpScenario::Ray, 2, 1, 0),
        (UcpScenario::Ray, 2, 2, 0),
        (UcpScenario::Ray, 3, 2, 0),
        (UcpScenario::Mrt, 2, 2, 1),
        (UcpScenario::Mrt, 3, 3, 1),
        (UcpScenario::Trt, 3, 2, 0),
        (UcpScenario::Trt, 3, 3, 0),
    ];
    for (sc, n, m, k) in runs {
        let points = if sc == UcpScenario::Trt { 50 } else { 10 };
        let cfg = UcpConfig { n, m, k, points, seed: 9, ..UcpConfig::default() };
        let rep = ucp_experiment(sc, &cfg).unwrap();
        let vanish = rep.checks.iter().filter(|c| c.expect_small).map(|c| c.value).fold(0.0, f64::max);
        let inverted = ucp_experiment(sc, &UcpConfig { invert_control: true, ..cfg }).unwrap();
        ok &= rep.passed() && !inverted.passed();
        if sc == UcpScenario::Trt {
            ok &= rep.checks.iter().any(|c| c.name == "trt.span_rank_deficiency" && c.value == 0.0);
        }
        parts.push(format!("{} n={n} m={m} k={k}: max {vanish:.1e}", sc.name()));
    }
    Outcome {
        pass: ok,
        detail: format!("{}; rank C(n+m-1,m) = {} confirmed for n=3 m=2; controls fail when asserted", parts.join(", "), sym_dim(3, 2)),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("exact algebra", criterion_1, 60),
        ("R/W and R^k/W^k equivalence", criterion_2, 120),
        ("integration by parts on the sphere", criterion_3, 120),
        ("John relation for the ray transform", criterion_4, 120),
        ("key identity for the ray transform", criterion_5, 600),
        ("momentum identities", criterion_6, 900),
        ("normal operator consistency", criterion_7, 600),
        ("solenoidal decomposition", criterion_8, 300),
        ("unique continuation mechanics", criterion_9, 300),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed();
        let pass = out.pass && secs <= Duration::from_secs(limit);
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} [{name}]: {} ({}; {:.1}s of {limit}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            secs.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
