//! Identity suites and experiments behind `tentomo run`.

use std::time::Instant;

use rayon::prelude::*;
use tentomo_core::normalops::{
    normal_convolution, solenoidal_decompose, spectral_divergence, spectral_symmetric_derivative, ucp_experiment,
    verify_lemma_mrt, verify_prop_mrt, verify_smoothness, ComponentResidual, GridTensorField, NormalError,
};
use tentomo_core::poly::Polynomial;
use tentomo_core::polyfield::{
    r_to_w, random_field, solve_w_to_r_constant, w_to_r, w_to_r_constant, w_to_r_with, FieldError, PolyBumpField,
    Support,
};
use tentomo_core::rng::{exponents_up_to, Sampler};
use tentomo_core::scalar::{f64_to_rational, int, Rational};
use tentomo_core::spherequad::{build_rule, c_constant, verify_ibp, HomogeneousRational, QuadError};
use tentomo_core::symtensor::{i_metric, inner, j_metric, DenseTensor, SymTensor, TensorError};
use tentomo_core::xray::{verify_john_relation, FieldDerivatives, Line, XrayError};

use crate::config::{ExperimentConfig, Suite};
use crate::report::{Report, Residual, Timing, SCHEMA};

/// A suite could not run: its inputs violate an operation's preconditions.
#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Normal(#[from] NormalError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Xray(#[from] XrayError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("{0}")]
    Input(String),
}

type Rows = Result<Vec<Residual>, SuiteError>;

pub fn run_suite(cfg: &ExperimentConfig) -> Result<Report, SuiteError> {
    let start = Instant::now();
    let mut residuals = match cfg.scenario {
        Suite::Algebra => algebra(cfg),
        Suite::Ibp => ibp(cfg),
        Suite::John => john(cfg),
        Suite::PropRay => angular_identities(cfg, false),
        Suite::Mrt => angular_identities(cfg, true),
        Suite::Decompose => decompose(cfg),
        Suite::UcpRay | Suite::UcpMrt | Suite::UcpTrt => ucp(cfg),
    }?;
    let mut total = start.elapsed().as_secs_f64();
    if !cfg.record_timing {
        total = 0.0;
        for r in &mut residuals {
            r.seconds = 0.0;
        }
    }
    Ok(Report {
        schema: SCHEMA,
        scenario: cfg.scenario.name().to_string(),
        config: cfg.clone(),
        residuals,
        timing: Timing { total_seconds: total },
    })
}

fn support(cfg: &ExperimentConfig) -> Result<Support, SuiteError> {
    let rho = f64_to_rational(cfg.field.rho).ok_or_else(|| SuiteError::Input("field.rho is not finite".into()))?;
    Ok(Support::ball(rho))
}

fn timed(rows: &mut [Residual], start: Instant) {
    let secs = start.elapsed().as_secs_f64();
    for r in rows {
        r.seconds = secs;
    }
}

fn join(rows: Vec<Vec<Residual>>) -> Vec<Residual> {
    rows.into_iter().flatten().collect()
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
    format!("({})", parts.join(" "))
}

fn fmt_index(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect()
}

fn random_sym(s: &mut Sampler, n: usize, m: usize) -> SymTensor<Rational> {
    SymTensor::from_fn(n, m, |_| int(s.int_in(-5, 5)))
}

fn algebra(cfg: &ExperimentConfig) -> Rows {
    let (n, m, k) = (cfg.n, cfg.m, cfg.k);
    let sup = support(cfg)?;
    let rows = (0..cfg.samples)
        .into_par_iter()
        .map(|t| -> Rows {
            let start = Instant::now();
            let mut s = Sampler::new(cfg.seed, t as u64);
            let p = format!("n={n};m={m};sample={t}");
            let mut out = Vec::new();
            let dense = DenseTensor::from_fn(n, m, |_| int(s.int_in(-5, 5)));
            let once = dense.symmetrize::<Rational>();
            out.push(Residual::exact("sigma_idempotent", &p, once.expand().symmetrize::<Rational>() == once));
            let f = random_sym(&mut s, n, m);
            let g = random_sym(&mut s, n, m + 2);
            let lhs = inner(&i_metric::<Rational, Rational>(&f), &g)?;
            let rhs = inner(&f, &j_metric::<Rational, Rational>(&g))?;
            out.push(Residual::exact("i_j_duality", &p, lhs == rhs));
            let field = random_field(&mut s, n, m, cfg.field.degree, sup.clone(), cfg.field.s);
            let rf = field.operator_r()?;
            let wf = field.saint_venant_w()?;
            out.push(Residual::exact("R_pair_skew_symmetry", &p, rf.has_pair_symmetries()));
            let v = random_field(&mut s, n, m - 1, cfg.field.degree, sup.clone(), cfg.field.s);
            let dv = v.inner_derivative()?;
            out.push(Residual::exact("W_of_dv_vanishes", &p, dv.saint_venant_w()?.is_zero()));
            out.push(Residual::exact("R_of_dv_vanishes", &p, dv.operator_r()?.is_zero()));
            out.push(Residual::exact("R_to_W", &p, r_to_w(&rf)?.same_field(&wf)));
            out.push(Residual::exact("W_to_R", &p, w_to_r(&wf)?.same_field(&rf)));
            let rk = field.generalized_r(k)?;
            let wk = field.generalized_w(k)?;
            let pk = format!("{p};k={k}");
            out.push(Residual::exact("generalized_R_to_W", &pk, r_to_w(&rk)?.same_field(&wk)));
            let c = w_to_r_constant(m, k);
            let solved = solve_w_to_r_constant(&wk, &rk)?;
            let solved_text = solved.as_ref().map_or("none".to_string(), |q| q.to_string());
            out.push(Residual::exact(
                "generalized_W_to_R",
                format!("{pk};constant={c};solved_constant={solved_text}"),
                w_to_r_with(&wk, &c)?.same_field(&rk),
            ));
            timed(&mut out, start);
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(join(rows))
}

/// Random homogeneous polynomial of exact degree `d` with small integer coefficients.
pub fn random_homogeneous(s: &mut Sampler, n: usize, d: u32) -> Polynomial<Rational> {
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

fn index_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| (0..n).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

fn ibp(cfg: &ExperimentConfig) -> Rows {
    let n = cfg.n;
    let mut rows = Vec::new();
    for order in 1..=cfg.m {
        let cases = (0..cfg.samples)
            .into_par_iter()
            .map(|t| -> Rows {
                let start = Instant::now();
                let mut s = Sampler::new(cfg.seed, (order * 1000 + t) as u64);
                let r = (t % 2) as u32;
                let num = random_homogeneous(&mut s, n, order as u32 - 1 + 2 * r);
                let g = HomogeneousRational::new(num, r)?;
                let mut worst: f64 = 0.0;
                let mut exact = true;
                for idx in index_tuples(n, order) {
                    let v = verify_ibp(&g, &idx)?;
                    exact &= v.is_zero();
                    worst = worst.max(v.to_f64().abs());
                }
                let mut row = Residual::at_most("ibp", format!("n={n};s={order};sample={t};pow2r={r}"), worst, 0.0);
                row.pass &= exact;
                timed(std::slice::from_mut(&mut row), start);
                Ok(vec![row])
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.extend(join(cases));
    }
    let n32 = n as u32;
    rows.push(Residual::exact("c_constant", "l=0;s=1", c_constant(0, 1, n32)? == int(n as i64 - 1)));
    let prod: i64 = (0..3).map(|p| n as i64 - 1 + 2 * p).product();
    rows.push(Residual::exact("c_constant", "l=0;s=3", c_constant(0, 3, n32)? == int(prod)));
    Ok(rows)
}

fn random_line(s: &mut Sampler, n: usize, reach: f64) -> Result<Line, SuiteError> {
    Ok(Line::new(s.in_ball(n, reach), s.unit_vector(n))?)
}

fn john(cfg: &ExperimentConfig) -> Rows {
    let (n, m, tol) = (cfg.n, cfg.m, cfg.tolerance());
    let sup = support(cfg)?;
    let rows = (0..cfg.samples)
        .into_par_iter()
        .map(|t| -> Rows {
            let start = Instant::now();
            let mut s = Sampler::new(cfg.seed, t as u64);
            let f = random_field(&mut s, n, m, cfg.field.degree, sup.clone(), cfg.field.s);
            let rf = f.operator_r()?;
            let line = random_line(&mut s, n, 0.8 * cfg.field.rho)?;
            let fd = FieldDerivatives::new(f);
            let mut out: Vec<Residual> = verify_john_relation(&fd, &rf, &line)?
                .into_iter()
                .map(|r| {
                    let p = format!("n={n};m={m};sample={t};index={}", fmt_index(&r.index));
                    Residual::at_most("john_ray_relation", p, r.residual(), tol)
                })
                .collect();
            timed(&mut out, start);
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(join(rows))
}

fn component_rows(name: &str, base: &str, res: &[ComponentResidual], tol: f64) -> Vec<Residual> {
    res.iter()
        .map(|r| Residual::at_most(name, format!("{base};index={}", fmt_index(&r.index)), r.residual(), tol))
        .collect()
}

fn angular_identities(cfg: &ExperimentConfig, momentum: bool) -> Rows {
    let (n, m, tol) = (cfg.n, cfg.m, cfg.tolerance());
    let rule = build_rule(n, cfg.rule_degree)?;
    let mut s = Sampler::new(cfg.seed, 0);
    let f = random_field(&mut s, n, m, cfg.field.degree, support(cfg)?, cfg.field.s);
    let fd = FieldDerivatives::new(f);
    let reach = 1.2 * cfg.field.rho;
    let points: Vec<Vec<f64>> = (0..cfg.samples).map(|_| s.in_ball(n, reach)).collect();
    let rows = points
        .par_iter()
        .map(|x| -> Rows {
            let start = Instant::now();
            let base = format!("n={n};m={m};degree={};x={}", cfg.rule_degree, fmt_point(x));
            let mut out = Vec::new();
            if momentum {
                for k in 0..=cfg.k {
                    let b = format!("{base};k={k}");
                    out.extend(component_rows("lemma_mrt", &b, &verify_lemma_mrt(&fd, x, k, &rule)?, tol));
                }
                let b = format!("{base};k={}", cfg.k);
                out.extend(component_rows("prop_mrt", &b, &verify_prop_mrt(&fd, x, cfg.k, &rule)?, tol));
            } else {
                out.extend(component_rows("prop_ray", &base, &verify_prop_mrt(&fd, x, 0, &rule)?, tol));
            }
            timed(&mut out, start);
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(join(rows))
}

/// `w + dv₀` on the grid: `w` is compactly supported and divergence free,
/// built from a stream function (`m = 1`) or an Airy function (`m = 2`).
pub fn solenoidal_plus_potential(
    m: usize,
    field: &PolyBumpField,
    potential: &PolyBumpField,
    size: usize,
    length: f64,
) -> Result<(GridTensorField, GridTensorField), SuiteError> {
    let psi = FieldDerivatives::new(field.clone());
    for o in [[0u32, 1], [1, 0], [0, 2], [1, 1], [2, 0]] {
        psi.get(&o)?;
    }
    let d = |o: [u32; 2], x: &[f64]| psi.get(&o).expect("cached").component(0, x);
    let w = GridTensorField::from_fn(2, m, size, length, |x| match m {
        1 => SymTensor::vector(&[d([0, 1], x), -d([1, 0], x)]),
        _ => SymTensor::from_vec(2, 2, vec![d([0, 2], x), -d([1, 1], x), d([2, 0], x)]),
    })?;
    let dv = GridTensorField::sample(&potential.inner_derivative()?.compile(), size, length)?;
    Ok((w.add(&dv)?, w))
}

fn decompose(cfg: &ExperimentConfig) -> Rows {
    let (m, size, len) = (cfg.m, cfg.grid.size, cfg.grid.length);
    let start = Instant::now();
    let sup = support(cfg)?;
    let psi = random_field(&mut Sampler::new(cfg.seed, 0), 2, 0, cfg.field.degree, sup.clone(), cfg.field.s);
    let v0 = random_field(&mut Sampler::new(cfg.seed, 1), 2, m - 1, cfg.field.degree, sup, cfg.field.s);
    let (f, _) = solenoidal_plus_potential(m, &psi, &v0, size, len)?;
    let dec = solenoidal_decompose(&f)?;
    let fnorm = f.l2_norm();
    let p = format!("n=2;m={m};N={size};L={len:e}");
    let t = |d: f64| cfg.tolerance.unwrap_or(d);
    let div = spectral_divergence(&dec.solenoidal)?.l2_norm() / fnorm;
    let dv = spectral_symmetric_derivative(&dec.potential)?;
    let rec = f.sub(&dec.solenoidal.add(&dv)?)?.max_abs();
    let nf = normal_convolution(&f, 0)?;
    let ns = normal_convolution(&dec.solenoidal, 0)?;
    let nrel = nf.sub(&ns)?.l2_norm() / nf.l2_norm();
    let (sm, lhs) = verify_smoothness(&f)?;
    let mut rows = vec![
        Residual::at_most("divergence_of_solenoidal_part_rel", &p, div, t(1e-9)),
        Residual::at_most("reconstruction_max_abs", &p, rec, t(1e-10)),
        Residual::at_most("normal_operator_equality_rel", &p, nrel, t(1e-6)),
        Residual::at_most("smoothness_rel", &p, sm.l2_norm() / lhs.l2_norm(), t(1e-6)),
    ];
    timed(&mut rows, start);
    Ok(rows)
}

fn ucp(cfg: &ExperimentConfig) -> Rows {
    let scenario = match cfg.scenario {
        Suite::UcpRay => tentomo_core::normalops::UcpScenario::Ray,
        Suite::UcpMrt => tentomo_core::normalops::UcpScenario::Mrt,
        _ => tentomo_core::normalops::UcpScenario::Trt,
    };
    let start = Instant::now();
    let rep = ucp_experiment(scenario, &cfg.ucp())?;
    let p = format!("n={};m={};k={}", cfg.n, cfg.m, cfg.k);
    let mut rows: Vec<Residual> = rep
        .checks
        .into_iter()
        .map(|c| Residual {
            name: c.name,
            parameters: format!("{p};expect={}", if c.expect_small { "at_most" } else { "above" }),
            value: c.value,
            tolerance: c.tolerance,
            pass: c.pass,
            seconds: 0.0,
        })
        .collect();
    timed(&mut rows, start);
    Ok(rows)
}
