use nalgebra::DVector;
use num_rational::Rational64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use surface_poisson::cartan_alcove::{default_su3_grid, so3_sweep, su2_sweep, su3_sweep, SweepRow, TorusPoint};
use surface_poisson::conventions::Conventions;
use surface_poisson::lie_core::{GroupElement, GroupFamily, LieGroup, LieGroupSpec};
use surface_poisson::moduli_forms::{
    exterior_derivative_fd, presymplectic_check, sample_zero_locus, ConstrainedPoint, ExtendedForms, ExtendedPoint,
    FD_STEP,
};
use surface_poisson::poisson_moduli::{
    bracket_path, casimir_check, continuity_bound, default_wilson_words, flow_bracket, jacobi_check, leaf_coordinates,
    point_rng, poisson_bracket, sample_rep, InvariantFunction, RepPoint, SampleMode,
};
use surface_poisson::surface_words::{
    build_chain_c, build_chain_c_tilde, build_chain_c_with, expected_boundary_c, expected_boundary_c_tilde, restrict,
    Assignment, BarChain2, Filling, SurfaceData,
};
use surface_poisson::twisted_cohomology::{build_complex, cohomology_dims, diagram_residual, CohomologyDims, Variant, RANK_TOL};

use crate::config::{ConfigError, RunConfig};
use crate::report::{Record, Report, Table};

/// Streams of the per-point generator, so that different checks at the same
/// point draw independent numbers.
const STREAM_FORMS: u64 = 1 << 40;
const STREAM_ZERO_LOCUS: u64 = 2 << 40;

const JACOBI_STEP: f64 = 1e-3;
const FLOW_DT: f64 = 1e-3;
const FLOW_STEPS: usize = 2;
const MAX_ZERO_LOCUS_ATTEMPTS: usize = 1000;

fn conventions(cfg: &RunConfig) -> Conventions {
    if cfg.tamper_beta {
        Conventions::tampered_beta()
    } else {
        Conventions::default()
    }
}

struct Setup {
    group: LieGroup<f64>,
    surface: SurfaceData,
    chain: BarChain2,
    mode: SampleMode<f64>,
}

fn setup(cfg: &RunConfig) -> Result<Setup, ConfigError> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let surface = cfg.surface()?;
    let mode = if cfg.classes.is_empty() {
        SampleMode::Free
    } else {
        SampleMode::Constrained(class_targets(spec, &cfg.classes)?)
    };
    Ok(Setup {
        group: LieGroup::new(spec),
        surface,
        chain: build_chain_c(&surface),
        mode,
    })
}

fn class_targets(spec: LieGroupSpec, nus: &[Vec<f64>]) -> Result<Vec<TorusPoint<f64>>, ConfigError> {
    nus.iter()
        .map(|nu| TorusPoint::new(spec.family, nu.clone()).map_err(|e| ConfigError::Invalid(e.to_string())))
        .collect()
}

/// Parses `class:k[:power[:im]]` as a boundary class invariant and anything
/// else as the word of a Wilson function.
pub fn parse_invariant(text: &str) -> Result<InvariantFunction, ConfigError> {
    let bad = || ConfigError::Invalid(format!("cannot parse function {text:?}"));
    if let Some(rest) = text.strip_prefix("class:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let k: usize = parts[0].parse().map_err(|_| bad())?;
        let power: u32 = match parts.get(1) {
            Some(p) => p.parse().map_err(|_| bad())?,
            None => 1,
        };
        let imag = match parts.get(2) {
            None => false,
            Some(&"im") => true,
            Some(&"re") => false,
            Some(_) => return Err(bad()),
        };
        if k == 0 || power == 0 || parts.len() > 3 {
            return Err(bad());
        }
        return Ok(InvariantFunction::BoundaryClass { k, power, imag });
    }
    InvariantFunction::wilson(text).map_err(|_| bad())
}

fn check_invariant(f: &InvariantFunction, s: &SurfaceData) -> Result<(), ConfigError> {
    let ok = match f {
        InvariantFunction::BoundaryClass { k, .. } => *k <= s.boundaries,
        InvariantFunction::Wilson(w) => {
            let gens = s.group_generators();
            w.letters().iter().all(|l| gens.contains(&l.gen))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{} does not live on this surface", f.label())))
    }
}

fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Folds per-point results into one record: the worst value, or the first
/// error.
fn fold_record(name: &str, tol: f64, results: &[Result<f64, String>]) -> Record {
    let mut value: f64 = 0.0;
    let mut count = 0;
    for r in results {
        match r {
            Ok(v) => {
                value = value.max(*v);
                count += 1;
            }
            Err(e) => return Record::error(name, tol, e),
        }
    }
    Record::bound(name, value, tol, count)
}

fn fold_exact(name: &str, results: &[Result<bool, String>]) -> Record {
    let mut mismatches = 0;
    for r in results {
        match r {
            Ok(ok) => mismatches += usize::from(!ok),
            Err(e) => return Record::error(name, 0.0, e),
        }
    }
    Record::exact(name, mismatches, results.len())
}

// ---------------------------------------------------------------- alcove

fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(
        "alcove",
        &["group", "family", "parameter", "nu", "in_p_tilde", "partition", "orbit_dim", "class_dim", "fiber_dim"],
    );
    for r in rows {
        t.push(vec![
            json!(r.group),
            json!(r.family),
            json!(r.parameter),
            json!(r.nu.join(" ")),
            json!(r.in_p_tilde),
            json!(r.partition.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("+")),
            json!(r.orbit_dim),
            json!(r.class_dim),
            json!(r.fiber_dim),
        ]);
    }
    t
}

fn parse_rational(s: &str) -> Rational64 {
    match s.split_once('/') {
        Some((a, b)) => Rational64::new(a.parse().unwrap(), b.parse().unwrap()),
        None => Rational64::from_integer(s.parse().unwrap()),
    }
}

/// Expected `(orbit, class, fiber)` dimensions on the SU(3) sweep families.
fn su3_expected(row: &SweepRow) -> Option<(usize, usize, usize)> {
    let v = parse_rational(&row.parameter);
    let third = Rational64::new(1, 3);
    let half = Rational64::new(1, 2);
    let two_thirds = Rational64::new(2, 3);
    match row.family.as_str() {
        "regular" if v > Rational64::from_integer(0) && v < half => Some((6, 6, 0)),
        "regular" if v == half => Some((6, 4, 2)),
        "wall_upper" | "wall_lower" if v > Rational64::from_integer(0) && v < third => Some((4, 4, 0)),
        "wall_upper" | "wall_lower" if v == third => Some((4, 0, 4)),
        "outer_face" if v > third && v < two_thirds => Some((6, 4, 2)),
        "outer_face" if v == third || v == two_thirds => Some((4, 0, 4)),
        _ => None,
    }
}

pub fn cmd_alcove(cfg: &RunConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let mut report = Report::new("alcove", cfg, conventions(cfg));
    let rows = match spec.family {
        GroupFamily::SU(2) => {
            let rows = su2_sweep();
            let singular: Vec<&str> = rows.iter().filter(|r| !r.in_p_tilde).map(|r| r.parameter.as_str()).collect();
            report.record(
                Record::exact("su2_singular_set", usize::from(singular != ["1/2"]), rows.len())
                    .with_detail(format!("singular at nu = {}", singular.join(", "))),
            );
            rows
        }
        GroupFamily::SU(3) => {
            let rows = su3_sweep(&default_su3_grid());
            let mut mismatches = 0;
            let mut checked = 0;
            for r in &rows {
                if let Some(e) = su3_expected(r) {
                    checked += 1;
                    mismatches += usize::from((r.orbit_dim, r.class_dim, r.fiber_dim) != e);
                }
            }
            report.record(Record::exact("su3_case_table", mismatches, checked));
            let lifted = rows.iter().filter(|r| r.in_p_tilde && r.fiber_dim != 0).count();
            report.record(Record::exact("fibers_over_p_tilde", lifted, rows.len()));
            rows
        }
        GroupFamily::SO3 => {
            let rows = so3_sweep();
            let excluded: Vec<&str> = rows.iter().filter(|r| !r.in_p_tilde).map(|r| r.parameter.as_str()).collect();
            report.record(
                Record::exact("so3_excluded_angles", usize::from(excluded != ["1"]), rows.len())
                    .with_detail(format!("excluded at theta/pi = {}", excluded.join(", "))),
            );
            rows
        }
        GroupFamily::SU(n) => return Err(ConfigError::Invalid(format!("no alcove table for SU({n})"))),
    };
    report.tables.push(sweep_table(&rows));
    Ok(report)
}

// ---------------------------------------------------------------- verify

#[derive(Default)]
struct PointChecks {
    relation: Option<Result<f64, String>>,
    complex: Option<Result<f64, String>>,
    diagram: Option<Result<f64, String>>,
    euler: Option<Result<bool, String>>,
    closed: Option<Result<f64, String>>,
    invariance: Option<Result<f64, String>>,
    momentum: Option<Result<f64, String>>,
    rank: Option<Result<bool, String>>,
    reduction: Option<Result<bool, String>>,
    casimir: Option<Result<f64, String>>,
    jacobi: Option<Result<f64, String>>,
    flow: Option<Result<f64, String>>,
}

fn chi(d: &CohomologyDims) -> i64 {
    d.h0 as i64 - d.h1 as i64 + d.h2 as i64
}

fn complex_checks(g: &LieGroup<f64>, s: &SurfaceData, phi: &Assignment<f64>) -> Result<(f64, bool), String> {
    let mut cc: f64 = 0.0;
    let mut dims: Vec<CohomologyDims> = Vec::new();
    let mut euler = true;
    for v in [Variant::Absolute, Variant::Parabolic, Variant::Relative] {
        let k = build_complex(g, phi, s, v).map_err(|e| e.to_string())?;
        cc = cc.max(k.cc_residual);
        let d = cohomology_dims(&k, RANK_TOL).map_err(|e| e.to_string())?;
        euler &= chi(&d) == k.euler_characteristic();
        dims.push(d);
    }
    let iso = dims[1].h0 == dims[0].h0 && dims[1].h2 == dims[2].h2;
    Ok((cc, euler && iso))
}

fn random_extended(g: &LieGroup<f64>, s: &SurfaceData, rng: &mut ChaCha8Rng) -> ExtendedPoint<f64> {
    loop {
        let phi = Assignment::new(s.groupoid_generators().into_iter().map(|x| (x, g.random_element(rng))));
        if let Ok(p) = ExtendedPoint::from_assignment(g, s, phi) {
            return p;
        }
    }
}

fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

struct FormChecks {
    closed: f64,
    invariance: f64,
    momentum: f64,
}

fn form_checks(f: &ExtendedForms<'_, f64>, rng: &mut ChaCha8Rng) -> Result<FormChecks, String> {
    let g = f.group;
    let n = f.surface.boundaries;
    let p = random_extended(g, &f.surface, rng);
    let dim = f.tangent_dim();
    let e: Vec<DVector<f64>> = (0..3).map(|_| rand_vec(dim, rng)).collect();
    let closed = exterior_derivative_fd(|q| f.chart_form(&p, q), [&e[0], &e[1], &e[2]], FD_STEP)
        .map_err(|e| e.to_string())?
        .abs();
    let v = f.tangent(&p, rand_vec(dim, rng)).map_err(|e| e.to_string())?;
    let w = f.tangent(&p, rand_vec(dim, rng)).map_err(|e| e.to_string())?;
    let theta: Vec<GroupElement<f64>> = (0..=n).map(|_| g.random_element(rng)).collect();
    let q = p.act(g, &theta);
    let before = f.omega_total(&p, &v, &w).map_err(|e| e.to_string())?;
    let after = f
        .omega_total(&q, &f.act_tangent(&theta, &v), &f.act_tangent(&theta, &w))
        .map_err(|e| e.to_string())?;
    let mut momentum: f64 = 0.0;
    for j in 0..=n {
        let x = g.random_algebra(rng, 1.0);
        let t = rand_vec(dim, rng);
        momentum = momentum.max(f.momentum_residual(&p, j, &x, &t).map_err(|e| e.to_string())?);
    }
    Ok(FormChecks {
        closed,
        invariance: (before - after).abs(),
        momentum,
    })
}

fn zero_locus_checks(f: &ExtendedForms<'_, f64>, rng: &mut ChaCha8Rng) -> Result<(bool, bool), String> {
    let (g, s) = (f.group, &f.surface);
    let p = sample_zero_locus(g, s, rng, MAX_ZERO_LOCUS_ATTEMPTS).map_err(|e| e.to_string())?;
    let full = f.rank_omega(&p).map_err(|e| e.to_string())? == f.tangent_dim();
    let phi = restrict(&p.phi, s).map_err(|e| e.to_string())?;
    let cp = ConstrainedPoint::from_assignment(g, s, phi).map_err(|e| e.to_string())?;
    let rep = presymplectic_check(g, &f.conv, &f.c, &cp).map_err(|e| e.to_string())?;
    Ok((full, rep.passed(1e-8)))
}

fn poisson_checks(
    g: &LieGroup<f64>,
    s: &SurfaceData,
    c: &BarChain2,
    rho: &RepPoint<f64>,
    tests: &[InvariantFunction],
) -> Result<(f64, f64, f64), String> {
    let mut casimir: f64 = 0.0;
    for k in 1..=s.boundaries {
        casimir = casimir.max(casimir_check(g, k, rho, tests, c).map_err(|e| e.to_string())?);
    }
    let (a, b, d) = (&tests[0], &tests[1], &tests[tests.len() - 1]);
    let jacobi = jacobi_check(g, [a, b, d], rho, c, JACOBI_STEP).map_err(|e| e.to_string())?;
    let solve = poisson_bracket(g, a, d, rho, c).map_err(|e| e.to_string())?;
    let flow = flow_bracket(g, a, d, rho, c, FLOW_DT, FLOW_STEPS).map_err(|e| e.to_string())?;
    Ok((casimir, jacobi, (solve - flow).abs()))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let st = setup(cfg)?;
    let conv = conventions(cfg);
    let mut report = Report::new("verify", cfg, conv);
    let (g, s, c) = (&st.group, &st.surface, &st.chain);

    let mut chain_mismatches = 0;
    for filling in [Filling::LeftToRight, Filling::RightToLeft] {
        let cf = build_chain_c_with(s, filling);
        chain_mismatches += usize::from(cf.boundary() != expected_boundary_c(s));
        let ct = build_chain_c_tilde(&cf, s);
        chain_mismatches += usize::from(ct.check_composable().is_err() || ct.boundary() != expected_boundary_c_tilde(s));
    }
    report.record(Record::exact("chain_boundaries", chain_mismatches, 4));

    let forms = ExtendedForms::new(g, s, conv);
    let tests = default_wilson_words(s);
    let with_forms = s.boundaries > 0;
    let points: Vec<PointChecks> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut out = PointChecks::default();
            match sample_rep(g, s, c, cfg.seed, i, &st.mode) {
                Ok(rho) => {
                    out.relation = Some(Ok(rho.relation_residual));
                    let cx = complex_checks(g, s, &rho.phi);
                    out.complex = Some(cx.clone().map(|x| x.0));
                    out.euler = Some(cx.map(|x| x.1));
                    out.diagram = Some(diagram_residual(g, &rho.phi, s, 1e-5).map_err(|e| e.to_string()));
                    if rho.flags.is_smooth() && tests.len() >= 2 {
                        let r = poisson_checks(g, s, c, &rho, &tests);
                        out.casimir = Some(r.clone().map(|x| x.0));
                        out.jacobi = Some(r.clone().map(|x| x.1));
                        out.flow = Some(r.map(|x| x.2));
                    }
                }
                Err(e) => out.relation = Some(Err(e.to_string())),
            }
            if with_forms {
                let mut rng = point_rng(cfg.seed, STREAM_FORMS | i);
                let fc = form_checks(&forms, &mut rng);
                out.closed = Some(fc.as_ref().map(|x| x.closed).map_err(Clone::clone));
                out.invariance = Some(fc.as_ref().map(|x| x.invariance).map_err(Clone::clone));
                out.momentum = Some(fc.map(|x| x.momentum));
                let mut rng = point_rng(cfg.seed, STREAM_ZERO_LOCUS | i);
                let zl = zero_locus_checks(&forms, &mut rng);
                out.rank = Some(zl.clone().map(|x| x.0));
                out.reduction = Some(zl.map(|x| x.1));
            }
            out
        })
        .collect();

    let tol = &cfg.tolerances;
    let collect_f = |f: fn(&PointChecks) -> &Option<Result<f64, String>>| -> Vec<Result<f64, String>> {
        points.iter().filter_map(|p| f(p).clone()).collect()
    };
    let collect_b = |f: fn(&PointChecks) -> &Option<Result<bool, String>>| -> Vec<Result<bool, String>> {
        points.iter().filter_map(|p| f(p).clone()).collect()
    };
    report.record(fold_record("relation_residual", tol.relation, &collect_f(|p| &p.relation)));
    report.record(fold_record("complex_exactness", tol.complex, &collect_f(|p| &p.complex)));
    report.record(fold_record("fox_diagram", tol.diagram, &collect_f(|p| &p.diagram)));
    report.record(fold_exact("cohomology_dimensions", &collect_b(|p| &p.euler)));
    if with_forms {
        report.record(fold_record("form_closedness", tol.closed, &collect_f(|p| &p.closed)));
        report.record(fold_record("form_invariance", tol.invariance, &collect_f(|p| &p.invariance)));
        report.record(fold_record("momentum_property", tol.momentum, &collect_f(|p| &p.momentum)));
        report.record(fold_exact("zero_locus_full_rank", &collect_b(|p| &p.rank)));
        report.record(fold_exact("reduction_conditions", &collect_b(|p| &p.reduction)));
    }
    let smooth = points.iter().filter(|p| p.casimir.is_some()).count();
    if cfg.samples > 0 && smooth == 0 {
        report.record(Record::exact("smooth_points", 1, cfg.samples).with_detail("no sampled point is smooth"));
    } else {
        report.record(fold_record("casimir", tol.casimir, &collect_f(|p| &p.casimir)));
        report.record(fold_record("jacobi", tol.jacobi, &collect_f(|p| &p.jacobi)));
        report.record(fold_record("flow_oracle", tol.flow, &collect_f(|p| &p.flow)));
    }
    Ok(report)
}

// ---------------------------------------------------------------- cohomology

pub fn cmd_cohomology(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let st = setup(cfg)?;
    let mut report = Report::new("cohomology", cfg, conventions(cfg));
    let (g, s, c) = (&st.group, &st.surface, &st.chain);
    type Row = Result<(f64, [CohomologyDims; 3], f64, bool), String>;
    let rows: Vec<Row> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let rho = sample_rep(g, s, c, cfg.seed, i, &st.mode).map_err(|e| e.to_string())?;
            let mut dims = Vec::with_capacity(3);
            let mut cc: f64 = 0.0;
            let mut euler = true;
            for v in [Variant::Absolute, Variant::Parabolic, Variant::Relative] {
                let k = build_complex(g, &rho.phi, s, v).map_err(|e| e.to_string())?;
                cc = cc.max(k.cc_residual);
                let d = cohomology_dims(&k, RANK_TOL).map_err(|e| e.to_string())?;
                euler &= chi(&d) == k.euler_characteristic();
                dims.push(d);
            }
            Ok((rho.relation_residual, [dims[0], dims[1], dims[2]], cc, euler))
        })
        .collect();

    let mut table = Table::new(
        "cohomology",
        &["index", "relation_residual", "absolute", "parabolic", "relative", "cc_residual", "status"],
    );
    let fmt = |d: &CohomologyDims| format!("{} {} {}", d.h0, d.h1, d.h2);
    let mut cc = Vec::new();
    let mut iso = Vec::new();
    let mut euler = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match row {
            Ok((rel, dims, res, chi_ok)) => {
                table.push(vec![
                    json!(i),
                    json!(rel),
                    json!(fmt(&dims[0])),
                    json!(fmt(&dims[1])),
                    json!(fmt(&dims[2])),
                    json!(res),
                    json!("ok"),
                ]);
                cc.push(Ok(*res));
                iso.push(Ok(dims[1].h0 == dims[0].h0 && dims[1].h2 == dims[2].h2));
                euler.push(Ok(*chi_ok));
            }
            Err(e) => {
                table.push(vec![json!(i), Value::Null, Value::Null, Value::Null, Value::Null, Value::Null, json!(e)]);
                cc.push(Err(e.clone()));
            }
        }
    }
    report.record(fold_record("complex_exactness", cfg.tolerances.complex, &cc));
    report.record(fold_exact("euler_characteristic", &euler));
    report.record(fold_exact("boundary_isomorphisms", &iso));

    let phi = Assignment::new(s.group_generators().into_iter().map(|x| (x, g.identity())));
    let trivial = build_complex(g, &phi, s, Variant::Parabolic)
        .and_then(|k| cohomology_dims(&k, RANK_TOL))
        .map(|dm| (dm.h0, dm.h1, dm.h2) == (g.dim(), 2 * s.genus * g.dim(), g.dim()));
    report.record(fold_exact("trivial_representation", &[trivial.map_err(|e| e.to_string())]));
    report.tables.push(table);
    Ok(report)
}

// ---------------------------------------------------------------- sample

pub fn cmd_sample(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let st = setup(cfg)?;
    let mut report = Report::new("sample", cfg, conventions(cfg));
    let (g, s, c) = (&st.group, &st.surface, &st.chain);
    let words = default_wilson_words(s);
    let rows: Vec<Result<(RepPoint<f64>, Vec<Vec<f64>>, Vec<f64>), String>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let rho = sample_rep(g, s, c, cfg.seed, i, &st.mode).map_err(|e| e.to_string())?;
            let leaves = leaf_coordinates(g, &rho).map_err(|e| e.to_string())?;
            let values = words
                .iter()
                .map(|w| w.evaluate(&rho.phi))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| e.to_string())?;
            Ok((rho, leaves, values))
        })
        .collect();

    let mut columns: Vec<String> = ["index", "relation_residual", "h0", "h1", "omega_rank", "smooth", "classes"]
        .map(String::from)
        .to_vec();
    columns.extend(words.iter().map(|w| w.label()));
    columns.push("status".into());
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("samples", &col_refs);
    let mut residuals = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match row {
            Ok((rho, leaves, values)) => {
                let classes = leaves
                    .iter()
                    .map(|nu| nu.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" "))
                    .collect::<Vec<_>>()
                    .join("; ");
                let mut r = vec![
                    json!(i),
                    json!(rho.relation_residual),
                    json!(rho.flags.h0),
                    json!(rho.flags.h1),
                    json!(rho.flags.omega_rank),
                    json!(rho.flags.is_smooth()),
                    json!(classes),
                ];
                r.extend(values.iter().map(|v| json!(v)));
                r.push(json!("ok"));
                table.push(r);
                residuals.push(Ok(rho.relation_residual));
            }
            Err(e) => {
                let mut r = vec![json!(i)];
                r.resize(columns.len() - 1, Value::Null);
                r.push(json!(e));
                table.push(r);
                residuals.push(Err(e.clone()));
            }
        }
    }
    report.record(fold_record("relation_residual", cfg.tolerances.relation, &residuals));
    report.tables.push(table);
    Ok(report)
}

// ---------------------------------------------------------------- bracket

/// Default torus point with `nu_1 - nu_n = t`, evenly spaced.
fn spread_point(n: usize, t: f64) -> Vec<f64> {
    (0..n)
        .map(|i| t * ((n - 1) as f64 / 2.0 - i as f64) / (n - 1) as f64)
        .collect()
}

fn default_path(spec: LieGroupSpec, boundaries: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = spec.n();
    let fixed = |k: usize| spread_point(n, 0.23 + 0.07 * k as f64);
    let start = (0..boundaries).map(|k| if k == 0 { spread_point(n, 0.2) } else { fixed(k) }).collect();
    let end = (0..boundaries).map(|k| if k == 0 { spread_point(n, 0.4) } else { fixed(k) }).collect();
    (start, end)
}

pub fn cmd_bracket(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let st = setup(cfg)?;
    let spec = cfg.spec()?;
    let (g, s, c) = (&st.group, &st.surface, &st.chain);
    if s.boundaries == 0 {
        return Err(ConfigError::Invalid("bracket paths need at least one boundary circle".into()));
    }
    let f = parse_invariant(&cfg.bracket.f)?;
    let h = parse_invariant(&cfg.bracket.g)?;
    check_invariant(&f, s)?;
    check_invariant(&h, s)?;
    let (mut start, mut end) = (cfg.bracket.start.clone(), cfg.bracket.end.clone());
    if start.is_empty() && end.is_empty() {
        (start, end) = default_path(spec, s.boundaries);
    }
    if start.len() != s.boundaries || end.len() != s.boundaries {
        return Err(ConfigError::Invalid(format!(
            "bracket path needs start and end classes for {} boundary circles",
            s.boundaries
        )));
    }
    let mut echo = cfg.clone();
    echo.bracket.start = start.clone();
    echo.bracket.end = end.clone();
    let mut report = Report::new("bracket", &echo, conventions(cfg));

    let steps = cfg.bracket.steps;
    let mut path = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let nus: Vec<Vec<f64>> = start
            .iter()
            .zip(&end)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
            .collect();
        path.push((t, class_targets(spec, &nus)?));
    }
    let pairs = [(f.clone(), h.clone()), (f.clone(), f.clone())];
    let mut table = Table::new(
        "bracket_path",
        &["parameter", "classes", "status", &format!("{{{}, {}}}", f.label(), h.label()), &format!("{{{}, {}}}", f.label(), f.label()), "casimir"],
    );
    match bracket_path(g, s, c, cfg.seed, &path, &pairs) {
        Ok(rows) => {
            for r in &rows {
                let classes = r
                    .classes
                    .iter()
                    .map(|nu| nu.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" "))
                    .collect::<Vec<_>>()
                    .join("; ");
                let status = if r.smooth { "ok" } else { "not_smooth" };
                table.push(vec![
                    json!(r.parameter),
                    json!(classes),
                    json!(status),
                    json!(r.brackets[0]),
                    json!(r.brackets[1]),
                    json!(r.casimir),
                ]);
            }
            let smooth = rows.iter().filter(|r| r.smooth).count();
            let casimir = worst(rows.iter().filter_map(|r| r.casimir));
            let self_bracket = worst(rows.iter().filter_map(|r| r.brackets[1]).map(f64::abs));
            report.record(Record::bound("casimir", casimir, cfg.tolerances.casimir, smooth));
            report.record(Record::bound("self_bracket", self_bracket, cfg.tolerances.self_bracket, smooth));
            report.record(Record::bound("continuity_slope", continuity_bound(&rows, 0), cfg.tolerances.slope, smooth));
            report.record(Record::exact("smooth_rows", rows.len() - smooth, rows.len()));
        }
        Err(e) => report.record(Record::error("bracket_path", cfg.tolerances.casimir, e)),
    }
    report.tables.push(table);
    Ok(report)
}
