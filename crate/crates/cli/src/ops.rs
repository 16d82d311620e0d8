//! Subcommand implementations. Each returns Ok(all_checks_passed);
//! configuration problems surface as errors (exit code 2).

use std::collections::BTreeMap;
use std::env;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use courant_core::algebroid::{
    verify_pullback_conditions, ChartSection, ExactChartCA, GroupAction, QuadraticLieAlgebra,
};
use courant_core::catalog;
use courant_core::config;
use courant_core::connection::{canonical_minus, levi_civita_pair};
use courant_core::duality::{
    duality_compare, pullback_metric, pullback_naturality_check, GroupChart, Side,
};
use courant_core::flow::{families, integrate_point, integrate_reduced, InvariantFamily};
use courant_core::genmetric::{to_gb, ChartMetric, PointGenMetric};
use courant_core::gric::{gric_chart, gric_point};
use courant_core::numeric;
use courant_core::quadspace::IsotropicSplitting;
use courant_core::tolerances;

use crate::output;
use crate::{Command, CommonArgs};

pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Verify {
            common,
            backend,
            algebra,
            preset,
            triple,
        } => run_verify(common, backend, algebra, preset, triple),
        Command::Gric {
            common,
            backend,
            algebra,
            preset,
            e0,
        } => run_gric(common, backend, algebra, preset, e0),
        Command::Flow {
            common,
            preset,
            algebra,
            e0,
            t_end,
            h,
            record_every,
        } => run_flow(common, preset, algebra, e0, t_end, h, record_every),
        Command::Dualize { common, triple, e0 } => run_dualize(common, triple, e0),
    }
}

fn catalog_dir() -> Option<PathBuf> {
    env::var_os("COURANT_FLOW_CATALOG").map(PathBuf::from)
}

fn resolve_algebra(name: &str) -> Result<QuadraticLieAlgebra> {
    if let Some(alg) = catalog::point_algebra(name) {
        return Ok(alg);
    }
    if let Some(dir) = catalog_dir() {
        let candidate = dir.join(format!("{name}.json"));
        if candidate.exists() {
            return Ok(config::load_algebra(&candidate, name)?);
        }
    }
    let path = Path::new(name);
    if path.exists() {
        return Ok(config::load_algebra(path, name)?);
    }
    bail!(
        "unknown algebra '{name}' (catalog: {:?}; set COURANT_FLOW_CATALOG for user files)",
        catalog::point_algebra_names()
    );
}

fn parse_preset_spec(spec: &str) -> (String, BTreeMap<String, f64>) {
    let mut params = BTreeMap::new();
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.to_string(), Some(r)),
        None => (spec.to_string(), None),
    };
    if let Some(rest) = rest {
        for kv in rest.split(',') {
            if let Some((k, v)) = kv.split_once('=') {
                if let Ok(value) = v.parse::<f64>() {
                    params.insert(k.to_string(), value);
                }
            }
        }
    }
    (name, params)
}

fn resolve_chart_background(spec: &str) -> Result<(ExactChartCA, ChartMetric)> {
    let (name, params) = parse_preset_spec(spec);
    if let Ok(pair) = catalog::chart_preset(&name, &params) {
        return Ok(pair);
    }
    if let Some(dir) = catalog_dir() {
        let candidate = dir.join(format!("{name}.json"));
        if candidate.exists() {
            let ca = config::load_chart(&candidate)?;
            let d = ca.chart_dim();
            return Ok((ca, ChartMetric::flat(d)));
        }
    }
    let path = Path::new(spec);
    if path.exists() {
        let ca = config::load_chart(path)?;
        let d = ca.chart_dim();
        return Ok((ca, ChartMetric::flat(d)));
    }
    bail!(
        "unknown chart preset '{spec}' (catalog: {:?})",
        catalog::chart_preset_names()
    );
}

fn parse_e0(spec: &str, k: usize) -> Result<DMatrix<f64>> {
    if spec == "identity" {
        return Ok(DMatrix::identity(k, k));
    }
    if let Some(v) = spec.strip_prefix("scale:") {
        let s: f64 = v.parse().context("scale value")?;
        return Ok(DMatrix::identity(k, k) * s);
    }
    if let Some(v) = spec.strip_prefix("diag:") {
        let entries: Vec<f64> = v
            .split(',')
            .map(|t| t.parse::<f64>().context("diag entry"))
            .collect::<Result<_>>()?;
        if entries.len() != k {
            bail!("diag needs {k} entries");
        }
        return Ok(DMatrix::from_diagonal(&DVector::from_vec(entries)));
    }
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let rows: Vec<Vec<f64>> = serde_json::from_str(&text)?;
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            bail!("e0 matrix must be {k}x{k}");
        }
        return Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]));
    }
    bail!("cannot parse --e0 '{spec}' (identity | scale:v | diag:a,b,.. | file.json)");
}

/// Splitting used to read (g, b) for a bare point algebra.
fn point_splitting(alg: &QuadraticLieAlgebra) -> Result<IsotropicSplitting> {
    let n = alg.dim();
    if n % 2 != 0 {
        bail!("point algebra must be even dimensional");
    }
    let split_gram = courant_core::quadspace::Pairing::split(n / 2);
    if (alg.pairing().gram() - split_gram.gram()).amax() < 1e-12 {
        return Ok(IsotropicSplitting::standard(n / 2));
    }
    if alg.name() == "su2_su2" {
        return Ok(catalog::su2_su2_splitting(alg));
    }
    bail!(
        "algebra '{}' has no canonical isotropic splitting; use a Manin triple",
        alg.name()
    )
}

#[derive(serde::Serialize)]
struct CheckRow {
    check: String,
    background: String,
    max_residual: f64,
    tol: f64,
    pass: bool,
}

fn emit_checks(common: &CommonArgs, label: &str, rows: Vec<CheckRow>) -> Result<bool> {
    let pass = rows.iter().all(|r| r.pass);
    let report = json!({
        "command": label,
        "seed": common.seed,
        "tolerances": output::ladder(),
        "checks": rows,
        "pass": pass,
    });
    output::write_report(common.out.as_deref(), &report)?;
    output::write_manifest(common.out.as_deref(), label, common.seed)?;
    Ok(pass)
}

fn run_verify(
    common: CommonArgs,
    backend: Option<String>,
    algebra: Option<String>,
    preset: Option<String>,
    triple: Option<String>,
) -> Result<bool> {
    if let Some(triple_name) = triple {
        return verify_triple(&common, &triple_name);
    }
    match backend.as_deref() {
        Some("point") => {
            let name = algebra.ok_or_else(|| anyhow!("--backend point needs --algebra"))?;
            let alg = resolve_algebra(&name)?;
            let tol = common.tol.unwrap_or(tolerances::POINT_STRUCTURE);
            let report = alg.check_axioms();
            let rows = vec![
                ("axiom_leibniz", report.leibniz),
                ("axiom_anchor_homomorphism", report.anchor_homomorphism),
                ("axiom_module_rule", report.module_rule),
                ("axiom_pairing_invariance", report.pairing_invariance),
                ("axiom_symmetrization", report.symmetrization),
            ]
            .into_iter()
            .map(|(check, r)| CheckRow {
                check: check.into(),
                background: name.clone(),
                max_residual: r,
                tol,
                pass: r < tol,
            })
            .collect();
            emit_checks(&common, &format!("verify point {name}"), rows)
        }
        Some("chart") => {
            let spec = preset.ok_or_else(|| anyhow!("--backend chart needs --preset"))?;
            let (ca, _metric) = resolve_chart_background(&spec)?;
            let tol = common.tol.unwrap_or(tolerances::CHART_STRUCTURE);
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let sections: Vec<ChartSection> = (0..3)
                .map(|_| ChartSection::random_polynomial(ca.chart_dim(), &mut rng))
                .collect();
            let samples = ca.sample_points(common.samples, common.seed ^ 0x5eed);
            let report = ca.check_axioms(&sections, &samples);
            let closedness = ca.closedness_residual(&samples);
            let mut rows: Vec<CheckRow> = vec![
                ("axiom_leibniz", report.leibniz),
                ("axiom_anchor_homomorphism", report.anchor_homomorphism),
                ("axiom_module_rule", report.module_rule),
                ("axiom_pairing_invariance", report.pairing_invariance),
                ("axiom_symmetrization", report.symmetrization),
            ]
            .into_iter()
            .map(|(check, r)| CheckRow {
                check: check.into(),
                background: spec.clone(),
                max_residual: r,
                tol,
                pass: r < tol,
            })
            .collect();
            rows.push(CheckRow {
                check: "h_closedness".into(),
                background: spec.clone(),
                max_residual: closedness,
                tol,
                pass: closedness < tol,
            });
            emit_checks(&common, &format!("verify chart {spec}"), rows)
        }
        _ => bail!("verify needs --backend point|chart or --triple <name>"),
    }
}

fn verify_triple(common: &CommonArgs, name: &str) -> Result<bool> {
    let triple = catalog::manin_triple(name).ok_or_else(|| {
        anyhow!(
            "unknown triple '{name}' ({:?})",
            catalog::manin_triple_names()
        )
    })?;
    let tol = common.tol.unwrap_or(tolerances::FD_FIRST);
    let m = triple.half_dim();
    let n = triple.double().dim();
    let samples = numeric::sample_box(&vec![(-0.35, 0.35); m], common.samples, common.seed);
    let mut rows = Vec::new();
    for side in [Side::A, Side::B] {
        let naturality = pullback_naturality_check(&triple, side, &samples, tol);
        rows.push(CheckRow {
            check: format!("pullback_naturality_side_{}", side.label()),
            background: name.into(),
            max_residual: naturality.max_residual,
            tol,
            pass: naturality.pass,
        });

        let chart = GroupChart::new(&triple, side);
        let auto = samples
            .iter()
            .map(|x| chart.automorphism_residual(x))
            .fold(0.0, f64::max);
        rows.push(CheckRow {
            check: format!("adjoint_automorphism_side_{}", side.label()),
            background: name.into(),
            max_residual: auto,
            tol: tolerances::ADJOINT_AUTOMORPHISM,
            pass: auto < tolerances::ADJOINT_AUTOMORPHISM,
        });

        // Action of the double through the identified anchors.
        let triple_inner = triple.clone();
        let action = GroupAction::from_fn(m, n, move |x| {
            let chart = GroupChart::new(&triple_inner, side);
            let mut r = DMatrix::zeros(m, n);
            for i in 0..n {
                let val = chart.constant_section(&numeric::basis_vector(n, i)).eval(x);
                for a in 0..m {
                    r[(a, i)] = val[a];
                }
            }
            r
        });
        let pullback = verify_pullback_conditions(triple.double(), &action, &samples);
        rows.push(CheckRow {
            check: format!("pullback_conditions_side_{}", side.label()),
            background: name.into(),
            max_residual: pullback.closure_residual.max(pullback.coisotropy_residual),
            tol,
            pass: pullback.closure_residual < tol
                && pullback.coisotropy_residual < tolerances::ADJOINT_AUTOMORPHISM
                && pullback.exact,
        });
    }
    emit_checks(common, &format!("verify triple {name}"), rows)
}

fn run_gric(
    common: CommonArgs,
    backend: String,
    algebra: Option<String>,
    preset: Option<String>,
    e0: String,
) -> Result<bool> {
    match backend.as_str() {
        "point" => {
            let name = algebra.ok_or_else(|| anyhow!("--backend point needs --algebra"))?;
            let alg = resolve_algebra(&name)?;
            let splitting = point_splitting(&alg)?;
            let e0 = parse_e0(&e0, alg.dim() / 2)?;
            let metric = PointGenMetric::from_graph(alg.pairing(), &splitting, &e0)?;
            let gric = gric_point(&alg, &metric);
            let rhs = gric.matrix() * -2.0;
            let report = json!({
                "command": "gric point",
                "algebra": name,
                "e0": matrix_rows(&e0),
                "gric_signed_frames": matrix_rows(gric.matrix()),
                "flow_rhs_signed_frames": matrix_rows(&rhs),
                "gric_inf_norm": gric.inf_norm(),
                "tolerances": output::ladder(),
            });
            output::write_report(common.out.as_deref(), &report)?;
            output::write_manifest(
                common.out.as_deref(),
                &format!("gric point {name}"),
                common.seed,
            )?;
            Ok(true)
        }
        "chart" => {
            let spec = preset.ok_or_else(|| anyhow!("--backend chart needs --preset"))?;
            let (ca, metric) = resolve_chart_background(&spec)?;
            let conn = canonical_minus(&ca, &metric, &levi_civita_pair(&metric));
            let samples = ca.sample_points(common.samples, common.seed);
            let mut rows = Vec::new();
            for x in &samples {
                let g = gric_chart(&ca, &metric, &conn, x)?;
                rows.push(json!({
                    "point": x.iter().copied().collect::<Vec<_>>(),
                    "gric_signed_frames": matrix_rows(&g.total),
                    "curvature_trace_inf": g.curvature_trace.amax(),
                    "double_torsion_inf": g.double_torsion.amax(),
                    "torsion_derivative_inf": g.torsion_derivative.amax(),
                }));
            }
            let report = json!({
                "command": "gric chart",
                "preset": spec,
                "connection": "canonical_minus(levi_civita_pair)",
                "samples": rows,
                "tolerances": output::ladder(),
            });
            output::write_report(common.out.as_deref(), &report)?;
            output::write_manifest(
                common.out.as_deref(),
                &format!("gric chart {spec}"),
                common.seed,
            )?;
            Ok(true)
        }
        other => bail!("unknown backend '{other}'"),
    }
}

fn flow_family(spec: &str) -> Result<InvariantFamily> {
    let (name, params) = parse_preset_spec(spec);
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name.as_str() {
        "round_s3" | "round_sphere" => Ok(families::round_sphere(get("r", 1.0))),
        "berger" => Ok(families::berger(get("p", 1.0), get("q", 1.0))),
        "su2_wzw" => {
            let k = get("k", 1.0);
            Ok(families::su2_bi_invariant(
                get("p0", k),
                k,
                get("lambda", 1.0),
            ))
        }
        "flat" => Ok(families::flat_torus([
            get("p1", 1.0),
            get("p2", 1.0),
            get("p3", 1.0),
        ])),
        other => bail!("unknown flow preset '{other}' (round_s3 | berger | su2_wzw | flat)"),
    }
}

fn run_flow(
    common: CommonArgs,
    preset: Option<String>,
    algebra: Option<String>,
    e0: String,
    t_end: f64,
    h: f64,
    record_every: usize,
) -> Result<bool> {
    let label;
    let (header, rows, termination) = if let Some(spec) = preset {
        label = format!("flow {spec} t_end={t_end} h={h}");
        let family = flow_family(&spec)?;
        let traj = integrate_reduced(&family, t_end, h, record_every)?;
        let np = family.param_dim();
        let mut header: Vec<String> = vec!["t".into()];
        header.extend((0..np).map(|i| format!("param_{i}")));
        header.push("gric_inf_norm".into());
        let rows: Vec<Vec<f64>> = traj
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![r.t];
                row.extend(r.values.iter().copied());
                row.push(r.gric_inf_norm);
                row
            })
            .collect();
        (header, rows, format!("{:?}", traj.termination))
    } else if let Some(name) = algebra {
        label = format!("flow point {name} t_end={t_end} h={h}");
        let alg = resolve_algebra(&name)?;
        let splitting = point_splitting(&alg)?;
        let k = alg.dim() / 2;
        let e0 = parse_e0(&e0, k)?;
        let metric = PointGenMetric::from_graph(alg.pairing(), &splitting, &e0)?;
        let traj = integrate_point(
            &alg,
            &metric,
            None::<fn(f64) -> DVector<f64>>,
            t_end,
            h,
            record_every,
        )?;
        let mut header: Vec<String> = vec!["t".into()];
        for i in 0..k {
            for j in 0..k {
                header.push(format!("e_{i}{j}"));
            }
        }
        header.push("gric_inf_norm".into());
        let mut rows = Vec::new();
        for r in &traj.rows {
            let state = courant_core::flow::point_state_metric(&alg, &metric, r)?;
            let (g, b) = to_gb(&splitting, &state)?;
            let e = g + b;
            let mut row = vec![r.t];
            for i in 0..k {
                for j in 0..k {
                    row.push(e[(i, j)]);
                }
            }
            row.push(r.gric_inf_norm);
            rows.push(row);
        }
        (header, rows, format!("{:?}", traj.termination))
    } else {
        bail!("flow needs --preset <family> or --algebra <point algebra>");
    };

    let report = json!({
        "command": label,
        "rows": rows.len(),
        "termination": termination,
        "final": rows.last(),
        "tolerances": output::ladder(),
    });
    output::write_report(common.out.as_deref(), &report)?;
    if let Some(dir) = common.out.as_deref() {
        output::write_csv(dir, "trajectory.csv", &header, &rows)?;
    }
    output::write_manifest(common.out.as_deref(), &label, common.seed)?;
    Ok(true)
}

fn run_dualize(common: CommonArgs, triple_name: String, e0: String) -> Result<bool> {
    let triple = catalog::manin_triple(&triple_name).ok_or_else(|| {
        anyhow!(
            "unknown triple '{triple_name}' ({:?})",
            catalog::manin_triple_names()
        )
    })?;
    let m = triple.half_dim();
    let e0 = parse_e0(&e0, m)?;
    let metric =
        PointGenMetric::from_graph(triple.double().pairing(), &triple.splitting(Side::A), &e0)?;
    let tol = common.tol.unwrap_or(tolerances::FD_SECOND);
    let report = duality_compare(&triple, &metric, common.samples, tol, common.seed)?;

    // Per-sample (g, b) tables for both sides.
    if let Some(dir) = common.out.as_deref() {
        for side in [Side::A, Side::B] {
            let samples = numeric::sample_box(
                &vec![(-0.32, 0.32); m],
                common.samples,
                common.seed ^ (side as u64 + 1),
            );
            let mut header: Vec<String> = (0..m).map(|a| format!("x_{a}")).collect();
            for i in 0..m {
                for j in 0..m {
                    header.push(format!("g_{i}{j}"));
                }
            }
            for i in 0..m {
                for j in 0..m {
                    header.push(format!("b_{i}{j}"));
                }
            }
            let mut rows = Vec::new();
            for x in &samples {
                let (g, b) = pullback_metric(&triple, &metric, side, x)?;
                let mut row: Vec<f64> = x.iter().copied().collect();
                for i in 0..m {
                    for j in 0..m {
                        row.push(g[(i, j)]);
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        row.push(b[(i, j)]);
                    }
                }
                rows.push(row);
            }
            output::write_csv(
                dir,
                &format!("background_side_{}.csv", side.label().to_lowercase()),
                &header,
                &rows,
            )?;
        }
    }

    let label = format!("dualize {triple_name} samples={}", common.samples);
    let full = json!({
        "command": label,
        "triple": triple_name,
        "e0": matrix_rows(&e0),
        "report": report,
        "tolerances": output::ladder(),
    });
    output::write_report(common.out.as_deref(), &full)?;
    output::write_manifest(common.out.as_deref(), &label, common.seed)?;
    Ok(report.pass)
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
