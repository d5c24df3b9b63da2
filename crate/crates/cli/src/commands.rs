//! The five experiments. Each returns a sorted [`RunReport`].

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use parlab::energy::{
    additive_energy, energy_bound_report, energy_extremizer_search, EnergyMethod, EnergyRegime, EnergyReport,
    PointSubset, QUADRUPLE_LIMIT,
};
use parlab::norms::{fit_slope, necessary_exponents, omega_witness, profile_for, scaling_scan, table_rows, FieldClass};
use parlab::paraboloid::{maximal_isotropic_subspace, subspace_in_paraboloid};
use parlab::report::params;
use parlab::{CheckReport, Exponent, FieldContext, ParaboloidGeometry, SearchParams};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, Fault};
use crate::error::{CliError, CliResult};
use crate::run::{check_table, CaseResult, RunReport, Table};
use crate::suites::{verify_cell, SuiteSizes, IDENTITY_TOL};

/// Phase applied to the Gauss sum by the `gauss_sum` fault.
const FAULT_PHASE: f64 = 0.5;

/// Slope tolerance of the witness growth fit.
pub const WITNESS_SLOPE_TOL: f64 = 0.05;

/// Constant allowed in front of the even-dimension energy bound.
pub const ENERGY_CONSTANT: f64 = 8.0;

pub fn run(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    match cfg.experiment {
        Experiment::Verify => cmd_verify(cfg),
        Experiment::Scan => cmd_scan(cfg),
        Experiment::Witness => cmd_witness(cfg),
        Experiment::Energy => cmd_energy(cfg),
        Experiment::Report => cmd_report(cfg),
    }
}

fn search_params(cfg: &ExperimentConfig) -> SearchParams {
    SearchParams { restarts: cfg.restarts, max_iter: cfg.max_iter, tol: cfg.tol, seed: cfg.seed }
}

/// Every (d, field) pair; an empty grid is an error.
fn cells(cfg: &ExperimentConfig) -> CliResult<Vec<(usize, Arc<FieldContext>)>> {
    let fields = cfg.fields()?;
    let cells: Vec<_> = cfg.d.iter().flat_map(|&d| fields.iter().map(move |f| (d, f.clone()))).collect();
    if cells.is_empty() {
        return Err(CliError::Usage("no cases".into()));
    }
    for (d, ctx) in &cells {
        if *d < 2 {
            return Err(CliError::Usage(format!("d must be at least 2, got {d}")));
        }
        ctx.grid_len(*d)?;
    }
    Ok(cells)
}

fn with_fault(ctx: &Arc<FieldContext>, fault: Option<Fault>) -> Arc<FieldContext> {
    match fault {
        None => ctx.clone(),
        Some(Fault::GaussSum) => {
            let g = ctx.gauss_sum() * Complex64::from_polar(1.0, FAULT_PHASE);
            Arc::new(ctx.as_ref().clone().with_gauss_sum_override(g))
        }
    }
}

fn pair_label(p: Exponent, r: Exponent) -> String {
    format!("p={p} r={r}")
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    let cells = cells(cfg)?;
    let sizes = SuiteSizes { samples: cfg.samples, machinery_samples: cfg.machinery_samples };
    let search = search_params(cfg);
    let cases = cells
        .par_iter()
        .map(|(d, ctx)| {
            let ctx = with_fault(ctx, cfg.fault_injection);
            let mut case = CaseResult::new(*d, Some(ctx.q()), "verify");
            case.checks = verify_cell(&ctx, *d, sizes, search, cfg.seed)?;
            Ok(case)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let table = check_table(&cases);
    Ok(RunReport::new(cfg.clone(), cases, table, start.elapsed()))
}

pub fn cmd_scan(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    cells(cfg)?;
    let fields = cfg.fields()?;
    if fields.len() < 3 {
        return Err(CliError::Usage(format!("scan needs at least 3 values of q, got {}", fields.len())));
    }
    if cfg.pairs.is_empty() {
        return Err(CliError::Usage("no cases".into()));
    }
    let jobs: Vec<(usize, Exponent, Exponent)> =
        cfg.d.iter().flat_map(|&d| cfg.pairs.iter().map(move |&(p, r)| (d, p, r))).collect();
    let search = search_params(cfg);
    let results = jobs
        .par_iter()
        .map(|&(d, p, r)| Ok((d, p, r, scaling_scan(&fields, d, p, r, search)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&[
        "d",
        "q",
        "p_num",
        "p_den",
        "r_num",
        "r_den",
        "value",
        "method",
        "restarts",
        "iterations",
        "converged",
        "seed",
        "slope",
    ]);
    let mut cases = Vec::new();
    for (d, p, r, (slope, estimates)) in results {
        let mut case = CaseResult::new(d, None, pair_label(p, r));
        let mut recompute = Vec::new();
        let mut dual = Vec::new();
        for est in &estimates {
            let cp =
                params([("d", d.to_string()), ("q", est.q.to_string()), ("p", p.to_string()), ("r", r.to_string())]);
            let again = est.recompute()?;
            recompute.push(CheckReport::equal(
                "estimate_recompute",
                cp.clone(),
                again,
                est.value,
                IDENTITY_TOL * est.value,
            ));
            if let Some(dv) = est.dual_value {
                dual.push(CheckReport::at_most("dual_certificate", cp, dv, est.value, IDENTITY_TOL * est.value));
            }
            let row = est.row();
            table.push(vec![
                row.d.to_string(),
                row.q.to_string(),
                row.p_num.to_string(),
                row.p_den.to_string(),
                row.r_num.to_string(),
                row.r_den.to_string(),
                row.value.to_string(),
                row.method.clone(),
                row.restarts.to_string(),
                row.iterations.to_string(),
                row.converged.to_string(),
                row.seed.to_string(),
                slope.slope.to_string(),
            ]);
        }
        case.checks.extend(crate::suites::fold_by_check(recompute));
        case.checks.extend(crate::suites::fold_by_check(dual));
        let rows: Vec<_> = estimates.iter().map(|e| e.row()).collect();
        case.data = json!({ "p": p, "r": r, "slope": slope, "estimates": rows });
        cases.push(case);
    }
    Ok(RunReport::new(cfg.clone(), cases, table, start.elapsed()))
}

/// Witnesses sharing (d, p, r, k) form one growth series in q.
type SlopeKey = (usize, String, String, usize);

pub fn cmd_witness(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    let cells = cells(cfg)?;
    if cfg.pairs.is_empty() {
        return Err(CliError::Usage("no cases".into()));
    }
    let jobs: Vec<_> = cells.iter().flat_map(|c| cfg.pairs.iter().map(move |&pr| (c.clone(), pr))).collect();
    let witnesses = jobs
        .par_iter()
        .map(|((d, ctx), (p, r))| {
            let geom = Arc::new(ParaboloidGeometry::new(ctx.clone(), *d)?);
            let w = omega_witness(&geom, *p, *r)?;
            Ok((ctx.is_minus_one_square(), *p, *r, w))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&[
        "d",
        "q",
        "field_class",
        "k",
        "omega_size",
        "p",
        "r",
        "ratio",
        "predicted_exponent",
        "admissible",
    ]);
    let mut cases = Vec::new();
    let mut groups: BTreeMap<SlopeKey, Vec<(u32, f64, f64)>> = BTreeMap::new();
    for (square, p, r, w) in &witnesses {
        let class = FieldClass::classify(w.d, *square);
        let e = *w.predicted_exponent.numer() as f64 / *w.predicted_exponent.denom() as f64;
        let predicted = (w.q as f64).powf(e);
        let admissible = w.k + 1 < w.d && necessary_exponents(w.d, w.k)?.admits(*p, *r);
        let mut case = CaseResult::new(w.d, Some(w.q), pair_label(*p, *r));
        let cp = params([("d", w.d.to_string()), ("q", w.q.to_string()), ("p", p.to_string()), ("r", r.to_string())]);
        case.checks.push(CheckReport::equal("witness_closed_form", cp, w.ratio, predicted, IDENTITY_TOL * predicted));
        case.data = json!({ "witness": w, "field_class": class.to_string(), "admissible": admissible });
        table.push(vec![
            w.d.to_string(),
            w.q.to_string(),
            class.to_string(),
            w.k.to_string(),
            w.omega_size.to_string(),
            p.to_string(),
            r.to_string(),
            w.ratio.to_string(),
            w.predicted_exponent.to_string(),
            admissible.to_string(),
        ]);
        cases.push(case);
        groups.entry((w.d, p.to_string(), r.to_string(), w.k)).or_default().push((w.q, w.ratio, e));
    }
    for ((d, p, r, k), points) in groups {
        if points.len() < 2 {
            continue;
        }
        let e = points[0].2;
        let fit = fit_slope(&points.iter().map(|&(q, v, _)| (q, v)).collect::<Vec<_>>())?;
        let mut case = CaseResult::new(d, None, format!("p={p} r={r} k={k}"));
        let cp = params([("d", d.to_string()), ("p", p.clone()), ("r", r.clone()), ("k", k.to_string())]);
        case.checks.push(CheckReport::equal("witness_slope", cp.clone(), fit.slope, e, WITNESS_SLOPE_TOL));
        if e <= 0.0 {
            case.checks.push(CheckReport::at_most("witness_bounded", cp, fit.slope, 0.0, WITNESS_SLOPE_TOL));
        }
        case.data = json!({ "predicted_exponent": e, "fit": fit });
        cases.push(case);
    }
    Ok(RunReport::new(cfg.clone(), cases, table, start.elapsed()))
}

pub fn cmd_energy(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    let cells = cells(cfg)?;
    let per_cell = cells.par_iter().map(|(d, ctx)| energy_cell(cfg, *d, ctx)).collect::<CliResult<Vec<_>>>()?;
    let mut table =
        Table::new(&["d", "q", "case", "size", "energy", "regime", "cube_ratio", "mixed_ratio", "corollary_ratio"]);
    let mut max_ratio: BTreeMap<(usize, String), f64> = BTreeMap::new();
    let mut cases = Vec::new();
    for (case, report) in per_cell.into_iter().flatten() {
        let regime = json!(report.regime).as_str().unwrap_or_default().to_string();
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        table.push(vec![
            report.d.to_string(),
            report.q.to_string(),
            case.label.clone(),
            report.size.to_string(),
            report.energy.to_string(),
            regime.clone(),
            report.ratios.cube.to_string(),
            opt(report.ratios.mixed),
            opt(report.ratios.corollary),
        ]);
        if let Some(c) = report.ratios.corollary {
            let slot = max_ratio.entry((report.d, regime)).or_insert(0.0);
            *slot = slot.max(c);
        }
        cases.push(case);
    }
    for ((d, regime), ratio) in max_ratio {
        let mut case = CaseResult::new(d, None, format!("max-ratio {regime}"));
        case.data = json!({ "regime": regime, "max_corollary_ratio": ratio });
        cases.push(case);
    }
    Ok(RunReport::new(cfg.clone(), cases, table, start.elapsed()))
}

fn energy_cell(
    cfg: &ExperimentConfig,
    d: usize,
    ctx: &Arc<FieldContext>,
) -> CliResult<Vec<(CaseResult, EnergyReport)>> {
    let geom = Arc::new(ParaboloidGeometry::new(ctx.clone(), d)?);
    let q = ctx.q();
    let cp = || params([("d", d.to_string()), ("q", q.to_string())]);
    let mut out = Vec::new();

    let full = PointSubset::full(geom.clone());
    let mut case = CaseResult::new(d, Some(q), "full");
    let report = energy_bound_report(&full)?;
    if d == 2 {
        let brute = additive_energy(&full, EnergyMethod::Quadruple)? as f64;
        let qf = q as f64;
        case.checks.push(CheckReport::equal("energy_full_parabola", cp(), brute, 2.0 * qf * qf - qf, 0.0));
        case.checks.push(CheckReport::equal("energy_methods", cp(), report.energy as f64, brute, 0.0));
    }
    case.data = json!({ "report": report });
    out.push((case, report));

    let w = maximal_isotropic_subspace(ctx.clone(), d)?;
    let omega = PointSubset::new(geom.clone(), subspace_in_paraboloid(&w, &geom)?)?;
    let report = energy_bound_report(&omega)?;
    let mut case = CaseResult::new(d, Some(q), "omega");
    let n = omega.len() as f64;
    case.checks.push(CheckReport::equal("energy_omega", cp(), report.energy as f64, n * n * n, 0.0));
    case.data = json!({ "report": report });
    out.push((case, report));

    for &size in &cfg.sizes {
        if size == 0 || size > geom.len() {
            continue;
        }
        let found = energy_extremizer_search(&geom, size, cfg.trials, cfg.seed)?;
        let report = found.report.clone();
        let mut case = CaseResult::new(d, Some(q), format!("search size={size}"));
        let mut sp = cp();
        sp.insert("size".into(), size.to_string());
        if found.best.len() <= QUADRUPLE_LIMIT {
            let quad = additive_energy(&found.best, EnergyMethod::Quadruple)? as f64;
            case.checks.push(CheckReport::equal("energy_methods", sp.clone(), quad, report.energy as f64, 0.0));
        }
        let s = size as f64;
        let energy = report.energy as f64;
        case.checks.push(CheckReport::at_most("energy_cube_bound", sp.clone(), energy, s * s * s, 0.0));
        case.checks.push(CheckReport::at_most("energy_diagonal_floor", sp.clone(), 2.0 * s * s - s, energy, 0.0));
        if let Some(c) = report.bounds.corollary {
            let check = CheckReport::at_most("energy_corollary_bound", sp, energy, ENERGY_CONSTANT * c, 0.0);
            case.checks.push(if report.regime == EnergyRegime::EvenWindow { check } else { check.informational() });
        }
        case.data = json!({
            "report": report,
            "members": found.best.members(),
            "evaluated": found.evaluated,
            "best_random_energy": found.best_random_energy,
        });
        out.push((case, report));
    }
    Ok(out)
}

/// The classes a table is printed for at dimension d, as
/// (heading, -1 square, q prime).
fn table_classes(d: usize) -> Vec<(&'static str, bool, bool)> {
    match d {
        2 => vec![("d = 2", true, true)],
        3 => vec![
            ("d = 3, -1 a square", true, true),
            ("d = 3, -1 not a square, q prime", false, true),
            ("d = 3, -1 not a square, q = p^n with n >= 2", false, false),
        ],
        _ if d.is_multiple_of(2) => vec![("even d", true, true)],
        _ if d % 4 == 1 => {
            vec![("d = 1 mod 4, -1 a square", true, true), ("d = 1 mod 4, -1 not a square", false, true)]
        }
        _ => vec![("d = 3 mod 4, -1 a square", true, true), ("d = 3 mod 4, -1 not a square", false, true)],
    }
}

/// The exponent tables as markdown.
pub fn render_tables(ds: &[usize]) -> CliResult<(String, Table, Vec<CaseResult>)> {
    let mut md = String::from("# Exponent tables for the paraboloid\n");
    let mut table = Table::new(&["d", "class", "p", "r", "source", "note"]);
    let mut cases = Vec::new();
    for &d in ds {
        for (heading, square, prime) in table_classes(d) {
            let heading = if d >= 4 { format!("d = {d}: {heading}") } else { heading.to_string() };
            let rows = table_rows(d, square, prime)?;
            let profile = profile_for(d, square, prime)?;
            md += &format!("\n## {heading}\n\n| p | r | source | note |\n|---|---|---|---|\n");
            for row in &rows {
                md += &format!("| {} | {} | {} | {} |\n", row.p, row.r, row.source, row.note);
                table.push(vec![
                    d.to_string(),
                    heading.clone(),
                    row.p.to_string(),
                    row.r.to_string(),
                    row.source.to_string(),
                    row.note.to_string(),
                ]);
            }
            let (cp, cr) = profile.corner_exponents;
            md += &format!(
                "\nclass {}, |Omega| = q^{}; critical corner (p, r) = ({cp}, {cr}); conjectured r at p = 2: {}; \
                 Stein-Tomas r: {}\n",
                profile.field_class, profile.k, profile.conjectured_r, profile.stein_tomas_r
            );
            let mut case = CaseResult::new(d, None, heading.clone());
            let pp = params([("d", d.to_string()), ("class", profile.field_class.to_string())]);
            let ordered = CheckReport::equal("exponent_ordering", pp, profile.ordering_holds() as u8 as f64, 1.0, 0.0);
            case.checks.push(ordered);
            case.data = json!({ "profile": profile, "rows": rows });
            cases.push(case);
        }
    }
    Ok((md, table, cases))
}

pub fn cmd_report(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    if cfg.d.is_empty() {
        return Err(CliError::Usage("no cases".into()));
    }
    if let Some(&d) = cfg.d.iter().find(|&&d| d < 2) {
        return Err(CliError::Usage(format!("d must be at least 2, got {d}")));
    }
    let (md, table, cases) = render_tables(&cfg.d)?;
    let mut report = RunReport::new(cfg.clone(), cases, table, start.elapsed());
    report.markdown = Some(md);
    Ok(report)
}
