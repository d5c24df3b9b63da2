//! The exact-identity suites run by `verify`, one cell (d, q) at a time.
//!
//! Sampled checks are folded into one report per check: the worst sample is
//! kept, with `samples` and `failures` recorded in the parameters.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use parlab::energy::{additive_energy, EnergyMethod, PointSubset, QUADRUPLE_LIMIT};
use parlab::machinery::{
    is_regular, l2_restriction_bounds, random_regular, regular_decomposition, verify_duality_identity,
    verify_slice_inequality,
};
use parlab::norms::{exact_norm_2_2, norm_lower_bound, FieldClass};
use parlab::paraboloid::{
    expected_isotropic_dimension, extension_operator, extension_via_transform, maximal_isotropic_subspace,
    restriction_operator, subspace_in_paraboloid, surface_inner,
};
use parlab::report::params;
use parlab::transform::{convolve, fourier_forward, fourier_inverse, inner, lp_norm};
use parlab::{
    CheckReport, Exponent, FieldContext, GridFunction, Measure, ParaboloidGeometry, SearchParams, SurfaceFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance of every floating-point identity.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Depth of the dyadic decomposition.
pub const DECOMPOSITION_DEPTH: usize = 40;

/// Sample counts for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    pub samples: usize,
    pub machinery_samples: usize,
}

fn cell_params(ctx: &FieldContext, d: usize) -> BTreeMap<String, String> {
    params([("d", d.to_string()), ("q", ctx.q().to_string())])
}

/// A generator private to one (seed, suite, d, q).
fn rng_for(seed: u64, suite: u64, d: usize, q: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite << 48 | (d as u64) << 32 | q as u64);
    rng
}

fn failed(check: &str, p: BTreeMap<String, String>, err: impl std::fmt::Display) -> CheckReport {
    let mut p = p;
    p.insert("error".into(), err.to_string());
    CheckReport::equal(check, p, f64::NAN, 0.0, 0.0)
}

/// Keeps the worst of a batch of reports of the same check: a failure if any,
/// otherwise the largest `badness`.
pub fn fold_worst(reports: Vec<CheckReport>, badness: impl Fn(&CheckReport) -> f64) -> Option<CheckReport> {
    let n = reports.len();
    let failures = reports.iter().filter(|r| !r.ok()).count();
    let key = |r: &CheckReport| (!r.ok(), badness(r));
    let mut worst = reports.into_iter().reduce(|a, b| {
        let (ka, kb) = (key(&a), key(&b));
        if kb.0 & !ka.0 || (kb.0 == ka.0 && kb.1 > ka.1) {
            b
        } else {
            a
        }
    })?;
    worst.params.insert("samples".into(), n.to_string());
    worst.params.insert("failures".into(), failures.to_string());
    Some(worst)
}

/// Groups reports by check name and folds each group.
pub fn fold_by_check(reports: Vec<CheckReport>) -> Vec<CheckReport> {
    let mut groups: BTreeMap<String, Vec<CheckReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.check.clone()).or_default().push(r);
    }
    groups
        .into_values()
        .filter_map(|g| {
            fold_worst(g, |r| if r.lhs.is_finite() && r.rhs.is_finite() { relative_gap(r) } else { f64::MAX })
        })
        .collect()
}

fn relative_gap(r: &CheckReport) -> f64 {
    (r.lhs - r.rhs) / (1.0 + r.rhs.abs())
}

fn max_rel(check: &str, p: BTreeMap<String, String>, errors: &[f64]) -> CheckReport {
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let mut report = CheckReport::at_most(check, p, worst, IDENTITY_TOL, 0.0);
    report.params.insert("samples".into(), errors.len().to_string());
    report.pass &= errors.iter().all(|e| e.is_finite());
    report
}

/// Field axioms and |G_1|^2 = q.
pub fn field_suite(ctx: &FieldContext) -> Vec<CheckReport> {
    let p = params([("q", ctx.q().to_string())]);
    let axioms = match ctx.check_axioms() {
        Ok(()) => CheckReport::equal("field_axioms", p.clone(), 0.0, 0.0, 0.0),
        Err(e) => failed("field_axioms", p.clone(), e),
    };
    let q = ctx.q() as f64;
    let gauss = CheckReport::equal("gauss_sum_modulus", p, ctx.gauss_sum().norm_sqr(), q, IDENTITY_TOL * q);
    vec![axioms, gauss]
}

/// The closed form of (d sigma)^v against the direct |P|-term sum at every m.
pub fn dsigma_suite(geom: &Arc<ParaboloidGeometry>) -> CheckReport {
    let p = cell_params(geom.ctx(), geom.d());
    let run = || -> parlab::Result<f64> {
        let direct = extension_operator(&SurfaceFunction::constant(geom.clone(), Complex64::new(1.0, 0.0)))?;
        let closed = parlab::paraboloid::dsigma_inverse_grid(geom)?;
        direct.max_abs_diff(&closed)
    };
    match run() {
        Ok(err) => CheckReport::at_most("dsigma_explicit", p, err, IDENTITY_TOL, 0.0),
        Err(e) => failed("dsigma_explicit", p, e),
    }
}

/// Plancherel, inversion and the convolution theorem on random functions.
pub fn transform_suite(ctx: &Arc<FieldContext>, d: usize, samples: usize, seed: u64) -> Vec<CheckReport> {
    let p = cell_params(ctx, d);
    let mut rng = rng_for(seed, 1, d, ctx.q());
    let two = Exponent::int(2);
    let (mut planch, mut inv, mut conv) = (Vec::new(), Vec::new(), Vec::new());
    let run = |rng: &mut ChaCha8Rng, planch: &mut Vec<f64>, inv: &mut Vec<f64>, conv: &mut Vec<f64>| {
        for _ in 0..samples {
            let g = GridFunction::random(ctx.clone(), d, Measure::Counting, rng)?;
            let h = GridFunction::random(ctx.clone(), d, Measure::Counting, rng)?;
            let gh = fourier_forward(&g)?;
            let n = lp_norm(&g, two);
            planch.push((lp_norm(&gh, two) - n).abs() / n);
            inv.push(fourier_inverse(&gh)?.max_abs_diff(&g)? / lp_norm(&g, Exponent::Infinity));
            let lhs = fourier_forward(&convolve(&g, &h)?)?;
            let rhs = gh.zip_with(&fourier_forward(&h)?, |a, b| a * b)?;
            conv.push(lhs.max_abs_diff(&rhs)? / lp_norm(&rhs, Exponent::Infinity));
        }
        parlab::Result::Ok(())
    };
    if let Err(e) = run(&mut rng, &mut planch, &mut inv, &mut conv) {
        return vec![failed("plancherel", p, e)];
    }
    vec![
        max_rel("plancherel", p.clone(), &planch),
        max_rel("inversion", p.clone(), &inv),
        max_rel("convolution_theorem", p, &conv),
    ]
}

/// The two extension routes agree, and restriction is the adjoint of extension.
pub fn extension_suite(geom: &Arc<ParaboloidGeometry>, samples: usize, seed: u64) -> Vec<CheckReport> {
    let ctx = geom.ctx();
    let p = cell_params(ctx, geom.d());
    let mut rng = rng_for(seed, 2, geom.d(), ctx.q());
    let (mut routes, mut duality) = (Vec::new(), Vec::new());
    let run = |rng: &mut ChaCha8Rng, routes: &mut Vec<f64>, duality: &mut Vec<f64>| {
        for _ in 0..samples {
            let f = SurfaceFunction::random(geom.clone(), rng);
            let g = GridFunction::random(ctx.clone(), geom.d(), Measure::Counting, rng)?;
            let direct = extension_operator(&f)?;
            let fast = extension_via_transform(&f)?;
            routes.push(direct.max_abs_diff(&fast)? / (1.0 + lp_norm(&direct, Exponent::Infinity)));
            let lhs = surface_inner(&restriction_operator(&g, geom)?, &f)?;
            let rhs = inner(&g, &direct)?;
            duality.push((lhs - rhs).norm() / (1.0 + lhs.norm()));
        }
        parlab::Result::Ok(())
    };
    if let Err(e) = run(&mut rng, &mut routes, &mut duality) {
        return vec![failed("extension_routes", p, e)];
    }
    vec![max_rel("extension_routes", p.clone(), &routes), max_rel("extension_duality", p, &duality)]
}

/// |W| against the case split by dimension and squareness of -1, every
/// element isotropic, and Omega = W x {0} inside P.
pub fn subspace_suite(geom: &Arc<ParaboloidGeometry>) -> Vec<CheckReport> {
    let ctx = geom.ctx();
    let d = geom.d();
    let p = cell_params(ctx, d);
    let w = match maximal_isotropic_subspace(ctx.clone(), d) {
        Ok(w) => w,
        Err(e) => return vec![failed("isotropic_size", p, e)],
    };
    let by_class = FieldClass::classify(d, ctx.is_minus_one_square()).subspace_exponent(d);
    let q = ctx.q() as f64;
    let mut out = vec![
        CheckReport::equal("isotropic_size", p.clone(), w.size() as f64, q.powi(by_class as i32), 0.0),
        CheckReport::equal(
            "isotropic_dimension",
            p.clone(),
            w.dim() as f64,
            expected_isotropic_dimension(ctx, d) as f64,
            0.0,
        ),
    ];
    let bad = w
        .elements()
        .iter()
        .filter(|v| v.iter().fold(0, |acc, &x| ctx.add(acc, ctx.mul(x, x))) != 0 || !w.is_orthogonal(v))
        .count();
    out.push(CheckReport::equal("isotropic_elements", p.clone(), bad as f64, 0.0, 0.0));
    out.push(match subspace_in_paraboloid(&w, geom) {
        Ok(omega) => CheckReport::equal("omega_in_paraboloid", p, omega.len() as f64, w.size() as f64, 0.0),
        Err(e) => failed("omega_in_paraboloid", p, e),
    });
    out
}

/// R*(2 -> 2) = q^{1/2}: the self-check of `exact_norm_2_2` and the search.
pub fn exact_l2_suite(geom: &Arc<ParaboloidGeometry>, search: SearchParams) -> Vec<CheckReport> {
    let p = cell_params(geom.ctx(), geom.d());
    let root_q = (geom.ctx().q() as f64).sqrt();
    let exact = match exact_norm_2_2(geom) {
        Ok(v) => CheckReport::equal("exact_norm_2_2", p.clone(), v, root_q, 0.0),
        Err(e) => failed("exact_norm_2_2", p.clone(), e),
    };
    let two = Exponent::int(2);
    let search = match norm_lower_bound(geom, two, two, search) {
        Ok(est) => CheckReport::equal("norm_lower_bound_2_2", p.clone(), est.value, root_q, 1e-6),
        Err(e) => failed("norm_lower_bound_2_2", p, e),
    };
    vec![exact, search]
}

/// Duality identity, slice inequality and the exact L^2 bounds on random
/// regular functions.
pub fn machinery_suite(geom: &Arc<ParaboloidGeometry>, samples: usize, seed: u64) -> Vec<CheckReport> {
    let ctx = geom.ctx();
    let p = cell_params(ctx, geom.d());
    let mut rng = rng_for(seed, 3, geom.d(), ctx.q());
    let mut reports = Vec::new();
    for _ in 0..samples {
        let r = if rng.random_bool(0.5) { Exponent::int(2) } else { Exponent::int(4) };
        let run = |rng: &mut ChaCha8Rng| -> parlab::Result<Vec<CheckReport>> {
            let g = random_regular(geom, rng)?;
            let mut out = vec![verify_duality_identity(&g, geom)?];
            out.extend(verify_slice_inequality(&g, r, geom)?);
            out.extend(l2_restriction_bounds(&g, geom)?);
            Ok(out)
        };
        match run(&mut rng) {
            Ok(r) => reports.extend(r),
            Err(e) => reports.push(failed("machinery", p.clone(), e)),
        }
    }
    fold_by_check(reports)
}

/// A random function whose moduli spread over 2^{-50}..1 so that every
/// bucket and the residual are exercised.
pub fn random_wide_range(ctx: &Arc<FieldContext>, d: usize, rng: &mut impl Rng) -> parlab::Result<GridFunction> {
    let mut g = GridFunction::random(ctx.clone(), d, Measure::Counting, rng)?;
    for v in g.values_mut() {
        *v *= 2f64.powf(-rng.random_range(0.0..50.0));
    }
    Ok(g)
}

/// Dyadic decomposition: regular pieces, exact reconstruction up to the
/// residual, residual size and piece count.
pub fn decomposition_suite(ctx: &Arc<FieldContext>, d: usize, samples: usize, seed: u64) -> Vec<CheckReport> {
    let p = cell_params(ctx, d);
    let mut rng = rng_for(seed, 4, d, ctx.q());
    let max_pieces = DECOMPOSITION_DEPTH as f64 * (d as f64 * (ctx.q() as f64).log2() + 1.0);
    let mut reports = Vec::new();
    for _ in 0..samples {
        let run = |rng: &mut ChaCha8Rng| -> parlab::Result<Vec<CheckReport>> {
            let g = random_wide_range(ctx, d, rng)?;
            let dec = regular_decomposition(&g, DECOMPOSITION_DEPTH)?;
            let irregular = dec.pieces.iter().filter(|piece| !is_regular(&piece.func).is_regular()).count();
            let recon = dec.reconstruct().max_abs_diff(&g)? / dec.max_abs;
            let residual = lp_norm(&dec.residual, Exponent::Infinity);
            Ok(vec![
                CheckReport::equal("decomposition_regular", p.clone(), irregular as f64, 0.0, 0.0),
                CheckReport::at_most("decomposition_reconstruction", p.clone(), recon, 1e-12, 0.0),
                CheckReport::at_most(
                    "decomposition_residual",
                    p.clone(),
                    residual,
                    dec.max_abs * 2f64.powi(-(DECOMPOSITION_DEPTH as i32)),
                    0.0,
                ),
                CheckReport::at_most("decomposition_piece_count", p.clone(), dec.pieces.len() as f64, max_pieces, 0.0),
            ])
        };
        match run(&mut rng) {
            Ok(r) => reports.extend(r),
            Err(e) => reports.push(failed("decomposition", p.clone(), e)),
        }
    }
    fold_by_check(reports)
}

/// Both energy methods on random subsets of every size class.
pub fn energy_method_suite(geom: &Arc<ParaboloidGeometry>, samples: usize, seed: u64) -> CheckReport {
    let p = cell_params(geom.ctx(), geom.d());
    let mut rng = rng_for(seed, 5, geom.d(), geom.ctx().q());
    let limit = geom.len().min(QUADRUPLE_LIMIT);
    let mut mismatches = 0usize;
    for _ in 0..samples {
        let size = rng.random_range(1..=limit);
        let members = rand::seq::index::sample(&mut rng, geom.len(), size).into_vec();
        let run = || -> parlab::Result<bool> {
            let e = PointSubset::new(geom.clone(), members)?;
            Ok(additive_energy(&e, EnergyMethod::Quadruple)? == additive_energy(&e, EnergyMethod::Convolution)?)
        };
        match run() {
            Ok(true) => {}
            Ok(false) => mismatches += 1,
            Err(e) => return failed("energy_methods", p, e),
        }
    }
    let mut report = CheckReport::equal("energy_methods", p, mismatches as f64, 0.0, 0.0);
    report.params.insert("samples".into(), samples.to_string());
    report
}

/// Every suite for one cell.
pub fn verify_cell(
    ctx: &Arc<FieldContext>,
    d: usize,
    sizes: SuiteSizes,
    search: SearchParams,
    seed: u64,
) -> parlab::Result<Vec<CheckReport>> {
    let geom = Arc::new(ParaboloidGeometry::new(ctx.clone(), d)?);
    let mut out = field_suite(ctx);
    out.push(dsigma_suite(&geom));
    out.extend(transform_suite(ctx, d, sizes.samples, seed));
    out.extend(extension_suite(&geom, sizes.samples, seed));
    out.extend(subspace_suite(&geom));
    out.extend(exact_l2_suite(&geom, search));
    out.extend(machinery_suite(&geom, sizes.machinery_samples, seed));
    out.extend(decomposition_suite(ctx, d, sizes.machinery_samples, seed));
    out.push(energy_method_suite(&geom, sizes.machinery_samples, seed));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cell_passes() {
        let ctx = Arc::new(FieldContext::new(3).unwrap());
        let sizes = SuiteSizes { samples: 5, machinery_samples: 5 };
        let reports = verify_cell(&ctx, 2, sizes, SearchParams::default(), 0).unwrap();
        for r in &reports {
            assert!(r.ok(), "{r:?}");
        }
        let names: Vec<&str> = reports.iter().map(|r| r.check.as_str()).collect();
        for name in ["dsigma_explicit", "plancherel", "slice_inequality", "slice_restricted_equality", "energy_methods"]
        {
            assert!(names.contains(&name), "{name} missing");
        }
    }

    #[test]
    fn fold_keeps_failure() {
        let p = BTreeMap::new();
        let reports = vec![
            CheckReport::at_most("x", p.clone(), 1.0, 2.0, 0.0),
            CheckReport::at_most("x", p.clone(), 3.0, 2.0, 0.0),
            CheckReport::at_most("x", p, 1.9, 2.0, 0.0),
        ];
        let worst = fold_worst(reports, relative_gap).unwrap();
        assert!(!worst.pass);
        assert_eq!(worst.params["failures"], "1");
        assert_eq!(worst.params["samples"], "3");
    }
}
