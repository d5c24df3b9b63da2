//! Alternating maximization of Re<(f d sigma)^v, g> over the unit balls of
//! L^p(P, d sigma) and L^{r'}(F_q^d, dm).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::paraboloid::{
    extension_via_transform, restriction_operator, surface_lp_norm, ParaboloidGeometry, SurfaceFunction,
};
use crate::transform::{lp_norm, weighted_lp, GridFunction};

/// Relative slack allowed when asserting that the objective never decreases.
const MONOTONE_SLACK: f64 = 1e-9;

pub(crate) struct AscentRun {
    pub f: SurfaceFunction,
    pub g: GridFunction,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn phase(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / n
    }
}

/// The x with ||x||_s <= 1 (weighted by `weight`) maximizing Re sum weight x conj(v).
pub(crate) fn dual_maximizer(v: &[Complex64], s: Exponent, weight: f64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    match s.conjugate() {
        Exponent::Infinity => {
            let mut best = 0;
            for (i, z) in v.iter().enumerate() {
                if z.norm() > v[best].norm() {
                    best = i;
                }
            }
            let mut x = vec![zero; v.len()];
            x[best] = phase(v[best]) / weight;
            x
        }
        sc if s.is_infinite() => {
            debug_assert_eq!(sc, Exponent::int(1));
            v.iter().map(|&z| phase(z)).collect()
        }
        sc => {
            let norm = weighted_lp(v, sc, weight);
            if norm == 0.0 {
                return vec![zero; v.len()];
            }
            let a = sc.to_f64() - 1.0;
            v.iter().map(|&z| phase(z) * (z.norm() / norm).powf(a)).collect()
        }
    }
}

/// ||(f d sigma)^v||_r / ||f||_p.
pub(crate) fn extension_ratio(f: &SurfaceFunction, p: Exponent, r: Exponent) -> Result<f64> {
    let den = surface_lp_norm(f, p);
    if den == 0.0 {
        return Err(Error::Domain("witness must be nonzero".into()));
    }
    Ok(lp_norm(&extension_via_transform(f)?, r) / den)
}

fn check_monotone(before: f64, after: f64) -> Result<()> {
    if after < before * (1.0 - MONOTONE_SLACK) - 1e-12 {
        return Err(Error::Internal(format!("ascent objective decreased from {before} to {after}")));
    }
    Ok(())
}

pub(crate) fn run(
    geom: &Arc<ParaboloidGeometry>,
    start: &SurfaceFunction,
    p: Exponent,
    r: Exponent,
    max_iter: usize,
    tol: f64,
) -> Result<AscentRun> {
    let norm = surface_lp_norm(start, p);
    if norm == 0.0 {
        return Err(Error::Domain("ascent needs a nonzero start".into()));
    }
    let n = geom.len() as f64;
    let mut f = SurfaceFunction::new(geom.clone(), start.values().iter().map(|v| v / norm).collect())?;
    let mut u = extension_via_transform(&f)?;
    let mut objective = lp_norm(&u, r);
    let mut g = None;
    let mut iterations = 0;
    let mut converged = false;
    let r_dual = r.conjugate();
    let p_dual = p.conjugate();
    while iterations < max_iter.max(1) {
        iterations += 1;
        let g_next =
            GridFunction::new(geom.ctx().clone(), geom.d(), u.measure(), dual_maximizer(u.values(), r_dual, 1.0))?;
        let h = restriction_operator(&g_next, geom)?;
        let dual_objective = surface_lp_norm(&h, p_dual);
        check_monotone(objective, dual_objective)?;
        if dual_objective == 0.0 {
            break;
        }
        let f_next = SurfaceFunction::new(geom.clone(), dual_maximizer(h.values(), p, 1.0 / n))?;
        let u_next = extension_via_transform(&f_next)?;
        let next = lp_norm(&u_next, r);
        check_monotone(dual_objective, next)?;
        let gain = (next - objective) / objective;
        f = f_next;
        u = u_next;
        g = Some(g_next);
        objective = next;
        if gain < tol {
            converged = true;
            break;
        }
    }
    let value = extension_ratio(&f, p, r)?;
    Ok(AscentRun { f, g: g.expect("at least one iteration runs"), value, iterations, converged })
}
