//! Growth of norm lower bounds in q, fitted on a log-log scale.

use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::FieldContext;
use crate::paraboloid::{maximal_isotropic_subspace, subspace_in_paraboloid, ParaboloidGeometry, SurfaceFunction};

use super::{norm_lower_bound, witness_ratio, NormEstimate, SearchParams};

/// Least-squares fit of log(value) = slope log(q) + intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub points: Vec<(u32, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Fits the points; needs at least two distinct q and positive values.
pub fn fit_slope(points: &[(u32, f64)]) -> Result<SlopeReport> {
    if points.len() < 2 || points.iter().any(|&(_, v)| v <= 0.0 || !v.is_finite()) {
        return Err(Error::Domain("a slope fit needs at least two positive values".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(q, _)| (q as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("a slope fit needs distinct q".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeReport { points: points.to_vec(), slope, intercept, residual })
}

/// Runs [`norm_lower_bound`] for every field and fits the growth in q.
pub fn scaling_scan(
    fields: &[Arc<FieldContext>],
    d: usize,
    p: Exponent,
    r: Exponent,
    params: SearchParams,
) -> Result<(SlopeReport, Vec<NormEstimate>)> {
    if fields.len() < 3 {
        return Err(Error::Domain(format!("a scan needs at least 3 values of q, got {}", fields.len())));
    }
    let estimates = fields
        .iter()
        .map(|ctx| {
            let geom = Arc::new(ParaboloidGeometry::new(ctx.clone(), d)?);
            norm_lower_bound(&geom, p, r, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(u32, f64)> = estimates.iter().map(|e| (e.q, e.value)).collect();
    Ok((fit_slope(&points)?, estimates))
}

/// The ratio attained by f = indicator of Omega.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaWitness {
    pub d: usize,
    pub q: u32,
    /// log_q |Omega|.
    pub k: usize,
    pub omega_size: usize,
    pub ratio: f64,
    /// e with ratio = q^e, namely (d-1-k)(1/p - 1) + (d-k)/r.
    pub predicted_exponent: Rational64,
}

/// Evaluates the Omega witness at (p, r) with the direct extension sum.
pub fn omega_witness(geom: &Arc<ParaboloidGeometry>, p: Exponent, r: Exponent) -> Result<OmegaWitness> {
    let ctx = geom.ctx();
    let d = geom.d();
    let w = maximal_isotropic_subspace(ctx.clone(), d)?;
    let omega = subspace_in_paraboloid(&w, geom)?;
    let f = SurfaceFunction::indicator(geom.clone(), omega.iter().copied())?;
    let k = w.dim();
    let one = Rational64::from_integer(1);
    let predicted_exponent = Rational64::from_integer((d - 1 - k) as i64) * (p.reciprocal() - one)
        + Rational64::from_integer((d - k) as i64) * r.reciprocal();
    Ok(OmegaWitness { d, q: ctx.q(), k, omega_size: omega.len(), ratio: witness_ratio(&f, p, r)?, predicted_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(u32, f64)> = [3u32, 5, 7, 11].iter().map(|&q| (q, 2.0 * (q as f64).powf(0.3))).collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope - 0.3).abs() < 1e-12);
        assert!((fit.intercept - 2f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit_slope(&[(3, 1.0)]).is_err());
        assert!(fit_slope(&[(3, 1.0), (3, 2.0)]).is_err());
    }

    #[test]
    fn omega_witness_matches_closed_form() {
        for q in [3u32, 5] {
            let geom = Arc::new(ParaboloidGeometry::new(Arc::new(FieldContext::new(q).unwrap()), 5).unwrap());
            let (p, r) = (Exponent::int(2), Exponent::ratio(5, 2).unwrap());
            let w = omega_witness(&geom, p, r).unwrap();
            assert_eq!(w.k, 2);
            assert_eq!(w.predicted_exponent, Rational64::new(1, 5));
            assert!((w.ratio - (q as f64).powf(0.2)).abs() < 1e-9);
        }
    }

    #[test]
    fn scan_needs_three_fields() {
        let fields: Vec<_> = [3, 5].iter().map(|&q| Arc::new(FieldContext::new(q).unwrap())).collect();
        assert!(scaling_scan(&fields, 2, Exponent::int(2), Exponent::int(2), SearchParams::default()).is_err());
    }
}
