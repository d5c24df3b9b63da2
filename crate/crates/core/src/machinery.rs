//! Regular sets and functions, their dyadic decomposition, and the slice
//! argument that bounds ||g^||_{L^2(P, d sigma)} through the kernel
//! K = (d sigma)^v - delta_0.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::paraboloid::{
    dsigma_inverse_grid, extension_operator, restriction_operator, surface_lp_norm, ParaboloidGeometry, SurfaceFunction,
};
use crate::report::{params, CheckReport};
use crate::transform::{convolve, inner, lp_norm, weighted_lp, GridFunction, Measure};

/// Default depth of the dyadic decomposition.
pub const DEFAULT_DEPTH: usize = 40;

/// Slack on the modulus window [1/2, 1] for values produced by rescaling.
const MODULUS_SLACK: f64 = 1e-12;

/// Support of g split by the last coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelStructure {
    /// Grid indices of the support, ascending.
    pub support: Vec<usize>,
    /// G_a for every a in L_G.
    pub slices: BTreeMap<u32, Vec<usize>>,
}

impl LevelStructure {
    /// L_G, ascending.
    pub fn levels(&self) -> Vec<u32> {
        self.slices.keys().copied().collect()
    }

    pub fn size(&self) -> usize {
        self.support.len()
    }

    pub fn slice_size(&self, a: u32) -> usize {
        self.slices.get(&a).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

pub fn level_structure(g: &GridFunction) -> LevelStructure {
    let shape = g.shape();
    let zero = Complex64::new(0.0, 0.0);
    let support: Vec<usize> = (0..g.len()).filter(|&i| g.values()[i] != zero).collect();
    let mut slices: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &i in &support {
        slices.entry(shape.last_coord(i)).or_default().push(i);
    }
    LevelStructure { support, slices }
}

/// Why a function is or is not regular.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularity {
    Regular,
    /// The zero function has no regular support.
    EmptySupport,
    /// |G_a'| > 2 |G_a|.
    SliceImbalance {
        a: u32,
        a_prime: u32,
        size_a: usize,
        size_a_prime: usize,
    },
    /// |g(m)| outside [1/2, 1].
    ValueOutOfRange {
        point: Vec<u32>,
        modulus: f64,
    },
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        matches!(self, Regularity::Regular)
    }
}

/// Regular support (slice sizes within a factor 2) and 1/2 <= |g| <= 1 on it.
pub fn is_regular(g: &GridFunction) -> Regularity {
    let levels = level_structure(g);
    if levels.is_empty() {
        return Regularity::EmptySupport;
    }
    let (mut lo, mut hi) = (None::<(u32, usize)>, None::<(u32, usize)>);
    for (&a, s) in &levels.slices {
        if lo.is_none_or(|(_, n)| s.len() < n) {
            lo = Some((a, s.len()));
        }
        if hi.is_none_or(|(_, n)| s.len() > n) {
            hi = Some((a, s.len()));
        }
    }
    let ((a, size_a), (a_prime, size_a_prime)) = (lo.unwrap(), hi.unwrap());
    if size_a_prime > 2 * size_a {
        return Regularity::SliceImbalance { a, a_prime, size_a, size_a_prime };
    }
    for &i in &levels.support {
        let modulus = g.values()[i].norm();
        if !(0.5 - MODULUS_SLACK..=1.0 + MODULUS_SLACK).contains(&modulus) {
            return Regularity::ValueOutOfRange { point: g.shape().coords(i), modulus };
        }
    }
    Regularity::Regular
}

fn require_regular(g: &GridFunction) -> Result<LevelStructure> {
    match is_regular(g) {
        Regularity::Regular => Ok(level_structure(g)),
        other => Err(Error::Contract(format!("function is not regular: {other:?}"))),
    }
}

/// One term coefficient * func of a dyadic decomposition.
#[derive(Debug, Clone)]
pub struct RegularPiece {
    pub coefficient: f64,
    pub func: GridFunction,
    pub levels: LevelStructure,
    /// Modulus bucket k: |g| in (2^{-k-1}, 2^{-k}] max|g|.
    pub bucket: usize,
    /// Slice sizes of this piece lie in [2^class, 2^{class+1}).
    pub size_class: u32,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub pieces: Vec<RegularPiece>,
    /// The points with |g| <= 2^{-L} max|g|.
    pub residual: GridFunction,
    pub max_abs: f64,
    pub depth: usize,
}

impl Decomposition {
    /// sum coefficient * func + residual.
    pub fn reconstruct(&self) -> GridFunction {
        let mut out = self.residual.clone();
        for piece in &self.pieces {
            for (o, v) in out.values_mut().iter_mut().zip(piece.func.values()) {
                *o += v * piece.coefficient;
            }
        }
        out
    }
}

/// Splits g into regular pieces: first by the dyadic bucket of |g| / max|g|,
/// then by floor(log2 |slice|) inside each bucket. Bucket k holds
/// 2^{-k-1} M < |g| <= 2^{-k} M for k < depth; smaller values form the residual.
pub fn regular_decomposition(g: &GridFunction, depth: usize) -> Result<Decomposition> {
    if depth == 0 {
        return Err(Error::Domain("decomposition depth must be at least 1".into()));
    }
    if g.measure() != Measure::Counting {
        return Err(Error::Contract("regular decomposition expects a Counting function".into()));
    }
    let max_abs = g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        return Err(Error::Domain("cannot decompose the zero function".into()));
    }
    let shape = g.shape();
    let threshold = |k: usize| max_abs * 0.5f64.powi(k as i32);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); depth];
    let mut residual = GridFunction::zeros(g.ctx().clone(), g.d(), Measure::Counting)?;
    for (i, v) in g.values().iter().enumerate() {
        let m = v.norm();
        if m == 0.0 {
            continue;
        }
        if m <= threshold(depth) {
            residual.values_mut()[i] = *v;
            continue;
        }
        let mut k = ((max_abs / m).log2().floor().max(0.0) as usize).min(depth - 1);
        while k > 0 && m > threshold(k) {
            k -= 1;
        }
        while m <= threshold(k + 1) {
            k += 1;
        }
        buckets[k].push(i);
    }
    let mut pieces = Vec::new();
    for (k, members) in buckets.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let coefficient = threshold(k);
        let mut by_slice: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &i in members {
            by_slice.entry(shape.last_coord(i)).or_default().push(i);
        }
        let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for slice in by_slice.values() {
            by_class.entry(slice.len().ilog2()).or_default().extend(slice);
        }
        for (size_class, idx) in by_class {
            let mut func = GridFunction::zeros(g.ctx().clone(), g.d(), Measure::Counting)?;
            for &i in &idx {
                func.values_mut()[i] = g.values()[i] / coefficient;
            }
            let levels = level_structure(&func);
            pieces.push(RegularPiece { coefficient, func, levels, bucket: k, size_class });
        }
    }
    Ok(Decomposition { pieces, residual, max_abs, depth })
}

/// A horizontal slice g_a and its transplant h_a onto P.
#[derive(Debug, Clone)]
pub struct SliceLift {
    pub level: u32,
    /// g restricted to {m_d = a}.
    pub slice: GridFunction,
    /// h_a(n', n'.n') = g(n', a).
    pub lift: SurfaceFunction,
}

pub fn slice_to_surface(g: &GridFunction, a: u32, geom: &Arc<ParaboloidGeometry>) -> Result<SliceLift> {
    check_geometry(g, geom)?;
    let levels = level_structure(g);
    if !levels.slices.contains_key(&a) {
        return Err(Error::Domain(format!("level {a} is not in L_G")));
    }
    let block = geom.len();
    let start = block * a as usize;
    let mut slice = GridFunction::zeros(g.ctx().clone(), g.d(), Measure::Counting)?;
    slice.values_mut()[start..start + block].copy_from_slice(&g.values()[start..start + block]);
    let lift = SurfaceFunction::new(geom.clone(), g.values()[start..start + block].to_vec())?;
    Ok(SliceLift { level: a, slice, lift })
}

/// K = (d sigma)^v - delta_0 from the closed form, so K(0) = 0 exactly.
pub fn bochner_riesz_kernel(geom: &ParaboloidGeometry) -> Result<GridFunction> {
    let mut k = dsigma_inverse_grid(geom)?;
    k.values_mut()[0] = Complex64::new(0.0, 0.0);
    Ok(k)
}

fn check_geometry(g: &GridFunction, geom: &ParaboloidGeometry) -> Result<()> {
    if g.d() != geom.d() || **g.ctx() != **geom.ctx() {
        return Err(Error::Contract("function and paraboloid live on different grids".into()));
    }
    if g.measure() != Measure::Counting {
        return Err(Error::Contract("expected a Counting function".into()));
    }
    Ok(())
}

fn base_params(geom: &ParaboloidGeometry) -> BTreeMap<String, String> {
    params([("d", geom.d().to_string()), ("q", geom.ctx().q().to_string())])
}

/// ||g^||^2_{L^2(P, d sigma)} against <g, g * (d sigma)^v>, each computed on its
/// own path: restriction on the left, the direct extension sum and a direct
/// convolution on the right.
pub fn verify_duality_identity(g: &GridFunction, geom: &Arc<ParaboloidGeometry>) -> Result<CheckReport> {
    check_geometry(g, geom)?;
    let lhs = surface_lp_norm(&restriction_operator(g, geom)?, Exponent::int(2)).powi(2);
    let dsigma = extension_operator(&SurfaceFunction::constant(geom.clone(), Complex64::new(1.0, 0.0)))?;
    let rhs = inner(g, &convolve(&dsigma, g)?)?;
    let mut report = CheckReport::equal("duality_identity", base_params(geom), lhs, rhs.re, 1e-9 * (1.0 + lhs));
    report.pass &= (Complex64::new(lhs, 0.0) - rhs).norm() <= 1e-9 * (1.0 + lhs);
    report.params.insert("rhs_im".into(), format!("{:e}", rhs.im));
    Ok(report)
}

/// For every a in L_G: ||g_a * K||_r <= q^{(d-1)/2} ||(h_a d sigma)^v||_r, and
/// the equality ||g_a * K||_r = q^{(d-1)/2} ||(h_a d sigma)^v 1_{m_d != 0}||_r.
pub fn verify_slice_inequality(
    g: &GridFunction,
    r: Exponent,
    geom: &Arc<ParaboloidGeometry>,
) -> Result<Vec<CheckReport>> {
    check_geometry(g, geom)?;
    let levels = require_regular(g)?;
    let kernel = bochner_riesz_kernel(geom)?;
    let scale = (geom.ctx().q() as f64).powf((geom.d() - 1) as f64 / 2.0);
    let block = geom.len();
    let mut out = Vec::new();
    for a in levels.levels() {
        let lift = slice_to_surface(g, a, geom)?;
        let lhs = lp_norm(&convolve(&kernel, &lift.slice)?, r);
        let ext = extension_operator(&lift.lift)?;
        let rhs = scale * lp_norm(&ext, r);
        let restricted = scale * weighted_lp(&ext.values()[block..], r, 1.0);
        let mut p = base_params(geom);
        p.insert("r".into(), r.to_string());
        p.insert("a".into(), a.to_string());
        out.push(CheckReport::at_most("slice_inequality", p.clone(), lhs, rhs, 1e-9 * (1.0 + rhs)));
        out.push(CheckReport::equal("slice_restricted_equality", p, lhs, restricted, 1e-9 * (1.0 + restricted)));
    }
    Ok(out)
}

/// The two constant-free L^2 restriction bounds for a regular g, plus the
/// energy-based bound reported without enforcement.
pub fn l2_restriction_bounds(g: &GridFunction, geom: &Arc<ParaboloidGeometry>) -> Result<Vec<CheckReport>> {
    check_geometry(g, geom)?;
    let levels = require_regular(g)?;
    let q = geom.ctx().q() as f64;
    let d = geom.d() as f64;
    let size = levels.size() as f64;
    let n_levels = levels.slices.len() as f64;
    let actual = surface_lp_norm(&restriction_operator(g, geom)?, Exponent::int(2));
    let mut p = base_params(geom);
    p.insert("support".into(), levels.size().to_string());
    p.insert("levels".into(), levels.slices.len().to_string());
    let mut out = vec![
        CheckReport::at_most("l2_support_bound", p.clone(), actual, q.sqrt() * size.sqrt(), 1e-9),
        CheckReport::at_most(
            "l2_small_support_bound",
            p.clone(),
            actual * actual,
            size + q.powf((1.0 - d) / 2.0) * size * size,
            1e-9,
        ),
    ];
    let even = geom.d() >= 4 && geom.d().is_multiple_of(2);
    let three_mod_four = geom.d() >= 7 && geom.d() % 4 == 3 && !geom.ctx().is_minus_one_square();
    let energy_bound = if even {
        Some(size.sqrt() + size.powf(11.0 / 16.0) * n_levels.powf(3.0 / 16.0) * q.powf((6.0 - 3.0 * d) / 32.0))
    } else if three_mod_four {
        Some(
            size.sqrt()
                + size.powf(11.0 / 16.0) * n_levels.powf(3.0 / 16.0) * q.powf((5.0 - 3.0 * d) / 32.0)
                + size.powf(5.0 / 8.0) * n_levels.powf(0.25) * q.powf((2.0 - d) / 16.0),
        )
    } else {
        None
    };
    if let Some(bound) = energy_bound {
        let upper = if even { (d + 2.0) / 2.0 } else { (d + 1.0) / 2.0 };
        let in_window = levels.slices.values().all(|s| {
            let n = s.len() as f64;
            n >= q.powf((d - 2.0) / 2.0) && n <= q.powf(upper)
        });
        p.insert("window".into(), in_window.to_string());
        out.push(CheckReport::at_most("l2_energy_bound", p, actual, bound, 0.0).informational());
    }
    Ok(out)
}

/// A random regular function: between 1 and q active levels, slice sizes in
/// [s, 2s] for a random s, moduli uniform in [1/2, 1] and uniform phases.
pub fn random_regular(geom: &ParaboloidGeometry, rng: &mut impl Rng) -> Result<GridFunction> {
    let q = geom.ctx().size();
    let block = geom.len();
    let mut g = GridFunction::zeros(geom.ctx().clone(), geom.d(), Measure::Counting)?;
    let n_levels = rng.random_range(1..=q);
    let base = rng.random_range(1..=block);
    for a in sample(rng, q, n_levels) {
        let size = rng.random_range(base..=(2 * base).min(block));
        for j in sample(rng, block, size) {
            let modulus = rng.random_range(0.5..=1.0);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            g.values_mut()[a * block + j] = Complex64::from_polar(modulus, angle);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldContext;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom(q: u32, d: usize) -> Arc<ParaboloidGeometry> {
        Arc::new(ParaboloidGeometry::new(Arc::new(FieldContext::new(q).unwrap()), d).unwrap())
    }

    fn indicator(g: &ParaboloidGeometry, members: impl IntoIterator<Item = usize>) -> GridFunction {
        GridFunction::indicator(g.ctx().clone(), g.d(), Measure::Counting, members).unwrap()
    }

    #[test]
    fn level_examples() {
        let g = geom(3, 2);
        let delta = indicator(&g, [0]);
        let l = level_structure(&delta);
        assert_eq!(l.levels(), vec![0]);
        assert_eq!(l.slice_size(0), 1);

        let p = indicator(&g, g.grid_indices().to_vec());
        let l = level_structure(&p);
        assert_eq!(l.levels(), vec![0, 1]);
        assert_eq!((l.slice_size(0), l.slice_size(1)), (1, 2));
        assert!(is_regular(&p).is_regular());

        let zero = GridFunction::zeros(g.ctx().clone(), 2, Measure::Counting).unwrap();
        assert!(level_structure(&zero).is_empty());
        assert_eq!(is_regular(&zero), Regularity::EmptySupport);

        let slice = indicator(&g, [3, 4, 5]);
        assert!(is_regular(&slice).is_regular());
        let lopsided = indicator(&g, [0, 3, 4, 5]);
        assert!(matches!(
            is_regular(&lopsided),
            Regularity::SliceImbalance { a: 0, a_prime: 1, size_a: 1, size_a_prime: 3 }
        ));
        let mut small = slice.clone();
        small.values_mut()[4] = Complex64::new(0.25, 0.0);
        assert!(matches!(is_regular(&small), Regularity::ValueOutOfRange { .. }));
    }

    #[test]
    fn decomposition_examples() {
        let g = geom(3, 2);
        let slice = indicator(&g, [3, 4, 5]);
        let dec = regular_decomposition(&slice, DEFAULT_DEPTH).unwrap();
        assert_eq!(dec.pieces.len(), 1);
        assert_eq!(dec.pieces[0].coefficient, 1.0);
        assert!(dec.residual.values().iter().all(|v| v.norm() == 0.0));

        let mut two = slice.clone();
        two.values_mut()[5] = Complex64::new(0.5, 0.0);
        let dec = regular_decomposition(&two, DEFAULT_DEPTH).unwrap();
        assert_eq!(dec.pieces.len(), 2);
        assert_eq!(dec.pieces[1].bucket, 1);

        let zero = GridFunction::zeros(g.ctx().clone(), 2, Measure::Counting).unwrap();
        assert!(regular_decomposition(&zero, 5).is_err());

        let g5 = geom(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = GridFunction::random(g5.ctx().clone(), 2, Measure::Counting, &mut rng).unwrap();
        let dec = regular_decomposition(&f, 20).unwrap();
        assert!(dec.reconstruct().max_abs_diff(&f).unwrap() < 1e-12);
        for piece in &dec.pieces {
            assert!(is_regular(&piece.func).is_regular());
        }
        assert!(dec.pieces.len() as f64 <= 20.0 * (2.0 * 5f64.log2() + 1.0));
    }

    #[test]
    fn slice_lift_examples() {
        let g = geom(3, 2);
        let f = indicator(&g, [3, 4]);
        let lift = slice_to_surface(&f, 1, &g).unwrap();
        let support: Vec<Vec<u32>> = lift.lift.support().iter().map(|&j| g.point(j)).collect();
        assert_eq!(support, vec![vec![0, 0], vec![1, 1]]);
        assert!(slice_to_surface(&f, 0, &g).is_err());

        let g3 = geom(3, 3);
        let spike = GridFunction::delta(g3.ctx().clone(), 3, Measure::Counting, &[0, 0, 2]).unwrap();
        let lift = slice_to_surface(&spike, 2, &g3).unwrap();
        assert_eq!(lift.lift.support(), vec![0]);
    }

    #[test]
    fn kernel_examples() {
        let g = geom(5, 3);
        let k = bochner_riesz_kernel(&g).unwrap();
        assert_eq!(k.values()[0], Complex64::new(0.0, 0.0));
        assert_eq!(k.at(&[1, 2, 0]), Complex64::new(0.0, 0.0));
        assert!((k.at(&[1, 2, 3]).norm() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn identities_on_examples() {
        let g = geom(3, 2);
        let delta = indicator(&g, [0]);
        let rep = verify_duality_identity(&delta, &g).unwrap();
        assert!(rep.pass && (rep.lhs - 1.0).abs() < 1e-12);
        let slice = indicator(&g, [3, 4, 5]);
        assert!(verify_duality_identity(&slice, &g).unwrap().pass);
        for rep in verify_slice_inequality(&slice, Exponent::int(4), &g).unwrap() {
            assert!(rep.pass, "{rep:?}");
        }
        for rep in l2_restriction_bounds(&delta, &g).unwrap() {
            assert!(rep.ok(), "{rep:?}");
        }
        let lopsided = indicator(&g, [0, 3, 4, 5]);
        assert!(matches!(verify_slice_inequality(&lopsided, Exponent::int(2), &g), Err(Error::Contract(_))));
    }

    #[test]
    fn random_regular_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (q, d) in [(3, 3), (5, 2), (7, 2)] {
            let g = geom(q, d);
            for _ in 0..10 {
                let f = random_regular(&g, &mut rng).unwrap();
                assert!(is_regular(&f).is_regular());
                assert!(verify_duality_identity(&f, &g).unwrap().pass);
                for rep in verify_slice_inequality(&f, Exponent::int(2), &g).unwrap() {
                    assert!(rep.pass, "{rep:?}");
                }
                for rep in l2_restriction_bounds(&f, &g).unwrap() {
                    assert!(rep.ok(), "{rep:?}");
                }
            }
        }
    }
}
