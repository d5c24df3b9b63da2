//! The paraboloid P = {xi in F_q^d : xi_d = xi_1^2 + ... + xi_{d-1}^2} with its
//! normalized surface measure, the extension and restriction operators, and the
//! closed form of (d sigma)^v.
//!
//! The point (xi', xi'.xi') is addressed by the base-q index of xi' in F_q^{d-1},
//! so a [`SurfaceFunction`] is a dense array of length q^{d-1}.

mod isotropic;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::FieldContext;
use crate::transform::{
    fourier_forward, fourier_inverse, random_values, weighted_lp, FunctionJson, GridFunction, GridShape, Measure,
};

pub use isotropic::{
    expected_isotropic_dimension, isotropic_subspace_exhaustive, maximal_isotropic_subspace, subspace_in_paraboloid,
    IsotropicSubspace,
};

/// The point set of P together with its embedding into F_q^d.
#[derive(Debug, Clone)]
pub struct ParaboloidGeometry {
    ctx: Arc<FieldContext>,
    grid: GridShape,
    base: GridShape,
    norms: Vec<u32>,
    grid_index: Vec<usize>,
}

impl ParaboloidGeometry {
    /// Builds P in F_q^d. Fails for d < 2 or when q^d exceeds the grid cap.
    pub fn new(ctx: Arc<FieldContext>, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("the paraboloid needs d >= 2, got {d}")));
        }
        let grid = GridShape::new(&ctx, d)?;
        let base = GridShape::new(&ctx, d - 1)?;
        let mut c = vec![0; d - 1];
        let mut norms = Vec::with_capacity(base.len());
        let mut grid_index = Vec::with_capacity(base.len());
        for j in 0..base.len() {
            base.write_coords(j, &mut c);
            let norm = c.iter().fold(0, |acc, &x| ctx.add(acc, ctx.mul(x, x)));
            norms.push(norm);
            grid_index.push(j + base.len() * norm as usize);
        }
        Ok(ParaboloidGeometry { ctx, grid, base, norms, grid_index })
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    /// |P| = q^{d-1}.
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid_shape(&self) -> GridShape {
        self.grid
    }

    pub fn base_shape(&self) -> GridShape {
        self.base
    }

    /// ||xi'|| = xi'.xi' for the point with surface index j.
    pub fn norm_of(&self, j: usize) -> u32 {
        self.norms[j]
    }

    /// Index in F_q^d of the point with surface index j.
    pub fn grid_index(&self, j: usize) -> usize {
        self.grid_index[j]
    }

    pub fn grid_indices(&self) -> &[usize] {
        &self.grid_index
    }

    /// Full coordinates (xi', xi'.xi') of surface point j.
    pub fn point(&self, j: usize) -> Vec<u32> {
        let mut c = self.base.coords(j);
        c.push(self.norms[j]);
        c
    }

    /// Surface index of a grid point, if the point lies on P.
    pub fn surface_index(&self, grid_idx: usize) -> Option<usize> {
        let j = grid_idx % self.base.len();
        (self.grid_index[j] == grid_idx).then_some(j)
    }

    pub fn contains(&self, point: &[u32]) -> bool {
        point.len() == self.d() && self.surface_index(self.grid.index(point)).is_some()
    }
}

/// A function on (P, d sigma).
#[derive(Debug, Clone)]
pub struct SurfaceFunction {
    geom: Arc<ParaboloidGeometry>,
    values: Vec<Complex64>,
}

impl SurfaceFunction {
    pub fn new(geom: Arc<ParaboloidGeometry>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::Contract(format!("expected {} surface values, got {}", geom.len(), values.len())));
        }
        Ok(SurfaceFunction { geom, values })
    }

    pub fn constant(geom: Arc<ParaboloidGeometry>, c: Complex64) -> Self {
        let values = vec![c; geom.len()];
        SurfaceFunction { geom, values }
    }

    pub fn indicator(geom: Arc<ParaboloidGeometry>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); geom.len()];
        for j in members {
            if j >= values.len() {
                return Err(Error::Domain(format!("surface index {j} is out of range")));
            }
            values[j] = Complex64::new(1.0, 0.0);
        }
        Ok(SurfaceFunction { geom, values })
    }

    /// |P| delta at surface point j, which has unit mass under d sigma.
    pub fn point_mass(geom: Arc<ParaboloidGeometry>, j: usize) -> Result<Self> {
        let mut f = Self::indicator(geom, [j])?;
        let n = f.values.len() as f64;
        f.values[j] *= n;
        Ok(f)
    }

    pub fn random(geom: Arc<ParaboloidGeometry>, rng: &mut impl Rng) -> Self {
        let values = random_values(geom.len(), rng);
        SurfaceFunction { geom, values }
    }

    pub fn geometry(&self) -> &Arc<ParaboloidGeometry> {
        &self.geom
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Surface indices where the function is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&j| self.values[j] != Complex64::new(0.0, 0.0)).collect()
    }

    /// Zero extension to (F_q^d, d xi).
    pub fn to_grid(&self) -> GridFunction {
        let mut values = vec![Complex64::new(0.0, 0.0); self.geom.grid.len()];
        for (j, &v) in self.values.iter().enumerate() {
            values[self.geom.grid_index[j]] = v;
        }
        GridFunction::new(self.geom.ctx.clone(), self.geom.d(), Measure::Normalized, values)
            .expect("shape comes from the geometry")
    }

    pub fn to_json(&self) -> String {
        let doc =
            FunctionJson::from_parts(&self.geom.ctx, self.geom.d(), Measure::Normalized, Some(true), &self.values);
        serde_json::to_string(&doc).expect("surface functions always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: FunctionJson = serde_json::from_str(s)?;
        if doc.surface != Some(true) {
            return Err(Error::Format("document is not marked \"surface\": true".into()));
        }
        let geom = Arc::new(ParaboloidGeometry::new(Arc::new(doc.field()?), doc.d)?);
        Self::new(geom, doc.complex_values())
    }
}

/// Builds P for the given field and dimension.
pub fn build_paraboloid(ctx: Arc<FieldContext>, d: usize) -> Result<ParaboloidGeometry> {
    ParaboloidGeometry::new(ctx, d)
}

/// (f d sigma)^v(m) = |P|^{-1} sum over xi in P of f(xi) chi(m.xi), summed
/// directly over the support of f.
pub fn extension_operator(f: &SurfaceFunction) -> Result<GridFunction> {
    let geom = &f.geom;
    let ctx = &geom.ctx;
    let d = geom.d();
    let support = f.support();
    let points: Vec<u32> = support.iter().flat_map(|&j| geom.point(j)).collect();
    let coeffs: Vec<Complex64> = support.iter().map(|&j| f.values[j] / geom.len() as f64).collect();
    let mut m = vec![0; d];
    let mut out = Vec::with_capacity(geom.grid.len());
    for idx in 0..geom.grid.len() {
        geom.grid.write_coords(idx, &mut m);
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, c) in points.chunks_exact(d).zip(&coeffs) {
            let dot = m.iter().zip(xi).fold(0, |a, (&x, &y)| ctx.add(a, ctx.mul(x, y)));
            acc += c * ctx.additive_character(dot);
        }
        out.push(acc);
    }
    GridFunction::new(ctx.clone(), d, Measure::Counting, out)
}

/// The same operator computed as q * (zero-extended f)^v with the grid transform.
pub fn extension_via_transform(f: &SurfaceFunction) -> Result<GridFunction> {
    let mut g = fourier_inverse(&f.to_grid())?;
    let q = f.geom.ctx.q() as f64;
    g.values_mut().iter_mut().for_each(|v| *v *= q);
    Ok(g)
}

/// g^ restricted to P.
pub fn restriction_operator(g: &GridFunction, geom: &Arc<ParaboloidGeometry>) -> Result<SurfaceFunction> {
    if g.d() != geom.d() || **g.ctx() != *geom.ctx {
        return Err(Error::Contract("function and paraboloid live on different grids".into()));
    }
    let hat = fourier_forward(g)?;
    let values = geom.grid_index.iter().map(|&i| hat.values()[i]).collect();
    SurfaceFunction::new(geom.clone(), values)
}

/// ((1/|P|) sum |f|^p)^{1/p}, or max |f| when p is infinite.
pub fn surface_lp_norm(f: &SurfaceFunction, p: Exponent) -> f64 {
    weighted_lp(&f.values, p, 1.0 / f.len() as f64)
}

/// Hermitian pairing (1/|P|) sum f conj(h) under d sigma.
pub fn surface_inner(f: &SurfaceFunction, h: &SurfaceFunction) -> Result<Complex64> {
    if f.len() != h.len() || f.geom.d() != h.geom.d() || *f.geom.ctx != *h.geom.ctx {
        return Err(Error::Contract("surface functions live on different paraboloids".into()));
    }
    let s: Complex64 = f.values.iter().zip(&h.values).map(|(a, b)| a * b.conj()).sum();
    Ok(s / f.len() as f64)
}

/// The closed form of (d sigma)^v(m):
/// q^{-(d-1)} chi(||m'|| / (-4 m_d)) eta(m_d)^{d-1} G_1^{d-1} when m_d != 0,
/// 0 when m_d = 0 and m != 0, and 1 at the origin.
pub fn dsigma_inverse_explicit(geom: &ParaboloidGeometry, m: &[u32]) -> Result<Complex64> {
    let ctx = &geom.ctx;
    let d = geom.d();
    if m.len() != d || m.iter().any(|&c| c >= ctx.q()) {
        return Err(Error::Domain(format!("{m:?} is not a point of F_{}^{d}", ctx.q())));
    }
    let md = m[d - 1];
    if md == 0 {
        let origin = m.iter().all(|&c| c == 0);
        return Ok(Complex64::new(if origin { 1.0 } else { 0.0 }, 0.0));
    }
    let norm = m[..d - 1].iter().fold(0, |acc, &x| ctx.add(acc, ctx.mul(x, x)));
    let denom = ctx.neg(ctx.mul(ctx.from_i64(4), md));
    let arg = ctx.div(norm, denom)?;
    let e = (d - 1) as i32;
    let eta = (ctx.quadratic_character(md) as f64).powi(e);
    let scale = (ctx.q() as f64).powi(-e);
    Ok(ctx.additive_character(arg) * ctx.gauss_sum().powi(e) * (eta * scale))
}

/// The closed form evaluated on all of F_q^d.
pub fn dsigma_inverse_grid(geom: &ParaboloidGeometry) -> Result<GridFunction> {
    let mut c = vec![0; geom.d()];
    let values = (0..geom.grid.len())
        .map(|i| {
            geom.grid.write_coords(i, &mut c);
            dsigma_inverse_explicit(geom, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(geom.ctx.clone(), geom.d(), Measure::Counting, values)
}
