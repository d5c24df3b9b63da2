//! Fourier transform and convolution on F_q^d.
//!
//! Physical space carries the counting measure dm and frequency space the
//! normalized counting measure d(xi) = q^{-d} (counting). So
//!
//! ```text
//! g^(xi)   = sum_m g(m) chi(-m.xi)
//! f^v(m)   = q^{-d} sum_xi f(xi) chi(xi.m)
//! ```
//!
//! and norms and convolutions follow the tag carried by each [`GridFunction`].
//! A point (x_1, ..., x_d) is stored at index x_1 + x_2 q + ... + x_d q^{d-1},
//! so the hyperplanes {x_d = a} are contiguous blocks.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::FieldContext;

/// Which measure a grid function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Physical space (F_q^d, dm).
    Counting,
    /// Frequency space (F_q^d, d xi).
    Normalized,
}

/// Index arithmetic for F_q^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    q: u32,
    d: usize,
    len: usize,
}

impl GridShape {
    pub fn new(ctx: &FieldContext, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(GridShape { q: ctx.q(), d, len: ctx.grid_len(d)? })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coords(&self, idx: usize) -> Vec<u32> {
        let mut c = vec![0; self.d];
        self.write_coords(idx, &mut c);
        c
    }

    pub fn write_coords(&self, mut idx: usize, out: &mut [u32]) {
        let q = self.q as usize;
        for c in out.iter_mut() {
            *c = (idx % q) as u32;
            idx /= q;
        }
    }

    pub fn index(&self, coords: &[u32]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        coords.iter().rev().fold(0, |acc, &c| acc * self.q as usize + c as usize)
    }

    /// The last coordinate x_d of a point.
    pub fn last_coord(&self, idx: usize) -> u32 {
        (idx / (self.len / self.q as usize)) as u32
    }

    /// Coordinates of every point, flattened (point-major).
    pub fn coord_table(&self) -> Vec<u32> {
        let mut table = vec![0; self.len * self.d];
        for (idx, chunk) in table.chunks_mut(self.d).enumerate() {
            self.write_coords(idx, chunk);
        }
        table
    }
}

/// Dot product m.xi computed in F_q.
pub fn dot(ctx: &FieldContext, a: &[u32], b: &[u32]) -> u32 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| ctx.add(acc, ctx.mul(x, y)))
}

/// A complex function on F_q^d tagged with its measure.
#[derive(Debug, Clone)]
pub struct GridFunction {
    ctx: Arc<FieldContext>,
    shape: GridShape,
    measure: Measure,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(ctx: Arc<FieldContext>, d: usize, measure: Measure, values: Vec<Complex64>) -> Result<Self> {
        let shape = GridShape::new(&ctx, d)?;
        if values.len() != shape.len() {
            return Err(Error::Contract(format!(
                "expected {} values for F_{}^{}, got {}",
                shape.len(),
                ctx.q(),
                d,
                values.len()
            )));
        }
        Ok(GridFunction { ctx, shape, measure, values })
    }

    pub fn zeros(ctx: Arc<FieldContext>, d: usize, measure: Measure) -> Result<Self> {
        let len = GridShape::new(&ctx, d)?.len();
        Self::new(ctx, d, measure, vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_fn(
        ctx: Arc<FieldContext>,
        d: usize,
        measure: Measure,
        mut f: impl FnMut(&[u32]) -> Complex64,
    ) -> Result<Self> {
        let shape = GridShape::new(&ctx, d)?;
        let mut c = vec![0; d];
        let values = (0..shape.len())
            .map(|i| {
                shape.write_coords(i, &mut c);
                f(&c)
            })
            .collect();
        Self::new(ctx, d, measure, values)
    }

    /// The indicator of a set of grid indices.
    pub fn indicator(
        ctx: Arc<FieldContext>,
        d: usize,
        measure: Measure,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut g = Self::zeros(ctx, d, measure)?;
        for i in members {
            if i >= g.len() {
                return Err(Error::Domain(format!("index {i} is outside the grid")));
            }
            g.values[i] = Complex64::new(1.0, 0.0);
        }
        Ok(g)
    }

    pub fn delta(ctx: Arc<FieldContext>, d: usize, measure: Measure, point: &[u32]) -> Result<Self> {
        let shape = GridShape::new(&ctx, d)?;
        if point.len() != d || point.iter().any(|&c| c >= ctx.q()) {
            return Err(Error::Domain(format!("{point:?} is not a point of F_{}^{d}", ctx.q())));
        }
        Self::indicator(ctx, d, measure, [shape.index(point)])
    }

    /// Values with independent real and imaginary parts uniform in [-1, 1].
    pub fn random(ctx: Arc<FieldContext>, d: usize, measure: Measure, rng: &mut impl Rng) -> Result<Self> {
        let len = GridShape::new(&ctx, d)?.len();
        let values = random_values(len, rng);
        Self::new(ctx, d, measure, values)
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn d(&self) -> usize {
        self.shape.d()
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, point: &[u32]) -> Complex64 {
        self.values[self.shape.index(point)]
    }

    /// Same values, different tag.
    pub fn retag(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    /// Pointwise combination of two functions on the same grid and measure.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_compatible(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridFunction { values, ..self.clone() })
    }

    /// Largest pointwise distance to another function on the same grid.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        check_compatible(self, other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FunctionJson::from_parts(&self.ctx, self.d(), self.measure, None, &self.values))
            .expect("grid functions always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: FunctionJson = serde_json::from_str(s)?;
        if doc.surface.unwrap_or(false) {
            return Err(Error::Format("document describes a surface function".into()));
        }
        let ctx = Arc::new(doc.field()?);
        let values = doc.complex_values();
        Self::new(ctx, doc.d, doc.measure, values)
    }
}

pub(crate) fn random_values(len: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect()
}

/// Interchange format shared by grid and surface functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub q: u32,
    pub p: u32,
    pub n: u32,
    pub modulus: Vec<u32>,
    pub d: usize,
    pub measure: Measure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<bool>,
    pub values: Vec<[f64; 2]>,
}

impl FunctionJson {
    pub(crate) fn from_parts(
        ctx: &FieldContext,
        d: usize,
        measure: Measure,
        surface: Option<bool>,
        values: &[Complex64],
    ) -> Self {
        FunctionJson {
            q: ctx.q(),
            p: ctx.p(),
            n: ctx.n(),
            modulus: ctx.modulus().to_vec(),
            d,
            measure,
            surface,
            values: values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub(crate) fn field(&self) -> Result<FieldContext> {
        let ctx = FieldContext::with_modulus(self.p, self.modulus.clone())?;
        if ctx.q() != self.q || ctx.n() != self.n {
            return Err(Error::Format(format!(
                "q = {} does not match p = {}, modulus {:?}",
                self.q, self.p, self.modulus
            )));
        }
        Ok(ctx)
    }

    pub(crate) fn complex_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }
}

fn check_compatible(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if *a.ctx != *b.ctx || a.d() != b.d() {
        return Err(Error::Contract("functions live on different grids".into()));
    }
    if a.measure != b.measure {
        return Err(Error::Contract(format!("measure mismatch: {:?} vs {:?}", a.measure, b.measure)));
    }
    Ok(())
}

fn require(g: &GridFunction, measure: Measure, op: &str) -> Result<()> {
    if g.measure != measure {
        return Err(Error::Contract(format!("{op} expects a {measure:?} function, got {:?}", g.measure)));
    }
    Ok(())
}

/// Applies the one-dimensional character matrix chi(+-a b) along every axis.
fn separable_transform(ctx: &FieldContext, d: usize, values: &mut [Complex64], forward: bool) {
    let q = ctx.size();
    let matrix: Vec<Complex64> = (0..q * q)
        .map(|i| {
            let prod = ctx.mul((i / q) as u32, (i % q) as u32);
            ctx.additive_character(if forward { ctx.neg(prod) } else { prod })
        })
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); q];
    let mut stride = 1;
    for _ in 0..d {
        let block = stride * q;
        for base in (0..values.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = values[start + m * stride];
                }
                for xi in 0..q {
                    let row = &matrix[xi * q..(xi + 1) * q];
                    values[start + xi * stride] = row.iter().zip(&line).map(|(w, v)| w * v).sum();
                }
            }
        }
        stride = block;
    }
}

/// g^(xi) = sum_m g(m) chi(-m.xi); maps Counting to Normalized.
pub fn fourier_forward(g: &GridFunction) -> Result<GridFunction> {
    require(g, Measure::Counting, "fourier_forward")?;
    let mut values = g.values.clone();
    separable_transform(&g.ctx, g.d(), &mut values, true);
    Ok(GridFunction { values, measure: Measure::Normalized, ..g.clone() })
}

/// f^v(m) = q^{-d} sum_xi f(xi) chi(xi.m); maps Normalized to Counting.
pub fn fourier_inverse(f: &GridFunction) -> Result<GridFunction> {
    require(f, Measure::Normalized, "fourier_inverse")?;
    let mut values = f.values.clone();
    separable_transform(&f.ctx, f.d(), &mut values, false);
    let scale = 1.0 / f.len() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(GridFunction { values, measure: Measure::Counting, ..f.clone() })
}

/// Convolution under the shared measure: a plain sum for Counting,
/// an average for Normalized. Direct O(q^{2d}) evaluation.
pub fn convolve(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    check_compatible(a, b)?;
    let ctx = &a.ctx;
    let shape = a.shape;
    let d = shape.d();
    let coords = shape.coord_table();
    let q = ctx.size();
    let support: Vec<usize> = (0..b.len()).filter(|&m| b.values[m] != Complex64::new(0.0, 0.0)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    for (n, slot) in out.iter_mut().enumerate() {
        let cn = &coords[n * d..(n + 1) * d];
        let mut acc = Complex64::new(0.0, 0.0);
        for &m in &support {
            let cm = &coords[m * d..(m + 1) * d];
            let mut diff = 0usize;
            for i in (0..d).rev() {
                diff = diff * q + ctx.sub(cn[i], cm[i]) as usize;
            }
            acc += a.values[diff] * b.values[m];
        }
        *slot = acc;
    }
    if a.measure == Measure::Normalized {
        let scale = 1.0 / a.len() as f64;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(GridFunction { values: out, ..a.clone() })
}

/// (weight * sum |v|^p)^{1/p}, or max |v| when p is infinite.
pub(crate) fn weighted_lp(values: &[Complex64], p: Exponent, weight: f64) -> f64 {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    match p {
        Exponent::Infinity => max,
        _ if max == 0.0 => 0.0,
        Exponent::Finite(_) => {
            let pf = p.to_f64();
            let sum: f64 = values.iter().map(|v| (v.norm() / max).powf(pf)).sum();
            max * (weight * sum).powf(1.0 / pf)
        }
    }
}

/// L^p norm under the function's own measure.
pub fn lp_norm(h: &GridFunction, p: Exponent) -> f64 {
    let weight = match h.measure {
        Measure::Counting => 1.0,
        Measure::Normalized => 1.0 / h.len() as f64,
    };
    weighted_lp(&h.values, p, weight)
}

/// Hermitian pairing sum a conj(b) under the shared measure.
pub fn inner(a: &GridFunction, b: &GridFunction) -> Result<Complex64> {
    check_compatible(a, b)?;
    let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum();
    Ok(match a.measure {
        Measure::Counting => s,
        Measure::Normalized => s / a.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(q: u32) -> Arc<FieldContext> {
        Arc::new(FieldContext::new(q).unwrap())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Transform by the defining double sum, independent of the separable path.
    fn naive_forward(g: &GridFunction) -> Vec<Complex64> {
        let ctx = g.ctx();
        let shape = g.shape();
        (0..g.len())
            .map(|xi| {
                let cx = shape.coords(xi);
                (0..g.len())
                    .map(|m| g.values()[m] * ctx.additive_character(ctx.neg(dot(ctx, &shape.coords(m), &cx))))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn forward_examples() {
        for (q, d) in [(3, 1), (3, 2), (5, 2), (3, 3)] {
            let ctx = field(q);
            let delta = GridFunction::delta(ctx.clone(), d, Measure::Counting, &vec![0; d]).unwrap();
            let hat = fourier_forward(&delta).unwrap();
            assert_eq!(hat.measure(), Measure::Normalized);
            assert!(hat.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));
        }

        let ctx = field(3);
        let ones = GridFunction::new(ctx.clone(), 1, Measure::Counting, vec![c(1.0); 3]).unwrap();
        let hat = fourier_forward(&ones).unwrap();
        let expect = naive_forward(&ones);
        assert!((expect[0] - c(3.0)).norm() < 1e-12);
        for (h, e) in hat.values().iter().zip(&expect) {
            assert!((h - e).norm() < 1e-12);
        }

        let slab = GridFunction::from_fn(ctx, 2, Measure::Counting, |x| c(if x[0] == 0 { 1.0 } else { 0.0 })).unwrap();
        let hat = fourier_forward(&slab).unwrap();
        let expect = naive_forward(&slab);
        for (xi, (h, e)) in hat.values().iter().zip(&expect).enumerate() {
            let want = if xi / 3 == 0 { 3.0 } else { 0.0 };
            assert!((e - c(want)).norm() < 1e-12);
            assert!((h - e).norm() < 1e-12);
        }
    }

    #[test]
    fn separable_matches_naive_on_prime_power() {
        let ctx = field(9);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GridFunction::random(ctx, 2, Measure::Counting, &mut rng).unwrap();
        let fast = fourier_forward(&g).unwrap();
        for (a, b) in fast.values().iter().zip(naive_forward(&g)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_examples() {
        let ctx = field(5);
        let ones = GridFunction::new(ctx.clone(), 2, Measure::Normalized, vec![c(1.0); 25]).unwrap();
        let inv = fourier_inverse(&ones).unwrap();
        assert!((inv.values()[0] - c(1.0)).norm() < 1e-12);
        assert!(inv.values()[1..].iter().all(|v| v.norm() < 1e-12));

        let mut spike = GridFunction::zeros(ctx.clone(), 2, Measure::Normalized).unwrap();
        spike.values_mut()[0] = c(25.0);
        let inv = fourier_inverse(&spike).unwrap();
        assert!(inv.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = GridFunction::random(ctx, 2, Measure::Normalized, &mut rng).unwrap();
        let back = fourier_forward(&fourier_inverse(&f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-9);
    }

    #[test]
    fn wrong_tags_are_rejected() {
        let ctx = field(3);
        let n = GridFunction::zeros(ctx.clone(), 2, Measure::Normalized).unwrap();
        let m = GridFunction::zeros(ctx.clone(), 2, Measure::Counting).unwrap();
        assert!(matches!(fourier_forward(&n), Err(Error::Contract(_))));
        assert!(matches!(fourier_inverse(&m), Err(Error::Contract(_))));
        assert!(matches!(convolve(&n, &m), Err(Error::Contract(_))));
        let other = GridFunction::zeros(field(5), 2, Measure::Counting).unwrap();
        assert!(matches!(convolve(&m, &other), Err(Error::Contract(_))));
    }

    #[test]
    fn convolution_examples() {
        let ctx = field(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = GridFunction::random(ctx.clone(), 2, Measure::Counting, &mut rng).unwrap();
        let delta = GridFunction::delta(ctx.clone(), 2, Measure::Counting, &[0, 0]).unwrap();
        assert!(convolve(&delta, &g).unwrap().max_abs_diff(&g).unwrap() < 1e-12);

        let shape = g.shape();
        let e = [1usize, 7, 13, 24];
        let neg_e: Vec<usize> =
            e.iter().map(|&i| shape.index(&shape.coords(i).iter().map(|&x| ctx.neg(x)).collect::<Vec<_>>())).collect();
        let ind = GridFunction::indicator(ctx.clone(), 2, Measure::Counting, e).unwrap();
        let ind_neg = GridFunction::indicator(ctx, 2, Measure::Counting, neg_e).unwrap();
        assert!((convolve(&ind, &ind_neg).unwrap().values()[0] - c(4.0)).norm() < 1e-12);

        let f3 = field(3);
        let ones = GridFunction::new(f3, 1, Measure::Normalized, vec![c(1.0); 3]).unwrap();
        let conv = convolve(&ones, &ones).unwrap();
        assert!(conv.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));
    }

    #[test]
    fn norm_examples() {
        let ctx = field(5);
        let g = GridFunction::indicator(ctx.clone(), 2, Measure::Counting, [0, 3, 8]).unwrap();
        for p in ["1", "2", "3/2", "7"] {
            let p: Exponent = p.parse().unwrap();
            assert!((lp_norm(&g, p) - 3f64.powf(1.0 / p.to_f64())).abs() < 1e-12);
        }
        assert_eq!(lp_norm(&g, Exponent::Infinity), 1.0);
        let k =
            GridFunction::new(ctx.clone(), 2, Measure::Normalized, vec![Complex64::new(0.6, -0.8) * 2.0; 25]).unwrap();
        for p in ["1", "2", "5/2"] {
            assert!((lp_norm(&k, p.parse().unwrap()) - 2.0).abs() < 1e-12);
        }
        let delta = GridFunction::delta(ctx, 2, Measure::Counting, &[0, 0]).unwrap();
        assert!((lp_norm(&delta, Exponent::int(2)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let ctx = field(9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GridFunction::random(ctx, 2, Measure::Counting, &mut rng).unwrap();
        let s = g.to_json();
        assert!(s.contains("\"measure\":\"counting\""));
        assert!(s.contains("\"modulus\":[1,0,1]"));
        let back = GridFunction::from_json(&s).unwrap();
        assert_eq!(back.values(), g.values());
        assert!(GridFunction::from_json("{\"q\":3}").is_err());
    }
}
