//! Totally isotropic subspaces of the form x_1^2 + ... + x_n^2 on F_q^n.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::transform::dot;

use super::ParaboloidGeometry;

/// Largest ambient space the exhaustive search will enumerate.
const EXHAUSTIVE_LIMIT: usize = 1 << 20;

/// A subspace W of F_q^{d-1} on which the sum-of-squares form vanishes.
#[derive(Debug, Clone)]
pub struct IsotropicSubspace {
    ctx: Arc<FieldContext>,
    ambient: usize,
    basis: Vec<Vec<u32>>,
}

impl IsotropicSubspace {
    /// Wraps a basis after checking independence and isotropy.
    pub fn new(ctx: Arc<FieldContext>, ambient: usize, basis: Vec<Vec<u32>>) -> Result<Self> {
        if basis.iter().any(|b| b.len() != ambient || b.iter().any(|&c| c >= ctx.q())) {
            return Err(Error::Domain(format!("basis vectors must lie in F_{}^{ambient}", ctx.q())));
        }
        let w = IsotropicSubspace { ctx, ambient, basis };
        w.verify()?;
        Ok(w)
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    /// Dimension k of W.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// d - 1.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    /// |W| = q^k.
    pub fn size(&self) -> usize {
        (self.ctx.q() as usize).pow(self.dim() as u32)
    }

    /// Every element of span(W), in the order of their coefficient vectors.
    pub fn elements(&self) -> Vec<Vec<u32>> {
        let ctx = &self.ctx;
        let q = ctx.q() as usize;
        (0..self.size())
            .map(|mut code| {
                let mut v = vec![0; self.ambient];
                for b in &self.basis {
                    let c = (code % q) as u32;
                    code /= q;
                    for (x, &y) in v.iter_mut().zip(b) {
                        *x = ctx.add(*x, ctx.mul(c, y));
                    }
                }
                v
            })
            .collect()
    }

    /// Whether v is orthogonal to every vector of W.
    pub fn is_orthogonal(&self, v: &[u32]) -> bool {
        self.basis.iter().all(|b| dot(&self.ctx, b, v) == 0)
    }

    /// Checks linear independence and, exhaustively, w.w = 0 on span(W).
    pub fn verify(&self) -> Result<()> {
        if rank(&self.ctx, &self.basis) != self.basis.len() {
            return Err(Error::Internal("isotropic basis is linearly dependent".into()));
        }
        for w in self.elements() {
            if dot(&self.ctx, &w, &w) != 0 {
                return Err(Error::Internal(format!("{w:?} is not isotropic")));
            }
        }
        Ok(())
    }
}

/// Dimension of a maximal isotropic subspace of F_q^{d-1}:
/// (n-1)/2 for odd n = d-1, n/2 when eta(-1)^{n/2} = 1, and n/2 - 1 otherwise.
pub fn expected_isotropic_dimension(ctx: &FieldContext, d: usize) -> usize {
    let n = d - 1;
    if n % 2 == 1 {
        return (n - 1) / 2;
    }
    let eta = if ctx.is_minus_one_square() || (n / 2).is_multiple_of(2) { 1 } else { -1 };
    if eta == 1 {
        n / 2
    } else {
        n / 2 - 1
    }
}

/// A maximal isotropic subspace of F_q^{d-1}, built from hyperbolic pairs.
///
/// With -1 = i^2 the vectors e_{2j-1} + i e_{2j} pair up coordinates. Otherwise
/// a^2 + b^2 = -1 is solved once and every block of four coordinates contributes
/// (a, b, 1, 0) and (b, -a, 0, 1); a trailing block of three contributes (a, b, 1).
pub fn maximal_isotropic_subspace(ctx: Arc<FieldContext>, d: usize) -> Result<IsotropicSubspace> {
    if d < 2 {
        return Err(Error::Domain(format!("need d >= 2, got {d}")));
    }
    let n = d - 1;
    let unit = |pos: usize, entries: &[u32]| {
        let mut v = vec![0; n];
        v[pos..pos + entries.len()].copy_from_slice(entries);
        v
    };
    let mut basis = Vec::new();
    if let Some(i) = ctx.sqrt(ctx.neg(1)) {
        for j in 0..n / 2 {
            basis.push(unit(2 * j, &[1, i]));
        }
    } else {
        let minus_one = ctx.neg(1);
        let (a, b) = (0..ctx.q())
            .find_map(|a| ctx.sqrt(ctx.sub(minus_one, ctx.mul(a, a))).map(|b| (a, b)))
            .expect("-1 is a sum of two squares in every finite field");
        for j in 0..n / 4 {
            basis.push(unit(4 * j, &[a, b, 1, 0]));
            basis.push(unit(4 * j, &[b, ctx.neg(a), 0, 1]));
        }
        if n % 4 == 3 {
            basis.push(unit(n - 3, &[a, b, 1]));
        }
    }
    let w = IsotropicSubspace::new(ctx.clone(), n, basis)?;
    if w.dim() != expected_isotropic_dimension(&ctx, d) {
        return isotropic_subspace_exhaustive(ctx, d);
    }
    Ok(w)
}

/// Greedy exhaustive search: adds the first isotropic vector orthogonal to the
/// current basis and outside its span until none is left. All maximal totally
/// isotropic subspaces share one dimension, so the result is of maximal size.
pub fn isotropic_subspace_exhaustive(ctx: Arc<FieldContext>, d: usize) -> Result<IsotropicSubspace> {
    if d < 2 {
        return Err(Error::Domain(format!("need d >= 2, got {d}")));
    }
    let n = d - 1;
    let total = (ctx.q() as usize)
        .checked_pow(n as u32)
        .filter(|&t| t <= EXHAUSTIVE_LIMIT)
        .ok_or_else(|| Error::Resource(format!("F_{}^{n} is too large for exhaustive search", ctx.q())))?;
    let q = ctx.q() as usize;
    let mut basis: Vec<Vec<u32>> = Vec::new();
    for code in 1..total {
        let v: Vec<u32> = (0..n).map(|i| ((code / q.pow(i as u32)) % q) as u32).collect();
        if dot(&ctx, &v, &v) != 0 || basis.iter().any(|b| dot(&ctx, b, &v) != 0) {
            continue;
        }
        basis.push(v);
        if rank(&ctx, &basis) < basis.len() {
            basis.pop();
        }
    }
    IsotropicSubspace::new(ctx, n, basis)
}

/// Omega = W x {0} as sorted surface indices of P.
pub fn subspace_in_paraboloid(w: &IsotropicSubspace, geom: &ParaboloidGeometry) -> Result<Vec<usize>> {
    if w.ambient + 1 != geom.d() || **w.ctx() != **geom.ctx() {
        return Err(Error::Contract("subspace and paraboloid do not match".into()));
    }
    let base = geom.base_shape();
    let mut out: Vec<usize> = w
        .elements()
        .iter()
        .map(|v| {
            let j = base.index(v);
            if geom.norm_of(j) != 0 {
                return Err(Error::Internal(format!("({v:?}, 0) is not on the paraboloid")));
            }
            Ok(j)
        })
        .collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn rank(ctx: &FieldContext, vectors: &[Vec<u32>]) -> usize {
    let mut rows: Vec<Vec<u32>> = vectors.to_vec();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = ctx.inv(rows[r][c]).expect("pivot is nonzero");
        let pivot_row: Vec<u32> = rows[r].iter().map(|&x| ctx.mul(x, inv)).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = ctx.sub(*x, ctx.mul(f, y));
                }
            }
        }
        rows[r] = pivot_row;
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u32) -> Arc<FieldContext> {
        Arc::new(FieldContext::new(q).unwrap())
    }

    #[test]
    fn sizes_match_case_table() {
        for q in [3, 5, 7, 11, 9] {
            for d in 2..=8 {
                let ctx = field(q);
                let n = d - 1;
                let expect_exp = if n % 2 == 1 {
                    (d - 2) / 2
                } else {
                    let e = if ctx.is_minus_one_square() { 1i32 } else { -1 };
                    if e.pow((n / 2) as u32) == 1 {
                        (d - 1) / 2
                    } else {
                        (d - 3) / 2
                    }
                };
                let w = maximal_isotropic_subspace(ctx.clone(), d).unwrap();
                assert_eq!(w.size(), (q as usize).pow(expect_exp as u32), "q={q} d={d}");
                if (q as usize).pow(n as u32) <= 20000 {
                    assert_eq!(isotropic_subspace_exhaustive(ctx, d).unwrap().dim(), w.dim(), "q={q} d={d}");
                }
            }
        }
    }

    #[test]
    fn examples() {
        let w = maximal_isotropic_subspace(field(3), 3).unwrap();
        assert_eq!(w.size(), 1);
        assert_eq!(w.elements(), vec![vec![0, 0]]);
        assert_eq!(maximal_isotropic_subspace(field(7), 5).unwrap().size(), 49);
        assert_eq!(maximal_isotropic_subspace(field(13), 2).unwrap().size(), 1);

        let ctx = field(3);
        let geom = ParaboloidGeometry::new(ctx.clone(), 5).unwrap();
        let w = maximal_isotropic_subspace(ctx, 5).unwrap();
        let omega = subspace_in_paraboloid(&w, &geom).unwrap();
        assert_eq!(omega.len(), 9);
        for j in omega {
            let p = geom.point(j);
            assert_eq!(p[4], 0);
            assert!(geom.contains(&p));
        }
    }

    #[test]
    fn rejects_bad_bases() {
        let ctx = field(5);
        assert!(IsotropicSubspace::new(ctx.clone(), 2, vec![vec![1, 0]]).is_err());
        assert!(IsotropicSubspace::new(ctx.clone(), 2, vec![vec![1, 2], vec![2, 4]]).is_err());
        assert!(IsotropicSubspace::new(ctx, 2, vec![vec![1, 2]]).is_ok());
    }
}
