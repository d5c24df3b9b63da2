//! Additive energy of subsets of the paraboloid and the energy bounds for it.
//!
//! Lambda(E) counts ordered quadruples (x, y, z, w) in E^4 with x + y = z + w.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::paraboloid::{maximal_isotropic_subspace, subspace_in_paraboloid, ParaboloidGeometry};
use crate::transform::{convolve, GridFunction, GridShape, Measure};

/// Largest subset the quadruple method accepts.
pub const QUADRUPLE_LIMIT: usize = 512;

/// Sweeps of the greedy swap phase.
const MAX_SWEEPS: usize = 25;

/// A subset of P, stored as sorted surface indices.
#[derive(Debug, Clone)]
pub struct PointSubset {
    geom: Arc<ParaboloidGeometry>,
    members: Vec<usize>,
}

impl PointSubset {
    pub fn new(geom: Arc<ParaboloidGeometry>, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("subset members must be distinct".into()));
        }
        if members.last().is_some_and(|&j| j >= geom.len()) {
            return Err(Error::Domain("subset member is not a point of P".into()));
        }
        Ok(PointSubset { geom, members })
    }

    pub fn full(geom: Arc<ParaboloidGeometry>) -> Self {
        let members = (0..geom.len()).collect();
        PointSubset { geom, members }
    }

    pub fn geometry(&self) -> &Arc<ParaboloidGeometry> {
        &self.geom
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyMethod {
    /// Loop over (x, y, z) and look up w = x + y - z.
    Quadruple,
    /// Sum of r(s)^2 with r = 1_E * 1_E under the counting measure.
    Convolution,
}

/// Precomputed vector addition on F_q^d by grid index.
struct GridAdder<'a> {
    ctx: &'a FieldContext,
    shape: GridShape,
    coords: Vec<u32>,
}

impl<'a> GridAdder<'a> {
    fn new(geom: &'a ParaboloidGeometry, members: &[usize]) -> Self {
        let shape = geom.grid_shape();
        let coords = members.iter().flat_map(|&j| geom.point(j)).collect();
        GridAdder { ctx: geom.ctx(), shape, coords }
    }

    fn point(&self, i: usize) -> &[u32] {
        let d = self.shape.d();
        &self.coords[i * d..(i + 1) * d]
    }

    fn combine(&self, a: &[u32], b: &[u32], sub: bool) -> usize {
        let q = self.ctx.size();
        a.iter().zip(b).rev().fold(0, |acc, (&x, &y)| {
            let v = if sub { self.ctx.sub(x, y) } else { self.ctx.add(x, y) };
            acc * q + v as usize
        })
    }
}

/// Lambda(E) by either method. Both are exact.
pub fn additive_energy(e: &PointSubset, method: EnergyMethod) -> Result<u64> {
    match method {
        EnergyMethod::Quadruple => energy_quadruple(e),
        EnergyMethod::Convolution => energy_convolution(e),
    }
}

fn energy_quadruple(e: &PointSubset) -> Result<u64> {
    let n = e.len();
    if n > QUADRUPLE_LIMIT {
        return Err(Error::Resource(format!("quadruple method is limited to {QUADRUPLE_LIMIT} points, got {n}")));
    }
    let adder = GridAdder::new(&e.geom, &e.members);
    let d = adder.shape.d();
    let mut member = vec![false; adder.shape.len()];
    for &j in &e.members {
        member[e.geom.grid_index(j)] = true;
    }
    let mut sum = vec![0; d];
    let mut count = 0u64;
    for x in 0..n {
        for y in 0..n {
            for (s, (&a, &b)) in sum.iter_mut().zip(adder.point(x).iter().zip(adder.point(y))) {
                *s = adder.ctx.add(a, b);
            }
            for z in 0..n {
                if member[adder.combine(&sum, adder.point(z), true)] {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

fn energy_convolution(e: &PointSubset) -> Result<u64> {
    let geom = &e.geom;
    let ind = GridFunction::indicator(
        geom.ctx().clone(),
        geom.d(),
        Measure::Counting,
        e.members.iter().map(|&j| geom.grid_index(j)),
    )?;
    let r = convolve(&ind, &ind)?;
    let mut total = 0u64;
    for v in r.values() {
        let k = v.re.round();
        if (v - Complex64::new(k, 0.0)).norm() > 1e-6 {
            return Err(Error::Internal(format!("pair count {v} is not an integer")));
        }
        total += (k as u64).pow(2);
    }
    Ok(total)
}

/// Which energy bound applies to (d, q, |E|).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyRegime {
    /// Even d >= 4 and q^{(d-2)/2} <= |E| <= q^{(d+2)/2}.
    EvenWindow,
    /// Even d >= 4 outside that window.
    EvenOutsideWindow,
    /// d = 4l + 3 >= 7, -1 not a square, q^{(d-2)/2} <= |E| <= q^{(d+1)/2}.
    ThreeModFourWindow,
    ThreeModFourOutsideWindow,
    /// No bound of this family is available (odd d otherwise, or d = 2).
    Inapplicable,
}

impl EnergyRegime {
    pub fn in_window(&self) -> bool {
        matches!(self, EnergyRegime::EvenWindow | EnergyRegime::ThreeModFourWindow)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBounds {
    /// |E|^3.
    pub cube: f64,
    /// q^{-1}|E|^3 + q^{c}|E|^{5/2} + q^{(d-2)/2}|E|^2 with c = (d-2)/4 or (d-3)/4.
    pub mixed: Option<f64>,
    /// q^{(d-2)/4}|E|^{5/2} for even d, q^{(d-3)/4}|E|^{5/2} + q^{(d-2)/2}|E|^2 otherwise.
    pub corollary: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRatios {
    pub cube: f64,
    pub mixed: Option<f64>,
    pub corollary: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub d: usize,
    pub q: u32,
    pub size: usize,
    pub energy: u64,
    pub bounds: EnergyBounds,
    pub ratios: EnergyRatios,
    pub regime: EnergyRegime,
}

impl EnergyReport {
    /// Evaluates every bound at (q, d, size) for a known energy.
    pub fn evaluate(ctx: &FieldContext, d: usize, size: usize, energy: u64) -> Self {
        let q = ctx.q() as f64;
        let df = d as f64;
        let n = size as f64;
        let even = d >= 4 && d.is_multiple_of(2);
        let three_mod_four = d >= 7 && d % 4 == 3 && !ctx.is_minus_one_square();
        let (mixed, corollary, upper) = if even {
            let mid = q.powf((df - 2.0) / 4.0) * n.powf(2.5);
            let mixed = n.powi(3) / q + mid + q.powf((df - 2.0) / 2.0) * n * n;
            (Some(mixed), Some(mid), q.powf((df + 2.0) / 2.0))
        } else if three_mod_four {
            let mid = q.powf((df - 3.0) / 4.0) * n.powf(2.5);
            let tail = q.powf((df - 2.0) / 2.0) * n * n;
            (Some(n.powi(3) / q + mid + tail), Some(mid + tail), q.powf((df + 1.0) / 2.0))
        } else {
            (None, None, 0.0)
        };
        let in_window = n >= q.powf((df - 2.0) / 2.0) - 1e-9 && n <= upper + 1e-9;
        let regime = match (even, three_mod_four, in_window) {
            (true, _, true) => EnergyRegime::EvenWindow,
            (true, _, false) => EnergyRegime::EvenOutsideWindow,
            (_, true, true) => EnergyRegime::ThreeModFourWindow,
            (_, true, false) => EnergyRegime::ThreeModFourOutsideWindow,
            _ => EnergyRegime::Inapplicable,
        };
        let lambda = energy as f64;
        let bounds = EnergyBounds { cube: n.powi(3), mixed, corollary };
        let ratios = EnergyRatios {
            cube: lambda / bounds.cube,
            mixed: mixed.map(|b| lambda / b),
            corollary: corollary.map(|b| lambda / b),
        };
        EnergyReport { d, q: ctx.q(), size, energy, bounds, ratios, regime }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("energy reports always serialize")
    }
}

/// Computes Lambda(E) and evaluates the bounds against it.
pub fn energy_bound_report(e: &PointSubset) -> Result<EnergyReport> {
    if e.is_empty() {
        return Err(Error::Domain("energy bounds need a nonempty subset".into()));
    }
    let energy = additive_energy(e, EnergyMethod::Convolution)?;
    Ok(EnergyReport::evaluate(e.geom.ctx(), e.geom.d(), e.len(), energy))
}

/// Pair-sum counts r(s) of a subset, updated point by point.
struct PairSums<'a> {
    geom: &'a ParaboloidGeometry,
    points: Vec<Vec<u32>>,
    r: Vec<u32>,
    members: Vec<usize>,
    energy: u64,
}

impl<'a> PairSums<'a> {
    fn new(geom: &'a ParaboloidGeometry, members: &[usize]) -> Self {
        let points = (0..geom.len()).map(|j| geom.point(j)).collect();
        let mut s = PairSums { geom, points, r: vec![0; geom.grid_shape().len()], members: Vec::new(), energy: 0 };
        for &j in members {
            s.insert(j);
        }
        s
    }

    fn sum_index(&self, a: usize, b: usize) -> usize {
        let ctx = self.geom.ctx();
        let q = ctx.size();
        self.points[a].iter().zip(&self.points[b]).rev().fold(0, |acc, (&x, &y)| acc * q + ctx.add(x, y) as usize)
    }

    fn bump(&mut self, s: usize, k: i64) {
        let old = self.r[s] as i64;
        let new = old + k;
        self.energy = (self.energy as i64 + new * new - old * old) as u64;
        self.r[s] = new as u32;
    }

    fn insert(&mut self, j: usize) {
        for i in 0..self.members.len() {
            let s = self.sum_index(self.members[i], j);
            self.bump(s, 2);
        }
        let s = self.sum_index(j, j);
        self.bump(s, 1);
        self.members.push(j);
    }

    fn remove(&mut self, j: usize) {
        let pos = self.members.iter().position(|&m| m == j).expect("removing a member");
        self.members.swap_remove(pos);
        let s = self.sum_index(j, j);
        self.bump(s, -1);
        for i in 0..self.members.len() {
            let s = self.sum_index(self.members[i], j);
            self.bump(s, -2);
        }
    }
}

/// Result of [`energy_extremizer_search`].
#[derive(Debug, Clone)]
pub struct ExtremizerOutcome {
    pub best: PointSubset,
    pub report: EnergyReport,
    /// Number of subsets whose energy was evaluated.
    pub evaluated: usize,
    /// Largest energy seen among random draws alone.
    pub best_random_energy: u64,
}

/// Heuristic search for a subset of P of the given size with large energy:
/// random draws, unions of cosets of Omega inside P, then greedy single-point
/// swaps from the best candidate. Deterministic given the seed; ties go to the
/// lexicographically smallest member list.
pub fn energy_extremizer_search(
    geom: &Arc<ParaboloidGeometry>,
    size: usize,
    trials: usize,
    seed: u64,
) -> Result<ExtremizerOutcome> {
    let total = geom.len();
    if size == 0 || size > total {
        return Err(Error::Domain(format!("subset size must lie in [1, {total}], got {size}")));
    }
    let ctx = geom.ctx();
    if size == total {
        let best = PointSubset::full(geom.clone());
        let report = energy_bound_report(&best)?;
        return Ok(ExtremizerOutcome { best_random_energy: report.energy, best, report, evaluated: 1 });
    }

    let mut evaluated = 0;
    let mut best: Option<(u64, Vec<usize>)> = None;
    let consider = |energy: u64, mut members: Vec<usize>, best: &mut Option<(u64, Vec<usize>)>| {
        members.sort_unstable();
        let better = match best {
            None => true,
            Some((e, m)) => energy > *e || (energy == *e && members < *m),
        };
        if better {
            *best = Some((energy, members));
        }
    };

    let mut best_random_energy = 0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let members = rand::seq::index::sample(&mut rng, total, size).into_vec();
        let energy = PairSums::new(geom, &members).energy;
        evaluated += 1;
        best_random_energy = best_random_energy.max(energy);
        consider(energy, members, &mut best);
    }

    for members in omega_coset_candidates(geom, size)? {
        let energy = PairSums::new(geom, &members).energy;
        evaluated += 1;
        consider(energy, members, &mut best);
    }

    let (_, start) = best.clone().expect("at least one structured candidate exists");
    let mut state = PairSums::new(geom, &start);
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        let mut outside: Vec<usize> = {
            let inside: BTreeSet<usize> = state.members.iter().copied().collect();
            (0..total).filter(|j| !inside.contains(j)).collect()
        };
        let mut current: Vec<usize> = state.members.clone();
        current.sort_unstable();
        for out in current {
            let base = state.energy;
            state.remove(out);
            let mut chosen = None;
            for (k, &cand) in outside.iter().enumerate() {
                state.insert(cand);
                evaluated += 1;
                if state.energy > base && chosen.is_none_or(|(e, _)| state.energy > e) {
                    chosen = Some((state.energy, k));
                }
                state.remove(cand);
            }
            match chosen {
                Some((_, k)) => {
                    let cand = outside[k];
                    outside[k] = out;
                    state.insert(cand);
                    improved = true;
                }
                None => state.insert(out),
            }
        }
        consider(state.energy, state.members.clone(), &mut best);
        if !improved {
            break;
        }
    }

    let (energy, members) = best.expect("search evaluated at least one subset");
    let best = PointSubset::new(geom.clone(), members)?;
    let report = EnergyReport::evaluate(ctx, geom.d(), size, energy);
    Ok(ExtremizerOutcome { best, report, evaluated, best_random_energy })
}

/// Unions of cosets xi + Omega contained in P, truncated to the requested size.
/// A coset through (xi', ||xi'||) stays in P exactly when xi' is orthogonal to W.
fn omega_coset_candidates(geom: &Arc<ParaboloidGeometry>, size: usize) -> Result<Vec<Vec<usize>>> {
    let ctx = geom.ctx();
    let w = maximal_isotropic_subspace(ctx.clone(), geom.d())?;
    let omega = subspace_in_paraboloid(&w, geom)?;
    let base = geom.base_shape();
    let elements = w.elements();
    let mut seen = BTreeSet::new();
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for j in 0..geom.len() {
        let xi = base.coords(j);
        if !w.is_orthogonal(&xi) {
            continue;
        }
        let mut coset: Vec<usize> = elements
            .iter()
            .map(|v| base.index(&xi.iter().zip(v).map(|(&a, &b)| ctx.add(a, b)).collect::<Vec<_>>()))
            .collect();
        coset.sort_unstable();
        if seen.insert(coset[0]) {
            cosets.push(coset);
        }
    }
    let mut out = vec![omega.iter().copied().take(size).collect::<Vec<_>>()];
    let mut union: Vec<usize> = Vec::new();
    for coset in &cosets {
        if union.len() >= size {
            break;
        }
        union.extend(coset);
    }
    if union.len() >= size {
        union.truncate(size);
        out.push(union);
    }
    out.retain(|c| c.len() == size);
    Ok(out)
}
