//! Seeded fixtures shared by the benchmarks.

use std::sync::Arc;

use parlab::{FieldContext, GridFunction, Measure, ParaboloidGeometry, PointSubset, SurfaceFunction};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn geometry(q: u32, d: usize) -> Arc<ParaboloidGeometry> {
    let ctx = Arc::new(FieldContext::new(q).expect("benchmark fields are valid"));
    Arc::new(ParaboloidGeometry::new(ctx, d).expect("benchmark grids fit the cap"))
}

pub fn random_grid(geom: &ParaboloidGeometry, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::random(geom.ctx().clone(), geom.d(), Measure::Counting, &mut rng).expect("grid fits the cap")
}

pub fn random_surface(geom: &Arc<ParaboloidGeometry>, seed: u64) -> SurfaceFunction {
    SurfaceFunction::random(geom.clone(), &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_subset(geom: &Arc<ParaboloidGeometry>, size: usize, seed: u64) -> PointSubset {
    let members = sample(&mut ChaCha8Rng::seed_from_u64(seed), geom.len(), size).into_vec();
    PointSubset::new(geom.clone(), members).expect("sampled indices are distinct")
}
