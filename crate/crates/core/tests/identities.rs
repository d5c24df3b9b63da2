use std::sync::Arc;

use num_complex::Complex64;
use parlab::energy::{additive_energy, EnergyMethod, PointSubset};
use parlab::machinery::{is_regular, random_regular, regular_decomposition, verify_duality_identity};
use parlab::paraboloid::{
    dsigma_inverse_grid, extension_operator, extension_via_transform, restriction_operator, surface_inner,
    ParaboloidGeometry, SurfaceFunction,
};
use parlab::transform::{convolve, fourier_forward, fourier_inverse, inner, lp_norm};
use parlab::{Exponent, FieldContext, GridFunction, Measure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cell() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((3u32, 2usize)), Just((5, 2)), Just((7, 2)), Just((9, 2)), Just((3, 3)), Just((5, 3))]
}

fn geom(q: u32, d: usize) -> Arc<ParaboloidGeometry> {
    Arc::new(ParaboloidGeometry::new(Arc::new(FieldContext::new(q).unwrap()), d).unwrap())
}

fn random(q: u32, d: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::random(Arc::new(FieldContext::new(q).unwrap()), d, Measure::Counting, rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plancherel_and_inversion((q, d) in cell(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random(q, d, &mut rng);
        let hat = fourier_forward(&g).unwrap();
        let two = Exponent::int(2);
        let n = lp_norm(&g, two);
        prop_assert!((lp_norm(&hat, two) - n).abs() <= 1e-9 * n);
        let back = fourier_inverse(&hat).unwrap();
        prop_assert!(back.max_abs_diff(&g).unwrap() <= 1e-9 * lp_norm(&g, Exponent::Infinity));
    }

    #[test]
    fn convolution_theorem((q, d) in cell(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random(q, d, &mut rng);
        let b = random(q, d, &mut rng);
        let lhs = fourier_forward(&convolve(&a, &b).unwrap()).unwrap();
        let rhs = fourier_forward(&a).unwrap().zip_with(&fourier_forward(&b).unwrap(), |x, y| x * y).unwrap();
        let scale = lp_norm(&rhs, Exponent::Infinity);
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn extension_routes_and_duality((q, d) in cell(), seed in any::<u64>()) {
        let geom = geom(q, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SurfaceFunction::random(geom.clone(), &mut rng);
        let direct = extension_operator(&f).unwrap();
        let fast = extension_via_transform(&f).unwrap();
        prop_assert!(direct.max_abs_diff(&fast).unwrap() <= 1e-9);
        let g = GridFunction::random(geom.ctx().clone(), d, Measure::Counting, &mut rng).unwrap();
        let lhs = surface_inner(&restriction_operator(&g, &geom).unwrap(), &f).unwrap();
        let rhs = inner(&g, &direct).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn energy_methods_agree((q, d) in cell(), seed in any::<u64>(), frac in 0.05f64..1.0) {
        let geom = geom(q, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = ((geom.len() as f64 * frac).ceil() as usize).max(1);
        let members = rand::seq::index::sample(&mut rng, geom.len(), size).into_vec();
        let e = PointSubset::new(geom, members).unwrap();
        let a = additive_energy(&e, EnergyMethod::Quadruple).unwrap();
        let b = additive_energy(&e, EnergyMethod::Convolution).unwrap();
        prop_assert_eq!(a, b);
        let n = size as u64;
        prop_assert!(2 * n * n - n <= a && a <= n * n * n);
    }

    #[test]
    fn decomposition_reconstructs((q, d) in cell(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random(q, d, &mut rng);
        let dec = regular_decomposition(&g, 40).unwrap();
        prop_assert!(dec.reconstruct().max_abs_diff(&g).unwrap() <= 1e-12 * dec.max_abs);
        prop_assert!(lp_norm(&dec.residual, Exponent::Infinity) <= dec.max_abs * 2f64.powi(-40));
        for piece in &dec.pieces {
            prop_assert!(is_regular(&piece.func).is_regular());
        }
        let bound = 40.0 * (d as f64 * (q as f64).log2() + 1.0);
        prop_assert!(dec.pieces.len() as f64 <= bound);
    }

    #[test]
    fn duality_on_regular_functions((q, d) in cell(), seed in any::<u64>()) {
        let geom = geom(q, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_regular(&geom, &mut rng).unwrap();
        prop_assert!(verify_duality_identity(&g, &geom).unwrap().pass);
    }
}

#[test]
fn dsigma_closed_form_matches_direct_sum() {
    for (q, d) in [(3, 2), (5, 2), (7, 2), (3, 3), (5, 3), (3, 4), (9, 3)] {
        let geom = geom(q, d);
        let one = SurfaceFunction::constant(geom.clone(), Complex64::new(1.0, 0.0));
        let direct = extension_operator(&one).unwrap();
        let closed = dsigma_inverse_grid(&geom).unwrap();
        assert!(direct.max_abs_diff(&closed).unwrap() < 1e-9, "q={q} d={d}");
    }
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ctx = Arc::new(FieldContext::with_modulus(3, vec![2, 2, 1]).unwrap());
    let g = GridFunction::random(ctx.clone(), 2, Measure::Normalized, &mut rng).unwrap();
    let back = GridFunction::from_json(&g.to_json()).unwrap();
    assert_eq!((back.values(), back.measure(), back.d()), (g.values(), g.measure(), g.d()));
    assert_eq!(**back.ctx(), *ctx);
    let geom = Arc::new(ParaboloidGeometry::new(ctx, 3).unwrap());
    let f = SurfaceFunction::random(geom, &mut rng);
    let back = SurfaceFunction::from_json(&f.to_json()).unwrap();
    assert_eq!(back.values(), f.values());
}
