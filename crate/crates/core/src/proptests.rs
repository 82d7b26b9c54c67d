//! Randomized invariants across modules.

use std::f64::consts::PI;

use crate::quantizer::{from_spherical, spherical_quantize, to_spherical};
use crate::{
    hom_quantize, log_quantize, DMatrix, DVector, Dilation, FundamentalDomain, HomSpace,
    QuantizerParams,
};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn generators() -> Vec<Dilation> {
    let id = DMatrix::identity(2, 2);
    vec![
        Dilation::standard(2),
        Dilation::diagonal(&[3.0, 2.0, 1.0]).unwrap(),
        Dilation::new(
            DMatrix::from_row_slice(2, 2, &[1.5, 0.6, 0.0, 1.0]),
            id.clone(),
        )
        .unwrap(),
        Dilation::new(DMatrix::from_row_slice(2, 2, &[2.0, -1.5, 1.0, 1.0]), id).unwrap(),
    ]
}

fn weighted() -> Dilation {
    let g = DMatrix::from_row_slice(2, 2, &[1.5, 0.6, 0.0, 1.0]);
    let p = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    Dilation::new(g, p).unwrap()
}

fn spaces() -> Vec<HomSpace> {
    let mut all: Vec<HomSpace> = generators().into_iter().map(HomSpace::from).collect();
    all.push(weighted().into());
    all
}

fn vector(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
        .prop_filter("nonzero", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-6)
        .prop_map(DVector::from_vec)
}

/// Picks one of `spaces()` and a vector of matching dimension.
fn space_and_vector() -> impl Strategy<Value = (usize, DVector<f64>)> {
    let dims: Vec<usize> = spaces().iter().map(HomSpace::dim).collect();
    (0..dims.len()).prop_flat_map(move |i| (Just(i), vector(dims[i])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_law(i in 0usize..4, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let d = &generators()[i];
        let lhs = d.dilate(s) * d.dilate(t);
        let rhs = d.dilate(s + t);
        prop_assert!((lhs - &rhs).norm() <= 1e-9 * rhs.norm());
    }

    #[test]
    fn generator_commutes(i in 0usize..4, s in -3.0f64..3.0) {
        let d = &generators()[i];
        let e = d.dilate(s);
        let g = d.generator();
        prop_assert!((g * &e - &e * g).norm() <= 1e-10 * (1.0 + e.norm()));
    }

    #[test]
    fn dilation_of_zero_step_is_identity(i in 0usize..4) {
        let d = &generators()[i];
        prop_assert_eq!(d.dilate(0.0), DMatrix::identity(d.dim(), d.dim()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norm_sandwich((i, x) in space_and_vector(), s in -3.0f64..3.0) {
        let d = spaces()[i].dilation().clone();
        let (lo, hi) = d.norm_bounds(s);
        let nx = d.norm(&x);
        let ny = d.norm(&d.apply(s, &x));
        prop_assert!(ny >= lo * nx * (1.0 - 1e-9));
        prop_assert!(ny <= hi * nx * (1.0 + 1e-9));
    }

    #[test]
    fn hom_norm_is_homogeneous((i, x) in space_and_vector(), s in -3.0f64..3.0) {
        let sp = &spaces()[i];
        let r = sp.norm(&x).unwrap();
        let rs = sp.norm(&sp.dilation().apply(s, &x)).unwrap();
        let expect = s.exp() * r;
        prop_assert!((rs - expect).abs() <= 1e-7 * expect);
    }

    #[test]
    fn hom_norm_solves_defining_equation((i, x) in space_and_vector()) {
        let sp = &spaces()[i];
        let r = sp.norm(&x).unwrap();
        let unit = sp.dilation().norm(&sp.dilation().apply(-r.ln(), &x));
        prop_assert!((unit - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn hom_norm_sandwich((i, x) in space_and_vector()) {
        let sp = &spaces()[i];
        let d = sp.dilation();
        let r = sp.norm(&x).unwrap();
        let nx = d.norm(&x);
        let (a, b) = (r.powf(d.eta_min()), r.powf(d.eta_max()));
        let (lo, hi) = if nx >= 1.0 { (a, b) } else { (b, a) };
        prop_assert!(nx >= lo * (1.0 - 1e-8) && nx <= hi * (1.0 + 1e-8));
    }

    #[test]
    fn projection_is_dilation_invariant((i, x) in space_and_vector(), s in -2.0f64..2.0) {
        let sp = &spaces()[i];
        let u = sp.project(&x).unwrap();
        let v = sp.project(&sp.dilation().apply(s, &x)).unwrap();
        prop_assert!((sp.dilation().norm(&u) - 1.0).abs() <= 1e-12);
        prop_assert!((u - v).norm() <= 1e-8);
    }

    #[test]
    fn phi_round_trips((i, x) in space_and_vector()) {
        let sp = &spaces()[i];
        let y = sp.phi(&x).unwrap();
        prop_assert!((sp.phi_inv(&y) - &x).norm() <= 1e-8 * x.norm().max(1.0));
        prop_assert!((sp.phi(&sp.phi_inv(&x)).unwrap() - &x).norm() <= 1e-8 * x.norm().max(1.0));
        let r = sp.norm(&x).unwrap();
        prop_assert!((sp.dilation().norm(&y) - r).abs() <= 1e-12 * r.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tilde_operations_form_a_vector_space(
        (i, x) in space_and_vector(),
        seed in prop::collection::vec(-10.0f64..10.0, 6),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let sp = &spaces()[i];
        let n = sp.dim();
        let y = DVector::from_column_slice(&seed[..n]);
        let z = DVector::from_column_slice(&seed[3..3 + n]);
        let close = |p: &DVector<f64>, q: &DVector<f64>| {
            (p - q).norm() <= 1e-7 * p.norm().max(q.norm()).max(1.0)
        };

        let xy = sp.tilde_add(&x, &y).unwrap();
        prop_assert!(close(&xy, &sp.tilde_add(&y, &x).unwrap()));

        let left = sp.tilde_add(&xy, &z).unwrap();
        let right = sp.tilde_add(&x, &sp.tilde_add(&y, &z).unwrap()).unwrap();
        prop_assert!(close(&left, &right));

        let lhs = sp.tilde_scale(a, &xy);
        let rhs = sp.tilde_add(&sp.tilde_scale(a, &x), &sp.tilde_scale(a, &y)).unwrap();
        prop_assert!(close(&lhs, &rhs));

        let lhs = sp.tilde_scale(a + b, &x);
        let rhs = sp.tilde_add(&sp.tilde_scale(a, &x), &sp.tilde_scale(b, &x)).unwrap();
        prop_assert!(close(&lhs, &rhs));

        prop_assert!(close(&sp.tilde_add(&x, &DVector::zeros(n)).unwrap(), &x));
        prop_assert!(sp.norm(&sp.tilde_sub(&x, &x).unwrap()).unwrap() <= 1e-7);

        let r = sp.norm(&x).unwrap();
        let ra = sp.norm(&sp.tilde_scale(a, &x)).unwrap();
        prop_assert!((ra - a.abs() * r).abs() <= 1e-7 * r.max(1.0));

        let xx = sp.inner(&x, &x).unwrap();
        prop_assert!((xx - r * r).abs() <= 1e-10 * (r * r).max(1.0));
        prop_assert!((sp.inner(&x, &y).unwrap() - sp.inner(&y, &x).unwrap()).abs() <= 1e-9 * xx.max(1.0));

        let h = DMatrix::identity(n, n) * a;
        prop_assert!(close(&sp.matrix_apply(&h, &x).unwrap(), &sp.tilde_scale(a, &x)));
    }

    #[test]
    fn projection_index_is_unique(
        (i, x) in space_and_vector(),
        step in 0.1f64..2.0,
        rho in 0.2f64..5.0,
    ) {
        let sp = spaces()[i].clone();
        let fd = FundamentalDomain::new(sp.clone(), step, rho).unwrap();
        let r = sp.norm(&x).unwrap();
        let k = fd.index(&x).unwrap();
        let hits: Vec<i64> = (k - 1..=k + 1)
            .filter(|&j| fd.contains_radius(r * (-(j as f64) * step).exp()))
            .collect();
        prop_assert_eq!(hits, vec![k]);
        let (z, kz) = fd.project(&x).unwrap();
        prop_assert_eq!(kz, k);
        let rz = sp.norm(&z).unwrap();
        prop_assert!(rz >= rho * (1.0 - 1e-9) && rz < rho * step.exp() * (1.0 + 1e-9));
    }

    #[test]
    fn spherical_round_trip(y in prop::collection::vec(-5.0f64..5.0, 2..6)) {
        let y = DVector::from_vec(y);
        let c = to_spherical(&y).unwrap();
        let m = c.angles.len();
        for (k, th) in c.angles.iter().enumerate() {
            let top = if k + 1 == m { 2.0 * PI } else { PI };
            prop_assert!(*th >= 0.0 && (*th < top || (k + 1 < m && *th <= PI)));
        }
        let back = from_spherical(&c).unwrap();
        prop_assert!((back - &y).norm() <= 1e-10 * y.norm().max(1.0));
    }

    #[test]
    fn radial_sector_bound_is_exact(
        z in 1e-8f64..1e8,
        nu in 0.05f64..0.95,
    ) {
        let p = QuantizerParams::new(nu, PI / 8.0, 2).unwrap();
        let q = log_quantize(&p, z).unwrap();
        prop_assert!((q.value - z).abs() <= p.delta() * z);
        let (lo, hi) = p.level_interval(q.level.unwrap());
        prop_assert!(z >= lo * (1.0 - 1e-15) && z < hi * (1.0 + 1e-15));
    }

    #[test]
    fn quantizer_output_is_on_grid_and_idempotent((i, x) in space_and_vector()) {
        let sp = &spaces()[i];
        let p = QuantizerParams::new(0.7, PI / 20.0, sp.dim()).unwrap();
        let q = hom_quantize(sp, &p, &x).unwrap();
        let lr = sp.norm(&q).unwrap().ln();
        let level = (lr - p.xi0().ln()) / p.nu().ln();
        prop_assert!((level - level.round()).abs() <= 1e-9);
        let qq = hom_quantize(sp, &p, &q).unwrap();
        prop_assert!((qq - &q).norm() <= 1e-9 * q.norm().max(1.0));
    }

    #[test]
    fn spherical_bound_holds(u in prop::collection::vec(-1.0f64..1.0, 2..5), k in 1usize..40) {
        let n = u.len();
        let mut u = DVector::from_vec(u);
        prop_assume!(u.norm() > 1e-3);
        u /= u.norm();
        let sp: HomSpace = Dilation::standard(n).into();
        let p = QuantizerParams::new(0.5, PI / k as f64, n).unwrap();
        let w = spherical_quantize(&sp, &p, &u).unwrap();
        prop_assert!((w.norm() - 1.0).abs() <= 1e-12);
        prop_assert!((w - &u).norm() <= p.spherical_error_bound() + 1e-10);
    }
}

#[test]
fn dilation_limits() {
    let x = DVector::from_column_slice(&[0.3, -0.7, 1.1]);
    for d in generators() {
        if d.eta_min() < 1.0 {
            continue;
        }
        let x = x.rows(0, d.dim()).into_owned();
        let nx = d.norm(&x);
        assert!(d.norm(&d.apply(-10.0, &x)) < 1e-3 * nx);
        assert!(d.norm(&d.apply(10.0, &x)) > 1e3 * nx);
    }
}

#[test]
fn alpha1_bounds_relative_distance() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for sp in spaces() {
        let n = sp.dim();
        let mut checked = 0;
        while checked < 2_000 {
            let x = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let y = &x + DVector::from_fn(n, |_, _| rng.random_range(-0.5..0.5));
            let px = sp.phi(&x).unwrap();
            let py = sp.phi(&y).unwrap();
            let d = sp.dilation();
            let theta = d.norm(&(&py - &px)) / d.norm(&px);
            if !(theta < 1.0) {
                continue;
            }
            checked += 1;
            let diff = &y - &x;
            let ratio = sp.inner(&diff, &diff).unwrap() / sp.inner(&x, &x).unwrap();
            let bound = sp.distance_bound_alpha1(theta).unwrap();
            assert!(
                ratio <= bound + 1e-8,
                "ratio {ratio} bound {bound} theta {theta}"
            );
        }
    }
}

#[test]
fn alpha1_examples() {
    let sp: HomSpace = Dilation::standard(2).into();
    assert_eq!(sp.distance_bound_alpha1(0.0).unwrap(), 0.0);
    assert_relative_eq!(
        sp.distance_bound_alpha1(0.1).unwrap(),
        0.09,
        max_relative = 1e-12
    );
    let d = HomSpace::from(Dilation::diagonal(&[3.0, 2.0, 1.0]).unwrap());
    let mut last = 0.0;
    for k in 1..100 {
        let a = d.distance_bound_alpha1(k as f64 * 0.05).unwrap();
        assert!(a > last);
        last = a;
    }
    assert!(d.distance_bound_alpha1(-0.1).is_err());
}
