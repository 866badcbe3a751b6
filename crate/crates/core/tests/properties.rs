mod common;

use bvphi::phi::{modulus_at, tv_phi, tv_phi_reduced, FnGauge, Gauge, Identity, Sign};
use bvphi::riemann::solve_exact;
use bvphi::tracker::FrontKind;
use bvphi::verify::{check_reconstruction, check_velocity_control};
use common::{flux, gauge, random_run, NAMES};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flux_index() -> impl Strategy<Value = usize> {
    0..NAMES.len()
}

fn unit() -> impl Strategy<Value = f64> {
    -1.0f64..=1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn inverse_undoes_every_mean_velocity(i in flux_index(), u in unit(), lambda in 0.0f64..=1.0) {
        let f = flux(i);
        let y = f.velocity_mean(u, lambda).unwrap();
        let back = f.inverse().eval(y).unwrap();
        prop_assert!((back - u).abs() <= 1e-9, "{} u={u} λ={lambda} b={back}", NAMES[i]);
    }

    #[test]
    fn one_sided_velocities_are_coherent(i in flux_index(), u in unit(), d in 1e-9f64..2.0) {
        let v = (u + d).min(1.0);
        prop_assume!(u < v);
        let f = flux(i);
        prop_assert!(f.velocity_limits(u).unwrap().1 <= f.velocity_limits(v).unwrap().0);
    }

    #[test]
    fn mean_slopes_increase(i in flux_index(), mut p in prop::array::uniform3(unit())) {
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assume!(p[1] - p[0] > 1e-3 && p[2] - p[1] > 1e-3);
        let f = flux(i);
        let s = |a: f64, b: f64| (f.eval(b).unwrap() - f.eval(a).unwrap()) / (b - a);
        prop_assert!(s(p[0], p[1]) < s(p[0], p[2]));
        prop_assert!(s(p[0], p[2]) < s(p[1], p[2]));
    }

    #[test]
    fn modulus_is_subadditive(i in flux_index(), h1 in 0.0f64..4.0, h2 in 0.0f64..4.0) {
        let b = flux(i).inverse();
        let w = |h| modulus_at(b, h);
        prop_assert!(w(h1 + h2) <= w(h1) + w(h2) + 1e-12);
    }

    #[test]
    fn gauge_is_superadditive(i in flux_index(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let g = gauge(i);
        prop_assert!(g.eval(s + t).unwrap() + 1e-12 >= g.eval(s).unwrap() + g.eval(t).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn gauge_of_inverse_increment_is_bounded(i in flux_index(), p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let f = flux(i);
        let (lo, hi) = f.inverse().domain();
        let (y1, y2) = (lo + p * (hi - lo), lo + q * (hi - lo));
        let b = f.inverse();
        let d = (b.eval(y1).unwrap() - b.eval(y2).unwrap()).abs();
        prop_assert!(gauge(i).eval(d).unwrap() <= (y1 - y2).abs() + 1e-12);
    }
}

#[test]
fn modulus_vanishes_at_zero() {
    for i in 0..NAMES.len() {
        let b = flux(i).inverse();
        assert_eq!(modulus_at(b, 0.0), 0.0);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let w = modulus_at(b, 2.0f64.powi(-k));
            assert!(w <= prev);
            prev = w;
        }
        assert!(prev < 1e-3, "{}: ω(2^-39) = {prev}", NAMES[i]);
    }
}

fn sequences() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 0..=12)
}

fn gauges() -> Vec<(&'static str, Box<dyn Fn(f64) -> f64>)> {
    let g = gauge(1).clone();
    let end = g.domain_end();
    vec![
        ("identity", Box::new(|s| s)),
        ("square", Box::new(|s| s * s)),
        ("example12", Box::new(move |s: f64| g.eval(s.min(end)).unwrap() + 4.0 * (s - end).max(0.0))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn dp_matches_exhaustive_enumeration(v in sequences()) {
        for (name, g) in gauges() {
            for (sign, pos) in [(Sign::Signed, false), (Sign::Positive, true)] {
                let dp = tv_phi(&v, &FnGauge(&g), sign).unwrap();
                prop_assert_eq!(dp.value, common::brute_force(&v, &g, pos), "{}", name);
            }
        }
    }

    #[test]
    fn variations_are_ordered_and_duplication_invariant(v in sequences()) {
        for (_, g) in gauges() {
            let full = tv_phi(&v, &FnGauge(&g), Sign::Signed).unwrap().value;
            let plus = tv_phi(&v, &FnGauge(&g), Sign::Positive).unwrap().value;
            prop_assert!(plus <= full);
            let doubled: Vec<f64> = v.iter().flat_map(|&x| [x, x]).collect();
            prop_assert_eq!(tv_phi(&doubled, &FnGauge(&g), Sign::Signed).unwrap().value, full);
            prop_assert_eq!(tv_phi(&doubled, &FnGauge(&g), Sign::Positive).unwrap().value, plus);
        }
        let classical: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        let tv = tv_phi(&v, &Identity, Sign::Signed).unwrap().value;
        prop_assert!((tv - classical).abs() <= 1e-12 * (1.0 + classical));
    }

    #[test]
    fn turning_point_reduction_agrees(v in prop::collection::vec(-2.0f64..2.0, 0..=60)) {
        for (_, g) in gauges() {
            for sign in [Sign::Signed, Sign::Positive] {
                let dp = tv_phi(&v, &FnGauge(&g), sign).unwrap().value;
                let red = tv_phi_reduced(&v, &FnGauge(&g), sign).unwrap();
                prop_assert!((dp - red.value).abs() <= 1e-12 * (1.0 + dp));
                let chain = bvphi::phi::chain_value(&v, &red.chain, &FnGauge(&g), sign).unwrap();
                prop_assert_eq!(chain, red.value);
            }
        }
    }

    #[test]
    fn restricted_oleinik_is_an_identity(i in flux_index(), p in unit(), q in unit(), r in 0.0f64..=1.0, s in 0.0f64..=1.0) {
        let f = flux(i);
        let (ul, ur) = (p.min(q), p.max(q));
        prop_assume!(ur - ul > 1e-6);
        let fan = solve_exact(f, ul, ur).unwrap();
        let (w1, w2) = (ul + r.min(s) * (ur - ul), ul + r.max(s) * (ur - ul));
        let (eta, xi) = (f.mean_velocity(w1).unwrap(), f.mean_velocity(w2).unwrap());
        prop_assume!(xi > eta);
        let d = f.mean_velocity(fan.eval(f, xi)).unwrap() - f.mean_velocity(fan.eval(f, eta)).unwrap();
        prop_assert!((d - (xi - eta)).abs() <= 1e-9, "{} d={d} ξ-η={}", NAMES[i], xi - eta);
    }

    #[test]
    fn exact_fans_are_monotone_in_xi(i in flux_index(), p in unit(), q in unit()) {
        let f = flux(i);
        let fan = solve_exact(f, p.min(q), p.max(q)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=200 {
            let u = fan.eval(f, -6.0 + 12.0 * k as f64 / 200.0);
            prop_assert!(u >= prev);
            prev = u;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdivision_and_approximate_flux(i in flux_index(), eps in 0.05f64..2.0) {
        let f = flux(i);
        let fe = common::approx(f, eps);
        let c = fe.states();
        let s = fe.slopes();
        let gap_bound = modulus_at(f.inverse(), eps / 4.0);
        for k in 0..c.len() - 1 {
            prop_assert!(c[k + 1] > c[k]);
            let gap = f.velocity_limits(c[k + 1]).unwrap().0 - f.velocity_limits(c[k]).unwrap().1;
            prop_assert!(gap <= eps / 4.0 + 1e-12);
            prop_assert!(c[k + 1] - c[k] <= gap_bound + 1e-9);
            prop_assert!(f.velocity_limits(c[k]).unwrap().1 <= s[k] + 1e-12);
            prop_assert!(s[k] <= f.velocity_limits(c[k + 1]).unwrap().0 + 1e-12);
            prop_assert!(fe.eval(c[k]).unwrap() == f.eval(c[k]).unwrap());
        }
        for k in 1..s.len() {
            prop_assert!(s[k] > s[k - 1]);
            let mean = f.mean_velocity(c[k]).unwrap();
            prop_assert!(s[k - 1] <= mean + 1e-12 && mean <= s[k] + 1e-12);
        }
    }

    #[test]
    fn tracker_structure(i in flux_index(), seed in any::<u64>(), breaks in 1usize..16, eps_i in 0usize..2) {
        let f = flux(i);
        let fe = common::approx(f, [0.5, 0.25][eps_i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = random_run(&mut rng, &fe, breaks);
        let other = random_run(&mut rng, &fe, breaks);
        let (mut s, mut o) = (init.clone(), other);
        let window = (-1.0 - 3.0 * 4.0, 1.0 + 3.0 * 4.0);
        let mass0 = s.mass(window.0, window.1);
        let mut rare = s.fronts().iter().filter(|f| f.kind == FrontKind::Rarefaction).count();
        let mut dist = f64::INFINITY;
        for k in 1..=8 {
            let t = 0.5 * k as f64 - 0.123;
            let before = s.events().len();
            s.advance_to(t).unwrap();
            o.advance_to(t).unwrap();
            s.check_invariants().unwrap();
            for e in &s.events()[before..] {
                prop_assert!(e.out_count() < e.in_count());
            }
            prop_assert!(s.events().len() <= init.initial_fronts());
            let r = s.fronts().iter().filter(|f| f.kind == FrontKind::Rarefaction).count();
            prop_assert!(r <= rare);
            rare = r;
            let mass = s.mass(window.0, window.1);
            prop_assert!((mass - mass0).abs() <= 1e-9 * mass0.abs().max(1.0));
            prop_assert!(s.fronts().iter().all(|f| f.left.abs() <= 1.0 && f.right.abs() <= 1.0));
            if s.events().iter().all(|e| (e.time - t).abs() > 1e-9) {
                prop_assert!(check_reconstruction(&s, 1e-9).unwrap().pass);
                for c in check_velocity_control(&s, 1e-9).unwrap() {
                    prop_assert!(c.pass, "{:?}", c);
                }
            }
            let d = s
                .snapshot()
                .unwrap()
                .solution()
                .integrate_with(&o.snapshot().unwrap().solution(), |a, b| Ok((a - b).abs()))
                .unwrap();
            prop_assert!(d <= dist + 1e-9, "L1 distance grew from {dist} to {d}");
            dist = d;
        }
    }
}

#[test]
fn identity_gauge_flag() {
    assert!(Gauge::<f64>::is_identity(&Identity));
}
