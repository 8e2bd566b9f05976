use proptest::prelude::*;

use normforge::interpolation;
use normforge::renorming;
use normforge::{PolytopeBall, QuadSurd, Rat, RatVec};

fn rat() -> impl Strategy<Value = Rat> {
    (-12i64..=12, 1i64..=7).prop_map(|(p, q)| Rat::new(p, q))
}

fn pos() -> impl Strategy<Value = Rat> {
    (1i64..=12, 1i64..=7).prop_map(|(p, q)| Rat::new(p, q))
}

fn vec_of(d: usize) -> impl Strategy<Value = RatVec> {
    prop::collection::vec(rat(), d)
}

/// Coordinate axes scaled by positive weights plus a few random points,
/// so the generators always span.
fn ball(d: usize) -> impl Strategy<Value = PolytopeBall> {
    (prop::collection::vec(pos(), d), prop::collection::vec(vec_of(d), 0..4)).prop_map(move |(w, extra)| {
        let mut gens: Vec<RatVec> = (0..d)
            .map(|i| {
                let mut e = vec![Rat::zero(); d];
                e[i] = w[i].clone();
                e
            })
            .collect();
        gens.extend(extra.into_iter().filter(|g| g.iter().any(|c| !c.is_zero())));
        PolytopeBall::new(d, gens).unwrap()
    })
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale(a: &[Rat], c: &Rat) -> RatVec {
    a.iter().map(|x| x * c).collect()
}

fn ball_and_vecs(d: usize) -> impl Strategy<Value = (PolytopeBall, RatVec, RatVec)> {
    (ball(d), vec_of(d), vec_of(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauge_is_a_norm((b, x, y) in prop_oneof![ball_and_vecs(2), ball_and_vecs(3)], c in rat()) {
        let gx = b.gauge(&x).unwrap();
        let gy = b.gauge(&y).unwrap();
        prop_assert!(b.gauge(&add(&x, &y)).unwrap() <= &gx + &gy);
        prop_assert_eq!(b.gauge(&scale(&x, &c)).unwrap(), c.abs() * &gx);
        prop_assert_eq!(gx.is_zero(), x.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn contains_iff_gauge_at_most_one((b, x, _) in ball_and_vecs(3)) {
        prop_assert_eq!(b.contains(&x).unwrap(), b.gauge(&x).unwrap() <= Rat::one());
        // every generator sits on or inside the boundary
        for g in b.generators() {
            prop_assert!(b.gauge(g).unwrap() <= Rat::one());
        }
    }

    #[test]
    fn support_dual_to_gauge((b, x, u) in ball_and_vecs(3)) {
        // |u . x| <= h_B(u) * g_B(x), with equality on some facet normal
        let gx = b.gauge(&x).unwrap();
        prop_assert!(dot(&u, &x).abs() <= b.support(&u).unwrap() * &gx);
        let best = b.hrep().iter().map(|a| dot(a, &x).abs()).max().unwrap();
        prop_assert_eq!(best, gx);
    }

    #[test]
    fn minkowski_support_law((a, u, _) in ball_and_vecs(2), b in ball(2), s in pos(), t in pos()) {
        let m = PolytopeBall::minkowski_sum(&a, &b, &s, &t).unwrap();
        let lhs = m.support(&u).unwrap();
        let rhs = &s * a.support(&u).unwrap() + &t * b.support(&u).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn section_matches_padded_gauge((b, x, _) in ball_and_vecs(3), k in 1usize..3) {
        let sec = b.section(k).unwrap();
        let mut padded = x[..k].to_vec();
        padded.resize(3, Rat::zero());
        prop_assert_eq!(sec.gauge(&x[..k]).unwrap(), b.gauge(&padded).unwrap());
    }

    #[test]
    fn rho_is_a_norm(p in vec_of(3), q in vec_of(3), c in rat()) {
        let r = |v: &[Rat]| renorming::rho_exact(&v[0], &v[1], &v[2]);
        let rp = r(&p);
        let rq = r(&q);
        let sum = r(&add(&p, &q));
        // ρ(p + q) <= ρ(p) + ρ(q), compared through enclosures
        let eps = Rat::new(1, 1_000_000_000);
        let bound = rp.enclose(&eps).add(&rq.enclose(&eps));
        prop_assert!(sum.enclose(&eps).lo <= bound.hi);
        // absolute homogeneity holds exactly in the surd calculus
        let scaled = r(&scale(&p, &c));
        prop_assert_eq!(scaled.cmp_exact(&rp.scale(&c.abs())), std::cmp::Ordering::Equal);
        // invariant under sign changes of each coordinate
        let flipped = vec![-p[0].clone(), -p[1].clone(), -p[2].clone()];
        prop_assert_eq!(r(&flipped).cmp_exact(&rp), std::cmp::Ordering::Equal);
        prop_assert_eq!(rp.cmp_exact(&QuadSurd::rat(Rat::zero())) == std::cmp::Ordering::Equal, p.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn rho_enclosure_contains_exact(p in vec_of(3), k in 3i64..30) {
        let eps = Rat::pow2(-k);
        let iv = renorming::rho(&p[0], &p[1], &p[2], &eps).unwrap();
        let exact = renorming::rho_exact(&p[0], &p[1], &p[2]);
        prop_assert!(iv.width() <= eps);
        prop_assert!(exact.cmp_rat(&iv.lo) != std::cmp::Ordering::Less);
        prop_assert!(exact.cmp_rat(&iv.hi) != std::cmp::Ordering::Greater);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn interpolation_norm_is_homogeneous(x in rat(), c in pos()) {
        prop_assume!(!x.is_zero());
        let spec = interpolation::line_spec();
        let eps = Rat::new(1, 1_000_000);
        let base = spec.interpolation_norm(std::slice::from_ref(&x), &eps).unwrap();
        let scaled = spec.interpolation_norm(&[&x * &c], &eps).unwrap();
        let expect = base.scale(&c);
        prop_assert!(scaled.intersects(&expect), "{:?} vs {:?}", scaled, expect);
    }
}
