mod common;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use wpda::semiring::{matrix_star, WeightMatrix};
use wpda::{Error, Semiring, SemiringKind};

fn kind() -> impl Strategy<Value = SemiringKind> {
    prop::sample::select(SemiringKind::ALL.to_vec())
}

#[test]
fn units() {
    for kind in SemiringKind::ALL {
        let sr = Semiring::new(kind);
        let mut r = rng(3);
        for _ in 0..50 {
            let a = sr.sample(&mut r);
            assert!(sr.approx_eq(sr.plus(a, sr.zero()), a), "{kind:?}");
            assert!(sr.approx_eq(sr.times(a, sr.one()), a), "{kind:?}");
            assert!(sr.is_zero(sr.times(a, sr.zero())), "{kind:?}");
        }
    }
}

#[test]
fn scalar_star() {
    let real = Semiring::new(SemiringKind::Real);
    assert!((real.star(0.5).unwrap() - 2.0).abs() < 1e-12);
    assert!(matches!(real.star(1.0), Err(Error::StarUndefined { .. })));
    let trop = Semiring::new(SemiringKind::Tropical);
    assert_eq!(trop.star(3.0).unwrap(), 0.0);
    let b = Semiring::new(SemiringKind::Boolean);
    assert_eq!(b.star(0.0).unwrap(), 1.0);
    assert_eq!(b.star(1.0).unwrap(), 1.0);
    let log = Semiring::new(SemiringKind::Log);
    assert!((log.star(-(0.5f64.ln())).unwrap() - -(2f64.ln())).abs() < 1e-12);
}

#[test]
fn matrix_star_two_cycle() {
    let sr = Semiring::new(SemiringKind::Real);
    let mut m = WeightMatrix::new(sr);
    m.add("a", "b", 0.5);
    m.add("b", "a", 0.5);
    let s = matrix_star(&m).unwrap();
    // paths a→a have weight Σ 0.25^k = 4/3
    assert!((s.get(&"a", &"a") - 4.0 / 3.0).abs() < 1e-12);
    assert!((s.get(&"a", &"b") - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn matrix_star_diverges_on_unit_cycle() {
    let sr = Semiring::new(SemiringKind::Real);
    let mut m = WeightMatrix::new(sr);
    m.add(0, 1, 1.0);
    m.add(1, 0, 1.0);
    assert!(matrix_star(&m).is_err());
}

proptest! {
    #[test]
    fn axioms(k in kind(), seed in any::<u64>()) {
        let sr = Semiring::new(k);
        let mut r = rng(seed);
        let (a, b, c) = (sr.sample(&mut r), sr.sample(&mut r), sr.sample(&mut r));
        prop_assert!(sr.approx_eq(sr.plus(sr.plus(a, b), c), sr.plus(a, sr.plus(b, c))));
        prop_assert!(sr.approx_eq(sr.plus(a, b), sr.plus(b, a)));
        prop_assert!(sr.approx_eq(sr.times(sr.times(a, b), c), sr.times(a, sr.times(b, c))));
        prop_assert!(sr.approx_eq(sr.times(a, sr.plus(b, c)), sr.plus(sr.times(a, b), sr.times(a, c))));
    }

    #[test]
    fn star_is_a_fixed_point(k in kind(), seed in any::<u64>()) {
        let sr = Semiring::new(k);
        let mut r = rng(seed);
        let a = sr.sample(&mut r);
        if let Ok(s) = sr.star(a) {
            prop_assert!(sr.approx_eq(s, sr.plus(sr.one(), sr.times(a, s))), "{a} -> {s}");
        }
    }

    #[test]
    fn matrix_star_is_a_fixed_point(n in 1usize..5, seed in any::<u64>()) {
        let sr = Semiring::new(SemiringKind::Real);
        let mut r = rng(seed);
        let mut m = WeightMatrix::new(sr);
        for i in 0..n {
            for j in 0..n {
                // row sums stay below one so the star converges
                m.add(i, j, r.gen_range(0.0..0.9) / n as f64);
            }
        }
        let s = matrix_star(&m).unwrap();
        let rhs = s.identity_like();
        let ms = m.mul(&s);
        for i in 0..n {
            for j in 0..n {
                let want = rhs.get(&i, &j) + ms.get(&i, &j);
                prop_assert!((s.get(&i, &j) - want).abs() < 1e-9 * want.max(1.0));
            }
        }
    }

    #[test]
    fn matrix_star_is_idempotent(tropical in prop::bool::ANY, n in 1usize..5, seed in any::<u64>()) {
        // (M*)* = M* only where ⊕ is idempotent; over the reals M* has
        // diagonal entries of at least one and its star diverges
        let sr = Semiring::new(if tropical { SemiringKind::Tropical } else { SemiringKind::Boolean });
        let mut r = rng(seed);
        let mut m = WeightMatrix::new(sr);
        for i in 0..n {
            for j in 0..n {
                m.add(i, j, sr.sample(&mut r));
            }
        }
        let once = matrix_star(&m).unwrap();
        let twice = matrix_star(&once).unwrap();
        prop_assert!(once.approx_eq(&twice));
    }
}
