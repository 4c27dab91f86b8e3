mod common;

use common::{close, real, rng};
use proptest::prelude::*;
use wpda::oracle::{self, stringsum_oracle, EnumerationBudget, RandomSpec};
use wpda::stringsum::{self, Algorithm};
use wpda::transform::{
    binarize_bottom_up, normal_form, remove_nullary, remove_unary, remove_unary_fast, to_bottom_up, to_top_down,
    trim, Mode,
};
use wpda::{Error, Semiring, SemiringKind, Wpda};

/// Compares the oracle stringsums of `a` and `b` on every string up to
/// length 3, skipping strings where either enumeration was cut off.
fn same_language(a: &Wpda, b: &Wpda) -> std::result::Result<usize, String> {
    let mut compared = 0;
    for y in oracle::all_strings(a.inputs().len(), 3) {
        let u = stringsum_oracle(a, &y, EnumerationBudget::for_length(y.len()));
        let v = stringsum_oracle(b, &y, EnumerationBudget::for_length(y.len() + 4));
        if !(u.complete && v.complete) {
            continue;
        }
        if !close(u.value, v.value, 1e-9) {
            return Err(format!("{y:?}: before {}, after {}", u.value, v.value));
        }
        compared += 1;
    }
    Ok(compared)
}

fn small() -> RandomSpec {
    RandomSpec { max_states: 3, max_symbols: 2, max_transitions: 6, ..RandomSpec::default() }
}

#[test]
fn p1_survives_normal_form() {
    let p = oracle::p1(real());
    for mode in [Mode::BottomUp, Mode::TopDown] {
        let q = normal_form(&p, mode).unwrap();
        let algo = if mode == Mode::BottomUp { Algorithm::BuFast } else { Algorithm::TopDown };
        for s in ["ab", "aabb", "aab", "ba"] {
            let want = stringsum::stringsum(&p, &p.encode(s).unwrap(), Algorithm::BuBasic).unwrap();
            let got = stringsum::stringsum(&q, &q.encode(s).unwrap(), algo).unwrap();
            assert!(close(want, got, 1e-12), "{mode:?} {s}: {want} vs {got}");
        }
    }
}

#[test]
fn epsilon_cycle_normal_form() {
    let p = oracle::epsilon_cycle(real());
    let q = normal_form(&p, Mode::BottomUp).unwrap();
    assert!(q.classify().is_normal_form_bu);
    same_language(&p, &q).unwrap();
}

#[test]
fn unary_cycle_is_closed() {
    let p = oracle::unary_cycle(real());
    let q = remove_unary(&p).unwrap();
    assert!(q.transitions().iter().all(|t| !t.is_unary()));
    let y = p.encode("ab").unwrap();
    // A reaches B with 0.4/(1-0.2) and itself with 1/(1-0.2)
    let want = 0.5 * (0.5 + 0.4 * 0.25) / 0.8;
    let got = stringsum::stringsum(&trim(&q), &y, Algorithm::BuBasic).unwrap();
    assert!(close(want, got, 1e-12), "{want} vs {got}");
}

#[test]
fn normal_form_needs_star() {
    let p = oracle::epsilon_cycle(Semiring::new(SemiringKind::Counting));
    match normal_form(&p, Mode::BottomUp) {
        Err(Error::Capability { .. }) | Err(Error::StarUndefined { .. }) | Err(Error::MatrixStarUndefined { .. }) => {}
        Err(Error::Divergence { .. }) => {}
        other => panic!("expected a failure, got {other:?}"),
    }
}

#[test]
fn trim_is_idempotent() {
    let mut r = rng(5);
    for _ in 0..50 {
        let p = oracle::random_wpda(&mut r, &small(), real());
        let once = trim(&p);
        let twice = trim(&once);
        assert_eq!(once.to_json(), twice.to_json());
    }
}

#[test]
fn json_round_trip() {
    let mut r = rng(6);
    for _ in 0..50 {
        let p = oracle::random_wpda(&mut r, &small(), real());
        let q = Wpda::from_json_str(&p.to_json()).unwrap();
        assert_eq!(p.to_json(), q.to_json());
    }
    let p = normal_form(&oracle::epsilon_cycle(real()), Mode::BottomUp).unwrap();
    let q = Wpda::from_json_str(&p.to_json()).unwrap();
    assert_eq!(p.annotations(), q.annotations());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn to_bottom_up_preserves(seed in any::<u64>()) {
        let p = oracle::random_wpda(&mut rng(seed), &small(), real());
        let q = to_bottom_up(&p);
        prop_assert!(q.classify().is_bottom_up);
        same_language(&p, &q).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn to_top_down_preserves(seed in any::<u64>()) {
        let p = oracle::random_wpda(&mut rng(seed), &small(), real());
        let q = to_top_down(&p);
        prop_assert!(q.classify().is_top_down);
        same_language(&p, &q).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn trim_preserves(seed in any::<u64>()) {
        let p = oracle::random_wpda(&mut rng(seed), &small(), real());
        same_language(&p, &trim(&p)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn binarize_preserves(seed in any::<u64>()) {
        let p = trim(&to_bottom_up(&oracle::random_wpda(&mut rng(seed), &small(), real())));
        let q = binarize_bottom_up(&p).unwrap();
        prop_assert!(q.max_pop() <= 2);
        same_language(&p, &q).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn nullary_and_unary_removal_preserve(seed in any::<u64>()) {
        let p = trim(&to_bottom_up(&oracle::random_wpda(&mut rng(seed), &small(), real())));
        let b = binarize_bottom_up(&p).unwrap();
        let n = match remove_nullary(&b) {
            Ok(n) => trim(&n),
            Err(Error::Divergence { .. }) | Err(Error::StarUndefined { .. }) | Err(Error::MatrixStarUndefined { .. }) => {
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(n.transitions().iter().filter(|t| t.is_nullary()).count() <= 1);
        same_language(&b, &n).map_err(TestCaseError::fail)?;
        let slow = match remove_unary(&n) {
            Ok(u) => trim(&u),
            Err(_) => return Ok(()),
        };
        let fast = trim(&remove_unary_fast(&n).unwrap());
        prop_assert!(slow.classify().is_normal_form_bu);
        for y in oracle::all_strings(p.inputs().len(), 4) {
            let a = stringsum::stringsum(&slow, &y, Algorithm::BuFast).unwrap();
            let c = stringsum::stringsum(&fast, &y, Algorithm::BuFast).unwrap();
            prop_assert!(close(a, c, 1e-9), "{y:?}: {a} vs {c}");
        }
        same_language(&b, &slow).map_err(TestCaseError::fail)?;
    }
}
