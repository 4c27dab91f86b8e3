mod common;

use common::{real, rng};
use proptest::prelude::*;
use wpda::automaton::{run_weight, scanned_string, step};
use wpda::oracle::{self, enumerate_runs, EnumerationBudget, RandomSpec};
use wpda::{Configuration, Error, Semiring, SemiringKind, Wpda};

const P1: &str = r#"{
  "semiring": "real",
  "states": ["q"],
  "input_alphabet": ["a", "b"],
  "stack_alphabet": ["A", "S"],
  "initial": {"state": "q", "stack": []},
  "final": {"state": "q", "stack": ["S"]},
  "transitions": [
    {"from": "q", "pop": [], "scan": "a", "to": "q", "push": ["A"], "weight": 0.5},
    {"from": "q", "pop": ["A"], "scan": "b", "to": "q", "push": ["S"], "weight": 0.5},
    {"from": "q", "pop": ["A", "S"], "scan": "b", "to": "q", "push": ["S"], "weight": 0.5}
  ]
}"#;

#[test]
fn load_matches_builder() {
    let p = Wpda::from_json_str(P1).unwrap();
    assert_eq!(p.to_json(), oracle::p1(real()).to_json());
    let r = p.classify();
    assert!(r.is_bottom_up && r.is_normal_form_bu && !r.is_top_down);
    assert_eq!((r.max_pop, r.max_push), (2, 1));
}

#[test]
fn duplicates_merge_with_warning() {
    let text = P1.replace(
        r#""weight": 0.5}
  ]"#,
        r#""weight": 0.5},
    {"from": "q", "pop": ["A", "S"], "scan": "b", "to": "q", "push": ["S"], "weight": 0.25}
  ]"#,
    );
    let (p, warnings) = Wpda::load_str(&text, None).unwrap();
    assert_eq!(warnings.len(), 1);
    assert_eq!(p.transitions().len(), 3);
    assert!(p.transitions().iter().any(|t| t.weight == 0.75));
}

#[test]
fn validation_errors() {
    let bad_state = P1.replace(r#""to": "q", "push": ["S"], "weight": 0.5}"#, r#""to": "r", "push": ["S"], "weight": 0.5}"#);
    assert!(matches!(Wpda::from_json_str(&bad_state), Err(Error::Validation(_))));
    assert!(matches!(Wpda::from_json_str("{"), Err(Error::Parse(_))));
    let unknown_field = P1.replacen('{', r#"{"extra": 1,"#, 1);
    assert!(matches!(Wpda::from_json_str(&unknown_field), Err(Error::Parse(_))));
    let dup = P1.replace(r#"["q"]"#, r#"["q", "q"]"#);
    assert!(matches!(Wpda::from_json_str(&dup), Err(Error::Validation(_))));
}

#[test]
fn semiring_override_and_weights() {
    let (p, _) = Wpda::load_str(P1, Some(Semiring::new(SemiringKind::Boolean))).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(p.semiring().kind(), SemiringKind::Boolean);
    let neg = P1.replace("0.25", "-1").replace(r#""weight": 0.5}"#, r#""weight": -0.5}"#);
    assert!(Wpda::from_json_str(&neg).is_err());
}

#[test]
fn step_rejects_mismatch() {
    let p = oracle::p1(real());
    let t = &p.transitions()[1];
    let c = Configuration::new(p.start(), vec![]);
    assert!(matches!(step(&c, t), Err(Error::StackMismatch { .. })));
}

#[test]
fn mirror_is_an_involution() {
    let mut r = rng(9);
    for _ in 0..30 {
        let p = oracle::random_wpda(&mut r, &RandomSpec::default(), real());
        assert_eq!(p.mirror().mirror().to_json(), p.to_json());
    }
}

#[test]
fn p1_runs() {
    let p = oracle::p1(real());
    let y = p.encode("aabb").unwrap();
    let e = enumerate_runs(&p, &y, EnumerationBudget::for_length(4));
    assert!(e.complete);
    assert_eq!(e.runs.len(), 1);
    assert_eq!(run_weight(&e.runs[0], &p.semiring()), 0.0625);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerated_runs_replay(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = oracle::random_wpda(&mut r, &RandomSpec::default(), real());
        for y in oracle::all_strings(p.inputs().len(), 2) {
            let e = enumerate_runs(&p, &y, EnumerationBudget::new(8, 6));
            for run in &e.runs {
                let end = run.replay().map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(&end, p.final_config());
                prop_assert_eq!(&run.start, p.initial());
                prop_assert_eq!(scanned_string(run), y.clone());
            }
        }
    }
}
