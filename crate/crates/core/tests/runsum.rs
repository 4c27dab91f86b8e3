mod common;

use common::{close, real, rng};
use proptest::prelude::*;
use wpda::oracle::{self, RandomSpec};
use wpda::runsum::{runsum, runsum_system, SolverOptions};
use wpda::stringsum::{self, Algorithm};
use wpda::{Error, Semiring, SemiringKind};

#[test]
fn p1_total_weight() {
    let p = oracle::p1(real());
    let z = runsum(&p, &SolverOptions::default()).unwrap();
    assert!((z - 1.0 / 3.0).abs() < 1e-10, "{z}");
    let j = runsum(&p, &SolverOptions { jacobi: true, ..SolverOptions::default() }).unwrap();
    assert!((j - 1.0 / 3.0).abs() < 1e-10, "{j}");
}

#[test]
fn p1_boolean_and_tropical() {
    let b = oracle::p1(Semiring::new(SemiringKind::Boolean));
    assert_eq!(runsum(&b, &SolverOptions::default()).unwrap(), 1.0);
    let t = oracle::p1(Semiring::new(SemiringKind::Tropical));
    // exact semirings give every transition weight one, so the best run costs 0
    assert_eq!(runsum(&t, &SolverOptions::default()).unwrap(), 0.0);
}

#[test]
fn counting_diverges() {
    let p = oracle::p1(Semiring::new(SemiringKind::Counting));
    let opts = SolverOptions { max_iters: 50, ..SolverOptions::default() };
    assert!(matches!(runsum(&p, &opts), Err(Error::Divergence { .. }) | Err(Error::Capability { .. })));
}

#[test]
fn truncated_stringsums_approach_runsum() {
    let p = oracle::p1(real());
    let z = runsum(&p, &SolverOptions::default()).unwrap();
    let mut partial = 0.0;
    for y in oracle::all_strings(2, 12) {
        partial += stringsum::stringsum(&p, &y, Algorithm::BuFast).unwrap();
    }
    assert!(partial <= z + 1e-12);
    assert!(z - partial < 1e-3, "gap {}", z - partial);
}

#[test]
fn needs_bottom_up_machine() {
    let p = oracle::p1_top_down(real());
    assert!(runsum(&p, &SolverOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solution_is_a_fixed_point(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = RandomSpec { max_weight: 0.3, ..RandomSpec::default() };
        let p = oracle::random_normal_form_bu(&mut r, &spec, real());
        let sys = runsum_system(&p).unwrap();
        let Ok(sol) = sys.solve(&SolverOptions::default()) else { return Ok(()) };
        let next = sys.evaluate(&sol.values);
        for (a, b) in sol.values.iter().zip(&next) {
            prop_assert!(close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn jacobi_and_in_place_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = RandomSpec { max_weight: 0.3, ..RandomSpec::default() };
        let p = oracle::random_normal_form_bu(&mut r, &spec, real());
        let a = runsum(&p, &SolverOptions::default());
        let b = runsum(&p, &SolverOptions { jacobi: true, ..SolverOptions::default() });
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(close(a, b, 1e-8), "{a} vs {b}");
        }
    }
}
