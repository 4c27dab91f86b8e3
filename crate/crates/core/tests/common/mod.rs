#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::SeedableRng;
use wpda::{Semiring, SemiringKind};

pub fn real() -> Semiring {
    Semiring::new(SemiringKind::Real)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
