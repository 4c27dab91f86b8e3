//! Weight algebras and matrix closure.
//!
//! Every semiring value is carried as an `f64`. Booleans are `0.0`/`1.0`,
//! counting values are non-negative integers, and the tropical and log
//! semirings store costs (so `+inf` is zero and `0.0` is one). Log weights
//! are negative log-probabilities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemiringKind {
    Boolean,
    Counting,
    Real,
    Tropical,
    Log,
}

impl SemiringKind {
    pub const ALL: [SemiringKind; 5] = [
        SemiringKind::Boolean,
        SemiringKind::Counting,
        SemiringKind::Real,
        SemiringKind::Tropical,
        SemiringKind::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemiringKind::Boolean => "boolean",
            SemiringKind::Counting => "counting",
            SemiringKind::Real => "real",
            SemiringKind::Tropical => "tropical",
            SemiringKind::Log => "log",
        }
    }
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemiringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boolean" | "bool" => Ok(SemiringKind::Boolean),
            "counting" | "count" => Ok(SemiringKind::Counting),
            "real" | "probability" => Ok(SemiringKind::Real),
            "tropical" => Ok(SemiringKind::Tropical),
            "log" => Ok(SemiringKind::Log),
            other => Err(Error::Parse(format!("unknown semiring `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub commutative: bool,
    pub continuous: bool,
    pub has_star: bool,
    pub exact: bool,
}

/// A concrete semiring together with the tolerance used by `approx_eq`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Semiring {
    kind: SemiringKind,
    tolerance: f64,
}

impl Semiring {
    pub fn new(kind: SemiringKind) -> Self {
        Semiring { kind, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance.abs();
        self
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn flags(&self) -> Flags {
        match self.kind {
            SemiringKind::Boolean | SemiringKind::Tropical => {
                Flags { commutative: true, continuous: true, has_star: true, exact: true }
            }
            // Counting over N ∪ {∞} is continuous, but we only carry finite
            // values, so star exists only at zero.
            SemiringKind::Counting => {
                Flags { commutative: true, continuous: true, has_star: false, exact: true }
            }
            SemiringKind::Real | SemiringKind::Log => {
                Flags { commutative: true, continuous: true, has_star: true, exact: false }
            }
        }
    }

    pub fn zero(&self) -> f64 {
        match self.kind {
            SemiringKind::Tropical | SemiringKind::Log => f64::INFINITY,
            _ => 0.0,
        }
    }

    pub fn one(&self) -> f64 {
        match self.kind {
            SemiringKind::Tropical | SemiringKind::Log => 0.0,
            _ => 1.0,
        }
    }

    pub fn is_zero(&self, a: f64) -> bool {
        a == self.zero()
    }

    pub fn is_one(&self, a: f64) -> bool {
        a == self.one()
    }

    pub fn plus(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            SemiringKind::Boolean => {
                if a != 0.0 || b != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SemiringKind::Counting | SemiringKind::Real => a + b,
            SemiringKind::Tropical => a.min(b),
            SemiringKind::Log => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                if hi == f64::INFINITY {
                    lo
                } else {
                    lo - (-(hi - lo)).exp().ln_1p()
                }
            }
        }
    }

    pub fn times(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            SemiringKind::Boolean => {
                if a != 0.0 && b != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SemiringKind::Counting | SemiringKind::Real => a * b,
            SemiringKind::Tropical | SemiringKind::Log => a + b,
        }
    }

    pub fn star(&self, a: f64) -> Result<f64> {
        let undefined = || Err(Error::StarUndefined { semiring: self.kind, value: a });
        match self.kind {
            SemiringKind::Boolean => Ok(1.0),
            SemiringKind::Counting => {
                if a == 0.0 {
                    Ok(1.0)
                } else {
                    undefined()
                }
            }
            SemiringKind::Real => {
                if a.abs() < 1.0 {
                    Ok(1.0 / (1.0 - a))
                } else {
                    undefined()
                }
            }
            SemiringKind::Tropical => {
                if a >= 0.0 {
                    Ok(0.0)
                } else {
                    undefined()
                }
            }
            SemiringKind::Log => {
                if a > 0.0 {
                    // -ln(1 / (1 - e^{-a}))
                    Ok((-(-a).exp_m1()).ln())
                } else {
                    undefined()
                }
            }
        }
    }

    pub fn sum<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        values.into_iter().fold(self.zero(), |acc, v| self.plus(acc, v))
    }

    pub fn product<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        values.into_iter().fold(self.one(), |acc, v| self.times(acc, v))
    }

    /// Equality under this semiring: bitwise for exact kinds, relative
    /// tolerance otherwise.
    pub fn approx_eq(&self, a: f64, b: f64) -> bool {
        self.approx_eq_tol(a, b, self.tolerance)
    }

    pub fn approx_eq_tol(&self, a: f64, b: f64, tol: f64) -> bool {
        if a == b {
            return true;
        }
        if self.flags().exact || !a.is_finite() || !b.is_finite() {
            return false;
        }
        self.residual(a, b) <= tol
    }

    /// Relative distance between two values, used for convergence tests.
    /// Log-domain values are compared on an absolute scale once they are
    /// small, since they already encode ratios.
    pub fn residual(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        if !a.is_finite() || !b.is_finite() {
            return f64::INFINITY;
        }
        let diff = (a - b).abs();
        match self.kind {
            SemiringKind::Log | SemiringKind::Tropical => diff / a.abs().max(b.abs()).max(1.0),
            _ => diff / a.abs().max(b.abs()),
        }
    }

    /// Parses a weight literal from a JSON value.
    pub fn parse_weight(&self, v: &serde_json::Value) -> Result<f64> {
        let num = match v {
            serde_json::Value::Bool(b) => {
                return match self.kind {
                    SemiringKind::Boolean => Ok(if *b { 1.0 } else { 0.0 }),
                    _ if *b => Ok(self.one()),
                    _ => Ok(self.zero()),
                }
            }
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("weight `{n}` is not representable")))?,
            serde_json::Value::String(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => f64::INFINITY,
                _ => s.parse::<f64>().map_err(|_| Error::Parse(format!("bad weight `{s}`")))?,
            },
            other => return Err(Error::Parse(format!("bad weight `{other}`"))),
        };
        if num.is_nan() {
            return Err(Error::Parse("weight is NaN".into()));
        }
        match self.kind {
            SemiringKind::Boolean => Ok(if num != 0.0 { 1.0 } else { 0.0 }),
            SemiringKind::Counting => {
                if num < 0.0 || num.fract() != 0.0 {
                    Err(Error::Parse(format!("counting weight must be a natural number, got {num}")))
                } else {
                    Ok(num)
                }
            }
            SemiringKind::Real => {
                if num < 0.0 {
                    Err(Error::Parse(format!("real weight must be non-negative, got {num}")))
                } else {
                    Ok(num)
                }
            }
            SemiringKind::Tropical => Ok(num),
            SemiringKind::Log => {
                if num == f64::NEG_INFINITY {
                    Err(Error::Parse("log weight -inf is not allowed".into()))
                } else {
                    Ok(num)
                }
            }
        }
    }

    pub fn weight_to_json(&self, w: f64) -> serde_json::Value {
        match self.kind {
            SemiringKind::Boolean => serde_json::Value::Bool(w != 0.0),
            SemiringKind::Counting if w.fract() == 0.0 && w < 9.0e15 => {
                serde_json::Value::from(w as u64)
            }
            _ if w.is_infinite() => serde_json::Value::String("inf".into()),
            _ => serde_json::Value::from(w),
        }
    }

    pub fn format(&self, w: f64) -> String {
        match self.kind {
            SemiringKind::Boolean => (w != 0.0).to_string(),
            SemiringKind::Counting if w.fract() == 0.0 => format!("{w:.0}"),
            _ => format!("{w}"),
        }
    }

    /// Draws a value from the well-behaved part of the carrier. Used by the
    /// axiom tests and the random machine generator.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            SemiringKind::Boolean => f64::from(rng.gen_bool(0.5) as u8),
            SemiringKind::Counting => f64::from(rng.gen_range(0u32..50)),
            SemiringKind::Real => {
                if rng.gen_bool(0.1) {
                    0.0
                } else {
                    rng.gen_range(0.0..2.0)
                }
            }
            SemiringKind::Tropical => {
                if rng.gen_bool(0.1) {
                    f64::INFINITY
                } else {
                    f64::from(rng.gen_range(0u32..100))
                }
            }
            SemiringKind::Log => {
                if rng.gen_bool(0.1) {
                    f64::INFINITY
                } else {
                    rng.gen_range(0.0..12.0)
                }
            }
        }
    }
}

/// Sparse square matrix over arbitrary labels. Absent entries are zero.
#[derive(Clone, Debug)]
pub struct WeightMatrix<L: Clone + Eq + Hash + Ord> {
    semiring: Semiring,
    labels: Vec<L>,
    index: HashMap<L, usize>,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl<L: Clone + Eq + Hash + Ord> WeightMatrix<L> {
    pub fn new(semiring: Semiring) -> Self {
        WeightMatrix { semiring, labels: Vec::new(), index: HashMap::new(), rows: Vec::new() }
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn add_label(&mut self, label: L) -> usize {
        if let Some(&i) = self.index.get(&label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.clone());
        self.index.insert(label, i);
        self.rows.push(BTreeMap::new());
        i
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn index_of(&self, label: &L) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, row: &L, col: &L) -> f64 {
        match (self.index_of(row), self.index_of(col)) {
            (Some(r), Some(c)) => self.rows[r].get(&c).copied().unwrap_or(self.semiring.zero()),
            _ => self.semiring.zero(),
        }
    }

    pub fn set(&mut self, row: L, col: L, value: f64) {
        let r = self.add_label(row);
        let c = self.add_label(col);
        if self.semiring.is_zero(value) {
            self.rows[r].remove(&c);
        } else {
            self.rows[r].insert(c, value);
        }
    }

    /// `M[row, col] ⊕= value`.
    pub fn add(&mut self, row: L, col: L, value: f64) {
        if self.semiring.is_zero(value) {
            return;
        }
        let r = self.add_label(row);
        let c = self.add_label(col);
        let sr = self.semiring;
        let e = self.rows[r].entry(c).or_insert(sr.zero());
        *e = sr.plus(*e, value);
    }

    /// Nonzero entries of a row, in column-index order.
    pub fn row(&self, row: &L) -> impl Iterator<Item = (&L, f64)> + '_ {
        let r = self.index_of(row);
        r.into_iter()
            .flat_map(move |r| self.rows[r].iter().map(move |(&c, &v)| (&self.labels[c], v)))
    }

    /// All nonzero entries, sorted by label.
    pub fn entries(&self) -> Vec<(L, L, f64)> {
        let mut out: Vec<(L, L, f64)> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter().map(move |(&c, &v)| (self.labels[r].clone(), self.labels[c].clone(), v))
            })
            .collect();
        out.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        out
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn identity_like(&self) -> Self {
        let mut m = WeightMatrix::new(self.semiring);
        for l in &self.labels {
            m.add_label(l.clone());
        }
        for i in 0..m.labels.len() {
            m.rows[i].insert(i, self.semiring.one());
        }
        m
    }

    /// Matrix product over the union of both label sets.
    pub fn mul(&self, other: &Self) -> Self {
        let sr = self.semiring;
        let mut out = WeightMatrix::new(sr);
        for l in self.labels.iter().chain(other.labels.iter()) {
            out.add_label(l.clone());
        }
        for (r, row) in self.rows.iter().enumerate() {
            for (&k, &a) in row {
                let Some(k2) = other.index_of(&self.labels[k]) else { continue };
                for (&c, &b) in &other.rows[k2] {
                    out.add(self.labels[r].clone(), other.labels[c].clone(), sr.times(a, b));
                }
            }
        }
        out
    }

    /// Entrywise comparison under the semiring's equality.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let mut keys: BTreeSet<(L, L)> = BTreeSet::new();
        for (r, c, _) in self.entries().into_iter().chain(other.entries()) {
            keys.insert((r, c));
        }
        keys.iter().all(|(r, c)| self.semiring.approx_eq(self.get(r, c), other.get(r, c)))
    }
}

/// Reflexive-transitive closure `M* = I ⊕ M ⊗ M*` by Lehmann's elimination.
pub fn matrix_star<L>(m: &WeightMatrix<L>) -> Result<WeightMatrix<L>>
where
    L: Clone + Eq + Hash + Ord + fmt::Debug,
{
    let plus = matrix_plus(m)?;
    let sr = m.semiring;
    let mut out = plus;
    for i in 0..out.labels.len() {
        let e = out.rows[i].entry(i).or_insert(sr.zero());
        *e = sr.plus(sr.one(), *e);
    }
    Ok(out)
}

/// Transitive closure `M⁺ = M ⊗ M*`.
pub fn matrix_plus<L>(m: &WeightMatrix<L>) -> Result<WeightMatrix<L>>
where
    L: Clone + Eq + Hash + Ord + fmt::Debug,
{
    let sr = m.semiring;
    let n = m.labels.len();
    let mut a = m.rows.clone();
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (r, row) in a.iter().enumerate() {
        for &c in row.keys() {
            cols[c].insert(r);
        }
    }
    for k in 0..n {
        let akk = a[k].get(&k).copied().unwrap_or(sr.zero());
        let s = sr.star(akk).map_err(|_| Error::MatrixStarUndefined {
            row: format!("{:?}", m.labels[k]),
            col: format!("{:?}", m.labels[k]),
            value: akk,
        })?;
        let row_k: Vec<(usize, f64)> = a[k].iter().map(|(&c, &v)| (c, v)).collect();
        let col_k: Vec<(usize, f64)> =
            cols[k].iter().map(|&r| (r, a[r].get(&k).copied().unwrap_or(sr.zero()))).collect();
        for &(i, aik) in &col_k {
            if sr.is_zero(aik) {
                continue;
            }
            let f = sr.times(aik, s);
            for &(j, akj) in &row_k {
                let v = sr.times(f, akj);
                if sr.is_zero(v) {
                    continue;
                }
                let e = a[i].entry(j).or_insert(sr.zero());
                *e = sr.plus(*e, v);
                cols[j].insert(i);
            }
        }
    }
    Ok(WeightMatrix { semiring: sr, labels: m.labels.clone(), index: m.index.clone(), rows: a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_values() {
        assert_eq!(Semiring::new(SemiringKind::Boolean).star(1.0).unwrap(), 1.0);
        assert_eq!(Semiring::new(SemiringKind::Boolean).star(0.0).unwrap(), 1.0);
        assert_eq!(Semiring::new(SemiringKind::Real).star(0.5).unwrap(), 2.0);
        assert_eq!(Semiring::new(SemiringKind::Tropical).star(3.0).unwrap(), 0.0);
        assert_eq!(Semiring::new(SemiringKind::Counting).star(0.0).unwrap(), 1.0);
        assert!(Semiring::new(SemiringKind::Counting).star(2.0).is_err());
        assert!(Semiring::new(SemiringKind::Real).star(1.0).is_err());
        let log = Semiring::new(SemiringKind::Log);
        // star of probability 1/2 is 2
        let s = log.star(std::f64::consts::LN_2).unwrap();
        assert!((s - (-std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn log_plus_matches_real() {
        let log = Semiring::new(SemiringKind::Log);
        let (a, b) = (0.3f64, 0.45f64);
        let got = log.plus(-a.ln(), -b.ln());
        assert!((got - (-(a + b).ln())).abs() < 1e-12);
        assert_eq!(log.plus(f64::INFINITY, 2.0), 2.0);
        assert_eq!(log.plus(f64::INFINITY, f64::INFINITY), f64::INFINITY);
        // no underflow far from zero
        assert!((log.plus(1000.0, 1000.0) - (1000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix_star_is_identity() {
        let sr = Semiring::new(SemiringKind::Real);
        let mut m: WeightMatrix<u32> = WeightMatrix::new(sr);
        m.add_label(0);
        m.add_label(1);
        let s = matrix_star(&m).unwrap();
        assert_eq!(s.get(&0, &0), 1.0);
        assert_eq!(s.get(&1, &1), 1.0);
        assert_eq!(s.get(&0, &1), 0.0);
        assert_eq!(s.nnz(), 2);
    }

    #[test]
    fn nilpotent_star() {
        let sr = Semiring::new(SemiringKind::Real);
        let mut m: WeightMatrix<u32> = WeightMatrix::new(sr);
        m.add_label(0);
        m.set(0, 1, 0.5);
        let s = matrix_star(&m).unwrap();
        assert_eq!(s.get(&0, &0), 1.0);
        assert_eq!(s.get(&0, &1), 0.5);
        assert_eq!(s.get(&1, &0), 0.0);
        assert_eq!(s.get(&1, &1), 1.0);
    }

    #[test]
    fn undefined_pivot_reports_labels() {
        let sr = Semiring::new(SemiringKind::Real);
        let mut m: WeightMatrix<&str> = WeightMatrix::new(sr);
        m.set("a", "b", 1.0);
        m.set("b", "a", 1.0);
        match matrix_star(&m) {
            Err(Error::MatrixStarUndefined { row, col, .. }) => {
                assert_eq!(row, "\"b\"");
                assert_eq!(col, "\"b\"");
            }
            other => panic!("expected star failure, got {other:?}"),
        }
    }

    #[test]
    fn two_cycle_closure_matches_geometric_sum() {
        let sr = Semiring::new(SemiringKind::Real);
        let mut m: WeightMatrix<u8> = WeightMatrix::new(sr);
        m.set(0, 1, 0.5);
        m.set(1, 0, 0.5);
        let s = matrix_star(&m).unwrap();
        // truncated sum of (0.25)^k
        let mut expect = 0.0;
        let mut term = 1.0;
        while term > 1e-18 {
            expect += term;
            term *= 0.25;
        }
        assert!(sr.approx_eq(s.get(&0, &0), expect));
        assert!(sr.approx_eq(s.get(&0, &1), 0.5 * expect));
    }
}
