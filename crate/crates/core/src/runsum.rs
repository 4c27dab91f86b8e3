//! Total weight of all runs via a polynomial fixed-point system.
//!
//! For a bottom-up machine with pops of at most two symbols, the total
//! weight of push computations `⟨p, X, q⟩` satisfies
//!
//! ```text
//! ⟨p,X,q⟩ = ⊕ w(p --a, ε→X--> q)
//!         ⊕ ⊕_{r,Y} ⟨p,Y,r⟩ ⊗ w(r --a, Y→X--> q)
//!         ⊕ ⊕_{r,s,Y,Z} ⟨p,Y,r⟩ ⊗ ⟨r,Z,s⟩ ⊗ w(s --a, YZ→X--> q)
//! ```
//!
//! and the least solution is found by Kleene iteration from zero.

use crate::automaton::{StateId, SymbolId, Transition, Wpda};
use crate::error::{Error, Result};
use crate::semiring::Semiring;

pub const DEFAULT_MAX_ITERS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Simultaneous updates instead of in-place sweeps.
    pub jacobi: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: DEFAULT_MAX_ITERS, tol: DEFAULT_TOL, jacobi: false }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<f64>,
    pub iterations: usize,
}

/// One equation per `(p, X, q)`; terms are grouped by the `(X, q)` they
/// produce since the start state `p` is threaded through unchanged.
#[derive(Clone, Debug)]
pub struct RunsumSystem {
    semiring: Semiring,
    nq: usize,
    ng: usize,
    constants: Vec<Vec<(StateId, f64)>>,
    one_pop: Vec<Vec<(StateId, SymbolId, f64)>>,
    two_pop: Vec<Vec<(StateId, SymbolId, SymbolId, f64)>>,
    labels: (Vec<String>, Vec<String>),
}

impl RunsumSystem {
    /// Builds the system from the transitions of `p` accepted by `keep`.
    pub fn build(p: &Wpda, keep: impl Fn(&Transition) -> bool) -> Result<Self> {
        let report = p.classify();
        if !report.is_bottom_up || report.max_pop > 2 {
            return Err(Error::Precondition(
                "equation system needs a bottom-up machine popping at most two symbols".into(),
            ));
        }
        let nq = p.num_states();
        let ng = p.num_symbols();
        let sr = p.semiring();
        let mut sys = RunsumSystem {
            semiring: sr,
            nq,
            ng,
            constants: vec![Vec::new(); nq * ng],
            one_pop: vec![Vec::new(); nq * ng],
            two_pop: vec![Vec::new(); nq * ng],
            labels: (p.states().names().to_vec(), p.symbols().names().to_vec()),
        };
        for t in p.transitions().iter().filter(|t| keep(t)) {
            let slot = t.push[0] * nq + t.target;
            match t.pop.as_slice() {
                [] => sys.constants[slot].push((t.source, t.weight)),
                [y] => sys.one_pop[slot].push((t.source, *y, t.weight)),
                [y, z] => sys.two_pop[slot].push((t.source, *y, *z, t.weight)),
                _ => unreachable!("pop arity checked above"),
            }
        }
        Ok(sys)
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn unknown_count(&self) -> usize {
        self.nq * self.nq * self.ng
    }

    pub fn index(&self, p: StateId, x: SymbolId, q: StateId) -> usize {
        (p * self.ng + x) * self.nq + q
    }

    pub fn unknown(&self, idx: usize) -> (StateId, SymbolId, StateId) {
        let q = idx % self.nq;
        let rest = idx / self.nq;
        (rest / self.ng, rest % self.ng, q)
    }

    pub fn constant_terms(&self) -> usize {
        self.constants.iter().map(Vec::len).sum()
    }

    pub fn linear_terms(&self) -> usize {
        self.one_pop.iter().map(Vec::len).sum()
    }

    pub fn quadratic_terms(&self) -> usize {
        self.two_pop.iter().map(Vec::len).sum()
    }

    /// Right-hand side of one equation at the assignment `x`.
    pub fn evaluate_at(&self, x: &[f64], idx: usize) -> f64 {
        let sr = self.semiring;
        let (p, sym, q) = self.unknown(idx);
        let slot = sym * self.nq + q;
        let mut v = sr.zero();
        for &(src, w) in &self.constants[slot] {
            if src == p {
                v = sr.plus(v, w);
            }
        }
        for &(r, y, w) in &self.one_pop[slot] {
            let a = x[self.index(p, y, r)];
            if !sr.is_zero(a) {
                v = sr.plus(v, sr.times(a, w));
            }
        }
        for &(s, y, z, w) in &self.two_pop[slot] {
            for r in 0..self.nq {
                let a = x[self.index(p, y, r)];
                if sr.is_zero(a) {
                    continue;
                }
                let b = x[self.index(r, z, s)];
                if sr.is_zero(b) {
                    continue;
                }
                v = sr.plus(v, sr.times(sr.times(a, b), w));
            }
        }
        v
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (0..self.unknown_count()).map(|i| self.evaluate_at(x, i)).collect()
    }

    fn label(&self, idx: usize) -> String {
        let (p, x, q) = self.unknown(idx);
        format!("⟨{}, {}, {}⟩", self.labels.0[p], self.labels.1[x], self.labels.0[q])
    }

    /// Kleene iteration from all-zero.
    pub fn solve(&self, opts: &SolverOptions) -> Result<Solution> {
        let sr = self.semiring;
        let exact = sr.flags().exact;
        let n = self.unknown_count();
        // Only equations with at least one term can become nonzero.
        let active: Vec<usize> = (0..n)
            .filter(|&i| {
                let (_, x, q) = self.unknown(i);
                let slot = x * self.nq + q;
                !(self.constants[slot].is_empty()
                    && self.one_pop[slot].is_empty()
                    && self.two_pop[slot].is_empty())
            })
            .collect();
        let mut x = vec![sr.zero(); n];
        let mut worst = (0usize, 0.0f64);
        for iter in 1..=opts.max_iters {
            let mut changed = false;
            worst = (0, 0.0);
            let snapshot = if opts.jacobi { Some(x.clone()) } else { None };
            for &i in &active {
                let v = match &snapshot {
                    Some(old) => self.evaluate_at(old, i),
                    None => self.evaluate_at(&x, i),
                };
                if v.is_nan() || (v.is_infinite() && v != sr.zero()) {
                    return Err(Error::Divergence {
                        iterations: iter,
                        entry: self.label(i),
                        residual: f64::INFINITY,
                    });
                }
                if v != x[i] {
                    changed = true;
                    let r = sr.residual(v, x[i]);
                    if r > worst.1 {
                        worst = (i, r);
                    }
                    x[i] = v;
                }
            }
            let done = if exact { !changed } else { worst.1 < opts.tol };
            if done {
                return Ok(Solution { values: x, iterations: iter });
            }
        }
        Err(Error::Divergence { iterations: opts.max_iters, entry: self.label(worst.0), residual: worst.1 })
    }
}

pub fn runsum_system(p: &Wpda) -> Result<RunsumSystem> {
    RunsumSystem::build(p, |_| true)
}

/// Total weight of all accepting runs of a bottom-up machine.
pub fn runsum(p: &Wpda, opts: &SolverOptions) -> Result<f64> {
    let sr = p.semiring();
    if !sr.flags().continuous {
        return Err(Error::Capability { semiring: sr.kind(), capability: "continuous" });
    }
    let sys = runsum_system(p)?;
    let sol = sys.solve(opts)?;
    let s = p.start();
    let f = p.accept();
    let goal = p.final_config().stack[0];
    Ok(sol.values[sys.index(s, goal, f)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::WpdaBuilder;
    use crate::semiring::SemiringKind;

    #[test]
    fn single_constant_term() {
        let mut b = WpdaBuilder::new(Semiring::new(SemiringKind::Real));
        b.add_named("p", &[], "a", "q", &["X"], 0.5);
        b.initial_named("p", &[]);
        b.final_named("q", &["X"]);
        let p = b.build();
        let sys = runsum_system(&p).unwrap();
        assert_eq!(sys.unknown_count(), 4);
        assert_eq!((sys.constant_terms(), sys.linear_terms(), sys.quadratic_terms()), (1, 0, 0));
        assert_eq!(runsum(&p, &SolverOptions::default()).unwrap(), 0.5);
    }

    #[test]
    fn divergence_is_reported() {
        // x = 0.5 + 0.9 x has solution 5; x = 1 + x does not.
        let mut b = WpdaBuilder::new(Semiring::new(SemiringKind::Real));
        b.add_named("q", &[], "a", "q", &["X"], 1.0);
        b.add_named("q", &["X"], "a", "q", &["X"], 1.0);
        b.initial_named("q", &[]);
        b.final_named("q", &["X"]);
        let p = b.build();
        let opts = SolverOptions { max_iters: 200, ..Default::default() };
        assert!(matches!(runsum(&p, &opts), Err(Error::Divergence { .. })));
    }
}
