//! Brute-force oracles and example machines.
//!
//! Nothing here shares code with the chart algorithms: runs are explored
//! directly over configurations with the move relation of
//! [`crate::automaton::step`].

pub mod cky;

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::automaton::{step, Configuration, InputId, Run, StateId, SymbolId, Transition, Wpda, WpdaBuilder};
use crate::semiring::{Semiring, SemiringKind};

/// Limits on run length and stack height for exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_transitions: usize,
    pub max_stack_depth: usize,
}

impl EnumerationBudget {
    pub fn new(max_transitions: usize, max_stack_depth: usize) -> Self {
        assert!(max_transitions > 0 && max_stack_depth > 0, "budget limits must be positive");
        EnumerationBudget { max_transitions, max_stack_depth }
    }

    /// `4|y| + 16` transitions and `|y| + 8` stack symbols.
    pub fn for_length(n: usize) -> Self {
        EnumerationBudget { max_transitions: 4 * n + 16, max_stack_depth: n + 8 }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub runs: Vec<Run>,
    /// False when some branch that could still have reached acceptance was
    /// cut by the budget.
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub complete: bool,
}

/// States from which the accepting state is reachable in the transition
/// graph, ignoring stacks and input.
fn coaccessible(p: &Wpda) -> Vec<bool> {
    let mut ok = vec![false; p.num_states()];
    ok[p.accept()] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for t in p.transitions() {
            if ok[t.target] && !ok[t.source] {
                ok[t.source] = true;
                changed = true;
            }
        }
    }
    ok
}

/// Transitions that can fire from `c` at input position `pos`, with the
/// position after firing.
fn moves<'a>(
    p: &'a Wpda,
    y: &'a [InputId],
    pos: usize,
    c: &'a Configuration,
) -> impl Iterator<Item = (&'a Transition, usize)> + 'a {
    p.transitions().iter().filter_map(move |t| {
        if t.source != c.state || !t.applies_to(&c.stack) {
            return None;
        }
        match t.scan {
            None => Some((t, pos)),
            Some(a) if y.get(pos) == Some(&a) => Some((t, pos + 1)),
            Some(_) => None,
        }
    })
}

fn is_accepting(p: &Wpda, y: &[InputId], pos: usize, c: &Configuration) -> bool {
    pos == y.len() && c == p.final_config()
}

/// All accepting runs scanning `y` within the budget, by depth-first search.
pub fn enumerate_runs(p: &Wpda, y: &[InputId], budget: EnumerationBudget) -> Enumeration {
    struct Search<'a> {
        p: &'a Wpda,
        y: &'a [InputId],
        budget: EnumerationBudget,
        live: Vec<bool>,
        runs: Vec<Run>,
        complete: bool,
    }

    impl Search<'_> {
        fn go(&mut self, run: &mut Run, pos: usize) {
            let c = run.end().clone();
            if is_accepting(self.p, self.y, pos, &c) {
                self.runs.push(run.clone());
            }
            let next: Vec<(Transition, usize)> =
                moves(self.p, self.y, pos, &c).map(|(t, np)| (t.clone(), np)).collect();
            for (t, np) in next {
                if !self.live[t.target] {
                    continue;
                }
                let d = step(&c, &t).expect("move relation checked applicability");
                if run.len() == self.budget.max_transitions || d.stack.len() > self.budget.max_stack_depth {
                    self.complete = false;
                    continue;
                }
                run.steps.push((t, d));
                self.go(run, np);
                run.steps.pop();
            }
        }
    }

    let mut s = Search { p, y, budget, live: coaccessible(p), runs: Vec::new(), complete: true };
    if s.live[p.initial().state] {
        s.go(&mut Run::new(p.initial().clone()), 0);
    }
    Enumeration { runs: s.runs, complete: s.complete }
}

/// Total weight of accepting runs scanning `y` within the budget.
///
/// Runs of equal length reaching the same configuration at the same input
/// position are merged, so this is a layered sum over run lengths rather
/// than a literal enumeration; it counts exactly the runs
/// [`enumerate_runs`] would return.
pub fn stringsum_oracle(p: &Wpda, y: &[InputId], budget: EnumerationBudget) -> OracleValue {
    let sr = p.semiring();
    let live = coaccessible(p);
    let mut total = sr.zero();
    let mut complete = true;
    let mut layer: HashMap<(usize, Configuration), f64> = HashMap::new();
    if live[p.initial().state] {
        layer.insert((0, p.initial().clone()), sr.one());
    }
    for len in 0..=budget.max_transitions {
        let mut next: HashMap<(usize, Configuration), f64> = HashMap::new();
        for ((pos, c), &w) in &layer {
            if is_accepting(p, y, *pos, c) {
                total = sr.plus(total, w);
            }
            for (t, np) in moves(p, y, *pos, c) {
                if !live[t.target] {
                    continue;
                }
                let d = step(c, t).expect("move relation checked applicability");
                if len == budget.max_transitions || d.stack.len() > budget.max_stack_depth {
                    complete = false;
                    continue;
                }
                let e = next.entry((np, d)).or_insert(sr.zero());
                *e = sr.plus(*e, sr.times(w, t.weight));
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    OracleValue { value: total, complete }
}

/// Weights of the configurations reached from the initial one by runs
/// scanning exactly `prefix`, keyed by `(state, stack)`.
pub fn configuration_weights(
    p: &Wpda,
    prefix: &[InputId],
    budget: EnumerationBudget,
) -> (BTreeMap<(StateId, Vec<SymbolId>), f64>, bool) {
    let sr = p.semiring();
    let mut out: BTreeMap<(StateId, Vec<SymbolId>), f64> = BTreeMap::new();
    let mut complete = true;
    let mut layer: HashMap<(usize, Configuration), f64> = HashMap::from([((0, p.initial().clone()), sr.one())]);
    for len in 0..=budget.max_transitions {
        let mut next: HashMap<(usize, Configuration), f64> = HashMap::new();
        for ((pos, c), &w) in &layer {
            if *pos == prefix.len() {
                let e = out.entry((c.state, c.stack.clone())).or_insert(sr.zero());
                *e = sr.plus(*e, w);
            }
            for (t, np) in moves(p, prefix, *pos, c) {
                let d = step(c, t).expect("move relation checked applicability");
                if len == budget.max_transitions || d.stack.len() > budget.max_stack_depth {
                    complete = false;
                    continue;
                }
                let e = next.entry((np, d)).or_insert(sr.zero());
                *e = sr.plus(*e, sr.times(w, t.weight));
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    out.retain(|_, w| !sr.is_zero(*w));
    (out, complete)
}

/// All strings over `0..sigma` of length at most `max_len`, shortest first.
pub fn all_strings(sigma: usize, max_len: usize) -> Vec<Vec<InputId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..sigma {
                let mut t: Vec<InputId> = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

// ---- example machines ----

/// Bottom-up normal form for `aⁿbⁿ` (n ≥ 1), every transition weighted 0.5.
pub fn p1(sr: Semiring) -> Wpda {
    let w = if sr.flags().exact { sr.one() } else { half(sr) };
    let mut b = WpdaBuilder::new(sr);
    b.input("a");
    b.input("b");
    b.add_named("q", &[], "a", "q", &["A"], w);
    b.add_named("q", &["A"], "b", "q", &["S"], w);
    b.add_named("q", &["A", "S"], "b", "q", &["S"], w);
    b.initial_named("q", &[]);
    b.final_named("q", &["S"]);
    b.build()
}

/// Top-down normal form for `aⁿbⁿ` (n ≥ 1), every transition weighted 0.5.
pub fn p1_top_down(sr: Semiring) -> Wpda {
    let w = if sr.flags().exact { sr.one() } else { half(sr) };
    let mut b = WpdaBuilder::new(sr);
    b.input("a");
    b.input("b");
    b.add_named("q", &["S"], "a", "q", &["A"], w);
    b.add_named("q", &["S"], "a", "q", &["A", "S"], w);
    b.add_named("q", &["A"], "b", "q", &[], w);
    b.initial_named("q", &["S"]);
    b.final_named("q", &[]);
    b.build()
}

/// Simple machine for balanced brackets over `(` and `)`.
pub fn dyck1(sr: Semiring) -> Wpda {
    let w = if sr.flags().exact { sr.one() } else { half(sr) };
    let mut b = WpdaBuilder::new(sr);
    b.input("(");
    b.input(")");
    b.add_named("q", &[], "(", "q", &["L"], w);
    b.add_named("q", &["L"], ")", "q", &[], w);
    b.initial_named("q", &[]);
    b.final_named("q", &[]);
    b.build()
}

/// Bottom-up machine whose nullary transitions form a cycle.
pub fn epsilon_cycle(sr: Semiring) -> Wpda {
    let mut b = WpdaBuilder::new(sr);
    b.input("a");
    let w = |x: f64| real_weight(sr, x);
    b.add_named("p", &[], "", "q", &["X"], w(0.5));
    b.add_named("q", &[], "", "q", &["X"], w(0.2));
    b.add_named("q", &["X", "X"], "", "q", &["X"], w(0.3));
    b.add_named("q", &["X"], "a", "q", &["X"], w(0.5));
    b.initial_named("p", &[]);
    b.final_named("q", &["X"]);
    b.build()
}

/// Bottom-up machine whose unary transitions form a cycle `A → B → A`.
pub fn unary_cycle(sr: Semiring) -> Wpda {
    let mut b = WpdaBuilder::new(sr);
    b.input("a");
    b.input("b");
    let w = |x: f64| real_weight(sr, x);
    b.add_named("p", &[], "a", "q", &["A"], w(0.5));
    b.add_named("q", &["A"], "", "q", &["B"], w(0.4));
    b.add_named("q", &["B"], "", "q", &["A"], w(0.5));
    b.add_named("q", &["A"], "b", "f", &["S"], w(0.5));
    b.add_named("q", &["B"], "b", "f", &["S"], w(0.25));
    b.initial_named("p", &[]);
    b.final_named("f", &["S"]);
    b.build()
}

/// Dense bottom-up normal form over `{a}` with `k` states and `gamma` stack
/// symbols: every scanning 0-, 1- and 2-pop transition and every ε 2-pop
/// transition is present.
pub fn scaling_family(sr: Semiring, k: usize, gamma: usize) -> Wpda {
    let w = real_weight(sr, 0.1);
    let mut b = WpdaBuilder::new(sr);
    let a = b.input("a");
    let qs: Vec<StateId> = (0..k).map(|i| b.state(&format!("q{i}"))).collect();
    let xs: Vec<SymbolId> = (0..gamma).map(|i| b.symbol(&format!("X{i}"))).collect();
    for &p in &qs {
        for &q in &qs {
            for &x in &xs {
                b.add(p, vec![], Some(a), q, vec![x], w);
                for &y in &xs {
                    b.add(p, vec![y], Some(a), q, vec![x], w);
                    for &z in &xs {
                        b.add(p, vec![y, z], Some(a), q, vec![x], w);
                        b.add(p, vec![y, z], None, q, vec![x], w);
                    }
                }
            }
        }
    }
    b.set_initial(qs[0], vec![]);
    b.set_final(qs[k - 1], vec![xs[0]]);
    b.build()
}

/// Dense simple machine over `{a}` with `k` states and `gamma` stack
/// symbols, all transitions scanning.
pub fn lang_family(sr: Semiring, k: usize, gamma: usize) -> Wpda {
    let w = real_weight(sr, 0.1);
    let mut b = WpdaBuilder::new(sr);
    let a = b.input("a");
    let qs: Vec<StateId> = (0..k).map(|i| b.state(&format!("q{i}"))).collect();
    let xs: Vec<SymbolId> = (0..gamma).map(|i| b.symbol(&format!("X{i}"))).collect();
    for &p in &qs {
        for &q in &qs {
            b.add(p, vec![], Some(a), q, vec![], w);
            for &x in &xs {
                b.add(p, vec![], Some(a), q, vec![x], w);
                b.add(p, vec![x], Some(a), q, vec![], w);
                for &y in &xs {
                    b.add(p, vec![x], Some(a), q, vec![y], w);
                }
            }
        }
    }
    b.set_initial(qs[0], vec![]);
    b.set_final(qs[k - 1], vec![]);
    b.build()
}

/// The shipped examples by name.
pub fn example_machines(sr: Semiring) -> Vec<(&'static str, Wpda)> {
    vec![
        ("p1", p1(sr)),
        ("p1-top-down", p1_top_down(sr)),
        ("dyck1", dyck1(sr)),
        ("epsilon-cycle", epsilon_cycle(sr)),
        ("unary-cycle", unary_cycle(sr)),
        ("scaling-2", scaling_family(sr, 2, 2)),
        ("lang-2", lang_family(sr, 2, 2)),
    ]
}

fn half(sr: Semiring) -> f64 {
    real_weight(sr, 0.5)
}

/// Maps a probability-like weight into `sr`: identity for real, negative
/// log for log and tropical, one for exact semirings.
pub fn real_weight(sr: Semiring, x: f64) -> f64 {
    use crate::semiring::SemiringKind::*;
    match sr.kind() {
        Real => x,
        Log | Tropical => -x.ln(),
        Boolean | Counting => sr.one(),
    }
}

// ---- random machines ----

/// Shape limits for random machines.
#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub max_states: usize,
    pub max_symbols: usize,
    pub max_transitions: usize,
    pub inputs: usize,
    pub max_weight: f64,
    pub epsilon_rate: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_states: 4,
            max_symbols: 3,
            max_transitions: 8,
            inputs: 2,
            max_weight: 0.5,
            epsilon_rate: 0.3,
        }
    }
}

struct Skeleton {
    b: WpdaBuilder,
    states: Vec<StateId>,
    symbols: Vec<SymbolId>,
    inputs: Vec<InputId>,
}

fn skeleton<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, sr: Semiring) -> Skeleton {
    let mut b = WpdaBuilder::new(sr);
    let nq = rng.gen_range(1..=spec.max_states);
    let ng = rng.gen_range(1..=spec.max_symbols);
    let states = (0..nq).map(|i| b.state(&format!("q{i}"))).collect();
    let symbols = (0..ng).map(|i| b.symbol(&format!("X{i}"))).collect();
    let inputs = (0..spec.inputs).map(|i| b.input(&((b'a' + i as u8) as char).to_string())).collect();
    Skeleton { b, states, symbols, inputs }
}

impl Skeleton {
    fn pick<R: Rng + ?Sized, T: Copy>(rng: &mut R, xs: &[T]) -> T {
        xs[rng.gen_range(0..xs.len())]
    }

    fn state<R: Rng + ?Sized>(&self, rng: &mut R) -> StateId {
        Self::pick(rng, &self.states)
    }

    fn word<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<SymbolId> {
        (0..len).map(|_| Self::pick(rng, &self.symbols)).collect()
    }

    fn scan<R: Rng + ?Sized>(&self, rng: &mut R, eps_rate: f64) -> Option<InputId> {
        if rng.gen_bool(eps_rate) {
            None
        } else {
            Some(Self::pick(rng, &self.inputs))
        }
    }
}

fn random_weight<R: Rng + ?Sized>(rng: &mut R, sr: Semiring, max: f64) -> f64 {
    let x: f64 = rng.gen_range(0.0..max);
    match sr.kind() {
        // integer costs keep tropical sums exact under any association order
        SemiringKind::Tropical => (4.0 * real_weight(sr, max - x)).round(),
        _ => real_weight(sr, max - x),
    }
}

/// Arbitrary machine: pop and push arities 0..=2, configurations with at
/// most one stack symbol.
pub fn random_wpda<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, sr: Semiring) -> Wpda {
    let mut s = skeleton(rng, spec, sr);
    let nt = rng.gen_range(1..=spec.max_transitions);
    for _ in 0..nt {
        let (src, tgt) = (s.state(rng), s.state(rng));
        let pop_len = rng.gen_range(0..=2);
        let push_len = rng.gen_range(0..=2);
        let pop = s.word(rng, pop_len);
        let push = s.word(rng, push_len);
        let scan = s.scan(rng, spec.epsilon_rate);
        let w = random_weight(rng, sr, spec.max_weight);
        s.b.add(src, pop, scan, tgt, push, w);
    }
    let (init_state, final_state) = (s.state(rng), s.state(rng));
    let init_len = rng.gen_range(0..=1);
    let final_len = rng.gen_range(0..=1);
    let init_stack = s.word(rng, init_len);
    let final_stack = s.word(rng, final_len);
    s.b.set_initial(init_state, init_stack);
    s.b.set_final(final_state, final_stack);
    s.b.build()
}

/// Bottom-up normal form: scanning k-pop 1-push (k ≤ 2) and ε 2-pop 1-push
/// transitions, initial stack empty, final stack one symbol.
pub fn random_normal_form_bu<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, sr: Semiring) -> Wpda {
    let mut s = skeleton(rng, spec, sr);
    let nt = rng.gen_range(1..=spec.max_transitions);
    // make sure something can start a run
    let first = (s.state(rng), s.word(rng, 1), Skeleton::pick(rng, &s.inputs));
    s.b.add(first.0, vec![], Some(first.2), s.states[0], first.1, random_weight(rng, sr, spec.max_weight));
    for _ in 1..nt {
        let (src, tgt) = (s.state(rng), s.state(rng));
        let scan = s.scan(rng, spec.epsilon_rate);
        let pop_len = if scan.is_none() { 2 } else { rng.gen_range(0..=2) };
        let pop = s.word(rng, pop_len);
        let push = s.word(rng, 1);
        let w = random_weight(rng, sr, spec.max_weight);
        s.b.add(src, pop, scan, tgt, push, w);
    }
    let init_state = first.0;
    let final_state = s.state(rng);
    let final_stack = s.word(rng, 1);
    s.b.set_initial(init_state, vec![]);
    s.b.set_final(final_state, final_stack);
    s.b.build()
}

/// Top-down normal form, as the mirror image of a bottom-up one.
pub fn random_normal_form_td<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, sr: Semiring) -> Wpda {
    random_normal_form_bu(rng, spec, sr).mirror()
}

/// Simple machine with empty initial stack and a final stack of at most one
/// symbol.
pub fn random_simple<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, sr: Semiring) -> Wpda {
    let mut s = skeleton(rng, spec, sr);
    let nt = rng.gen_range(1..=spec.max_transitions);
    for _ in 0..nt {
        let (src, tgt) = (s.state(rng), s.state(rng));
        let pop_len = rng.gen_range(0..=1);
        let push_len = rng.gen_range(0..=1);
        let pop = s.word(rng, pop_len);
        let push = s.word(rng, push_len);
        let scan = s.scan(rng, spec.epsilon_rate);
        let w = random_weight(rng, sr, spec.max_weight);
        s.b.add(src, pop, scan, tgt, push, w);
    }
    let (init_state, final_state) = (s.state(rng), s.state(rng));
    let final_len = rng.gen_range(0..=1);
    let final_stack = s.word(rng, final_len);
    s.b.set_initial(init_state, vec![]);
    s.b.set_final(final_state, final_stack);
    s.b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::SemiringKind;

    #[test]
    fn p1_runs() {
        let sr = Semiring::new(SemiringKind::Real);
        let p = p1(sr);
        let ab = p.encode("ab").unwrap();
        let e = enumerate_runs(&p, &ab, EnumerationBudget::for_length(2));
        assert!(e.complete);
        assert_eq!(e.runs.len(), 1);
        let ba = p.encode("ba").unwrap();
        let e = enumerate_runs(&p, &ba, EnumerationBudget::for_length(2));
        assert!(e.complete && e.runs.is_empty());
        let aabb = p.encode("aabb").unwrap();
        let v = stringsum_oracle(&p, &aabb, EnumerationBudget::for_length(4));
        assert!(v.complete);
        assert_eq!(v.value, 0.0625);
    }

    #[test]
    fn epsilon_cycle_is_cut() {
        let sr = Semiring::new(SemiringKind::Real);
        let p = epsilon_cycle(sr);
        let e = enumerate_runs(&p, &[], EnumerationBudget::new(3, 3));
        assert!(!e.complete);
        assert!(!e.runs.is_empty());
    }

    #[test]
    fn all_strings_counts() {
        assert_eq!(all_strings(2, 3).len(), 1 + 2 + 4 + 8);
    }
}
