//! Nullary removal: partitioning, precomputation, and removal.
//!
//! Every stack symbol `X` is split into `X^∅` (pushed by a computation that
//! scans nothing) and `X^¬∅`. Push computations of `X^∅` are summed into a
//! table `N` by solving a quadratic system, and transitions that pop `∅`
//! symbols are rewritten to pay the corresponding `N` weight instead.
//!
//! A `Y^∅` popped together with a nonnull `Z` above it is the awkward case:
//! when `Y^∅` is skipped, the computation of `Z` has to start where `Y^∅`
//! started. That is tracked with fused symbols `ᵣₜX`: an `X^¬∅` whose
//! computation really started at `t`, while the machine was at `r` when it
//! began and still owes the nullary computations leading from `r` to `t`.
//! Fused symbols form the whole left spine of a computation and become
//! plain `X^¬∅` once nothing is owed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automaton::{AnnotatedSymbol, InputId, StateId, SymbolId, SymbolTag, Wpda, WpdaBuilder};
use crate::error::{Error, Result};
use crate::runsum::{RunsumSystem, SolverOptions};
use crate::semiring::Semiring;

use super::{fused_name, plain_name};

/// Total weights of push computations that scan nothing.
#[derive(Clone, Debug)]
pub struct NullaryTable {
    semiring: Semiring,
    unary: BTreeMap<(StateId, SymbolId, StateId), f64>,
    pair: BTreeMap<(StateId, SymbolId, SymbolId, StateId), f64>,
    iterations: usize,
}

impl NullaryTable {
    /// `N_{pXq}`.
    pub fn get(&self, p: StateId, x: SymbolId, q: StateId) -> f64 {
        self.unary.get(&(p, x, q)).copied().unwrap_or(self.semiring.zero())
    }

    /// `N_{pYZs} = ⊕_r N_{pYr} ⊗ N_{rZs}`.
    pub fn pair(&self, p: StateId, y: SymbolId, z: SymbolId, s: StateId) -> f64 {
        self.pair.get(&(p, y, z, s)).copied().unwrap_or(self.semiring.zero())
    }

    pub fn unary_entries(&self) -> &BTreeMap<(StateId, SymbolId, StateId), f64> {
        &self.unary
    }

    pub fn pair_entries(&self) -> &BTreeMap<(StateId, SymbolId, SymbolId, StateId), f64> {
        &self.pair
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn is_empty(&self) -> bool {
        self.unary.is_empty()
    }
}

fn require_binarized_bottom_up(p: &Wpda, what: &str) -> Result<()> {
    let r = p.classify();
    if !r.is_bottom_up || r.max_pop > 2 {
        return Err(Error::Precondition(format!(
            "{what} needs a bottom-up machine popping at most two symbols"
        )));
    }
    Ok(())
}

pub fn solve_nullary_table(p: &Wpda) -> Result<NullaryTable> {
    solve_nullary_table_with(p, &SolverOptions::default())
}

pub fn solve_nullary_table_with(p: &Wpda, opts: &SolverOptions) -> Result<NullaryTable> {
    let sr = p.semiring();
    if !sr.flags().continuous {
        return Err(Error::Capability { semiring: sr.kind(), capability: "continuous" });
    }
    require_binarized_bottom_up(p, "nullary precomputation")?;
    let sys = RunsumSystem::build(p, |t| t.scan.is_none())?;
    let sol = sys.solve(opts)?;
    let mut unary = BTreeMap::new();
    for (i, &v) in sol.values.iter().enumerate() {
        if !sr.is_zero(v) {
            unary.insert(sys.unknown(i), v);
        }
    }
    let mut by_start: HashMap<StateId, Vec<(SymbolId, StateId, f64)>> = HashMap::new();
    for (&(p, x, q), &v) in &unary {
        by_start.entry(p).or_default().push((x, q, v));
    }
    let mut pair: BTreeMap<(StateId, SymbolId, SymbolId, StateId), f64> = BTreeMap::new();
    for (&(p, y, r), &a) in &unary {
        for &(z, s, b) in by_start.get(&r).map(Vec::as_slice).unwrap_or(&[]) {
            let e = pair.entry((p, y, z, s)).or_insert(sr.zero());
            *e = sr.plus(*e, sr.times(a, b));
        }
    }
    Ok(NullaryTable { semiring: sr, unary, pair, iterations: sol.iterations })
}

/// Adds fresh start and final states when a transition enters the start
/// state, leaves the final state, or the two coincide. Runs are preserved
/// one-to-one: the first and last transitions are redirected.
pub fn guard_endpoints(p: &Wpda) -> Wpda {
    let s = p.start();
    let f = p.accept();
    let needed = s == f || p.transitions().iter().any(|t| t.target == s || t.source == f);
    if !needed {
        return p.clone();
    }
    let mut b = WpdaBuilder::like(p);
    b.annotations = p.annotations().clone();
    let s2 = b.fresh_state(p.state_name(s));
    let f2 = b.fresh_state(p.state_name(f));
    for t in p.transitions() {
        b.add_transition(t);
        let from_s = t.source == s;
        let to_f = t.target == f;
        if from_s {
            b.add(s2, t.pop.clone(), t.scan, t.target, t.push.clone(), t.weight);
        }
        if to_f {
            b.add(t.source, t.pop.clone(), t.scan, f2, t.push.clone(), t.weight);
        }
        if from_s && to_f {
            b.add(s2, t.pop.clone(), t.scan, f2, t.push.clone(), t.weight);
        }
    }
    b.set_initial(s2, p.initial().stack.clone());
    b.set_final(f2, p.final_config().stack.clone());
    b.build()
}

/// A rewritten transition before symbols are materialized. `src` is the
/// state the rewritten transition leaves from.
#[derive(Clone, Debug)]
enum Rule {
    /// Pops nothing; the computation starts here.
    Leaf { src: StateId, scan: Option<InputId>, tgt: StateId, x: SymbolId, w: f64 },
    /// Pops one nonnull symbol, which is the left child.
    Left1 { src: StateId, y: SymbolId, scan: Option<InputId>, tgt: StateId, x: SymbolId, w: f64 },
    /// Pops two nonnull symbols.
    Left2 {
        src: StateId,
        y: SymbolId,
        z: SymbolId,
        scan: Option<InputId>,
        tgt: StateId,
        x: SymbolId,
        w: f64,
    },
    /// Pops `Y^∅ Z^¬∅`: `Z` continues the left spine and `Y` is owed.
    Absorb {
        src: StateId,
        y: SymbolId,
        z: SymbolId,
        scan: Option<InputId>,
        tgt: StateId,
        x: SymbolId,
        w: f64,
    },
}

/// Output symbol factory shared by both emission modes.
struct Symbols<'a> {
    p: &'a Wpda,
    plain: HashMap<SymbolId, SymbolId>,
    fused: BTreeMap<(StateId, StateId, SymbolId), SymbolId>,
}

impl<'a> Symbols<'a> {
    fn plain(&mut self, b: &mut WpdaBuilder, x: SymbolId) -> SymbolId {
        if let Some(&id) = self.plain.get(&x) {
            return id;
        }
        let base = self.p.symbol_name(x).to_string();
        let id = b.symbols_mut().intern_unique(&plain_name(&base));
        b.annotate(id, AnnotatedSymbol { base, tag: SymbolTag::NonNull });
        self.plain.insert(x, id);
        id
    }

    fn fused(&mut self, b: &mut WpdaBuilder, r: StateId, t: StateId, x: SymbolId) -> SymbolId {
        if let Some(&id) = self.fused.get(&(r, t, x)) {
            return id;
        }
        let base = self.p.symbol_name(x).to_string();
        let name = fused_name(&base, self.p.state_name(r), self.p.state_name(t));
        let id = b.symbols_mut().intern_unique(&name);
        b.annotate(id, AnnotatedSymbol { base, tag: SymbolTag::Fused { from: r, to: t } });
        self.fused.insert((r, t, x), id);
        id
    }
}

/// Removes all nullary transitions. The result accepts the same weighted
/// language; if the empty string has nonzero weight `w`, a single
/// transition `s --ε, ε→S/w--> f` pushing the final symbol is added.
pub fn remove_nullary(p: &Wpda) -> Result<Wpda> {
    let sr = p.semiring();
    let flags = sr.flags();
    if !flags.commutative {
        return Err(Error::Capability { semiring: sr.kind(), capability: "commutative" });
    }
    if !flags.continuous {
        return Err(Error::Capability { semiring: sr.kind(), capability: "continuous" });
    }
    require_binarized_bottom_up(p, "nullary removal")?;

    let p = guard_endpoints(p);
    let n = solve_nullary_table(&p)?;
    let nq = p.num_states();
    let start = p.start();
    let accept = p.accept();
    let goal = p.final_config().stack[0];

    let mut by_sym_end: HashMap<(SymbolId, StateId), Vec<(StateId, f64)>> = HashMap::new();
    let mut by_sym: HashMap<SymbolId, Vec<(StateId, StateId, f64)>> = HashMap::new();
    for (&(a, y, b), &w) in n.unary_entries() {
        by_sym_end.entry((y, b)).or_default().push((a, w));
        by_sym.entry(y).or_default().push((a, b, w));
    }
    let mut by_pair_end: HashMap<(SymbolId, SymbolId, StateId), Vec<(StateId, f64)>> = HashMap::new();
    for (&(a, y, z, b), &w) in n.pair_entries() {
        by_pair_end.entry((y, z, b)).or_default().push((a, w));
    }
    let none: &[(StateId, f64)] = &[];

    let mut rules = Vec::new();
    for t in p.transitions() {
        let x = t.push[0];
        let (src, scan, tgt, w) = (t.source, t.scan, t.target, t.weight);
        match *t.pop.as_slice() {
            [] => {
                // nullary transitions only feed N
                if scan.is_some() {
                    rules.push(Rule::Leaf { src, scan, tgt, x, w });
                }
            }
            [y] => {
                rules.push(Rule::Left1 { src, y, scan, tgt, x, w });
                if scan.is_some() {
                    for &(u, nw) in by_sym_end.get(&(y, src)).map(Vec::as_slice).unwrap_or(none) {
                        rules.push(Rule::Leaf { src: u, scan, tgt, x, w: sr.times(nw, w) });
                    }
                }
            }
            [y, z] => {
                rules.push(Rule::Left2 { src, y, z, scan, tgt, x, w });
                for &(u, nw) in by_sym_end.get(&(z, src)).map(Vec::as_slice).unwrap_or(none) {
                    rules.push(Rule::Left1 { src: u, y, scan, tgt, x, w: sr.times(nw, w) });
                }
                if by_sym.contains_key(&y) {
                    rules.push(Rule::Absorb { src, y, z, scan, tgt, x, w });
                }
                if scan.is_some() {
                    for &(u, nw) in by_pair_end.get(&(y, z, src)).map(Vec::as_slice).unwrap_or(none) {
                        rules.push(Rule::Leaf { src: u, scan, tgt, x, w: sr.times(nw, w) });
                    }
                }
            }
            _ => unreachable!("pop arity checked"),
        }
    }

    let mut b = WpdaBuilder::new(sr);
    for q in p.states().names() {
        b.state(q);
    }
    for a in p.inputs().names() {
        b.input(a);
    }
    let mut syms = Symbols { p: &p, plain: HashMap::new(), fused: BTreeMap::new() };
    let fused_mode = rules.iter().any(|r| matches!(r, Rule::Absorb { .. }));

    if !fused_mode {
        for rule in &rules {
            match *rule {
                Rule::Leaf { src, scan, tgt, x, w } => {
                    let x = syms.plain(&mut b, x);
                    b.add(src, vec![], scan, tgt, vec![x], w);
                }
                Rule::Left1 { src, y, scan, tgt, x, w } => {
                    let (y, x) = (syms.plain(&mut b, y), syms.plain(&mut b, x));
                    b.add(src, vec![y], scan, tgt, vec![x], w);
                }
                Rule::Left2 { src, y, z, scan, tgt, x, w } => {
                    let (y, z, x) =
                        (syms.plain(&mut b, y), syms.plain(&mut b, z), syms.plain(&mut b, x));
                    b.add(src, vec![y, z], scan, tgt, vec![x], w);
                }
                Rule::Absorb { .. } => unreachable!(),
            }
        }
    } else {
        // owes[r][t]: some sequence of nullary computations leads from r to t
        let mut owes = vec![vec![false; nq]; nq];
        let mut succ: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); nq];
        for &(a, _, b2) in n.unary_entries().keys() {
            succ[a].insert(b2);
        }
        for (r, row) in owes.iter_mut().enumerate() {
            let mut stack = vec![r];
            row[r] = true;
            while let Some(u) = stack.pop() {
                for &v in &succ[u] {
                    if !row[v] {
                        row[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        // States from which a left spine can begin, and the states it may
        // then be owing up to. Unary rules are generated for every such
        // pair so that their weights do not depend on `r`.
        let mut leads = BTreeSet::new();
        for rule in &rules {
            if let Rule::Leaf { src, .. } = *rule {
                leads.extend((0..nq).filter(|&r| owes[r][src]));
            }
        }
        let owed: BTreeSet<StateId> =
            (0..nq).filter(|&t| leads.iter().any(|&r| owes[r][t])).collect();

        for rule in &rules {
            match *rule {
                Rule::Leaf { src, scan, tgt, x, w } => {
                    for r in (0..nq).filter(|&r| owes[r][src]) {
                        let fx = syms.fused(&mut b, r, src, x);
                        b.add(r, vec![], scan, tgt, vec![fx], w);
                    }
                }
                Rule::Left1 { src, y, scan, tgt, x, w } => {
                    for &r in &leads {
                        for &t in &owed {
                            if scan.is_some() && !owes[r][t] {
                                continue;
                            }
                            let fy = syms.fused(&mut b, r, t, y);
                            let fx = syms.fused(&mut b, r, t, x);
                            b.add(src, vec![fy], scan, tgt, vec![fx], w);
                        }
                    }
                }
                Rule::Left2 { src, y, z, scan, tgt, x, w } => {
                    let pz = syms.plain(&mut b, z);
                    for &r in &leads {
                        for &t in &owed {
                            if !owes[r][t] {
                                continue;
                            }
                            let fy = syms.fused(&mut b, r, t, y);
                            let fx = syms.fused(&mut b, r, t, x);
                            b.add(src, vec![fy, pz], scan, tgt, vec![fx], w);
                        }
                    }
                }
                Rule::Absorb { src, y, z, scan, tgt, x, w } => {
                    for &(s_, t_, nw) in &by_sym[&y] {
                        for &r in &leads {
                            if scan.is_some() && !owes[r][s_] {
                                continue;
                            }
                            let fz = syms.fused(&mut b, r, t_, z);
                            let fx = syms.fused(&mut b, r, s_, x);
                            b.add(src, vec![fz], scan, tgt, vec![fx], sr.times(nw, w));
                        }
                    }
                }
            }
        }
        // Unfusing once nothing is owed. The start state never has a
        // symbol on top, so it gets none.
        let settled: Vec<(SymbolId, SymbolId)> = syms
            .fused
            .iter()
            .filter(|((r, t, _), _)| r == t)
            .map(|(&(_, _, x), &id)| (x, id))
            .collect();
        let one = sr.one();
        for (x, id) in settled {
            let px = syms.plain(&mut b, x);
            for q in (0..nq).filter(|&q| q != start) {
                b.add(q, vec![id], None, q, vec![px], one);
            }
        }
    }

    let final_sym = syms.plain(&mut b, goal);
    let eps = n.get(start, goal, accept);
    if !sr.is_zero(eps) {
        b.add(start, vec![], None, accept, vec![final_sym], eps);
    }
    b.set_initial(start, vec![]);
    b.set_final(accept, vec![final_sym]);
    Ok(b.build())
}
