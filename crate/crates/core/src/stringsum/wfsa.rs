//! Stack automata: the configurations reachable after a prefix, as a WFSA.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::json;

use crate::automaton::{InputId, StateId, SymbolId, Wpda};
use crate::error::{Error, Result};
use crate::semiring::Semiring;

use super::{bottom_up, require_normal_form_bu, Algorithm, MAIN};

/// A WFSA state is a (position, machine state) pair.
pub type WfsaState = (usize, StateId);

#[derive(Clone, Debug, PartialEq)]
pub struct WfsaArc {
    pub from: WfsaState,
    pub symbol: SymbolId,
    pub weight: f64,
    pub to: WfsaState,
}

/// Paths from `start` to `(m, q)` spell stack contents bottom to top; their
/// weights sum to the weight of reaching configuration `(q, stack)` after
/// scanning the first `m` input symbols.
#[derive(Clone, Debug)]
pub struct StackWfsa {
    pub semiring: Semiring,
    pub prefix_len: usize,
    pub start: WfsaState,
    pub accepts: Vec<WfsaState>,
    pub arcs: Vec<WfsaArc>,
}

impl StackWfsa {
    pub fn states(&self) -> BTreeSet<WfsaState> {
        let mut out: BTreeSet<WfsaState> = self.accepts.iter().copied().collect();
        out.insert(self.start);
        for a in &self.arcs {
            out.insert(a.from);
            out.insert(a.to);
        }
        out
    }

    /// Total weight of paths spelling `stack` and ending in `(m, q)`.
    pub fn weight_of(&self, stack: &[SymbolId], q: StateId) -> f64 {
        let sr = self.semiring;
        let mut by_source: HashMap<(WfsaState, SymbolId), Vec<&WfsaArc>> = HashMap::new();
        for a in &self.arcs {
            by_source.entry((a.from, a.symbol)).or_default().push(a);
        }
        let mut current: HashMap<WfsaState, f64> = HashMap::from([(self.start, sr.one())]);
        for &x in stack {
            let mut next: HashMap<WfsaState, f64> = HashMap::new();
            for (&st, &w) in &current {
                for a in by_source.get(&(st, x)).map(Vec::as_slice).unwrap_or(&[]) {
                    let e = next.entry(a.to).or_insert(sr.zero());
                    *e = sr.plus(*e, sr.times(w, a.weight));
                }
            }
            current = next;
        }
        current.get(&(self.prefix_len, q)).copied().unwrap_or(sr.zero())
    }

    /// Every accepted `(stack, state)` pair with its total weight. Arcs only
    /// move forward in the input except the ε-acceptance arc, so this is
    /// finite.
    pub fn accepted(&self) -> BTreeMap<(Vec<SymbolId>, StateId), f64> {
        let sr = self.semiring;
        let mut out: BTreeMap<(Vec<SymbolId>, StateId), f64> = BTreeMap::new();
        let mut stack = vec![(self.start, Vec::new(), sr.one())];
        while let Some((st, word, w)) = stack.pop() {
            if st.0 == self.prefix_len {
                let e = out.entry((word.clone(), st.1)).or_insert(sr.zero());
                *e = sr.plus(*e, w);
            }
            for a in self.arcs.iter().filter(|a| a.from == st) {
                let mut next = word.clone();
                next.push(a.symbol);
                stack.push((a.to, next, sr.times(w, a.weight)));
            }
        }
        out
    }

    pub fn to_json(&self, p: &Wpda) -> serde_json::Value {
        let name = |s: &WfsaState| format!("{}:{}", s.0, p.state_name(s.1));
        json!({
            "semiring": self.semiring.kind().name(),
            "prefix_len": self.prefix_len,
            "start": name(&self.start),
            "accepts": self.accepts.iter().map(name).collect::<Vec<_>>(),
            "arcs": self.arcs.iter().map(|a| json!({
                "from": name(&a.from),
                "symbol": p.symbol_name(a.symbol),
                "weight": self.semiring.weight_to_json(a.weight),
                "to": name(&a.to),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Builds the stack automaton of `p` after scanning `y[..m]`.
pub fn stack_automaton(p: &Wpda, y: &[InputId], m: usize) -> Result<StackWfsa> {
    require_normal_form_bu(p)?;
    if m > y.len() {
        return Err(Error::Precondition(format!("prefix length {m} exceeds input length {}", y.len())));
    }
    let sr = p.semiring();
    let chart = bottom_up::fill(p, &y[..m], Algorithm::BuBasic);
    let mut arcs: Vec<WfsaArc> = chart
        .items(MAIN)
        .into_iter()
        .map(|(it, w)| WfsaArc { from: (it.i, it.p), symbol: it.payload.first(), weight: w, to: (it.j, it.q) })
        .collect();
    for t in p.transitions().iter().filter(|t| t.is_nullary()) {
        arcs.push(WfsaArc { from: (0, t.source), symbol: t.push[0], weight: t.weight, to: (0, t.target) });
    }
    Ok(StackWfsa {
        semiring: sr,
        prefix_len: m,
        start: (0, p.start()),
        accepts: p.states().ids().map(|q| (m, q)).collect(),
        arcs,
    })
}
