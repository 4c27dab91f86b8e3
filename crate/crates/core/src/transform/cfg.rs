//! Top-down normal form to a grammar over pop-computation nonterminals.

use std::collections::HashMap;

use crate::automaton::{InputId, StateId, SymbolId, Wpda};
use crate::error::{Error, Result};
use crate::oracle::cky::{BinaryRule, Cfg, LexicalRule};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Nt {
    /// Pop computations from `p` popping `X` and ending in `q`.
    Triple(StateId, SymbolId, StateId),
    /// Preterminal for an input symbol.
    Term(InputId),
    /// Scanned symbol followed by the pop computation `(r, Z, s)`.
    Prefix(InputId, StateId, SymbolId, StateId),
}

struct Grammar<'a> {
    p: &'a Wpda,
    cfg: Cfg,
    ids: HashMap<Nt, usize>,
}

impl<'a> Grammar<'a> {
    fn nt(&mut self, nt: Nt) -> usize {
        if let Some(&i) = self.ids.get(&nt) {
            return i;
        }
        let p = self.p;
        let name = match &nt {
            Nt::Triple(a, x, b) => {
                format!("({},{},{})", p.state_name(*a), p.symbol_name(*x), p.state_name(*b))
            }
            Nt::Term(a) => format!("T[{}]", p.input_name(*a)),
            Nt::Prefix(a, r, z, s) => format!(
                "P[{} ({},{},{})]",
                p.input_name(*a),
                p.state_name(*r),
                p.symbol_name(*z),
                p.state_name(*s)
            ),
        };
        let i = self.cfg.nonterminals.len();
        self.cfg.nonterminals.push(name);
        self.ids.insert(nt.clone(), i);
        if let Nt::Term(a) = nt {
            let one = self.cfg.semiring.one();
            self.cfg.lexical.push(LexicalRule { lhs: i, terminal: a, weight: one });
        }
        if let Nt::Prefix(a, r, z, s) = nt {
            let one = self.cfg.semiring.one();
            let left = self.nt(Nt::Term(a));
            let right = self.nt(Nt::Triple(r, z, s));
            self.cfg.binary.push(BinaryRule { lhs: i, left, right, weight: one });
        }
        i
    }

    fn binary(&mut self, lhs: Nt, left: Nt, right: Nt, weight: f64) {
        let lhs = self.nt(lhs);
        let left = self.nt(left);
        let right = self.nt(right);
        self.cfg.binary.push(BinaryRule { lhs, left, right, weight });
    }
}

/// Converts a top-down machine in normal form into a grammar whose
/// nonterminal `(p, X, q)` derives exactly the strings scanned by pop
/// computations of `X` from `p` to `q`. Helper nonterminals keep the rules
/// binary: `T[a] → a` and `P[a (r,Z,s)] → T[a] (r,Z,s)`.
pub fn to_cfg(p: &Wpda) -> Result<Cfg> {
    let report = p.classify();
    if !report.is_normal_form_td {
        return Err(Error::Precondition("to_cfg needs a top-down machine in normal form".into()));
    }
    let sr = p.semiring();
    let mut g = Grammar { p, cfg: Cfg::new(sr, p.inputs().names().to_vec()), ids: HashMap::new() };
    let states: Vec<StateId> = p.states().ids().collect();
    let start_sym = p.initial().stack[0];
    let start = g.nt(Nt::Triple(p.start(), start_sym, p.accept()));
    g.cfg.start = start;

    for t in p.transitions() {
        let x = t.pop[0];
        match (t.push.as_slice(), t.scan) {
            ([], Some(a)) => {
                let lhs = g.nt(Nt::Triple(t.source, x, t.target));
                g.cfg.lexical.push(LexicalRule { lhs, terminal: a, weight: t.weight });
            }
            ([], None) => {
                // the ε-acceptance transition
                let e = g.cfg.start_epsilon.unwrap_or(sr.zero());
                g.cfg.start_epsilon = Some(sr.plus(e, t.weight));
            }
            ([y], Some(a)) => {
                for &q in &states {
                    g.binary(
                        Nt::Triple(t.source, x, q),
                        Nt::Term(a),
                        Nt::Triple(t.target, *y, q),
                        t.weight,
                    );
                }
            }
            ([y, z], scan) => {
                // Z is on top, so its pop computation comes first.
                for &s in &states {
                    for &q in &states {
                        let first = match scan {
                            Some(a) => Nt::Prefix(a, t.target, *z, s),
                            None => Nt::Triple(t.target, *z, s),
                        };
                        g.binary(Nt::Triple(t.source, x, q), first, Nt::Triple(s, *y, q), t.weight);
                    }
                }
            }
            _ => unreachable!("normal form checked"),
        }
    }
    Ok(g.cfg)
}

/// Number of `(p, X, q)` nonterminals in a grammar built by [`to_cfg`].
pub fn triple_count(g: &Cfg) -> usize {
    g.nonterminals.iter().filter(|n| n.starts_with('(')).count()
}
