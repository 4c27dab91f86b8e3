//! Unary removal: fold chains of `ε, Y→X` transitions into their
//! predecessors using the closure of the unary weight matrix.

use std::collections::{BTreeMap, HashMap};

use crate::automaton::{AnnotatedSymbol, StateId, SymbolId, SymbolTag, Wpda, WpdaBuilder};
use crate::error::{Error, Result};
use crate::semiring::{matrix_star, WeightMatrix};

use super::fused_name;

/// Matrix over `Q × Γ` with `U[(p,Y), (q,X)] = w(p --ε, Y→X--> q)`.
pub fn build_unary_matrix(p: &Wpda) -> WeightMatrix<(StateId, SymbolId)> {
    let mut m = WeightMatrix::new(p.semiring());
    for t in p.transitions().iter().filter(|t| t.is_unary()) {
        m.add((t.source, t.pop[0]), (t.target, t.push[0]), t.weight);
    }
    m
}

fn require_star(p: &Wpda) -> Result<()> {
    let sr = p.semiring();
    if !sr.flags().has_star {
        return Err(Error::Capability { semiring: sr.kind(), capability: "star" });
    }
    Ok(())
}

/// Removes every unary transition. Each remaining transition pushing `X`
/// into `q` is replaced by copies pushing `Y` into `r`, weighted by
/// `U*[(q,X), (r,Y)]`. Top-down machines are handled through the mirror.
pub fn remove_unary(p: &Wpda) -> Result<Wpda> {
    require_star(p)?;
    let report = p.classify();
    if !report.is_bottom_up {
        if report.is_top_down {
            return Ok(remove_unary(&p.mirror())?.mirror());
        }
        return Err(Error::Precondition("unary removal needs a bottom-up or top-down machine".into()));
    }
    let sr = p.semiring();
    let closure = matrix_star(&build_unary_matrix(p))?;
    let mut b = WpdaBuilder::like(p);
    b.annotations = p.annotations().clone();
    for t in p.transitions().iter().filter(|t| !t.is_unary()) {
        let key = (t.target, t.push[0]);
        if closure.index_of(&key).is_none() {
            b.add_transition(t);
            continue;
        }
        for (&(r, y), u) in closure.row(&key) {
            b.add(t.source, t.pop.clone(), t.scan, r, vec![y], sr.times(t.weight, u));
        }
    }
    Ok(b.build())
}

/// Index of the factored unary matrices. `Fused(q, t, X)` is a fused
/// symbol `ᵣₜX` on top at `q` with `r` dropped; `Plain(q, X)` is any other
/// symbol on top at `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryLabel {
    Fused(StateId, StateId, String),
    Plain(StateId, SymbolId),
}

/// `U¹` (fused→fused), `U²` (unfusing), `U³` (plain→plain) and
/// `V = U¹* U² U³*`.
#[derive(Clone, Debug)]
pub struct UnaryClosureParts {
    pub u1: WeightMatrix<UnaryLabel>,
    pub u2: WeightMatrix<UnaryLabel>,
    pub u3: WeightMatrix<UnaryLabel>,
    pub v: WeightMatrix<UnaryLabel>,
}

struct Factored {
    parts: UnaryClosureParts,
    u1_star: WeightMatrix<UnaryLabel>,
    u3_star: WeightMatrix<UnaryLabel>,
    /// `U² U³*`, rows indexed by the unfused symbol.
    tail: WeightMatrix<UnaryLabel>,
}

fn label(p: &Wpda, q: StateId, x: SymbolId) -> UnaryLabel {
    match p.annotation(x) {
        Some(AnnotatedSymbol { base, tag: SymbolTag::Fused { to, .. } }) => {
            UnaryLabel::Fused(q, *to, base.clone())
        }
        _ => UnaryLabel::Plain(q, x),
    }
}

fn fused_from(p: &Wpda, x: SymbolId) -> Option<StateId> {
    match p.annotation(x) {
        Some(AnnotatedSymbol { tag: SymbolTag::Fused { from, .. }, .. }) => Some(*from),
        _ => None,
    }
}

fn factor(p: &Wpda) -> Result<Factored> {
    let sr = p.semiring();
    let mut u1 = WeightMatrix::new(sr);
    let mut u2 = WeightMatrix::new(sr);
    let mut u3 = WeightMatrix::new(sr);
    let mut seen_u1: HashMap<(UnaryLabel, UnaryLabel), f64> = HashMap::new();

    for t in p.transitions() {
        let to = label(p, t.target, t.push[0]);
        match &to {
            UnaryLabel::Fused(..) => {
                u1.add_label(to.clone());
            }
            UnaryLabel::Plain(..) => {
                u3.add_label(to.clone());
            }
        }
        if !t.is_unary() {
            continue;
        }
        let (y, x) = (t.pop[0], t.push[0]);
        let from = label(p, t.source, y);
        let describe = || p.format_transition(t);
        match (&from, &to, fused_from(p, y), fused_from(p, x)) {
            (UnaryLabel::Fused(..), UnaryLabel::Fused(..), Some(r1), Some(r2)) => {
                if r1 != r2 {
                    return Err(Error::Structural(format!(
                        "fused unary transition changes its origin state: {}",
                        describe()
                    )));
                }
                let key = (from.clone(), to.clone());
                match seen_u1.get(&key) {
                    Some(&w) if !sr.approx_eq(w, t.weight) => {
                        return Err(Error::Structural(format!(
                            "fused unary weight depends on the origin state: {}",
                            describe()
                        )));
                    }
                    Some(_) => {}
                    None => {
                        seen_u1.insert(key, t.weight);
                        u1.add(from, to, t.weight);
                    }
                }
            }
            (UnaryLabel::Fused(q, owed, base), UnaryLabel::Plain(q2, _), Some(r), None) => {
                let same_base = p.annotation(x).map(|a| &a.base) == Some(base);
                if r != *owed || q != q2 || !same_base {
                    return Err(Error::Structural(format!(
                        "fused symbol left a spine without unfusing: {}",
                        describe()
                    )));
                }
                u2.add(from, to, t.weight);
            }
            (UnaryLabel::Plain(..), UnaryLabel::Plain(..), None, None) => u3.add(from, to, t.weight),
            (UnaryLabel::Plain(..), UnaryLabel::Fused(..), _, _) => {
                return Err(Error::Structural(format!(
                    "unary transition from a nonnull to a fused symbol: {}",
                    describe()
                )));
            }
            _ => unreachable!("labels and annotations agree"),
        }
    }
    for (r, c, _) in u2.entries() {
        u1.add_label(r);
        u3.add_label(c);
    }
    let u1_star = matrix_star(&u1)?;
    let u3_star = matrix_star(&u3)?;
    let tail = u2.mul(&u3_star);
    let v = u1_star.mul(&tail);
    Ok(Factored { parts: UnaryClosureParts { u1, u2, u3, v }, u1_star, u3_star, tail })
}

/// The factored unary matrices of a machine produced by nullary removal.
pub fn unary_closure_parts(p: &Wpda) -> Result<UnaryClosureParts> {
    Ok(factor(p)?.parts)
}

/// Unary removal specialized to the output of nullary removal. Instead of
/// one closure over all `(state, symbol)` pairs it closes the fused part
/// (with the origin state dropped) and the plain part separately and
/// joins them through the unfusing transitions.
pub fn remove_unary_fast(p: &Wpda) -> Result<Wpda> {
    require_star(p)?;
    if !p.classify().is_bottom_up {
        return Err(Error::Precondition("remove_unary_fast needs a bottom-up machine".into()));
    }
    let sr = p.semiring();
    let f = factor(p)?;
    let mut b = WpdaBuilder::like(p);
    b.annotations = p.annotations().clone();

    let mut fused_ids: HashMap<(StateId, StateId, String), SymbolId> = HashMap::new();
    for (&x, a) in p.annotations() {
        if let SymbolTag::Fused { from, to } = a.tag {
            fused_ids.insert((from, to, a.base.clone()), x);
        }
    }
    let mut fused_symbol = |b: &mut WpdaBuilder, r: StateId, t: StateId, base: &str| -> SymbolId {
        *fused_ids.entry((r, t, base.to_string())).or_insert_with(|| {
            let name = fused_name(base, p.state_name(r), p.state_name(t));
            let id = b.symbols_mut().intern_unique(&name);
            b.annotate(
                id,
                AnnotatedSymbol { base: base.to_string(), tag: SymbolTag::Fused { from: r, to: t } },
            );
            id
        })
    };

    for t in p.transitions().iter().filter(|t| !t.is_unary()) {
        let x = t.push[0];
        match (label(p, t.target, x), fused_from(p, x)) {
            (lab @ UnaryLabel::Fused(..), Some(r)) => {
                for (to, u) in f.u1_star.row(&lab) {
                    let UnaryLabel::Fused(q, owed, base) = to else { unreachable!() };
                    let y = fused_symbol(&mut b, r, *owed, base);
                    b.add(t.source, t.pop.clone(), t.scan, *q, vec![y], sr.times(t.weight, u));
                }
                // V restricted to spines that end owing nothing, i.e. whose
                // unfusing symbol is ᵣᵣX' for this `r`.
                let mut acc: BTreeMap<UnaryLabel, f64> = BTreeMap::new();
                for (mid, u) in f.u1_star.row(&lab) {
                    let UnaryLabel::Fused(_, owed, _) = mid else { unreachable!() };
                    if *owed != r {
                        continue;
                    }
                    for (to, v) in f.tail.row(mid) {
                        let e = acc.entry(to.clone()).or_insert(sr.zero());
                        *e = sr.plus(*e, sr.times(u, v));
                    }
                }
                for (to, v) in acc {
                    let UnaryLabel::Plain(q, y) = to else { unreachable!() };
                    b.add(t.source, t.pop.clone(), t.scan, q, vec![y], sr.times(t.weight, v));
                }
            }
            (lab @ UnaryLabel::Plain(..), None) => {
                for (to, u) in f.u3_star.row(&lab) {
                    let UnaryLabel::Plain(q, y) = to else { unreachable!() };
                    b.add(t.source, t.pop.clone(), t.scan, *q, vec![*y], sr.times(t.weight, u));
                }
            }
            _ => unreachable!("labels and annotations agree"),
        }
    }
    Ok(b.build())
}
