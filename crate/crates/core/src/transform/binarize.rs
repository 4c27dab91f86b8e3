//! Reduce pop (bottom-up) or push (top-down) arity to at most two.

use crate::automaton::{Wpda, WpdaBuilder};
use crate::error::{Error, Result};

/// Replaces every `k`-pop transition with `k > 2` by a chain of `k − 1`
/// two-pop transitions through `k − 2` fresh states. The chain consumes
/// the popped string from the top down, each link re-pushing the lower
/// of the two symbols it pops; the last link pushes the original symbol.
/// The first link carries the weight and the scanned symbol.
pub fn binarize_bottom_up(p: &Wpda) -> Result<Wpda> {
    if !p.classify().is_bottom_up {
        return Err(Error::Precondition("binarize_bottom_up needs a bottom-up machine".into()));
    }
    let one = p.semiring().one();
    let mut b = WpdaBuilder::like(p);
    for t in p.transitions() {
        let k = t.pop.len();
        if k <= 2 {
            b.add_transition(t);
            continue;
        }
        let y = &t.pop;
        let origin = p.state_name(t.source).to_string();
        let chain: Vec<_> = (0..k - 2).map(|_| b.fresh_state(&origin)).collect();
        b.add(t.source, vec![y[k - 2], y[k - 1]], t.scan, chain[0], vec![y[k - 2]], t.weight);
        for i in 1..k - 2 {
            let lo = y[k - 2 - i];
            b.add(chain[i - 1], vec![lo, y[k - 1 - i]], None, chain[i], vec![lo], one);
        }
        b.add(chain[k - 3], vec![y[0], y[1]], None, t.target, t.push.clone(), one);
    }
    Ok(b.build())
}

/// Replaces every `k`-push transition with `k > 2` by a chain of `k − 1`
/// one-pop two-push transitions through `k − 2` fresh states, building
/// the pushed string from the bottom up.
pub fn binarize_top_down(p: &Wpda) -> Result<Wpda> {
    if !p.classify().is_top_down {
        return Err(Error::Precondition("binarize_top_down needs a top-down machine".into()));
    }
    let one = p.semiring().one();
    let mut b = WpdaBuilder::like(p);
    for t in p.transitions() {
        let k = t.push.len();
        if k <= 2 {
            b.add_transition(t);
            continue;
        }
        let y = &t.push;
        let origin = p.state_name(t.target).to_string();
        let chain: Vec<_> = (0..k - 2).map(|_| b.fresh_state(&origin)).collect();
        b.add(t.source, t.pop.clone(), t.scan, chain[0], vec![y[0], y[1]], t.weight);
        for i in 1..k - 2 {
            b.add(chain[i - 1], vec![y[i]], None, chain[i], vec![y[i], y[i + 1]], one);
        }
        b.add(chain[k - 3], vec![y[k - 2]], None, t.target, vec![y[k - 2], y[k - 1]], one);
    }
    Ok(b.build())
}
