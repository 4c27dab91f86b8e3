//! Conversion of arbitrary machines into bottom-up or top-down form.

use crate::automaton::{SymbolId, Transition, Wpda, WpdaBuilder};

/// Equivalent bottom-up machine: every transition pushes exactly one
/// symbol, the initial stack is empty and the final stack has one symbol.
///
/// A fresh bottom symbol `S'` is pushed first (by a fresh start state) and
/// restored last (into a fresh final state). Transitions pushing nothing
/// re-push the symbol below what they pop, guessed over `Γ ∪ {S'}`;
/// transitions pushing `l > 1` symbols are split into a chain of `l`
/// one-symbol pushes through `l − 1` fresh states.
pub fn to_bottom_up(p: &Wpda) -> Wpda {
    let one = p.semiring().one();
    let mut b = WpdaBuilder::like(p);
    let start = b.fresh_state(p.state_name(p.start()));
    let accept = b.fresh_state(p.state_name(p.accept()));
    let bottom = b.fresh_symbol("bottom");
    let gamma: Vec<SymbolId> = p.symbols().ids().chain([bottom]).collect();

    let mut work: Vec<Transition> = p.transitions().to_vec();
    let mut first_push = vec![bottom];
    first_push.extend(&p.initial().stack);
    work.push(Transition {
        source: start,
        pop: vec![],
        scan: None,
        target: p.start(),
        push: first_push,
        weight: one,
    });
    let mut last_pop = vec![bottom];
    last_pop.extend(&p.final_config().stack);
    work.push(Transition {
        source: p.accept(),
        pop: last_pop,
        scan: None,
        target: accept,
        push: vec![bottom],
        weight: one,
    });

    for t in &work {
        match t.push.len() {
            0 => {
                for &x in &gamma {
                    let mut pop = vec![x];
                    pop.extend(&t.pop);
                    b.add(t.source, pop, t.scan, t.target, vec![x], t.weight);
                }
            }
            1 => b.add_transition(t),
            l => {
                let origin = b.state_name(t.target).to_string();
                let chain: Vec<_> = (0..l - 1).map(|_| b.fresh_state(&origin)).collect();
                b.add(t.source, t.pop.clone(), t.scan, chain[0], vec![t.push[0]], t.weight);
                for i in 1..l - 1 {
                    b.add(chain[i - 1], vec![], None, chain[i], vec![t.push[i]], one);
                }
                b.add(chain[l - 2], vec![], None, t.target, vec![t.push[l - 1]], one);
            }
        }
    }
    b.set_initial(start, vec![]);
    b.set_final(accept, vec![bottom]);
    b.build()
}

/// Equivalent top-down machine: every transition pops exactly one symbol,
/// the initial stack has one symbol and the final stack is empty.
///
/// Mirror image of [`to_bottom_up`]: transitions popping nothing guess the
/// current top symbol and push it back underneath; transitions popping
/// `k > 1` symbols pop them one at a time, topmost first, through `k − 1`
/// fresh states.
pub fn to_top_down(p: &Wpda) -> Wpda {
    let one = p.semiring().one();
    let mut b = WpdaBuilder::like(p);
    let start = b.fresh_state(p.state_name(p.start()));
    let accept = b.fresh_state(p.state_name(p.accept()));
    let bottom = b.fresh_symbol("bottom");
    let gamma: Vec<SymbolId> = p.symbols().ids().chain([bottom]).collect();

    let mut work: Vec<Transition> = p.transitions().to_vec();
    let mut first_push = vec![bottom];
    first_push.extend(&p.initial().stack);
    work.push(Transition {
        source: start,
        pop: vec![bottom],
        scan: None,
        target: p.start(),
        push: first_push,
        weight: one,
    });
    let mut last_pop = vec![bottom];
    last_pop.extend(&p.final_config().stack);
    work.push(Transition {
        source: p.accept(),
        pop: last_pop,
        scan: None,
        target: accept,
        push: vec![],
        weight: one,
    });

    for t in &work {
        match t.pop.len() {
            0 => {
                for &x in &gamma {
                    let mut push = vec![x];
                    push.extend(&t.push);
                    b.add(t.source, vec![x], t.scan, t.target, push, t.weight);
                }
            }
            1 => b.add_transition(t),
            k => {
                let origin = b.state_name(t.source).to_string();
                let chain: Vec<_> = (0..k - 1).map(|_| b.fresh_state(&origin)).collect();
                b.add(t.source, vec![t.pop[k - 1]], t.scan, chain[0], vec![], t.weight);
                for i in 1..k - 1 {
                    b.add(chain[i - 1], vec![t.pop[k - 1 - i]], None, chain[i], vec![], one);
                }
                b.add(chain[k - 2], vec![t.pop[0]], None, t.target, t.push.clone(), one);
            }
        }
    }
    b.set_initial(start, vec![bottom]);
    b.set_final(accept, vec![]);
    b.build()
}
