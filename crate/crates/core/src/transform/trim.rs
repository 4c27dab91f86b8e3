//! Removal of transitions that cannot occur in any accepting run.

use std::collections::BTreeMap;

use crate::automaton::{AnnotatedSymbol, SymbolTag, Wpda, WpdaBuilder};

/// Drops transitions that are not usable from the initial configuration or
/// cannot lead to the final one, then compacts the state and stack
/// alphabets. The input alphabet is kept as is.
///
/// The test is an over-approximation on states and symbols: a transition
/// is kept if its source is reachable, its popped symbols can be produced,
/// its target can reach the final state, and each symbol it pushes is
/// either popped by some kept transition or part of the final stack.
pub fn trim(p: &Wpda) -> Wpda {
    let nq = p.num_states();
    let ng = p.num_symbols();
    let ts = p.transitions();
    let mut alive = vec![true; ts.len()];
    loop {
        let mut reach = vec![false; nq];
        let mut made = vec![false; ng];
        reach[p.start()] = true;
        for &x in &p.initial().stack {
            made[x] = true;
        }
        let mut usable = vec![false; ts.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for (i, t) in ts.iter().enumerate() {
                if !alive[i] || usable[i] || !reach[t.source] || !t.pop.iter().all(|&x| made[x]) {
                    continue;
                }
                usable[i] = true;
                changed = true;
                reach[t.target] = true;
                for &x in &t.push {
                    made[x] = true;
                }
            }
        }

        let mut coreach = vec![false; nq];
        let mut wanted = vec![false; ng];
        coreach[p.accept()] = true;
        for &x in &p.final_config().stack {
            wanted[x] = true;
        }
        let mut useful = vec![false; ts.len()];
        changed = true;
        while changed {
            changed = false;
            for (i, t) in ts.iter().enumerate() {
                if !usable[i] || useful[i] || !coreach[t.target] || !t.push.iter().all(|&x| wanted[x]) {
                    continue;
                }
                useful[i] = true;
                changed = true;
                coreach[t.source] = true;
                for &x in &t.pop {
                    wanted[x] = true;
                }
            }
        }
        if useful == alive {
            break;
        }
        alive = useful;
    }

    let mut keep_state = vec![false; nq];
    let mut keep_symbol = vec![false; ng];
    keep_state[p.start()] = true;
    keep_state[p.accept()] = true;
    for &x in p.initial().stack.iter().chain(&p.final_config().stack) {
        keep_symbol[x] = true;
    }
    for (i, t) in ts.iter().enumerate() {
        if alive[i] {
            keep_state[t.source] = true;
            keep_state[t.target] = true;
            for &x in t.pop.iter().chain(&t.push) {
                keep_symbol[x] = true;
            }
        }
    }
    for (&x, a) in p.annotations() {
        if let (true, SymbolTag::Fused { from, to }) = (keep_symbol[x], a.tag) {
            keep_state[from] = true;
            keep_state[to] = true;
        }
    }

    let mut b = WpdaBuilder::new(p.semiring());
    let mut smap = vec![usize::MAX; nq];
    let mut gmap = vec![usize::MAX; ng];
    for q in 0..nq {
        if keep_state[q] {
            smap[q] = b.state(p.state_name(q));
        }
    }
    for a in p.inputs().names() {
        b.input(a);
    }
    for x in 0..ng {
        if keep_symbol[x] {
            gmap[x] = b.symbol(p.symbol_name(x));
        }
    }
    let remap = |s: &[usize]| s.iter().map(|&x| gmap[x]).collect::<Vec<_>>();
    for (i, t) in ts.iter().enumerate() {
        if alive[i] {
            b.add(smap[t.source], remap(&t.pop), t.scan, smap[t.target], remap(&t.push), t.weight);
        }
    }
    b.set_initial(smap[p.start()], remap(&p.initial().stack));
    b.set_final(smap[p.accept()], remap(&p.final_config().stack));
    let mut ann = BTreeMap::new();
    for (&x, a) in p.annotations() {
        if keep_symbol[x] {
            let tag = match a.tag {
                SymbolTag::Fused { from, to } => SymbolTag::Fused { from: smap[from], to: smap[to] },
                other => other,
            };
            ann.insert(gmap[x], AnnotatedSymbol { base: a.base.clone(), tag });
        }
    }
    for (x, a) in ann {
        b.annotate(x, a);
    }
    b.build()
}
