//! Stringsums of top-down machines in normal form.
//!
//! Items `⟨i, p, X, j, q⟩` hold the weight of pop computations that start in
//! `p` at position `i` with `X` on top and end in `q` at `j` with `X` gone.
//! An item is built from a transition and the pop computations that follow
//! it, so the fill mirrors the bottom-up one.

use std::collections::HashMap;

use crate::automaton::{InputId, StateId, SymbolId, Wpda};
use crate::error::{Error, Result};

use super::{CellMap, Chart, FillOrder, Item, Ops, Payload, MAIN};

pub(super) fn fill(p: &Wpda, y: &[InputId]) -> Result<Chart> {
    if !p.classify().is_normal_form_td {
        return Err(Error::Precondition("machine is not in top-down normal form".into()));
    }
    let sr = p.semiring();
    let n = y.len();
    let mut chart = Chart::new(sr, n, FillOrder::BySpan);
    chart.goal = Some(Item { i: 0, p: p.start(), payload: Payload::Single(p.initial().stack[0]), j: n, q: p.accept() });
    if n == 0 {
        let w = p
            .transitions()
            .iter()
            .filter(|t| t.scan.is_none() && t.push.is_empty() && t.source == p.start() && t.target == p.accept())
            .fold(sr.zero(), |acc, t| sr.plus(acc, t.weight));
        chart.fixed_value = Some(w);
        return Ok(chart);
    }

    // scan → (p, X, q, w) for each push arity
    let mut zero_push: HashMap<InputId, Vec<(StateId, SymbolId, StateId, f64)>> = HashMap::new();
    type OnePush = (StateId, SymbolId, StateId, SymbolId, f64);
    type TwoPush = (Option<InputId>, StateId, SymbolId, StateId, SymbolId, SymbolId, f64);
    let mut one_push: HashMap<InputId, Vec<OnePush>> = HashMap::new();
    let mut two_push: Vec<TwoPush> = Vec::new();
    for t in p.transitions() {
        let x = t.pop[0];
        match (t.push.as_slice(), t.scan) {
            ([], Some(a)) => zero_push.entry(a).or_default().push((t.source, x, t.target, t.weight)),
            ([yy], Some(a)) => one_push.entry(a).or_default().push((t.source, x, t.target, *yy, t.weight)),
            ([yy, z], a) => two_push.push((a, t.source, x, t.target, *yy, *z, t.weight)),
            _ => {}
        }
    }
    let mut ops = Ops::new(sr);

    for span in 1..=n {
        for i in (0..=n - span).rev() {
            let j = i + span;
            let a = y[i];
            let mut acc = CellMap::new();
            if span == 1 {
                for &(q0, x, q, w) in zero_push.get(&a).map(Vec::as_slice).unwrap_or(&[]) {
                    ops.acc(&mut acc, (q0, Payload::Single(x), q), w);
                }
            } else if let Some(rest) = chart.cell(MAIN, i + 1, j) {
                for &(q0, x, r, yy, w) in one_push.get(&a).map(Vec::as_slice).unwrap_or(&[]) {
                    for &(_, _, q, v) in rest.starting_with(r, yy) {
                        let v = ops.times(w, v);
                        ops.acc(&mut acc, (q0, Payload::Single(x), q), v);
                    }
                }
            }
            // 1-pop 2-push: Z is on top, so its pop computation comes first.
            for &(scan, q0, x, r, yy, z, w) in &two_push {
                if scan.is_some_and(|b| b != a) {
                    continue;
                }
                let b = i + usize::from(scan.is_some());
                for k in b + 1..j {
                    let (Some(first), Some(second)) = (chart.cell(MAIN, b, k), chart.cell(MAIN, k, j)) else {
                        continue;
                    };
                    for &(_, _, s, zw) in first.starting_with(r, z) {
                        for &(_, _, q, yw) in second.starting_with(s, yy) {
                            let v = ops.times(w, zw);
                            let v = ops.times(v, yw);
                            ops.acc(&mut acc, (q0, Payload::Single(x), q), v);
                        }
                    }
                }
            }
            chart.put(MAIN, i, j, acc);
        }
        chart.seal(span);
    }
    chart.ops = ops.count;
    Ok(chart)
}

pub fn stringsum_top_down(p: &Wpda, y: &[InputId]) -> Result<f64> {
    Ok(fill(p, y)?.value())
}
