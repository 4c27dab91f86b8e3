//! Stringsums of bottom-up machines in normal form.
//!
//! Items `⟨i, p, X, j, q⟩` hold the weight of push computations that start
//! in `p` at position `i`, push `X`, and end in `q` at position `j`. Cells
//! are filled by increasing span length. The three variants differ only in
//! how the 2-pop rule is evaluated:
//!
//! * basic: directly, joining two items and a transition at once;
//! * fast: through hook items `⟨k, r, Y\X, j, q⟩` that absorb the right
//!   child and the transition first;
//! * alt: through pair items `⟨i, p, YZ, j, s⟩` that join the two children
//!   first.

use std::collections::{HashMap, HashSet};

use crate::automaton::{InputId, StateId, SymbolId, Wpda};
use crate::error::Result;

use super::{require_normal_form_bu, Algorithm, CellMap, Chart, FillOrder, Item, Ops, Payload, AUX, MAIN};

type Targets = Vec<(SymbolId, StateId, f64)>;
type PairTargets = Vec<(SymbolId, SymbolId, StateId, f64)>;

#[derive(Default)]
struct Index {
    zero_pop: HashMap<InputId, Vec<(StateId, SymbolId, StateId, f64)>>,
    one_pop: HashMap<(StateId, SymbolId, InputId), Targets>,
    two_pop: HashMap<(StateId, SymbolId, SymbolId, Option<InputId>), Targets>,
    /// 2-pop transitions keyed by the top popped symbol: `(s, Z, a) → (Y, X, q, w)`.
    two_pop_right: HashMap<(StateId, SymbolId, Option<InputId>), PairTargets>,
    pair_keys: HashSet<(StateId, SymbolId, SymbolId)>,
}

impl Index {
    fn new(p: &Wpda) -> Index {
        let mut ix = Index::default();
        for t in p.transitions() {
            let x = t.push[0];
            match (t.pop.as_slice(), t.scan) {
                ([], Some(a)) => ix.zero_pop.entry(a).or_default().push((t.source, x, t.target, t.weight)),
                ([y], Some(a)) => {
                    ix.one_pop.entry((t.source, *y, a)).or_default().push((x, t.target, t.weight))
                }
                ([y, z], a) => {
                    ix.two_pop.entry((t.source, *y, *z, a)).or_default().push((x, t.target, t.weight));
                    ix.two_pop_right.entry((t.source, *z, a)).or_default().push((*y, x, t.target, t.weight));
                    ix.pair_keys.insert((t.source, *y, *z));
                }
                // the ε-acceptance transition is read off directly
                _ => {}
            }
        }
        ix
    }
}

/// Weight of the `s --ε, ε→S--> f` transition, if any.
fn epsilon_weight(p: &Wpda) -> f64 {
    let sr = p.semiring();
    p.transitions()
        .iter()
        .filter(|t| {
            t.pop.is_empty()
                && t.scan.is_none()
                && t.source == p.start()
                && t.target == p.accept()
                && t.push == p.final_config().stack
        })
        .fold(sr.zero(), |acc, t| sr.plus(acc, t.weight))
}

const NONE: &[(StateId, SymbolId, StateId, f64)] = &[];

pub(super) fn fill(p: &Wpda, y: &[InputId], algo: Algorithm) -> Chart {
    let sr = p.semiring();
    let n = y.len();
    let mut chart = Chart::new(sr, n, FillOrder::BySpan);
    chart.goal = Some(Item { i: 0, p: p.start(), payload: Payload::Single(p.final_config().stack[0]), j: n, q: p.accept() });
    if n == 0 {
        chart.fixed_value = Some(epsilon_weight(p));
        return chart;
    }
    let ix = Index::new(p);
    let mut ops = Ops::new(sr);

    for span in 1..=n {
        if algo == Algorithm::BuAlt {
            for i in 0..=n - span {
                let pairs = pair_cell(&chart, &ix, &mut ops, i, i + span);
                chart.put(AUX, i, i + span, pairs);
            }
        }
        for i in 0..=n - span {
            let j = i + span;
            let a = y[j - 1];
            let mut acc = CellMap::new();
            if span == 1 {
                for &(q0, x, q, w) in ix.zero_pop.get(&a).map(Vec::as_slice).unwrap_or(NONE) {
                    ops.acc(&mut acc, (q0, Payload::Single(x), q), w);
                }
            } else if let Some(left) = chart.cell(MAIN, i, j - 1) {
                for &(q0, pl, r, lw) in left.items() {
                    let Payload::Single(sym) = pl else { continue };
                    for &(x, q, w) in ix.one_pop.get(&(r, sym, a)).map(Vec::as_slice).unwrap_or(&[]) {
                        let v = ops.times(lw, w);
                        ops.acc(&mut acc, (q0, Payload::Single(x), q), v);
                    }
                }
            }
            match algo {
                Algorithm::BuBasic => basic_two_pop(&chart, &ix, &mut ops, &mut acc, i, j, a),
                Algorithm::BuFast => fast_two_pop(&chart, &mut ops, &mut acc, i, j),
                _ => alt_two_pop(&chart, &ix, &mut ops, &mut acc, i, j, a),
            }
            chart.put(MAIN, i, j, acc);
        }
        if algo == Algorithm::BuFast {
            for k in 0..=n - span {
                let hooks = hook_cell(&chart, &ix, &mut ops, k, k + span, y[k + span - 1]);
                chart.put(AUX, k, k + span, hooks);
            }
        }
        chart.seal(span);
    }
    chart.ops = ops.count;
    chart
}

#[allow(clippy::too_many_arguments)]
fn basic_two_pop(chart: &Chart, ix: &Index, ops: &mut Ops, acc: &mut CellMap, i: usize, j: usize, a: InputId) {
    for scan in [None, Some(a)] {
        let e = j - usize::from(scan.is_some());
        for k in i + 1..e {
            let (Some(left), Some(right)) = (chart.cell(MAIN, i, k), chart.cell(MAIN, k, e)) else { continue };
            for &(q0, lp, r, lw) in left.items() {
                let Payload::Single(ysym) = lp else { continue };
                for &(_, rp, s, rw) in right.starting(r) {
                    let Payload::Single(zsym) = rp else { continue };
                    for &(x, q, w) in ix.two_pop.get(&(s, ysym, zsym, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                        let v = ops.times(lw, rw);
                        let v = ops.times(v, w);
                        ops.acc(acc, (q0, Payload::Single(x), q), v);
                    }
                }
            }
        }
    }
}

/// Hooks `⟨k, r, Y\X, j, q⟩ = ⊕ ⟨k, r, Z, j−|a|, s⟩ ⊗ w(s --a, YZ→X--> q)`.
fn hook_cell(chart: &Chart, ix: &Index, ops: &mut Ops, k: usize, j: usize, a: InputId) -> CellMap {
    let mut acc = CellMap::new();
    for scan in [None, Some(a)] {
        let e = j - usize::from(scan.is_some());
        if e <= k {
            continue;
        }
        let Some(right) = chart.cell(MAIN, k, e) else { continue };
        for &(r, rp, s, zw) in right.items() {
            let Payload::Single(zsym) = rp else { continue };
            for &(ysym, x, q, w) in ix.two_pop_right.get(&(s, zsym, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                let v = ops.times(zw, w);
                ops.acc(&mut acc, (r, Payload::Hook(ysym, x), q), v);
            }
        }
    }
    acc
}

fn fast_two_pop(chart: &Chart, ops: &mut Ops, acc: &mut CellMap, i: usize, j: usize) {
    for k in i + 1..j {
        let (Some(left), Some(hooks)) = (chart.cell(MAIN, i, k), chart.cell(AUX, k, j)) else { continue };
        for &(q0, lp, r, lw) in left.items() {
            let Payload::Single(ysym) = lp else { continue };
            for &(_, hp, q, hw) in hooks.starting_with(r, ysym) {
                let Payload::Hook(_, x) = hp else { continue };
                let v = ops.times(lw, hw);
                ops.acc(acc, (q0, Payload::Single(x), q), v);
            }
        }
    }
}

/// Pairs `⟨i, p, YZ, j, s⟩ = ⊕ ⟨i, p, Y, k, r⟩ ⊗ ⟨k, r, Z, j, s⟩`, only for
/// `(s, Y, Z)` popped by some transition.
fn pair_cell(chart: &Chart, ix: &Index, ops: &mut Ops, i: usize, j: usize) -> CellMap {
    let mut acc = CellMap::new();
    for k in i + 1..j {
        let (Some(left), Some(right)) = (chart.cell(MAIN, i, k), chart.cell(MAIN, k, j)) else { continue };
        for &(q0, lp, r, lw) in left.items() {
            let Payload::Single(ysym) = lp else { continue };
            for &(_, rp, s, rw) in right.starting(r) {
                let Payload::Single(zsym) = rp else { continue };
                if !ix.pair_keys.contains(&(s, ysym, zsym)) {
                    continue;
                }
                let v = ops.times(lw, rw);
                ops.acc(&mut acc, (q0, Payload::Pair(ysym, zsym), s), v);
            }
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn alt_two_pop(chart: &Chart, ix: &Index, ops: &mut Ops, acc: &mut CellMap, i: usize, j: usize, a: InputId) {
    for scan in [None, Some(a)] {
        let e = j - usize::from(scan.is_some());
        let Some(pairs) = chart.cell(AUX, i, e) else { continue };
        for &(q0, pp, s, pw) in pairs.items() {
            let Payload::Pair(ysym, zsym) = pp else { continue };
            for &(x, q, w) in ix.two_pop.get(&(s, ysym, zsym, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                let v = ops.times(pw, w);
                ops.acc(acc, (q0, Payload::Single(x), q), v);
            }
        }
    }
}

pub fn stringsum_bottom_up_basic(p: &Wpda, y: &[InputId]) -> Result<f64> {
    require_normal_form_bu(p)?;
    Ok(fill(p, y, Algorithm::BuBasic).value())
}

pub fn stringsum_bottom_up_fast(p: &Wpda, y: &[InputId]) -> Result<f64> {
    require_normal_form_bu(p)?;
    Ok(fill(p, y, Algorithm::BuFast).value())
}

pub fn stringsum_bottom_up_alt(p: &Wpda, y: &[InputId]) -> Result<f64> {
    require_normal_form_bu(p)?;
    Ok(fill(p, y, Algorithm::BuAlt).value())
}
