//! Lang's algorithm for simple machines, and its split-rule variant.
//!
//! Items `⟨i, p, XY, j, q⟩` stand for computations that start in `p` at `i`
//! with `X` on top, push `Y` above it, and end in `q` at `j` with `Y` still
//! on top of `X`. The stack bottom is a reserved marker `$` outside Γ.
//! Cells are completed by end position; ε-transitions make a column depend
//! on itself, in which case it is iterated to a fixpoint.

// chart positions index both cells and per-start accumulators
#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap};

use crate::automaton::{InputId, StateId, SymbolId, Wpda};
use crate::error::{Error, Result};

use super::{Cell, CellMap, Chart, FillOrder, Ops, Payload, AUX, MAIN};

const MAX_ITERS: usize = 10_000;

type Scan = Option<InputId>;
type Targets = Vec<(SymbolId, StateId, f64)>;

#[derive(Default)]
struct Index {
    nop: HashMap<(StateId, Scan), Vec<(StateId, f64)>>,
    push: HashMap<Scan, Vec<(StateId, SymbolId, StateId, f64)>>,
    pop: HashMap<(StateId, SymbolId, Scan), Vec<(StateId, f64)>>,
    replace: HashMap<(StateId, SymbolId, Scan), Targets>,
}

impl Index {
    fn new(p: &Wpda) -> Index {
        let mut ix = Index::default();
        for t in p.transitions() {
            let (src, tgt, w, a) = (t.source, t.target, t.weight, t.scan);
            match (t.pop.as_slice(), t.push.as_slice()) {
                ([], []) => ix.nop.entry((src, a)).or_default().push((tgt, w)),
                ([], [y]) => ix.push.entry(a).or_default().push((src, *y, tgt, w)),
                ([z], []) => ix.pop.entry((src, *z, a)).or_default().push((tgt, w)),
                ([z], [y]) => ix.replace.entry((src, *z, a)).or_default().push((*y, tgt, w)),
                _ => unreachable!("simple machine checked"),
            }
        }
        ix
    }
}

/// Cells of the column being computed, indexed by start position.
struct Column {
    main: Vec<Cell>,
    aux: Vec<Cell>,
}

struct Filler<'a> {
    chart: &'a Chart,
    ix: &'a Index,
    y: &'a [InputId],
    fast: bool,
}

impl Filler<'_> {
    fn cell<'c>(&'c self, col: &'c Column, layer: usize, i: usize, k: usize, j: usize) -> Option<&'c Cell> {
        if k == j {
            let cells = if layer == MAIN { &col.main } else { &col.aux };
            cells.get(i).filter(|c| !c.is_empty())
        } else {
            self.chart.cell(layer, i, k)
        }
    }

    fn scans(&self, j: usize) -> Vec<(Scan, usize)> {
        let mut out = vec![(None, j)];
        if j > 0 {
            out.push((Some(self.y[j - 1]), j - 1));
        }
        out
    }

    /// Split-rule intermediates `⟨k, r, Y, j, q⟩`: an item pushing `Z` on
    /// `Y` followed by a transition popping `Z`.
    fn derive_aux(&self, ops: &mut Ops, col: &Column, j: usize) -> Vec<CellMap> {
        let mut acc = vec![CellMap::new(); j + 1];
        for (scan, e) in self.scans(j) {
            for k in 0..=e {
                let Some(right) = self.cell(col, MAIN, k, e, j) else { continue };
                for &(r, rp, s, rw) in right.items() {
                    let Payload::Pair(ysym, zsym) = rp else { continue };
                    for &(q, w) in self.ix.pop.get(&(s, zsym, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                        let v = ops.times(rw, w);
                        ops.acc(&mut acc[k], (r, Payload::Single(ysym), q), v);
                    }
                }
            }
        }
        acc
    }

    fn derive_main(&self, ops: &mut Ops, col: &Column, j: usize, start: StateId, bottom: SymbolId) -> Vec<CellMap> {
        let mut acc = vec![CellMap::new(); j + 1];
        if j == 0 {
            ops.acc(&mut acc[0], (start, Payload::Pair(bottom, bottom), start), ops.sr.one());
        }
        for (scan, e) in self.scans(j) {
            for i in 0..=e {
                let Some(cell) = self.cell(col, MAIN, i, e, j) else { continue };
                for &(p, pl, r, v) in cell.items() {
                    for &(q, w) in self.ix.nop.get(&(r, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                        let x = ops.times(v, w);
                        ops.acc(&mut acc[i], (p, pl, q), x);
                    }
                    let Payload::Pair(xsym, zsym) = pl else { continue };
                    for &(ysym, q, w) in self.ix.replace.get(&(r, zsym, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                        let x = ops.times(v, w);
                        ops.acc(&mut acc[i], (p, Payload::Pair(xsym, ysym), q), x);
                    }
                }
            }
            // The antecedent of the push rule only witnesses that X can be
            // on top in state p at position e; its weight belongs to the
            // enclosing computation.
            for &(p, ysym, q, w) in self.ix.push.get(&scan).map(Vec::as_slice).unwrap_or(&[]) {
                let mut tops = BTreeSet::new();
                for k in 0..=e {
                    if let Some(cell) = self.cell(col, MAIN, k, e, j) {
                        tops.extend(cell.ending(p).map(|it| it.1.last()));
                    }
                }
                for xsym in tops {
                    ops.acc(&mut acc[e], (p, Payload::Pair(xsym, ysym), q), w);
                }
            }
            if !self.fast {
                for k in 0..=e {
                    let Some(right) = self.cell(col, MAIN, k, e, j) else { continue };
                    for &(r, rp, s, rw) in right.items() {
                        let Payload::Pair(ysym, zsym) = rp else { continue };
                        for &(q, w) in self.ix.pop.get(&(s, zsym, scan)).map(Vec::as_slice).unwrap_or(&[]) {
                            for i in 0..=k {
                                let Some(left) = self.cell(col, MAIN, i, k, j) else { continue };
                                for &(p, lp, _, lw) in left.ending_with(r, ysym) {
                                    let x = ops.times(lw, rw);
                                    let x = ops.times(x, w);
                                    ops.acc(&mut acc[i], (p, lp, q), x);
                                }
                            }
                        }
                    }
                }
            }
        }
        if self.fast {
            for k in 0..=j {
                let Some(mid) = self.cell(col, AUX, k, j, j) else { continue };
                for &(r, mp, q, mw) in mid.items() {
                    let ysym = mp.first();
                    for i in 0..=k {
                        let Some(left) = self.cell(col, MAIN, i, k, j) else { continue };
                        for &(p, lp, _, lw) in left.ending_with(r, ysym) {
                            let x = ops.times(lw, mw);
                            ops.acc(&mut acc[i], (p, lp, q), x);
                        }
                    }
                }
            }
        }
        acc
    }
}

fn to_cells(chart: &Chart, maps: &[CellMap]) -> Vec<Cell> {
    maps.iter().map(|m| Cell::from_map(chart.semiring(), m.clone())).collect()
}

/// Largest residual between two column snapshots, with the offending key.
fn column_residual(chart: &Chart, old: &[CellMap], new: &[CellMap]) -> (f64, String) {
    let sr = chart.semiring();
    let mut worst = (0.0, String::new());
    for (i, (a, b)) in old.iter().zip(new).enumerate() {
        for (key, &v) in b {
            let u = a.get(key).copied().unwrap_or(sr.zero());
            let r = if sr.flags().exact { if u == v { 0.0 } else { f64::INFINITY } } else { sr.residual(u, v) };
            if r > worst.0 {
                worst = (r, format!("{key:?} at start {i}"));
            }
        }
    }
    worst
}

fn check_preconditions(p: &Wpda) -> Result<()> {
    if !p.classify().is_simple {
        return Err(Error::Precondition("Lang's algorithm needs a simple machine".into()));
    }
    if !p.initial().stack.is_empty() {
        return Err(Error::Precondition("Lang's algorithm needs an empty initial stack".into()));
    }
    if p.final_config().stack.len() > 1 {
        return Err(Error::Precondition("Lang's algorithm needs a final stack of at most one symbol".into()));
    }
    Ok(())
}

pub(super) fn fill(p: &Wpda, y: &[InputId], fast: bool) -> Result<Chart> {
    check_preconditions(p)?;
    let sr = p.semiring();
    let n = y.len();
    let bottom = p.num_symbols();
    let (s, f) = (p.start(), p.accept());
    let ix = Index::new(p);
    let iterate = p.has_epsilon_transitions();
    let mut chart = Chart::new(sr, n, FillOrder::ByEnd);
    let mut ops = Ops::new(sr);

    for j in 0..=n {
        let mut col = Column { main: Vec::new(), aux: Vec::new() };
        let mut main_maps = vec![CellMap::new(); j + 1];
        let mut aux_maps = vec![CellMap::new(); j + 1];
        let mut iters = 0;
        loop {
            iters += 1;
            let filler = Filler { chart: &chart, ix: &ix, y, fast };
            if fast {
                aux_maps = filler.derive_aux(&mut ops, &col, j);
                col.aux = to_cells(&chart, &aux_maps);
            }
            let new_main = filler.derive_main(&mut ops, &col, j, s, bottom);
            let (residual, entry) = column_residual(&chart, &main_maps, &new_main);
            if new_main.iter().flat_map(|m| m.values()).any(|v| v.is_nan() || (v.is_infinite() && *v != sr.zero())) {
                return Err(Error::Divergence { iterations: iters, entry, residual: f64::INFINITY });
            }
            main_maps = new_main;
            col.main = to_cells(&chart, &main_maps);
            let done = if sr.flags().exact { residual == 0.0 } else { residual < 1e-12 };
            if !iterate || done {
                break;
            }
            if iters >= MAX_ITERS {
                return Err(Error::Divergence { iterations: iters, entry, residual });
            }
        }
        for (i, m) in main_maps.into_iter().enumerate() {
            chart.put(MAIN, i, j, m);
        }
        for (i, m) in aux_maps.into_iter().enumerate() {
            chart.put(AUX, i, j, m);
        }
        chart.seal(j);
    }
    chart.ops = ops.count;

    match p.final_config().stack.as_slice() {
        [] => {
            chart.goal = Some(super::Item { i: 0, p: s, payload: Payload::Pair(bottom, bottom), j: n, q: f });
        }
        [top] => {
            // Empty the stack first, then push the final symbol for good.
            let mut total = sr.zero();
            for k in 0..=n {
                let (Some(prefix), Some(last)) = (chart.cell(MAIN, 0, k), chart.cell(MAIN, k, n)) else { continue };
                for &(_, _, r, pw) in prefix.items().iter().filter(|it| it.0 == s && it.1 == Payload::Pair(bottom, bottom)) {
                    for &(_, _, _, lw) in last.starting_with(r, bottom).filter(|it| it.1 == Payload::Pair(bottom, *top) && it.2 == f) {
                        total = sr.plus(total, sr.times(pw, lw));
                    }
                }
            }
            chart.fixed_value = Some(total);
        }
        _ => unreachable!(),
    }
    Ok(chart)
}

pub fn stringsum_lang(p: &Wpda, y: &[InputId]) -> Result<f64> {
    Ok(fill(p, y, false)?.value())
}

pub fn stringsum_lang_fast(p: &Wpda, y: &[InputId]) -> Result<f64> {
    Ok(fill(p, y, true)?.value())
}
