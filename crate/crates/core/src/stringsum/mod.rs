//! Chart-based stringsum algorithms.
//!
//! All algorithms share [`Chart`], which stores items sparsely per cell
//! `(i, j)` and refuses writes to a cell once its phase (span length, or
//! end position for Lang's algorithm) has been sealed.

mod bottom_up;
mod lang;
mod top_down;
mod wfsa;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

pub use bottom_up::{stringsum_bottom_up_alt, stringsum_bottom_up_basic, stringsum_bottom_up_fast};
pub use lang::{stringsum_lang, stringsum_lang_fast};
pub use top_down::stringsum_top_down;
pub use wfsa::{stack_automaton, StackWfsa, WfsaArc};

use crate::automaton::{InputId, StateId, SymbolId, Wpda};
use crate::error::{Error, Result};
use crate::semiring::Semiring;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    BuBasic,
    BuFast,
    BuAlt,
    TopDown,
    Lang,
    LangFast,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::BuBasic,
        Algorithm::BuFast,
        Algorithm::BuAlt,
        Algorithm::TopDown,
        Algorithm::Lang,
        Algorithm::LangFast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BuBasic => "bu-basic",
            Algorithm::BuFast => "bu-fast",
            Algorithm::BuAlt => "bu-alt",
            Algorithm::TopDown => "td",
            Algorithm::Lang => "lang",
            Algorithm::LangFast => "lang-fast",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm `{s}`")))
    }
}

/// What an item says about the stack between its endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    /// One symbol pushed (bottom-up) or popped (top-down).
    Single(SymbolId),
    /// `X Y`: `Y` pushed on top of `X` (Lang), or two adjacent pushes.
    Pair(SymbolId, SymbolId),
    /// `Y\X`: an `X` still missing a `Y` on its left.
    Hook(SymbolId, SymbolId),
}

impl Payload {
    /// Leftmost symbol (the one the item starts with).
    pub fn first(self) -> SymbolId {
        match self {
            Payload::Single(x) | Payload::Pair(x, _) | Payload::Hook(x, _) => x,
        }
    }

    /// Rightmost symbol (the one on top at the end).
    pub fn last(self) -> SymbolId {
        match self {
            Payload::Single(x) | Payload::Pair(_, x) | Payload::Hook(_, x) => x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub i: usize,
    pub p: StateId,
    pub payload: Payload,
    pub j: usize,
    pub q: StateId,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub oplus: u64,
    pub otimes: u64,
}

/// Semiring operations that count themselves.
pub(crate) struct Ops {
    pub sr: Semiring,
    pub count: OpCounter,
}

impl Ops {
    pub fn new(sr: Semiring) -> Self {
        Ops { sr, count: OpCounter::default() }
    }

    #[inline]
    pub fn times(&mut self, a: f64, b: f64) -> f64 {
        self.count.otimes += 1;
        self.sr.times(a, b)
    }

    #[inline]
    pub fn acc<K: std::hash::Hash + Eq>(&mut self, map: &mut HashMap<K, f64>, key: K, v: f64) {
        self.count.oplus += 1;
        let sr = self.sr;
        let e = map.entry(key).or_insert(sr.zero());
        *e = sr.plus(*e, v);
    }
}

pub(crate) type CellMap = HashMap<(StateId, Payload, StateId), f64>;

/// The items of one `(i, j)` cell with lookup indexes.
#[derive(Clone, Debug, Default)]
pub struct Cell {
    items: Vec<(StateId, Payload, StateId, f64)>,
    by_start_first: HashMap<(StateId, SymbolId), Vec<u32>>,
    by_end_last: HashMap<(StateId, SymbolId), Vec<u32>>,
    by_start: HashMap<StateId, Vec<u32>>,
    by_end: HashMap<StateId, Vec<u32>>,
}

impl Cell {
    fn from_map(sr: Semiring, map: CellMap) -> Cell {
        let mut items: Vec<_> =
            map.into_iter().filter(|(_, v)| !sr.is_zero(*v)).map(|((p, x, q), v)| (p, x, q, v)).collect();
        items.sort_by_key(|a| (a.0, a.1, a.2));
        let mut cell = Cell { items, ..Cell::default() };
        for (k, &(p, x, q, _)) in cell.items.iter().enumerate() {
            let k = k as u32;
            cell.by_start_first.entry((p, x.first())).or_default().push(k);
            cell.by_end_last.entry((q, x.last())).or_default().push(k);
            cell.by_start.entry(p).or_default().push(k);
            cell.by_end.entry(q).or_default().push(k);
        }
        cell
    }

    pub fn items(&self) -> &[(StateId, Payload, StateId, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn pick<'a>(&'a self, idx: Option<&'a Vec<u32>>) -> impl Iterator<Item = &'a (StateId, Payload, StateId, f64)> + 'a {
        idx.into_iter().flatten().map(move |&k| &self.items[k as usize])
    }

    pub fn starting(&self, p: StateId) -> impl Iterator<Item = &(StateId, Payload, StateId, f64)> + '_ {
        self.pick(self.by_start.get(&p))
    }

    pub fn ending(&self, q: StateId) -> impl Iterator<Item = &(StateId, Payload, StateId, f64)> + '_ {
        self.pick(self.by_end.get(&q))
    }

    pub fn starting_with(&self, p: StateId, x: SymbolId) -> impl Iterator<Item = &(StateId, Payload, StateId, f64)> + '_ {
        self.pick(self.by_start_first.get(&(p, x)))
    }

    pub fn ending_with(&self, q: StateId, x: SymbolId) -> impl Iterator<Item = &(StateId, Payload, StateId, f64)> + '_ {
        self.pick(self.by_end_last.get(&(q, x)))
    }
}

/// Which index seals a cell: its span length or its end position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillOrder {
    BySpan,
    ByEnd,
}

/// Main items live in layer 0; hooks, pair items and other intermediate
/// items live in layer 1.
pub const MAIN: usize = 0;
pub const AUX: usize = 1;

#[derive(Clone, Debug)]
pub struct Chart {
    semiring: Semiring,
    n: usize,
    order: FillOrder,
    cells: [BTreeMap<(usize, usize), Cell>; 2],
    sealed: [Option<usize>; 2],
    pub ops: OpCounter,
    goal: Option<Item>,
    fixed_value: Option<f64>,
}

impl Chart {
    pub(crate) fn new(semiring: Semiring, n: usize, order: FillOrder) -> Self {
        Chart {
            semiring,
            n,
            order,
            cells: [BTreeMap::new(), BTreeMap::new()],
            sealed: [None, None],
            ops: OpCounter::default(),
            goal: None,
            fixed_value: None,
        }
    }

    fn phase(&self, i: usize, j: usize) -> usize {
        match self.order {
            FillOrder::BySpan => j - i,
            FillOrder::ByEnd => j,
        }
    }

    /// Stores the items of cell `(i, j)`. Panics if the cell's phase has
    /// already been sealed.
    pub(crate) fn put(&mut self, layer: usize, i: usize, j: usize, map: CellMap) {
        let phase = self.phase(i, j);
        assert!(
            self.sealed[layer].is_none_or(|s| phase > s),
            "write to sealed cell ({i}, {j}) in layer {layer}"
        );
        let cell = Cell::from_map(self.semiring, map);
        let key = (j - i, i);
        if cell.is_empty() {
            self.cells[layer].remove(&key);
        } else {
            self.cells[layer].insert(key, cell);
        }
    }

    pub(crate) fn seal(&mut self, phase: usize) {
        self.sealed = [Some(phase), Some(phase)];
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn len_input(&self) -> usize {
        self.n
    }

    pub fn cell(&self, layer: usize, i: usize, j: usize) -> Option<&Cell> {
        if j < i {
            return None;
        }
        self.cells[layer].get(&(j - i, i))
    }

    pub fn get(&self, layer: usize, item: &Item) -> f64 {
        self.cell(layer, item.i, item.j)
            .and_then(|c| {
                c.items.iter().find(|&&(p, x, q, _)| p == item.p && x == item.payload && q == item.q)
            })
            .map(|&(_, _, _, v)| v)
            .unwrap_or(self.semiring.zero())
    }

    /// All nonzero items of a layer in `(span, i, p, payload, q)` order.
    pub fn items(&self, layer: usize) -> Vec<(Item, f64)> {
        self.cells[layer]
            .iter()
            .flat_map(|(&(span, i), cell)| {
                cell.items.iter().map(move |&(p, payload, q, v)| (Item { i, p, payload, j: i + span, q }, v))
            })
            .collect()
    }

    pub fn item_count(&self, layer: usize) -> usize {
        self.cells[layer].values().map(Cell::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(BTreeMap::is_empty)
    }

    pub fn goal(&self) -> Option<Item> {
        self.goal
    }

    /// The stringsum read off the goal item.
    pub fn value(&self) -> f64 {
        if let Some(w) = self.fixed_value {
            return w;
        }
        match &self.goal {
            Some(g) => self.get(MAIN, g),
            None => self.semiring.zero(),
        }
    }
}

pub(crate) fn require_normal_form_bu(p: &Wpda) -> Result<()> {
    if !p.classify().is_normal_form_bu {
        return Err(Error::Precondition("machine is not in bottom-up normal form".into()));
    }
    Ok(())
}

/// Fills the chart of `algorithm` on `y`.
pub fn chart_items(p: &Wpda, y: &[InputId], algorithm: Algorithm) -> Result<Chart> {
    match algorithm {
        Algorithm::BuBasic | Algorithm::BuFast | Algorithm::BuAlt => {
            require_normal_form_bu(p)?;
            Ok(bottom_up::fill(p, y, algorithm))
        }
        Algorithm::TopDown => top_down::fill(p, y),
        Algorithm::Lang => lang::fill(p, y, false),
        Algorithm::LangFast => lang::fill(p, y, true),
    }
}

/// Total weight of accepting runs scanning `y`.
pub fn stringsum(p: &Wpda, y: &[InputId], algorithm: Algorithm) -> Result<f64> {
    Ok(chart_items(p, y, algorithm)?.value())
}
