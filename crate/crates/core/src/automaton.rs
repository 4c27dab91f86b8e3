//! The WPDA data model: alphabets, transitions, configurations and runs.
//!
//! Stack strings are stored bottom-to-top, so the top of the stack is the
//! last element. Labels are interned to dense ids; file formats use names.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiring::{Semiring, SemiringKind};

pub type StateId = usize;
pub type SymbolId = usize;
pub type InputId = usize;

/// Interned label set with stable, insertion-ordered ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    /// Interns `origin#k` for the smallest unused `k`.
    pub fn fresh(&mut self, origin: &str) -> usize {
        let mut k = 0usize;
        loop {
            let name = format!("{origin}#{k}");
            if !self.index.contains_key(&name) {
                return self.intern(&name);
            }
            k += 1;
        }
    }

    /// Interns `name`, or a fresh variant of it if the name is taken.
    pub fn intern_unique(&mut self, name: &str) -> usize {
        if self.index.contains_key(name) {
            self.fresh(name)
        } else {
            self.intern(name)
        }
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    pub stack: Vec<SymbolId>,
}

impl Configuration {
    pub fn new(state: StateId, stack: Vec<SymbolId>) -> Self {
        Configuration { state, stack }
    }
}

/// Identity of a transition; weights are merged per key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionKey {
    pub source: StateId,
    pub pop: Vec<SymbolId>,
    pub scan: Option<InputId>,
    pub target: StateId,
    pub push: Vec<SymbolId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub source: StateId,
    pub pop: Vec<SymbolId>,
    pub scan: Option<InputId>,
    pub target: StateId,
    pub push: Vec<SymbolId>,
    pub weight: f64,
}

impl Transition {
    pub fn key(&self) -> TransitionKey {
        TransitionKey {
            source: self.source,
            pop: self.pop.clone(),
            scan: self.scan,
            target: self.target,
            push: self.push.clone(),
        }
    }

    pub fn scan_len(&self) -> usize {
        usize::from(self.scan.is_some())
    }

    pub fn is_nullary(&self) -> bool {
        self.scan.is_none() && self.pop.is_empty() && self.push.len() == 1
    }

    pub fn is_unary(&self) -> bool {
        self.scan.is_none() && self.pop.len() == 1 && self.push.len() == 1
    }

    /// Whether `stack` ends with this transition's popped string.
    pub fn applies_to(&self, stack: &[SymbolId]) -> bool {
        stack.ends_with(&self.pop)
    }
}

/// Tag attached to symbols created by nullary removal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolTag {
    Null,
    NonNull,
    /// Stands for `X^¬∅` pushed while still owing nullary computations
    /// leading from `from` to `to`.
    Fused { from: StateId, to: StateId },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnnotatedSymbol {
    pub base: String,
    pub tag: SymbolTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubclassReport {
    pub is_bottom_up: bool,
    pub is_top_down: bool,
    pub is_simple: bool,
    pub is_normal_form_bu: bool,
    pub is_normal_form_td: bool,
    pub max_pop: usize,
    pub max_push: usize,
}

impl SubclassReport {
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if self.is_bottom_up {
            parts.push("bottom-up");
        }
        if self.is_top_down {
            parts.push("top-down");
        }
        if self.is_simple {
            parts.push("simple");
        }
        if self.is_normal_form_bu || self.is_normal_form_td {
            parts.push("normal form");
        }
        if parts.is_empty() {
            parts.push("general");
        }
        parts.join(", ")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wpda {
    semiring: Semiring,
    states: Alphabet,
    inputs: Alphabet,
    symbols: Alphabet,
    transitions: Vec<Transition>,
    initial: Configuration,
    final_: Configuration,
    annotations: BTreeMap<SymbolId, AnnotatedSymbol>,
}

impl Wpda {
    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn states(&self) -> &Alphabet {
        &self.states
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn symbols(&self) -> &Alphabet {
        &self.symbols
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn final_config(&self) -> &Configuration {
        &self.final_
    }

    pub fn start(&self) -> StateId {
        self.initial.state
    }

    pub fn accept(&self) -> StateId {
        self.final_.state
    }

    pub fn annotations(&self) -> &BTreeMap<SymbolId, AnnotatedSymbol> {
        &self.annotations
    }

    pub fn annotation(&self, sym: SymbolId) -> Option<&AnnotatedSymbol> {
        self.annotations.get(&sym)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        self.states.name(q)
    }

    pub fn symbol_name(&self, x: SymbolId) -> &str {
        self.symbols.name(x)
    }

    pub fn input_name(&self, a: InputId) -> &str {
        self.inputs.name(a)
    }

    pub fn max_pop(&self) -> usize {
        self.transitions.iter().map(|t| t.pop.len()).max().unwrap_or(0)
    }

    pub fn max_push(&self) -> usize {
        self.transitions.iter().map(|t| t.push.len()).max().unwrap_or(0)
    }

    pub fn has_epsilon_transitions(&self) -> bool {
        self.transitions.iter().any(|t| t.scan.is_none())
    }

    /// Same machine, reinterpreted over another semiring.
    pub fn with_semiring(&self, semiring: Semiring) -> Wpda {
        let mut out = self.clone();
        out.semiring = semiring;
        out
    }

    /// Rebuilds a copy with every weight mapped through `f`.
    pub fn map_weights(&self, semiring: Semiring, f: impl Fn(f64) -> f64) -> Wpda {
        let mut b = WpdaBuilder::like(self);
        b.semiring = semiring;
        for t in &self.transitions {
            b.add(t.source, t.pop.clone(), t.scan, t.target, t.push.clone(), f(t.weight));
        }
        b.annotations = self.annotations.clone();
        b.build()
    }

    pub fn transition_weight(&self, key: &TransitionKey) -> f64 {
        self.transitions
            .binary_search_by(|t| t.key().cmp(key))
            .map(|i| self.transitions[i].weight)
            .unwrap_or(self.semiring.zero())
    }

    pub fn classify(&self) -> SubclassReport {
        classify(self)
    }

    /// Encodes an input string. Strings containing whitespace are split on
    /// it; otherwise each character is one symbol.
    pub fn encode(&self, text: &str) -> Result<Vec<InputId>> {
        let tokens: Vec<String> = if text.chars().any(char::is_whitespace) {
            text.split_whitespace().map(str::to_string).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        };
        tokens
            .iter()
            .map(|t| {
                self.inputs
                    .get(t)
                    .ok_or_else(|| Error::Validation(format!("input symbol `{t}` is not in the alphabet")))
            })
            .collect()
    }

    pub fn decode(&self, y: &[InputId]) -> String {
        let multi = self.inputs.names().iter().any(|n| n.chars().count() != 1);
        let parts: Vec<&str> = y.iter().map(|&a| self.inputs.name(a)).collect();
        if multi {
            parts.join(" ")
        } else {
            parts.concat()
        }
    }

    /// Reverses every transition and swaps the initial and final
    /// configurations. Runs of the mirror scan the reversed string.
    pub fn mirror(&self) -> Wpda {
        let mut b = WpdaBuilder::like(self);
        for t in &self.transitions {
            b.add(t.target, t.push.clone(), t.scan, t.source, t.pop.clone(), t.weight);
        }
        b.initial = Some(self.final_.clone());
        b.final_ = Some(self.initial.clone());
        b.annotations = self.annotations.clone();
        b.build()
    }

    pub fn format_stack(&self, stack: &[SymbolId]) -> String {
        if stack.is_empty() {
            return "ε".into();
        }
        stack.iter().map(|&x| self.symbols.name(x)).collect::<Vec<_>>().join(" ")
    }

    pub fn format_transition(&self, t: &Transition) -> String {
        format!(
            "{} --{}, {} -> {} / {}--> {}",
            self.state_name(t.source),
            t.scan.map(|a| self.input_name(a)).unwrap_or("ε"),
            self.format_stack(&t.pop),
            self.format_stack(&t.push),
            self.semiring.format(t.weight),
            self.state_name(t.target)
        )
    }

    // ---- serialization ----

    pub fn from_json_str(text: &str) -> Result<Wpda> {
        Ok(Self::load_str(text, None)?.0)
    }

    /// Parses a machine description, optionally overriding its semiring.
    /// Returns the machine and any warnings (duplicate keys merged by ⊕).
    pub fn load_str(text: &str, semiring: Option<Semiring>) -> Result<(Wpda, Vec<String>)> {
        let file: WpdaFile = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        file.into_wpda(semiring)
    }

    pub fn load(path: impl AsRef<Path>, semiring: Option<Semiring>) -> Result<(Wpda, Vec<String>)> {
        let text = std::fs::read_to_string(path)?;
        Self::load_str(&text, semiring)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&WpdaFile::from_wpda(self))
            .expect("machine serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

impl fmt::Display for Wpda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "initial ({}, {}), final ({}, {})",
            self.format_stack(&self.initial.stack),
            self.state_name(self.initial.state),
            self.format_stack(&self.final_.stack),
            self.state_name(self.final_.state)
        )?;
        for t in &self.transitions {
            writeln!(f, "  {}", self.format_transition(t))?;
        }
        Ok(())
    }
}

/// Incremental constructor. Transitions with equal keys are merged by ⊕
/// and zero-weight transitions are dropped.
#[derive(Clone, Debug)]
pub struct WpdaBuilder {
    pub(crate) semiring: Semiring,
    pub(crate) states: Alphabet,
    pub(crate) inputs: Alphabet,
    pub(crate) symbols: Alphabet,
    transitions: BTreeMap<TransitionKey, f64>,
    pub(crate) initial: Option<Configuration>,
    pub(crate) final_: Option<Configuration>,
    pub(crate) annotations: BTreeMap<SymbolId, AnnotatedSymbol>,
    merged: usize,
}

impl WpdaBuilder {
    pub fn new(semiring: Semiring) -> Self {
        WpdaBuilder {
            semiring,
            states: Alphabet::new(),
            inputs: Alphabet::new(),
            symbols: Alphabet::new(),
            transitions: BTreeMap::new(),
            initial: None,
            final_: None,
            annotations: BTreeMap::new(),
            merged: 0,
        }
    }

    /// Starts from the alphabets and configurations of `p`, with no
    /// transitions and no annotations.
    pub fn like(p: &Wpda) -> Self {
        WpdaBuilder {
            semiring: p.semiring,
            states: p.states.clone(),
            inputs: p.inputs.clone(),
            symbols: p.symbols.clone(),
            transitions: BTreeMap::new(),
            initial: Some(p.initial.clone()),
            final_: Some(p.final_.clone()),
            annotations: BTreeMap::new(),
            merged: 0,
        }
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn state(&mut self, name: &str) -> StateId {
        self.states.intern(name)
    }

    pub fn fresh_state(&mut self, origin: &str) -> StateId {
        self.states.fresh(origin)
    }

    pub fn input(&mut self, name: &str) -> InputId {
        self.inputs.intern(name)
    }

    pub fn symbol(&mut self, name: &str) -> SymbolId {
        self.symbols.intern(name)
    }

    pub fn fresh_symbol(&mut self, origin: &str) -> SymbolId {
        self.symbols.fresh(origin)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        self.states.name(q)
    }

    pub fn symbol_name(&self, x: SymbolId) -> &str {
        self.symbols.name(x)
    }

    pub fn symbols_mut(&mut self) -> &mut Alphabet {
        &mut self.symbols
    }

    pub fn annotate(&mut self, sym: SymbolId, ann: AnnotatedSymbol) {
        self.annotations.insert(sym, ann);
    }

    pub fn set_initial(&mut self, state: StateId, stack: Vec<SymbolId>) {
        self.initial = Some(Configuration { state, stack });
    }

    pub fn set_final(&mut self, state: StateId, stack: Vec<SymbolId>) {
        self.final_ = Some(Configuration { state, stack });
    }

    pub fn add(
        &mut self,
        source: StateId,
        pop: Vec<SymbolId>,
        scan: Option<InputId>,
        target: StateId,
        push: Vec<SymbolId>,
        weight: f64,
    ) {
        let sr = self.semiring;
        if sr.is_zero(weight) {
            return;
        }
        let key = TransitionKey { source, pop, scan, target, push };
        match self.transitions.get_mut(&key) {
            Some(w) => {
                *w = sr.plus(*w, weight);
                self.merged += 1;
            }
            None => {
                self.transitions.insert(key, weight);
            }
        }
    }

    pub fn add_transition(&mut self, t: &Transition) {
        self.add(t.source, t.pop.clone(), t.scan, t.target, t.push.clone(), t.weight);
    }

    /// Convenience for tests and examples: everything by name, `""` for ε.
    pub fn add_named(&mut self, from: &str, pop: &[&str], scan: &str, to: &str, push: &[&str], w: f64) {
        let source = self.state(from);
        let target = self.state(to);
        let pop = pop.iter().map(|x| self.symbol(x)).collect();
        let push = push.iter().map(|x| self.symbol(x)).collect();
        let scan = if scan.is_empty() { None } else { Some(self.input(scan)) };
        self.add(source, pop, scan, target, push, w);
    }

    pub fn initial_named(&mut self, state: &str, stack: &[&str]) {
        let q = self.state(state);
        let s = stack.iter().map(|x| self.symbol(x)).collect();
        self.set_initial(q, s);
    }

    pub fn final_named(&mut self, state: &str, stack: &[&str]) {
        let q = self.state(state);
        let s = stack.iter().map(|x| self.symbol(x)).collect();
        self.set_final(q, s);
    }

    pub fn merged_count(&self) -> usize {
        self.merged
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// Finishes the machine. Missing configurations default to the first
    /// state with an empty stack.
    pub fn build(mut self) -> Wpda {
        if self.states.is_empty() {
            self.states.intern("q");
        }
        let initial = self.initial.take().unwrap_or(Configuration { state: 0, stack: vec![] });
        let final_ = self.final_.take().unwrap_or(Configuration { state: 0, stack: vec![] });
        let transitions = self
            .transitions
            .into_iter()
            .map(|(k, weight)| Transition {
                source: k.source,
                pop: k.pop,
                scan: k.scan,
                target: k.target,
                push: k.push,
                weight,
            })
            .collect();
        Wpda {
            semiring: self.semiring,
            states: self.states,
            inputs: self.inputs,
            symbols: self.symbols,
            transitions,
            initial,
            final_,
            annotations: self.annotations,
        }
    }
}

pub fn classify(p: &Wpda) -> SubclassReport {
    let ts = p.transitions();
    let max_pop = p.max_pop();
    let max_push = p.max_push();
    let init = p.initial();
    let fin = p.final_config();
    let is_bottom_up =
        ts.iter().all(|t| t.push.len() == 1) && init.stack.is_empty() && fin.stack.len() == 1;
    let is_top_down =
        ts.iter().all(|t| t.pop.len() == 1) && init.stack.len() == 1 && fin.stack.is_empty();
    let is_simple = max_pop <= 1 && max_push <= 1;

    let guarded = |s: StateId, f: StateId| {
        s != f && ts.iter().all(|t| t.target != s && t.source != f)
    };
    let is_normal_form_bu = is_bottom_up
        && ts.iter().all(|t| {
            if t.scan.is_some() {
                t.pop.len() <= 2
            } else if t.pop.len() == 2 {
                true
            } else {
                // the lone ε-acceptance transition
                t.pop.is_empty()
                    && t.source == init.state
                    && t.target == fin.state
                    && t.push == fin.stack
                    && guarded(init.state, fin.state)
            }
        });
    let is_normal_form_td = is_top_down
        && ts.iter().all(|t| {
            if t.scan.is_some() {
                t.push.len() <= 2
            } else if t.push.len() == 2 {
                true
            } else {
                t.push.is_empty()
                    && t.source == init.state
                    && t.target == fin.state
                    && t.pop == init.stack
                    && guarded(init.state, fin.state)
            }
        });
    SubclassReport {
        is_bottom_up,
        is_top_down,
        is_simple,
        is_normal_form_bu,
        is_normal_form_td,
        max_pop,
        max_push,
    }
}

/// Applies a transition to a configuration.
pub fn step(c: &Configuration, t: &Transition) -> Result<Configuration> {
    if c.state != t.source || !t.applies_to(&c.stack) {
        return Err(Error::StackMismatch {
            stack: c.stack.iter().map(|x| x.to_string()).collect(),
            popped: t.pop.iter().map(|x| x.to_string()).collect(),
        });
    }
    let mut stack = c.stack[..c.stack.len() - t.pop.len()].to_vec();
    stack.extend_from_slice(&t.push);
    Ok(Configuration { state: t.target, stack })
}

/// A run: a start configuration followed by (transition, configuration) steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub start: Configuration,
    pub steps: Vec<(Transition, Configuration)>,
}

impl Run {
    pub fn new(start: Configuration) -> Self {
        Run { start, steps: Vec::new() }
    }

    pub fn end(&self) -> &Configuration {
        self.steps.last().map(|(_, c)| c).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Re-executes the run from its start configuration and checks every
    /// recorded configuration along the way.
    pub fn replay(&self) -> Result<Configuration> {
        let mut c = self.start.clone();
        for (t, expected) in &self.steps {
            c = step(&c, t)?;
            if &c != expected {
                return Err(Error::Structural("run records an inconsistent configuration".into()));
            }
        }
        Ok(c)
    }
}

pub fn run_weight(r: &Run, s: &Semiring) -> f64 {
    s.product(r.steps.iter().map(|(t, _)| t.weight))
}

pub fn scanned_string(r: &Run) -> Vec<InputId> {
    r.steps.iter().filter_map(|(t, _)| t.scan).collect()
}

// ---- file format ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    state: String,
    #[serde(default)]
    stack: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionFile {
    from: String,
    #[serde(default)]
    pop: Vec<String>,
    #[serde(default)]
    scan: String,
    to: String,
    #[serde(default)]
    push: Vec<String>,
    weight: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationFile {
    base: String,
    tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WpdaFile {
    #[serde(default = "default_semiring")]
    semiring: SemiringKind,
    states: Vec<String>,
    input_alphabet: Vec<String>,
    stack_alphabet: Vec<String>,
    initial: ConfigFile,
    #[serde(rename = "final")]
    final_: ConfigFile,
    transitions: Vec<TransitionFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    annotations: BTreeMap<String, AnnotationFile>,
}

fn default_semiring() -> SemiringKind {
    SemiringKind::Real
}

fn declare(alpha: &mut Alphabet, names: &[String], what: &str) -> Result<()> {
    for n in names {
        if n.is_empty() {
            return Err(Error::Validation(format!("empty {what} name")));
        }
        if alpha.get(n).is_some() {
            return Err(Error::Validation(format!("{what} `{n}` declared twice")));
        }
        alpha.intern(n);
    }
    Ok(())
}

impl WpdaFile {
    fn into_wpda(self, semiring: Option<Semiring>) -> Result<(Wpda, Vec<String>)> {
        let sr = semiring.unwrap_or_else(|| Semiring::new(self.semiring));
        let mut b = WpdaBuilder::new(sr);
        declare(&mut b.states, &self.states, "state")?;
        declare(&mut b.inputs, &self.input_alphabet, "input symbol")?;
        declare(&mut b.symbols, &self.stack_alphabet, "stack symbol")?;

        let state = |b: &WpdaBuilder, n: &str, ctx: &str| {
            b.states
                .get(n)
                .ok_or_else(|| Error::Validation(format!("{ctx}: undeclared state `{n}`")))
        };
        let stack = |b: &WpdaBuilder, s: &[String], ctx: &str| -> Result<Vec<SymbolId>> {
            s.iter()
                .map(|x| {
                    b.symbols.get(x).ok_or_else(|| {
                        Error::Validation(format!("{ctx}: undeclared stack symbol `{x}`"))
                    })
                })
                .collect()
        };

        let init_state = state(&b, &self.initial.state, "initial")?;
        let init_stack = stack(&b, &self.initial.stack, "initial")?;
        let fin_state = state(&b, &self.final_.state, "final")?;
        let fin_stack = stack(&b, &self.final_.stack, "final")?;
        b.set_initial(init_state, init_stack);
        b.set_final(fin_state, fin_stack);

        let mut warnings = Vec::new();
        let mut seen: HashMap<TransitionKey, usize> = HashMap::new();
        for (k, t) in self.transitions.iter().enumerate() {
            let ctx = format!("transition #{k} ({} -> {})", t.from, t.to);
            let source = state(&b, &t.from, &ctx)?;
            let target = state(&b, &t.to, &ctx)?;
            let pop = stack(&b, &t.pop, &ctx)?;
            let push = stack(&b, &t.push, &ctx)?;
            let scan = if t.scan.is_empty() {
                None
            } else {
                Some(b.inputs.get(&t.scan).ok_or_else(|| {
                    Error::Validation(format!("{ctx}: undeclared input symbol `{}`", t.scan))
                })?)
            };
            let weight = sr.parse_weight(&t.weight).map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("{ctx}: {m}")),
                other => other,
            })?;
            let key = TransitionKey { source, pop: pop.clone(), scan, target, push: push.clone() };
            if let Some(first) = seen.get(&key) {
                warnings.push(format!(
                    "{ctx} duplicates transition #{first}; weights merged by ⊕"
                ));
            } else {
                seen.insert(key, k);
            }
            b.add(source, pop, scan, target, push, weight);
        }

        for (name, a) in &self.annotations {
            let sym = b.symbols.get(name).ok_or_else(|| {
                Error::Validation(format!("annotation for undeclared stack symbol `{name}`"))
            })?;
            let tag = match a.tag.as_str() {
                "null" => SymbolTag::Null,
                "nonnull" => SymbolTag::NonNull,
                "fused" => {
                    let (Some(from), Some(to)) = (&a.from, &a.to) else {
                        return Err(Error::Validation(format!(
                            "fused annotation of `{name}` needs `from` and `to`"
                        )));
                    };
                    let ctx = format!("annotation of `{name}`");
                    SymbolTag::Fused { from: state(&b, from, &ctx)?, to: state(&b, to, &ctx)? }
                }
                other => {
                    return Err(Error::Validation(format!("unknown symbol tag `{other}`")));
                }
            };
            b.annotate(sym, AnnotatedSymbol { base: a.base.clone(), tag });
        }
        Ok((b.build(), warnings))
    }

    fn from_wpda(p: &Wpda) -> WpdaFile {
        let sr = p.semiring();
        let names = |s: &[SymbolId]| s.iter().map(|&x| p.symbol_name(x).to_string()).collect();
        WpdaFile {
            semiring: sr.kind(),
            states: p.states.names().to_vec(),
            input_alphabet: p.inputs.names().to_vec(),
            stack_alphabet: p.symbols.names().to_vec(),
            initial: ConfigFile {
                state: p.state_name(p.initial.state).to_string(),
                stack: names(&p.initial.stack),
            },
            final_: ConfigFile {
                state: p.state_name(p.final_.state).to_string(),
                stack: names(&p.final_.stack),
            },
            transitions: p
                .transitions
                .iter()
                .map(|t| TransitionFile {
                    from: p.state_name(t.source).to_string(),
                    pop: names(&t.pop),
                    scan: t.scan.map(|a| p.input_name(a).to_string()).unwrap_or_default(),
                    to: p.state_name(t.target).to_string(),
                    push: names(&t.push),
                    weight: sr.weight_to_json(t.weight),
                })
                .collect(),
            annotations: p
                .annotations
                .iter()
                .map(|(&x, a)| {
                    let (tag, from, to) = match a.tag {
                        SymbolTag::Null => ("null", None, None),
                        SymbolTag::NonNull => ("nonnull", None, None),
                        SymbolTag::Fused { from, to } => (
                            "fused",
                            Some(p.state_name(from).to_string()),
                            Some(p.state_name(to).to_string()),
                        ),
                    };
                    (
                        p.symbol_name(x).to_string(),
                        AnnotationFile { base: a.base.clone(), tag: tag.into(), from, to },
                    )
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real() -> Semiring {
        Semiring::new(SemiringKind::Real)
    }

    #[test]
    fn step_rewrites_suffix() {
        let t = Transition { source: 0, pop: vec![1], scan: None, target: 3, push: vec![1, 2], weight: 1.0 };
        let c = Configuration::new(0, vec![0, 1]);
        assert_eq!(step(&c, &t).unwrap(), Configuration::new(3, vec![0, 1, 2]));

        let t2 = Transition { source: 0, pop: vec![1, 2], scan: None, target: 0, push: vec![], weight: 1.0 };
        assert!(matches!(step(&Configuration::new(0, vec![0]), &t2), Err(Error::StackMismatch { .. })));

        let t3 = Transition { source: 0, pop: vec![], scan: None, target: 1, push: vec![1], weight: 1.0 };
        assert_eq!(step(&Configuration::new(0, vec![]), &t3).unwrap(), Configuration::new(1, vec![1]));
    }

    #[test]
    fn empty_run() {
        let r = Run::new(Configuration::new(0, vec![]));
        assert_eq!(run_weight(&r, &real()), 1.0);
        assert!(scanned_string(&r).is_empty());
        assert_eq!(run_weight(&r, &Semiring::new(SemiringKind::Tropical)), 0.0);
    }

    #[test]
    fn two_pop_two_push_is_general() {
        let mut b = WpdaBuilder::new(real());
        b.add_named("q", &["A", "B"], "a", "q", &["B", "A"], 0.5);
        b.initial_named("q", &[]);
        b.final_named("q", &["A"]);
        let r = b.build().classify();
        assert!(!r.is_bottom_up && !r.is_top_down && !r.is_simple);
        assert!(!r.is_normal_form_bu && !r.is_normal_form_td);
        assert_eq!((r.max_pop, r.max_push), (2, 2));
    }

    #[test]
    fn builder_merges_and_drops_zero() {
        let mut b = WpdaBuilder::new(real());
        b.add_named("q", &[], "a", "q", &["A"], 0.25);
        b.add_named("q", &[], "a", "q", &["A"], 0.5);
        b.add_named("q", &["A"], "b", "q", &["A"], 0.0);
        assert_eq!(b.merged_count(), 1);
        let p = b.build();
        assert_eq!(p.transitions().len(), 1);
        assert_eq!(p.transitions()[0].weight, 0.75);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "semiring": "real",
            "states": ["q"],
            "input_alphabet": ["a", "b"],
            "stack_alphabet": ["A", "S"],
            "initial": {"state": "q", "stack": []},
            "final": {"state": "q", "stack": ["S"]},
            "transitions": [
                {"from": "q", "pop": [], "scan": "a", "to": "q", "push": ["A"], "weight": 0.5},
                {"from": "q", "pop": ["A"], "scan": "b", "to": "q", "push": ["S"], "weight": 0.5},
                {"from": "q", "pop": ["A"], "scan": "b", "to": "q", "push": ["S"], "weight": 0.25}
            ]
        }"#;
        let (p, warnings) = Wpda::load_str(text, None).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(p.transitions().len(), 2);
        let again = Wpda::from_json_str(&p.to_json()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn undeclared_symbol_is_named() {
        let text = r#"{
            "states": ["q"], "input_alphabet": ["a"], "stack_alphabet": ["A"],
            "initial": {"state": "q", "stack": []}, "final": {"state": "q", "stack": ["A"]},
            "transitions": [{"from": "q", "pop": ["Z"], "scan": "a", "to": "q", "push": ["A"], "weight": 1}]
        }"#;
        let err = Wpda::load_str(text, None).unwrap_err();
        assert!(err.to_string().contains("`Z`"), "{err}");
    }

    #[test]
    fn mirror_is_involution() {
        let mut b = WpdaBuilder::new(real());
        b.add_named("p", &["A"], "a", "q", &["B", "C"], 0.5);
        b.initial_named("p", &["A"]);
        b.final_named("q", &[]);
        let p = b.build();
        assert_eq!(p.mirror().mirror(), p);
        assert!(p.mirror().classify().is_bottom_up);
    }
}
