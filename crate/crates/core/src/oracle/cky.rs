//! Weighted context-free grammars in Chomsky form and semiring CKY.

use std::collections::HashMap;

use crate::automaton::InputId;
use crate::error::{Error, Result};
use crate::semiring::Semiring;

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryRule {
    pub lhs: usize,
    pub left: usize,
    pub right: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexicalRule {
    pub lhs: usize,
    pub terminal: InputId,
    pub weight: f64,
}

/// Grammar with rules `A → B C`, `A → a`, and optionally `S → ε`.
#[derive(Clone, Debug)]
pub struct Cfg {
    pub semiring: Semiring,
    pub nonterminals: Vec<String>,
    pub terminals: Vec<String>,
    pub start: usize,
    pub binary: Vec<BinaryRule>,
    pub lexical: Vec<LexicalRule>,
    pub start_epsilon: Option<f64>,
}

impl Cfg {
    pub fn new(semiring: Semiring, terminals: Vec<String>) -> Self {
        Cfg {
            semiring,
            nonterminals: Vec::new(),
            terminals,
            start: 0,
            binary: Vec::new(),
            lexical: Vec::new(),
            start_epsilon: None,
        }
    }

    pub fn rule_count(&self) -> usize {
        self.binary.len() + self.lexical.len() + usize::from(self.start_epsilon.is_some())
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.nonterminals.len();
        if self.start >= n && !(n == 0 && self.binary.is_empty() && self.lexical.is_empty()) {
            return Err(Error::Structural("start symbol out of range".into()));
        }
        for r in &self.binary {
            if r.lhs >= n || r.left >= n || r.right >= n {
                return Err(Error::Structural("binary rule references unknown nonterminal".into()));
            }
        }
        for r in &self.lexical {
            if r.lhs >= n || r.terminal >= self.terminals.len() {
                return Err(Error::Structural("lexical rule references unknown symbol".into()));
            }
        }
        Ok(())
    }
}

/// Inside weight of the start symbol over `y`.
pub fn cky_stringsum(g: &Cfg, y: &[InputId]) -> Result<f64> {
    g.check_shape()?;
    let sr = g.semiring;
    let n = y.len();
    if n == 0 {
        return Ok(g.start_epsilon.unwrap_or(sr.zero()));
    }
    let mut by_left: HashMap<usize, Vec<&BinaryRule>> = HashMap::new();
    for r in &g.binary {
        by_left.entry(r.left).or_default().push(r);
    }
    // chart[i][j - i - 1]
    let mut chart: Vec<Vec<HashMap<usize, f64>>> = vec![vec![HashMap::new(); n]; n];
    for (i, &a) in y.iter().enumerate() {
        let cell = &mut chart[i][0];
        for r in g.lexical.iter().filter(|r| r.terminal == a) {
            let e = cell.entry(r.lhs).or_insert(sr.zero());
            *e = sr.plus(*e, r.weight);
        }
    }
    for span in 2..=n {
        for i in 0..=n - span {
            let j = i + span;
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for k in i + 1..j {
                let left = &chart[i][k - i - 1];
                let right = &chart[k][j - k - 1];
                for (&b, &bw) in left {
                    for r in by_left.get(&b).map(Vec::as_slice).unwrap_or(&[]) {
                        if let Some(&cw) = right.get(&r.right) {
                            let e = acc.entry(r.lhs).or_insert(sr.zero());
                            *e = sr.plus(*e, sr.times(sr.times(bw, cw), r.weight));
                        }
                    }
                }
            }
            chart[i][span - 1] = acc;
        }
    }
    Ok(chart[0][n - 1].get(&g.start).copied().unwrap_or(sr.zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::SemiringKind;

    #[test]
    fn ab_grammar() {
        let sr = Semiring::new(SemiringKind::Real);
        let mut g = Cfg::new(sr, vec!["a".into(), "b".into()]);
        g.nonterminals = vec!["S".into(), "A".into(), "B".into()];
        g.binary.push(BinaryRule { lhs: 0, left: 1, right: 2, weight: 0.5 });
        g.lexical.push(LexicalRule { lhs: 1, terminal: 0, weight: 1.0 });
        g.lexical.push(LexicalRule { lhs: 2, terminal: 1, weight: 0.5 });
        assert_eq!(cky_stringsum(&g, &[0, 1]).unwrap(), 0.25);
        assert_eq!(cky_stringsum(&g, &[0]).unwrap(), 0.0);
        assert_eq!(cky_stringsum(&g, &[]).unwrap(), 0.0);
    }
}
