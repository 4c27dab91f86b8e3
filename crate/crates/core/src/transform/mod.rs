//! Stringsum-preserving transformations between machine classes.

mod binarize;
mod cfg;
mod convert;
mod nullary;
mod trim;
mod unary;

use std::fmt;
use std::str::FromStr;

pub use binarize::{binarize_bottom_up, binarize_top_down};
pub use cfg::{to_cfg, triple_count};
pub use convert::{to_bottom_up, to_top_down};
pub use nullary::{
    guard_endpoints, remove_nullary, solve_nullary_table, solve_nullary_table_with, NullaryTable,
};
pub use trim::trim;
pub use unary::{
    build_unary_matrix, remove_unary, remove_unary_fast, unary_closure_parts, UnaryClosureParts,
    UnaryLabel,
};

use crate::automaton::Wpda;
use crate::error::{Error, Result};

pub(crate) fn plain_name(base: &str) -> String {
    format!("{base}^+")
}

pub(crate) fn fused_name(base: &str, from: &str, to: &str) -> String {
    format!("{base}^[{from},{to}]")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    BottomUp,
    TopDown,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottom-up" | "bu" => Ok(Mode::BottomUp),
            "top-down" | "td" => Ok(Mode::TopDown),
            other => Err(Error::Parse(format!("unknown normal-form mode `{other}`"))),
        }
    }
}

fn require_normal_form_semiring(p: &Wpda) -> Result<()> {
    let sr = p.semiring();
    let flags = sr.flags();
    for (ok, capability) in
        [(flags.commutative, "commutative"), (flags.continuous, "continuous"), (flags.has_star, "star")]
    {
        if !ok {
            return Err(Error::Capability { semiring: sr.kind(), capability });
        }
    }
    Ok(())
}

fn bottom_up_normal_form(p: &Wpda) -> Result<Wpda> {
    let report = p.classify();
    let mut m = if report.is_bottom_up { p.clone() } else { trim(&to_bottom_up(p)) };
    if m.max_pop() > 2 {
        m = binarize_bottom_up(&m)?;
    }
    if m.transitions().iter().any(|t| t.is_nullary()) {
        m = trim(&remove_nullary(&m)?);
    }
    Ok(trim(&remove_unary(&m)?))
}

/// Converts any machine into bottom-up or top-down normal form.
pub fn normal_form(p: &Wpda, mode: Mode) -> Result<Wpda> {
    require_normal_form_semiring(p)?;
    match mode {
        Mode::BottomUp => bottom_up_normal_form(p),
        Mode::TopDown => {
            let report = p.classify();
            let m = if report.is_top_down { p.clone() } else { trim(&to_top_down(p)) };
            let m = if m.max_push() > 2 { binarize_top_down(&m)? } else { m };
            Ok(bottom_up_normal_form(&m.mirror())?.mirror())
        }
    }
}

/// Applies `f` to a bottom-up machine directly and to a top-down machine
/// through its mirror image.
fn either_direction(p: &Wpda, what: &str, f: impl Fn(&Wpda) -> Result<Wpda>) -> Result<Wpda> {
    let report = p.classify();
    if report.is_bottom_up {
        f(p)
    } else if report.is_top_down {
        Ok(f(&p.mirror())?.mirror())
    } else {
        Err(Error::Precondition(format!("{what} needs a bottom-up or top-down machine")))
    }
}

/// Named passes for pipelines and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pass {
    ToBottomUp,
    ToTopDown,
    Binarize,
    RemoveNullary,
    RemoveUnary,
    RemoveUnaryFast,
    NormalForm(Mode),
    Trim,
}

impl Pass {
    pub fn apply(self, p: &Wpda) -> Result<Wpda> {
        match self {
            Pass::ToBottomUp => Ok(to_bottom_up(p)),
            Pass::ToTopDown => Ok(to_top_down(p)),
            Pass::Binarize => {
                let report = p.classify();
                if report.is_bottom_up {
                    binarize_bottom_up(p)
                } else if report.is_top_down {
                    binarize_top_down(p)
                } else {
                    Err(Error::Precondition("binarize needs a bottom-up or top-down machine".into()))
                }
            }
            Pass::RemoveNullary => either_direction(p, "remove-nullary", remove_nullary),
            Pass::RemoveUnary => remove_unary(p),
            Pass::RemoveUnaryFast => either_direction(p, "remove-unary-fast", remove_unary_fast),
            Pass::NormalForm(mode) => normal_form(p, mode),
            Pass::Trim => Ok(trim(p)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pass::ToBottomUp => "to-bottom-up",
            Pass::ToTopDown => "to-top-down",
            Pass::Binarize => "binarize",
            Pass::RemoveNullary => "remove-nullary",
            Pass::RemoveUnary => "remove-unary",
            Pass::RemoveUnaryFast => "remove-unary-fast",
            Pass::NormalForm(Mode::BottomUp) => "normal-form",
            Pass::NormalForm(Mode::TopDown) => "normal-form-td",
            Pass::Trim => "trim",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "to-bottom-up" => Pass::ToBottomUp,
            "to-top-down" => Pass::ToTopDown,
            "binarize" => Pass::Binarize,
            "remove-nullary" => Pass::RemoveNullary,
            "remove-unary" => Pass::RemoveUnary,
            "remove-unary-fast" => Pass::RemoveUnaryFast,
            "normal-form" | "normal-form-bu" => Pass::NormalForm(Mode::BottomUp),
            "normal-form-td" => Pass::NormalForm(Mode::TopDown),
            "trim" => Pass::Trim,
            other => return Err(Error::Parse(format!("unknown pass `{other}`"))),
        })
    }
}
