//! Ordered and padded argument tuples, the literal order they induce, and
//! the skipped / witnessed / safe predicates built on top of them.
//!
//! A literal's *padded tuple* is its sorted argument tuple, left-padded with
//! the minimal variable up to width `k`. Literals of arity at least two are
//! compared lexicographically on padded tuples. A variable strictly inside a
//! literal's padded window but absent from the literal is *skipped* there,
//! and the skip is *witnessed* when a strictly smaller literal of arity at
//! least two contains the variable. A body-only variable is safe when every
//! skip of it is witnessed.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::rule_model::{Literal, Rule, Variable};

/// The padding width. Must be at least the largest body arity in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SafetyContext {
    k: usize,
}

impl SafetyContext {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("padding width k must be positive".into()));
        }
        Ok(SafetyContext { k })
    }

    /// The tightest width admissible for `rule` (at least 1).
    pub fn for_rule(rule: &Rule) -> Self {
        SafetyContext {
            k: rule.max_body_arity().max(1),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn check_rule(&self, rule: &Rule) -> Result<()> {
        let max_arity = rule.max_body_arity();
        if self.k < max_arity {
            return Err(Error::PaddingTooSmall { k: self.k, max_arity });
        }
        Ok(())
    }
}

/// A sorted, prefix-padded argument tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PaddedTuple(Vec<Variable>);

impl PaddedTuple {
    pub fn vars(&self) -> &[Variable] {
        &self.0
    }

    pub fn first(&self) -> Option<Variable> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Variable> {
        self.0.last().copied()
    }
}

impl fmt::Display for PaddedTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// The arguments of `l` sorted under the variable order (ties kept).
pub fn ordered_vars(l: &Literal) -> Vec<Variable> {
    let mut vs = l.args().to_vec();
    vs.sort();
    vs
}

pub fn pre_pad(l: &Literal, ctx: &SafetyContext) -> PaddedTuple {
    let sorted = ordered_vars(l);
    let pad = ctx.k.saturating_sub(sorted.len());
    let mut out = vec![Variable::MIN; pad];
    out.extend(sorted);
    PaddedTuple(out)
}

/// Strict lexicographic comparison of padded tuples.
pub fn lex_less(l1: &Literal, l2: &Literal, ctx: &SafetyContext) -> bool {
    pre_pad(l1, ctx) < pre_pad(l2, ctx)
}

fn skipped_in(l: &Literal, padded: &PaddedTuple) -> BTreeSet<Variable> {
    match (padded.first(), padded.last()) {
        (Some(lo), Some(hi)) if hi.0 > lo.0 + 1 => (lo.0 + 1..hi.0)
            .map(Variable)
            .filter(|&v| !l.contains(v))
            .collect(),
        _ => BTreeSet::new(),
    }
}

/// Variables strictly between the first and last element of the padded
/// tuple that do not occur in `l`.
pub fn skipped(l: &Literal, ctx: &SafetyContext) -> BTreeSet<Variable> {
    skipped_in(l, &pre_pad(l, ctx))
}

/// Whether the skip of `v` in `l1` is witnessed by a smaller body literal.
pub fn is_witnessed(r: &Rule, v: Variable, l1: &Literal, ctx: &SafetyContext) -> Result<bool> {
    if l1.arity() < 2 || !r.body().contains(l1) {
        return Err(Error::Precondition(format!(
            "`{l1}` is not a body literal of arity >= 2 in `{r}`"
        )));
    }
    if !skipped(l1, ctx).contains(&v) {
        return Err(Error::Precondition(format!("{v} is not skipped in `{l1}`")));
    }
    let bound = pre_pad(l1, ctx);
    Ok(r
        .body_ge2()
        .any(|l2| l2.contains(v) && pre_pad(l2, ctx) < bound))
}

/// An unwitnessed skip: `var` is skipped in `literal` and no smaller literal
/// contains it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UnsafeSkip {
    pub var: Variable,
    pub literal: Literal,
}

/// Every unwitnessed skip of a body-only variable, sorted by variable and
/// then literal.
pub fn unsafe_skips(r: &Rule, ctx: &SafetyContext) -> Result<Vec<UnsafeSkip>> {
    ctx.check_rule(r)?;
    let body_only = r.body_only_vars();
    let padded: Vec<(&Literal, PaddedTuple)> =
        r.body_ge2().map(|l| (l, pre_pad(l, ctx))).collect();
    let mut out = Vec::new();
    for (l1, p1) in &padded {
        for v in skipped_in(l1, p1) {
            if !body_only.contains(&v) {
                continue;
            }
            let witnessed = padded.iter().any(|(l2, p2)| p2 < p1 && l2.contains(v));
            if !witnessed {
                out.push(UnsafeSkip {
                    var: v,
                    literal: (*l1).clone(),
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn unsafe_vars(r: &Rule, ctx: &SafetyContext) -> Result<BTreeSet<Variable>> {
    Ok(unsafe_skips(r, ctx)?.into_iter().map(|s| s.var).collect())
}

/// True when no body-only variable has an unwitnessed skip. Short-circuits,
/// independently of [`unsafe_vars`].
pub fn is_safe(r: &Rule, ctx: &SafetyContext) -> Result<bool> {
    ctx.check_rule(r)?;
    let head = r.head_vars();
    let lits: Vec<&Literal> = r.body_ge2().collect();
    let padded: Vec<PaddedTuple> = lits.iter().map(|l| pre_pad(l, ctx)).collect();
    for (i, l1) in lits.iter().enumerate() {
        let window = &padded[i];
        let (Some(lo), Some(hi)) = (window.first(), window.last()) else {
            continue;
        };
        for y in lo.0 + 1..hi.0 {
            let v = Variable(y);
            if head.contains(&v) || l1.contains(v) {
                continue;
            }
            let witnessed = lits
                .iter()
                .zip(&padded)
                .any(|(l2, p2)| p2 < window && l2.contains(v));
            if !witnessed {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
