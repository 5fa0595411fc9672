//! Turns any valid rule into a body-variant whose body-only variables are
//! all safe.
//!
//! Each step takes the smallest unsafe variable `x`, the smallest literal
//! (under the padded-tuple order) that skips it, and the smallest variable
//! `y > x` of that literal. The step renaming sends `y` to `x`, parks `x` on
//! a fresh variable one past the largest index, then shifts everything above
//! `y` down by one so the indices stay contiguous. The net effect is that `x`
//! becomes the largest variable and the smallest unsafe variable strictly
//! increases.

use std::fmt;

use crate::error::{Error, Result};
use crate::rule_model::{apply_renaming, is_well_formed, Literal, Renaming, Rule, Variable};
use crate::safety::{pre_pad, skipped, unsafe_vars, SafetyContext};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonStep {
    pub unsafe_var: Variable,
    pub pivot: Literal,
    pub renaming: Renaming,
}

impl fmt::Display for CanonStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.unsafe_var, self.pivot, self.renaming)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonTrace {
    pub steps: Vec<CanonStep>,
    pub final_rule: Rule,
    /// Left-to-right composition of every step renaming.
    pub composed: Renaming,
}

impl fmt::Display for CanonTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {}: {s}", i + 1)?;
        }
        writeln!(f, "composed: {}", self.composed)?;
        write!(f, "final: {}", self.final_rule)
    }
}

/// The step renaming for unsafe variable `x`, pivot variable `y > x`, and a
/// rule whose variables are `0..m`.
pub(crate) fn step_renaming(x: Variable, y: Variable, m: u32) -> Renaming {
    debug_assert!(x < y && y.0 < m);
    let swap = Renaming::from_pairs([(y, x), (x, Variable(m))]).expect("distinct");
    let shift = Renaming::from_pairs((y.0 + 1..=m).map(|j| (Variable(j), Variable(j - 1))))
        .expect("shift is injective");
    let vars = (0..m).map(Variable).collect();
    swap.then(&shift).restrict(&vars)
}

fn pivot_literal<'a>(rule: &'a Rule, x: Variable, ctx: &SafetyContext) -> Option<&'a Literal> {
    // Ties on the padded tuple fall back to body order, i.e. (name, args).
    let mut best: Option<(&Literal, _)> = None;
    for l in rule.body_ge2() {
        if !skipped(l, ctx).contains(&x) {
            continue;
        }
        let p = pre_pad(l, ctx);
        if best.as_ref().is_none_or(|(_, bp)| p < *bp) {
            best = Some((l, p));
        }
    }
    best.map(|(l, _)| l)
}

/// Runs the step loop until no body-only variable is unsafe. Singleton
/// variables are tolerated; the other structural assumptions are required.
pub fn safe_variant(rule: &Rule, ctx: &SafetyContext) -> Result<CanonTrace> {
    crate::rule_model::check_arities(rule)?;
    if !is_well_formed(rule) {
        return Err(Error::Precondition(format!("`{rule}` is not a well-formed rule")));
    }
    ctx.check_rule(rule)?;
    let m = rule.vars().len() as u32;
    let mut current = rule.clone();
    let mut steps = Vec::new();
    let mut composed = Renaming::identity();
    let mut last: Option<Variable> = None;
    loop {
        let unsafe_now = unsafe_vars(&current, ctx)?;
        let Some(&x) = unsafe_now.first() else {
            break;
        };
        if last.is_some_and(|prev| x <= prev) {
            return Err(Error::NoProgress(format!(
                "smallest unsafe variable went from {} to {x} in `{current}`",
                last.unwrap()
            )));
        }
        if steps.len() >= m as usize {
            return Err(Error::NoProgress(format!("step cap {m} reached on `{rule}`")));
        }
        let pivot = pivot_literal(&current, x, ctx)
            .ok_or_else(|| Error::NoProgress(format!("no literal skips {x} in `{current}`")))?
            .clone();
        let y = pivot
            .args()
            .iter()
            .copied()
            .filter(|&v| v > x)
            .min()
            .ok_or_else(|| Error::NoProgress(format!("`{pivot}` has no variable above {x}")))?;
        let sigma = step_renaming(x, y, m);
        current = apply_renaming(&current, &sigma)?;
        composed = composed.then(&sigma);
        steps.push(CanonStep {
            unsafe_var: x,
            pivot,
            renaming: sigma,
        });
        last = Some(x);
    }
    Ok(CanonTrace {
        steps,
        final_rule: current,
        composed,
    })
}
