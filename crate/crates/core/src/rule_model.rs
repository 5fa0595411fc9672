//! Variables, literals, rules, hypotheses and renamings.
//!
//! Rules are constant-free definite clauses over integer-indexed variables.
//! A rule is *valid* when it is head-connected, has no singleton variables,
//! its head variables are the smallest indices and its variable indices are
//! contiguous from zero. [`validate`] reports which of those fail and
//! [`normalize`] repairs the ones a renaming can repair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A logic variable. The variable order is numeric order on the index; index
/// 0 is the minimal variable used for prefix padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(pub u32);

impl Variable {
    pub const MIN: Variable = Variable(0);

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Variable {
    /// `A`..`Z` for 0..25, then `V26`, `V27`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 < 26 {
            write!(f, "{}", (b'A' + self.0 as u8) as char)
        } else {
            write!(f, "V{}", self.0)
        }
    }
}

/// A predicate symbol with its arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSym {
    name: String,
    arity: usize,
}

pub(crate) fn is_predicate_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl PredicateSym {
    pub fn new(name: impl Into<String>, arity: usize) -> Result<Self> {
        let name = name.into();
        if !is_predicate_name(&name) {
            return Err(Error::InvalidPredicateName(name));
        }
        Ok(PredicateSym { name, arity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for PredicateSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A constant-free atom `p(X1, ..., Xn)`.
///
/// Ordering is by predicate (name, then arity) and then by the argument tuple,
/// which is also the order bodies are rendered in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pred: PredicateSym,
    args: Vec<Variable>,
}

impl Literal {
    pub fn new(pred: PredicateSym, args: Vec<Variable>) -> Result<Self> {
        if args.len() != pred.arity {
            return Err(Error::ArityMismatch {
                predicate: pred.name.clone(),
                expected: pred.arity,
                found: args.len(),
            });
        }
        Ok(Literal { pred, args })
    }

    /// Shorthand for tests and examples: `Literal::build("p", &[0, 2])`.
    pub fn build(name: &str, args: &[u32]) -> Result<Self> {
        let pred = PredicateSym::new(name, args.len())?;
        Literal::new(pred, args.iter().copied().map(Variable).collect())
    }

    pub fn pred(&self) -> &PredicateSym {
        &self.pred
    }

    pub fn name(&self) -> &str {
        &self.pred.name
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn args(&self) -> &[Variable] {
        &self.args
    }

    /// The set of distinct variables of the literal.
    pub fn vars(&self) -> BTreeSet<Variable> {
        self.args.iter().copied().collect()
    }

    pub fn contains(&self, v: Variable) -> bool {
        self.args.contains(&v)
    }

    /// Applies a total variable map to every argument.
    pub(crate) fn map_vars(&self, f: impl Fn(Variable) -> Variable) -> Literal {
        Literal {
            pred: self.pred.clone(),
            args: self.args.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred.name)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, v) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// A definite clause `head :- body`. The body is a duplicate-free set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    head: Literal,
    body: BTreeSet<Literal>,
}

impl Rule {
    pub fn new(head: Literal, body: impl IntoIterator<Item = Literal>) -> Self {
        Rule {
            head,
            body: body.into_iter().collect(),
        }
    }

    pub fn head(&self) -> &Literal {
        &self.head
    }

    pub fn body(&self) -> &BTreeSet<Literal> {
        &self.body
    }

    /// Body literals of arity at least two, the only ones that take part in
    /// the literal order.
    pub fn body_ge2(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter(|l| l.arity() >= 2)
    }

    pub fn head_vars(&self) -> BTreeSet<Variable> {
        self.head.vars()
    }

    pub fn body_vars(&self) -> BTreeSet<Variable> {
        self.body.iter().flat_map(|l| l.args.iter().copied()).collect()
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut vs = self.head_vars();
        vs.extend(self.body_vars());
        vs
    }

    /// Variables occurring in the body but not in the head. These are the
    /// only variables a body-variant renaming may move.
    pub fn body_only_vars(&self) -> BTreeSet<Variable> {
        let head = self.head_vars();
        self.body_vars()
            .into_iter()
            .filter(|v| !head.contains(v))
            .collect()
    }

    /// Largest body arity, 0 for an empty body.
    pub fn max_body_arity(&self) -> usize {
        self.body.iter().map(Literal::arity).max().unwrap_or(0)
    }

    /// Number of argument positions each variable occupies, head included.
    pub fn occurrences(&self) -> BTreeMap<Variable, usize> {
        let mut counts = BTreeMap::new();
        for v in std::iter::once(&self.head)
            .chain(self.body.iter())
            .flat_map(|l| l.args.iter())
        {
            *counts.entry(*v).or_insert(0) += 1;
        }
        counts
    }

    pub(crate) fn map_vars(&self, f: impl Fn(Variable) -> Variable) -> Rule {
        Rule {
            head: self.head.map_vars(&f),
            body: self.body.iter().map(|l| l.map_vars(&f)).collect(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

/// A finite set of rules. Input order is kept so that witnesses can refer
/// to rules by position; duplicates are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Hypothesis {
    rules: Vec<Rule>,
}

impl Hypothesis {
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> Self {
        let mut seen = BTreeSet::new();
        let rules = rules
            .into_iter()
            .filter(|r| seen.insert(r.clone()))
            .collect();
        Hypothesis { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// An injective variable-to-variable map. Variables outside the domain map
/// to themselves; identity pairs are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Renaming {
    map: BTreeMap<Variable, Variable>,
}

impl Renaming {
    pub fn identity() -> Self {
        Renaming::default()
    }

    /// Builds a renaming from pairs, dropping identity pairs. Fails if two
    /// sources share a target or a source is listed twice.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Variable, Variable)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (from, to) in pairs {
            if map.contains_key(&from) || (from != to && targets.contains(&to)) {
                return Err(Error::NotInjective(format!("{from}->{to}")));
            }
            targets.insert(to);
            if from != to {
                map.insert(from, to);
            }
        }
        Ok(Renaming { map })
    }

    /// Convenience for index pairs.
    pub fn from_indices(pairs: &[(u32, u32)]) -> Result<Self> {
        Renaming::from_pairs(pairs.iter().map(|&(a, b)| (Variable(a), Variable(b))))
    }

    pub fn apply(&self, v: Variable) -> Variable {
        self.map.get(&v).copied().unwrap_or(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = Variable> + '_ {
        self.map.keys().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Variable, Variable)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// The inverse map. Only meaningful when the renaming permutes a set of
    /// variables; otherwise the result maps range back onto domain.
    pub fn inverse(&self) -> Renaming {
        Renaming {
            map: self.map.iter().map(|(&a, &b)| (b, a)).collect(),
        }
    }

    /// `self` followed by `then`, i.e. `x(self)(then)` in postfix notation.
    pub fn then(&self, then: &Renaming) -> Renaming {
        let mut keys: BTreeSet<Variable> = self.map.keys().copied().collect();
        keys.extend(then.map.keys().copied());
        let map = keys
            .into_iter()
            .map(|v| (v, then.apply(self.apply(v))))
            .filter(|(a, b)| a != b)
            .collect();
        Renaming { map }
    }

    /// The renaming with its domain cut down to `vars`.
    pub fn restrict(&self, vars: &BTreeSet<Variable>) -> Renaming {
        Renaming {
            map: self
                .map
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(&a, &b)| (a, b))
                .collect(),
        }
    }

    /// Checks that the renaming, extended by the identity, is injective on
    /// `vars`.
    pub fn is_injective_on(&self, vars: &BTreeSet<Variable>) -> bool {
        let mut seen = BTreeSet::new();
        vars.iter().all(|&v| seen.insert(self.apply(v)))
    }
}

impl fmt::Display for Renaming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("}")
    }
}

/// A violated structural assumption.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    EmptyBody,
    /// Head variables that do not occur in the body.
    NotHeadConnected(Vec<Variable>),
    /// A variable with exactly one argument position in the whole rule.
    Singleton(Variable),
    /// Head variables are not exactly `0..h`.
    HeadVarsNotSmallest,
    /// Indices missing below the largest variable.
    VariableGap(Vec<Variable>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |vs: &[Variable]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Violation::EmptyBody => f.write_str("empty body"),
            Violation::NotHeadConnected(vs) => {
                write!(f, "not head-connected: {} missing from body", list(vs))
            }
            Violation::Singleton(v) => write!(f, "singleton variable {v}"),
            Violation::HeadVarsNotSmallest => f.write_str("head variables are not the smallest"),
            Violation::VariableGap(vs) => write!(f, "variable gap: {} missing", list(vs)),
        }
    }
}

/// Fails if one predicate name is used with two arities in the rule.
pub fn check_arities(rule: &Rule) -> Result<()> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for l in std::iter::once(rule.head()).chain(rule.body()) {
        match seen.get(l.name()) {
            Some(&a) if a != l.arity() => {
                return Err(Error::ArityMismatch {
                    predicate: l.name().to_string(),
                    expected: a,
                    found: l.arity(),
                })
            }
            _ => {
                seen.insert(l.name(), l.arity());
            }
        }
    }
    Ok(())
}

/// Lists the structural assumptions `rule` violates; empty means valid.
/// Inconsistent predicate arities are reported as an error first.
pub fn validate(rule: &Rule) -> Result<Vec<Violation>> {
    check_arities(rule)?;
    let mut out = Vec::new();
    if rule.body.is_empty() {
        out.push(Violation::EmptyBody);
    }
    let body_vars = rule.body_vars();
    let head_vars = rule.head_vars();
    let disconnected: Vec<_> = head_vars.difference(&body_vars).copied().collect();
    if !disconnected.is_empty() {
        out.push(Violation::NotHeadConnected(disconnected));
    }
    for (v, n) in rule.occurrences() {
        if n == 1 {
            out.push(Violation::Singleton(v));
        }
    }
    let h = head_vars.len() as u32;
    if head_vars.iter().any(|v| v.0 >= h) {
        out.push(Violation::HeadVarsNotSmallest);
    }
    let vars = rule.vars();
    if let Some(max) = vars.last() {
        let missing: Vec<_> = (0..max.0)
            .map(Variable)
            .filter(|v| !vars.contains(v))
            .collect();
        if !missing.is_empty() {
            out.push(Violation::VariableGap(missing));
        }
    }
    Ok(out)
}

pub fn is_valid(rule: &Rule) -> bool {
    matches!(validate(rule), Ok(v) if v.is_empty())
}

/// Valid except possibly for singleton variables. Safety and
/// canonicalization only rely on these assumptions.
pub fn is_well_formed(rule: &Rule) -> bool {
    matches!(validate(rule), Ok(v) if v.iter().all(|x| matches!(x, Violation::Singleton(_))))
}

/// Renames `rule` so that head variables are `0..h` (in order of first
/// occurrence in the head) and body-only variables follow contiguously (in
/// order of first occurrence along the rendered body). Valid rules are
/// returned unchanged.
pub fn normalize(rule: &Rule) -> Result<Rule> {
    let violations = validate(rule)?;
    if violations.is_empty() {
        return Ok(rule.clone());
    }
    let unrepairable: Vec<String> = violations
        .iter()
        .filter(|v| {
            matches!(
                v,
                Violation::EmptyBody | Violation::NotHeadConnected(_) | Violation::Singleton(_)
            )
        })
        .map(|v| v.to_string())
        .collect();
    if !unrepairable.is_empty() {
        return Err(Error::NotNormalizable(unrepairable.join("; ")));
    }
    let mut order: Vec<Variable> = Vec::new();
    for v in rule
        .head
        .args
        .iter()
        .chain(rule.body.iter().flat_map(|l| l.args.iter()))
    {
        if !order.contains(v) {
            order.push(*v);
        }
    }
    let map: BTreeMap<Variable, Variable> = order
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, Variable(i as u32)))
        .collect();
    Ok(rule.map_vars(|v| map[&v]))
}

/// Applies `sigma` simultaneously to every variable occurrence. The body is
/// a set, so literals that become equal collapse.
pub fn apply_renaming(rule: &Rule, sigma: &Renaming) -> Result<Rule> {
    if !sigma.is_injective_on(&rule.vars()) {
        return Err(Error::NotInjective(format!("{sigma} on {rule}")));
    }
    Ok(rule.map_vars(|v| sigma.apply(v)))
}

pub fn body_only_vars(rule: &Rule) -> BTreeSet<Variable> {
    rule.body_only_vars()
}
