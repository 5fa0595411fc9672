//! ASP encoding of the safety constraint for a generator program in which
//! `hlit(Rule,Pred,Vars)` / `blit(Rule,Pred,Vars)` atoms describe rules and
//! variable tuples are written `(0,2)` with `0` for `A`, `1` for `B`, etc.
//!
//! The document consists of ground facts (`padded_vars`, `ordered_vars`,
//! `var_member`, `skipped`, `lower`) followed by three fixed statements that
//! derive `appears/2` and `witnessed/3` and reject rules with an unwitnessed
//! skip of a body-only variable. [`evaluate_encoding`] computes the same
//! consequences natively from the stored facts, so the fact tables can be
//! checked against the safety module without an ASP solver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use crate::error::{Error, Result};
use crate::parser::Signature;
use crate::rule_model::Rule;

pub type Tuple = Vec<u32>;

pub const APPEARS_RULE: &str = "appears(Rule,OrderedVars):- blit(Rule,_,Vars), padded_vars(Vars,PaddedVars), ordered_vars(PaddedVars,OrderedVars).";
pub const WITNESSED_RULE: &str = "witnessed(Rule,V,Vars1):- appears(Rule,Vars1), skipped(Vars1,V), lower(Vars2,Vars1), var_member(V,Vars2), appears(Rule,Vars2).";
pub const PRUNE_CONSTRAINT: &str = ":- body_var(Rule,V), appears(Rule,Vars), skipped(Vars,V), not witnessed(Rule,V,Vars).";
pub const HEAD_VAR_RULE: &str = "head_var(Rule,V):- hlit(Rule,_,Vars), var_member(V,Vars).";
pub const BODY_VAR_RULE: &str =
    "body_var(Rule,V):- blit(Rule,_,Vars), var_member(V,Vars), not head_var(Rule,V).";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    /// Padding width; defaults to the largest body arity.
    pub k: Option<usize>,
    /// Emit `head_var/2` and `body_var/2` definitions. Turn off when the
    /// host program already defines `body_var/2`.
    pub define_body_var: bool,
    /// Append a self-contained generator for one rule with at most this many
    /// body literals, so the document can be solved on its own.
    pub standalone_max_body: Option<usize>,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            k: None,
            define_body_var: true,
            standalone_max_body: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingDoc {
    signature: Signature,
    max_vars: usize,
    k: usize,
    options: EmitOptions,
    /// raw tuple (arity >= 2) -> prefix-padded tuple
    padded_vars: BTreeMap<Tuple, Tuple>,
    /// padded tuple -> sorted tuple
    ordered_vars: BTreeMap<Tuple, Tuple>,
    var_member: BTreeSet<(u32, Tuple)>,
    skipped: BTreeSet<(Tuple, u32)>,
    lower: BTreeSet<(Tuple, Tuple)>,
    /// `var_member` indexed by tuple.
    members: BTreeMap<Tuple, Vec<u32>>,
}

fn tuple_text(t: &[u32]) -> String {
    match t {
        [] => "()".to_string(),
        [x] => format!("({x},)"),
        _ => format!(
            "({})",
            t.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        ),
    }
}

/// All tuples of the given arity over `0..n`, in lexicographic order.
fn tuples(arity: usize, n: u32) -> Vec<Tuple> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Builds the encoding for rules over variables `0..max_vars`.
pub fn emit_encoding(sig: &Signature, max_vars: usize, options: EmitOptions) -> Result<EncodingDoc> {
    if max_vars < 1 {
        return Err(Error::Config("max_vars must be at least 1".into()));
    }
    let max_arity = sig.max_body_arity();
    let k = options.k.unwrap_or(max_arity).max(1);
    if k < max_arity {
        return Err(Error::PaddingTooSmall { k, max_arity });
    }
    if let Some(0) = options.standalone_max_body {
        return Err(Error::Config("standalone max_body must be positive".into()));
    }
    let n = max_vars as u32;
    let mut arities: BTreeSet<usize> = sig.body().iter().map(|p| p.arity()).collect();
    let body_arities = arities.clone();
    arities.insert(sig.head().arity());

    let mut padded_vars = BTreeMap::new();
    let mut ordered_vars = BTreeMap::new();
    let mut var_member = BTreeSet::new();
    for &a in &arities {
        for t in tuples(a, n) {
            for &v in &t {
                var_member.insert((v, t.clone()));
            }
            if a < 2 || !body_arities.contains(&a) {
                continue;
            }
            let mut padded = vec![0; k.saturating_sub(a)];
            padded.extend(&t);
            let mut sorted = padded.clone();
            sorted.sort_unstable();
            padded_vars.insert(t, padded.clone());
            ordered_vars.insert(padded, sorted);
        }
    }
    let sorted_tuples: BTreeSet<Tuple> = ordered_vars.values().cloned().collect();
    let mut skipped = BTreeSet::new();
    for t in &sorted_tuples {
        for &v in t {
            var_member.insert((v, t.clone()));
        }
        let (lo, hi) = (t[0], t[t.len() - 1]);
        for y in lo + 1..hi {
            if !t.contains(&y) {
                skipped.insert((t.clone(), y));
            }
        }
    }
    let mut lower = BTreeSet::new();
    for a in &sorted_tuples {
        for b in sorted_tuples.range::<Tuple, _>((
            std::ops::Bound::Excluded(a.clone()),
            std::ops::Bound::Unbounded,
        )) {
            lower.insert((a.clone(), b.clone()));
        }
    }
    let mut members: BTreeMap<Tuple, Vec<u32>> = BTreeMap::new();
    for (v, t) in &var_member {
        members.entry(t.clone()).or_default().push(*v);
    }
    Ok(EncodingDoc {
        members,
        signature: sig.clone(),
        max_vars,
        k,
        options,
        padded_vars,
        ordered_vars,
        var_member,
        skipped,
        lower,
    })
}

impl EncodingDoc {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn max_vars(&self) -> usize {
        self.max_vars
    }

    pub fn padded_vars(&self) -> &BTreeMap<Tuple, Tuple> {
        &self.padded_vars
    }

    pub fn ordered_vars(&self) -> &BTreeMap<Tuple, Tuple> {
        &self.ordered_vars
    }

    pub fn skipped(&self) -> &BTreeSet<(Tuple, u32)> {
        &self.skipped
    }

    pub fn lower(&self) -> &BTreeSet<(Tuple, Tuple)> {
        &self.lower
    }

    pub fn var_member(&self) -> &BTreeSet<(u32, Tuple)> {
        &self.var_member
    }

    /// Ground facts, one per line, grouped by predicate and sorted.
    pub fn fact_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (raw, padded) in &self.padded_vars {
            out.push(format!("padded_vars({},{}).", tuple_text(raw), tuple_text(padded)));
        }
        for (padded, sorted) in &self.ordered_vars {
            out.push(format!("ordered_vars({},{}).", tuple_text(padded), tuple_text(sorted)));
        }
        for (v, t) in &self.var_member {
            out.push(format!("var_member({v},{}).", tuple_text(t)));
        }
        for (t, v) in &self.skipped {
            out.push(format!("skipped({},{v}).", tuple_text(t)));
        }
        for (a, b) in &self.lower {
            out.push(format!("lower({},{}).", tuple_text(a), tuple_text(b)));
        }
        out
    }

    pub fn rule_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.options.define_body_var {
            out.push(HEAD_VAR_RULE.to_string());
            out.push(BODY_VAR_RULE.to_string());
        }
        out.push(APPEARS_RULE.to_string());
        out.push(WITNESSED_RULE.to_string());
        out.push(PRUNE_CONSTRAINT.to_string());
        out
    }

    /// A one-rule generator over the signature, in the host's choice-rule
    /// style, restricted to valid rules (head-connected, no singletons,
    /// contiguous variables, fixed head `h(0,..,a-1)`).
    fn skeleton_lines(&self, max_body: usize) -> Vec<String> {
        let n = self.max_vars as u32;
        let head = self.signature.head();
        let mut out = vec![
            "rule(0).".to_string(),
            format!("var(0..{}).", n - 1),
            format!("hpred({},{}).", head.name(), head.arity()),
        ];
        for p in self.signature.body() {
            out.push(format!("bpred({},{}).", p.name(), p.arity()));
        }
        let arities: BTreeSet<usize> = self.signature.body().iter().map(|p| p.arity()).collect();
        for &a in &arities {
            for t in tuples(a, n) {
                out.push(format!("vars({},{a}).", tuple_text(&t)));
            }
        }
        let mut all_arities = arities.clone();
        all_arities.insert(head.arity());
        for &a in &all_arities {
            for t in tuples(a, n) {
                for (i, v) in t.iter().enumerate() {
                    out.push(format!("var_at({},{i},{v}).", tuple_text(&t)));
                }
            }
        }
        let head_vars: Vec<u32> = (0..head.arity() as u32).collect();
        out.push(format!("hlit(0,{},{}).", head.name(), tuple_text(&head_vars)));
        out.push("{blit(Rule,Pred,Vars)}:- rule(Rule), vars(Vars,Arity), bpred(Pred,Arity).".into());
        out.push(format!(
            ":- rule(Rule), #count{{Pred,Vars: blit(Rule,Pred,Vars)}} > {max_body}."
        ));
        out.push(":- rule(Rule), not blit(Rule,_,_).".into());
        out.push("in_body(Rule,V):- blit(Rule,_,Vars), var_member(V,Vars).".into());
        out.push(":- hlit(Rule,_,Vars), var_member(V,Vars), not in_body(Rule,V).".into());
        out.push(
            ":- rule(Rule), var(V), #count{b,Pred,Vars,I: blit(Rule,Pred,Vars), var_at(Vars,I,V); \
             h,Pred,Vars,I: hlit(Rule,Pred,Vars), var_at(Vars,I,V)} = 1."
                .into(),
        );
        out.push(":- in_body(Rule,V), V > 0, not in_body(Rule,V-1).".into());
        out.push("#show blit/3.".into());
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let body: Vec<String> = self.signature.body().iter().map(|p| p.to_string()).collect();
        let _ = writeln!(s, "% symmetry-breaking encoding (symbreak {})", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "% head {} body {}", self.signature.head(), body.join(" "));
        let _ = writeln!(s, "% max_vars {} k {}", self.max_vars, self.k);
        for l in self.fact_lines() {
            s.push_str(&l);
            s.push('\n');
        }
        for l in self.rule_lines() {
            s.push_str(&l);
            s.push('\n');
        }
        if let Some(mb) = self.options.standalone_max_body {
            let _ = writeln!(s, "% generator (max_body {mb})");
            for l in self.skeleton_lines(mb) {
                s.push_str(&l);
                s.push('\n');
            }
        }
        s
    }
}

fn rule_tuples(rule: &Rule) -> (Tuple, Vec<Tuple>) {
    let head = rule.head().args().iter().map(|v| v.0).collect();
    let body = rule
        .body()
        .iter()
        .map(|l| l.args().iter().map(|v| v.0).collect())
        .collect();
    (head, body)
}

/// Whether the document's constraint eliminates `rule`, computed bottom-up
/// from the stored fact tables: `head_var`/`body_var` from `var_member`,
/// then `appears`, then `witnessed`, then the constraint body.
pub fn evaluate_encoding(rule: &Rule, doc: &EncodingDoc) -> Result<bool> {
    doc.signature.admits(rule).map_err(|e| Error::OutOfBounds(e.to_string()))?;
    if rule.vars().iter().any(|v| v.0 as usize >= doc.max_vars) {
        return Err(Error::OutOfBounds(format!(
            "`{rule}` uses a variable beyond max_vars {}",
            doc.max_vars
        )));
    }
    let (head, body) = rule_tuples(rule);
    let members = |t: &Tuple| -> Vec<u32> { doc.members.get(t).cloned().unwrap_or_default() };
    let head_var: BTreeSet<u32> = members(&head).into_iter().collect();
    let body_var: BTreeSet<u32> = body
        .iter()
        .flat_map(members)
        .filter(|v| !head_var.contains(v))
        .collect();
    let appears: BTreeSet<&Tuple> = body
        .iter()
        .filter_map(|t| doc.padded_vars.get(t))
        .filter_map(|p| doc.ordered_vars.get(p))
        .collect();
    let witnessed = |v: u32, t1: &Tuple| {
        appears.iter().any(|t2| {
            doc.lower.contains(&((*t2).clone(), t1.clone()))
                && doc.var_member.contains(&(v, (*t2).clone()))
        })
    };
    Ok(appears.iter().any(|t| {
        body_var.iter().any(|&v| {
            doc.skipped.contains(&((*t).clone(), v)) && !witnessed(v, t)
        })
    }))
}

/// How to invoke an external ASP solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCommand {
    pub program: String,
    pub args: Vec<String>,
}

/// Environment variable naming the solver command, e.g. `clingo` or
/// `python3 -m clingo`.
pub const SOLVER_ENV: &str = "SYMBREAK_CLINGO";

impl SolverCommand {
    pub fn parse(cmd: &str) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(SolverCommand {
            program,
            args: parts.collect(),
        })
    }

    fn works(&self) -> bool {
        Command::new(&self.program)
            .args(&self.args)
            .arg("--version")
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    }

    /// The override from [`SOLVER_ENV`] if set, else `clingo`, else
    /// `python3 -m clingo`; `None` when none of them runs.
    pub fn locate() -> Option<Self> {
        if let Ok(cmd) = std::env::var(SOLVER_ENV) {
            return SolverCommand::parse(&cmd).filter(SolverCommand::works);
        }
        ["clingo", "python3 -m clingo"]
            .into_iter()
            .filter_map(SolverCommand::parse)
            .find(SolverCommand::works)
    }

    /// Runs the solver on `path` enumerating all models and returns the
    /// model count.
    pub fn count_models(&self, path: &Path) -> Result<u64> {
        let out = Command::new(&self.program)
            .args(&self.args)
            .arg(path)
            .arg("--models=0")
            .arg("--quiet=2")
            .output()
            .map_err(|e| Error::Config(format!("cannot run solver: {e}")))?;
        // clingo exit codes: 10 SAT, 20 UNSAT, 30 SAT and exhausted; the
        // Python module's entry point exits 0 instead.
        let code = out.status.code().unwrap_or(-1);
        if ![0, 10, 20, 30].contains(&code) {
            return Err(Error::Config(format!(
                "solver failed with status {code}: {}",
                String::from_utf8_lossy(&out.stderr)
            )));
        }
        let stdout = String::from_utf8_lossy(&out.stdout);
        stdout
            .lines()
            .find_map(|l| {
                let rest = l.strip_prefix("Models")?;
                let n = rest.trim_start().strip_prefix(':')?.trim();
                n.trim_end_matches('+').parse().ok()
            })
            .ok_or_else(|| Error::Config("no model count in solver output".into()))
    }
}
