//! Exhaustive single-rule hypothesis spaces.
//!
//! A space is every valid rule whose head is the signature's head predicate
//! over `A, B, ...`, whose body is a set of at most `max_body` literals over
//! the body predicates, and which uses at most `max_vars` variables. Rules
//! come out in canonical order (the derived `Ord` on [`Rule`]).

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::parser::Signature;
use crate::rule_model::{Literal, Rule, Variable};
use crate::safety::{is_safe, SafetyContext};
use crate::variant_oracle::{is_body_variant_with, OracleLimits};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceConfig {
    pub signature: Signature,
    pub max_body: usize,
    pub max_vars: usize,
    /// Padding width; defaults to the signature's largest body arity.
    pub k: Option<usize>,
    /// Whether a literal may repeat a variable, as in `p(A,A)`.
    pub allow_repeated: bool,
    /// Whether a variable may occupy a single argument position. Off by
    /// default; several textbook rules (`h(A,B) :- p(A,C), p(B,D), p(C,E).`)
    /// only exist in spaces that permit it.
    pub allow_singletons: bool,
}

impl SpaceConfig {
    pub fn new(signature: Signature, max_body: usize, max_vars: usize) -> Result<Self> {
        let cfg = SpaceConfig {
            signature,
            max_body,
            max_vars,
            k: None,
            allow_repeated: true,
            allow_singletons: false,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_k(mut self, k: usize) -> Result<Self> {
        self.k = Some(k);
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        if self.max_body == 0 || self.max_vars == 0 {
            return Err(Error::Config("max_body and max_vars must be positive".into()));
        }
        if self.max_vars < self.signature.head().arity() {
            return Err(Error::Config(format!(
                "max_vars {} is below the head arity {}",
                self.max_vars,
                self.signature.head().arity()
            )));
        }
        if self.max_vars > u32::MAX as usize / 2 {
            return Err(Error::Config("max_vars is too large".into()));
        }
        let max_arity = self.signature.max_body_arity();
        if let Some(k) = self.k {
            if k == 0 || k < max_arity {
                return Err(Error::PaddingTooSmall { k, max_arity });
            }
        }
        Ok(())
    }

    pub fn safety_context(&self) -> SafetyContext {
        let k = self.k.unwrap_or(self.signature.max_body_arity()).max(1);
        SafetyContext::new(k).expect("k is positive")
    }

    fn head_literal(&self) -> Literal {
        let head = self.signature.head();
        let args = (0..head.arity() as u32).map(Variable).collect();
        Literal::new(head.clone(), args).expect("arity matches")
    }

    /// Every body literal the space can use, sorted.
    fn literal_pool(&self) -> Vec<Literal> {
        let mut pool = Vec::new();
        let n = self.max_vars as u32;
        for pred in self.signature.body() {
            let tuples = (0..pred.arity())
                .map(|_| 0..n)
                .fold(vec![Vec::new()], |acc, range| {
                    acc.into_iter()
                        .flat_map(|prefix| {
                            range.clone().map(move |v| {
                                let mut t = prefix.clone();
                                t.push(Variable(v));
                                t
                            })
                        })
                        .collect()
                });
            for args in tuples {
                if !self.allow_repeated {
                    let mut s = args.clone();
                    s.sort();
                    s.dedup();
                    if s.len() != args.len() {
                        continue;
                    }
                }
                pool.push(Literal::new(pred.clone(), args).expect("arity matches"));
            }
        }
        pool.sort();
        pool
    }
}

struct Generator<'a> {
    pool: &'a [Literal],
    head: &'a Literal,
    max_body: usize,
    max_arity: usize,
    head_arity: usize,
    allow_singletons: bool,
    /// Total argument positions per variable, head included.
    total: Vec<u32>,
    /// Body argument positions per variable.
    in_body: Vec<u32>,
    chosen: Vec<usize>,
}

impl<'a> Generator<'a> {
    fn new(cfg: &SpaceConfig, pool: &'a [Literal], head: &'a Literal) -> Self {
        let mut total = vec![0; cfg.max_vars];
        for v in head.args() {
            total[v.0 as usize] += 1;
        }
        Generator {
            pool,
            head,
            max_body: cfg.max_body,
            max_arity: pool.iter().map(Literal::arity).max().unwrap_or(0),
            head_arity: head.arity(),
            allow_singletons: cfg.allow_singletons,
            total,
            in_body: vec![0; cfg.max_vars],
            chosen: Vec::new(),
        }
    }

    fn push(&mut self, i: usize) {
        for v in self.pool[i].args() {
            self.total[v.0 as usize] += 1;
            self.in_body[v.0 as usize] += 1;
        }
        self.chosen.push(i);
    }

    fn pop(&mut self) {
        let i = self.chosen.pop().expect("non-empty");
        for v in self.pool[i].args() {
            self.total[v.0 as usize] -= 1;
            self.in_body[v.0 as usize] -= 1;
        }
    }

    /// Argument slots still needed before the current body can be valid.
    fn slots_needed(&self) -> usize {
        let top = self.total.iter().rposition(|&c| c > 0).unwrap_or(0);
        let mut need = 0;
        for (v, &c) in self.total.iter().enumerate() {
            // a head variable missing from the body, or a singleton
            if (v < self.head_arity && self.in_body[v] == 0) || (c == 1 && !self.allow_singletons) {
                need += 1;
            } else if c == 0 && v < top {
                need += if self.allow_singletons { 1 } else { 2 };
            }
        }
        need
    }

    fn is_valid_now(&self) -> bool {
        if self.chosen.is_empty() {
            return false;
        }
        let mut seen_gap = false;
        for (v, &c) in self.total.iter().enumerate() {
            if v < self.head_arity && self.in_body[v] == 0 {
                return false;
            }
            match c {
                0 => seen_gap = true,
                1 if !self.allow_singletons => return false,
                _ if seen_gap => return false,
                _ => {}
            }
        }
        true
    }

    fn rule(&self) -> Rule {
        Rule::new(
            self.head.clone(),
            self.chosen.iter().map(|&i| self.pool[i].clone()),
        )
    }

    /// Pre-order walk over increasing index sequences starting at `first`.
    fn walk(&mut self, first: usize, emit: &mut dyn FnMut(Rule)) {
        self.push(first);
        self.descend(emit);
        self.pop();
    }

    fn descend(&mut self, emit: &mut dyn FnMut(Rule)) {
        if self.is_valid_now() {
            emit(self.rule());
        }
        let remaining = self.max_body - self.chosen.len();
        if remaining == 0 {
            return;
        }
        if self.slots_needed() > remaining * self.max_arity {
            return;
        }
        let start = self.chosen.last().map_or(0, |&i| i + 1);
        for j in start..self.pool.len() {
            self.push(j);
            self.descend(emit);
            self.pop();
        }
    }
}

fn generate(cfg: &SpaceConfig, exec: Exec, keep: &(dyn Fn(&Rule) -> bool + Sync)) -> Result<Vec<Rule>> {
    cfg.check()?;
    let pool = cfg.literal_pool();
    let head = cfg.head_literal();
    let firsts: Vec<usize> = (0..pool.len()).collect();
    // Partitioned by first body literal; partitions are disjoint and already
    // in canonical order, so concatenation preserves it.
    let parts = exec.map(&firsts, |&i| {
        let mut g = Generator::new(cfg, &pool, &head);
        let mut out = Vec::new();
        g.walk(i, &mut |r| {
            if keep(&r) {
                out.push(r)
            }
        });
        out
    });
    let rules: Vec<Rule> = parts.into_iter().flatten().collect();
    debug_assert!(rules.windows(2).all(|w| w[0] < w[1]));
    Ok(rules)
}

/// Every valid rule of the space, in canonical order.
pub fn enumerate_rules(cfg: &SpaceConfig) -> Result<Vec<Rule>> {
    enumerate_rules_with(cfg, Exec::default())
}

pub fn enumerate_rules_with(cfg: &SpaceConfig, exec: Exec) -> Result<Vec<Rule>> {
    generate(cfg, exec, &|_| true)
}

/// Every safe rule of the space. Safety is checked on complete rules only;
/// a later literal can witness an earlier skip, so partial rules are never
/// pruned.
pub fn enumerate_safe_rules(cfg: &SpaceConfig, exec: Exec) -> Result<Vec<Rule>> {
    let ctx = cfg.safety_context();
    generate(cfg, exec, &|r| is_safe(r, &ctx).unwrap_or(false))
}

/// Partition of a rule list into body-variant classes, each class given as
/// ascending indices into `rules`, classes ordered by first member.
pub fn variant_classes(rules: &[Rule], exec: Exec, limits: &OracleLimits) -> Result<Vec<Vec<usize>>> {
    let mut buckets: BTreeMap<InvariantKey, Vec<usize>> = BTreeMap::new();
    for (i, r) in rules.iter().enumerate() {
        buckets.entry(invariant_key(r)).or_default().push(i);
    }
    let buckets: Vec<Vec<usize>> = buckets.into_values().collect();
    let per_bucket = exec.try_map(&buckets, |members| {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &i in members {
            let mut placed = false;
            for class in classes.iter_mut() {
                if is_body_variant_with(&rules[class[0]], &rules[i], limits)?.is_some() {
                    class.push(i);
                    placed = true;
                    break;
                }
            }
            if !placed {
                classes.push(vec![i]);
            }
        }
        Ok::<_, Error>(classes)
    })?;
    let mut classes: Vec<Vec<usize>> = per_bucket.into_iter().flatten().collect();
    classes.sort_by_key(|c| c[0]);
    Ok(classes)
}

type InvariantKey = (Literal, Vec<(String, Vec<Option<u32>>, Vec<usize>)>, Vec<Vec<(String, usize)>>);

/// A renaming-invariant fingerprint: head, literal shapes with body-only
/// variables abstracted to their first position within the literal, and the
/// sorted slot lists of body-only variables. Equal for body-variants.
fn invariant_key(r: &Rule) -> InvariantKey {
    let body_only = r.body_only_vars();
    let mut shapes: Vec<_> = r
        .body()
        .iter()
        .map(|l| {
            let fixed: Vec<Option<u32>> = l
                .args()
                .iter()
                .map(|v| (!body_only.contains(v)).then_some(v.0))
                .collect();
            let pattern: Vec<usize> = l
                .args()
                .iter()
                .map(|v| l.args().iter().position(|w| w == v).unwrap())
                .collect();
            (l.name().to_string(), fixed, pattern)
        })
        .collect();
    shapes.sort();
    let mut slots: Vec<Vec<(String, usize)>> = body_only
        .iter()
        .map(|&v| {
            let mut s: Vec<_> = r
                .body()
                .iter()
                .flat_map(|l| {
                    l.args()
                        .iter()
                        .enumerate()
                        .filter(move |(_, &a)| a == v)
                        .map(move |(i, _)| (l.name().to_string(), i))
                })
                .collect();
            s.sort();
            s
        })
        .collect();
    slots.sort();
    (r.head().clone(), shapes, slots)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSummary {
    pub classes: usize,
    pub max_safe_per_class: usize,
    pub min_safe_per_class: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceStats {
    pub vars: usize,
    pub total: usize,
    pub safe: usize,
    pub classes: Option<ClassSummary>,
    pub gen_time: Duration,
    pub prune_time: Duration,
}

pub const CSV_HEADER: &str = "vars,total,safe,classes,max_safe_per_class,gen_ms,prune_ms";

impl SpaceStats {
    pub fn to_csv_row(&self) -> String {
        let (c, mx) = match &self.classes {
            Some(s) => (s.classes.to_string(), s.max_safe_per_class.to_string()),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.vars,
            self.total,
            self.safe,
            c,
            mx,
            fmt_ms(self.gen_time),
            fmt_ms(self.prune_time)
        )
    }

    /// `key=value` lines. Timings come last so they are easy to strip.
    pub fn to_kv(&self) -> String {
        let mut s = format!("vars={}\ntotal={}\nsafe={}\n", self.vars, self.total, self.safe);
        if let Some(c) = &self.classes {
            s += &format!(
                "classes={}\nmax_safe_per_class={}\nmin_safe_per_class={}\n",
                c.classes, c.max_safe_per_class, c.min_safe_per_class
            );
        }
        s += &format!(
            "gen_ms={}\nprune_ms={}\n",
            fmt_ms(self.gen_time),
            fmt_ms(self.prune_time)
        );
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad kv line `{line}`")))?;
            let k = k.trim();
            let v = if k.ends_with("_ms") {
                parse_ms(v.trim()).map(|d| d.as_nanos() as u64)
            } else {
                v.trim().parse().ok()
            }
            .ok_or_else(|| Error::Config(format!("bad number in `{line}`")))?;
            m.insert(k.to_string(), v);
        }
        let get = |k: &str| {
            m.get(k)
                .copied()
                .ok_or_else(|| Error::Config(format!("missing key `{k}`")))
        };
        let classes = if m.contains_key("classes") {
            Some(ClassSummary {
                classes: get("classes")? as usize,
                max_safe_per_class: get("max_safe_per_class")? as usize,
                min_safe_per_class: get("min_safe_per_class")? as usize,
            })
        } else {
            None
        };
        Ok(SpaceStats {
            vars: get("vars")? as usize,
            total: get("total")? as usize,
            safe: get("safe")? as usize,
            classes,
            gen_time: Duration::from_nanos(get("gen_ms")?),
            prune_time: Duration::from_nanos(get("prune_ms")?),
        })
    }
}

/// Milliseconds with six decimals: exact to the nanosecond.
fn fmt_ms(d: Duration) -> String {
    let n = d.as_nanos();
    format!("{}.{:06}", n / 1_000_000, n % 1_000_000)
}

fn parse_ms(s: &str) -> Option<Duration> {
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole: u64 = whole.parse().ok()?;
    let frac: u64 = if frac.is_empty() { 0 } else { format!("{frac:0<6}").parse().ok()? };
    Some(Duration::from_nanos(whole.checked_mul(1_000_000)?.checked_add(frac)?))
}

impl fmt::Display for SpaceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vars {}: {} rules, {} safe", self.vars, self.total, self.safe)?;
        if let Some(c) = &self.classes {
            write!(
                f,
                ", {} classes ({}..{} safe per class)",
                c.classes, c.min_safe_per_class, c.max_safe_per_class
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatsOptions {
    pub with_classes: bool,
    /// Largest space for which classes may be computed.
    pub max_class_space: usize,
    pub limits: OracleLimits,
    pub exec: Exec,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            with_classes: false,
            max_class_space: 2_000_000,
            limits: OracleLimits::default(),
            exec: Exec::default(),
        }
    }
}

/// Counts the space, its safe part and optionally its variant classes.
/// With classes, every class must contain a safe rule; a class without one
/// is reported as [`Error::Soundness`].
pub fn space_stats(cfg: &SpaceConfig, opts: &StatsOptions) -> Result<SpaceStats> {
    let t0 = Instant::now();
    let rules = enumerate_rules_with(cfg, opts.exec)?;
    let gen_time = t0.elapsed();
    let ctx = cfg.safety_context();
    let t1 = Instant::now();
    let safe_flags = opts.exec.try_map(&rules, |r| is_safe(r, &ctx))?;
    let prune_time = t1.elapsed();
    let safe = safe_flags.iter().filter(|&&s| s).count();
    let classes = if opts.with_classes {
        if rules.len() > opts.max_class_space {
            return Err(Error::TooLarge(format!(
                "{} rules exceed the class computation cap of {}",
                rules.len(),
                opts.max_class_space
            )));
        }
        let classes = variant_classes(&rules, opts.exec, &opts.limits)?;
        let mut max_safe = 0;
        let mut min_safe = usize::MAX;
        for class in &classes {
            let n = class.iter().filter(|&&i| safe_flags[i]).count();
            if n == 0 {
                return Err(Error::Soundness(format!(
                    "no safe rule in the class of `{}`",
                    rules[class[0]]
                )));
            }
            max_safe = max_safe.max(n);
            min_safe = min_safe.min(n);
        }
        Some(ClassSummary {
            classes: classes.len(),
            max_safe_per_class: max_safe,
            min_safe_per_class: if classes.is_empty() { 0 } else { min_safe },
        })
    } else {
        None
    };
    Ok(SpaceStats {
        vars: cfg.max_vars,
        total: rules.len(),
        safe,
        classes,
        gen_time,
        prune_time,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingRow {
    pub vars: usize,
    pub total: usize,
    pub safe: usize,
    /// Enumeration with the safety check applied to each complete rule.
    pub gen_time_with: Duration,
    /// Plain enumeration.
    pub gen_time_without: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Set when the wall-clock budget ran out before the last variable count.
    pub truncated: bool,
}

impl ScalingRow {
    pub fn safe_ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.safe as f64 / self.total as f64
        }
    }
}

/// Enumerates the base space at each variable count, with and without the
/// safety filter.
pub fn benchmark_scaling(
    base: &SpaceConfig,
    var_range: &[usize],
    budget: Option<Duration>,
    exec: Exec,
) -> Result<ScalingReport> {
    let start = Instant::now();
    let mut rows = Vec::new();
    for &vars in var_range {
        if budget.is_some_and(|b| start.elapsed() >= b) {
            return Ok(ScalingReport { rows, truncated: true });
        }
        let mut cfg = base.clone();
        cfg.max_vars = vars;
        cfg.check()?;
        let t0 = Instant::now();
        let all = enumerate_rules_with(&cfg, exec)?;
        let without = t0.elapsed();
        let t1 = Instant::now();
        let safe = enumerate_safe_rules(&cfg, exec)?;
        let with = t1.elapsed();
        rows.push(ScalingRow {
            vars,
            total: all.len(),
            safe: safe.len(),
            gen_time_with: with,
            gen_time_without: without,
        });
    }
    Ok(ScalingReport { rows, truncated: false })
}
