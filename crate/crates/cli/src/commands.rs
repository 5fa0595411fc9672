use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use symbreak::asp_emitter::{emit_encoding, EmitOptions};
use symbreak::canonicalizer::safe_variant;
use symbreak::enumerator::{enumerate_rules_with, space_stats, SpaceConfig, StatsOptions};
use symbreak::rule_model::{check_arities, is_well_formed, validate, Violation};
use symbreak::safety::unsafe_skips;
use symbreak::variant_oracle::{
    graph_to_rule, graphs_isomorphic, is_body_variant, is_hypothesis_variant, Graph,
};
use symbreak::{
    is_safe, parse_hypothesis, parse_rules, parse_signature, Error, Exec, Rule, SafetyContext,
    Signature, Variable,
};

use crate::report::{Format, Item, Outcome, Report};

#[derive(Debug, Parser)]
#[command(name = "symbreak", version, about = "Symmetry breaking for rule hypothesis spaces")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Worker threads for enumeration; 1 runs sequentially.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report SAFE or UNSAFE for every rule in a file.
    Check {
        rules: PathBuf,
        signature: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Print a safe body-variant of every rule in a file.
    Canon {
        rules: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Print every renaming step.
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether two rules (or hypotheses, or graphs) are variants.
    Variant {
        a: PathBuf,
        b: PathBuf,
        /// Files hold whole hypotheses.
        #[arg(long, conflicts_with = "graphs")]
        hypothesis: bool,
        /// Files hold graphs; compare their rule encodings.
        #[arg(long)]
        graphs: bool,
    },
    /// Enumerate a single-rule space and count its safe part.
    Enumerate(EnumerateArgs),
    /// Write the ASP symmetry-breaking encoding.
    EmitAsp {
        signature: PathBuf,
        #[arg(long)]
        max_vars: usize,
        #[arg(long)]
        k: Option<usize>,
        /// Append a generator for one rule with at most this many body literals.
        #[arg(long, value_name = "MAX_BODY")]
        standalone: Option<usize>,
        /// Leave head_var/body_var to the host program.
        #[arg(long)]
        no_body_var_defs: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the rule encoding of a graph.
    Graph2rule { graph: PathBuf },
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    pub signature: PathBuf,
    #[arg(long)]
    pub max_body: usize,
    #[arg(long)]
    pub max_vars: usize,
    #[arg(long)]
    pub k: Option<usize>,
    /// Dump every rule instead of only the safe ones.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Also partition the space into variant classes.
    #[arg(long)]
    pub classes: bool,
    /// Forbid literals that repeat a variable.
    #[arg(long)]
    pub no_repeated: bool,
    /// Admit variables that occur in a single argument position.
    #[arg(long)]
    pub allow_singletons: bool,
    /// Write the rules here, one per line.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn located(path: &Path, e: Error) -> anyhow::Error {
    match e {
        Error::Syntax { line, column, message } => {
            anyhow!("{}:{line}:{column}: {message}", path.display())
        }
        other => anyhow!("{}: {other}", path.display()),
    }
}

fn load_rules(path: &Path) -> Result<Vec<(usize, Rule)>> {
    let rules = parse_rules(&read(path)?).map_err(|e| located(path, e))?;
    if rules.is_empty() {
        bail!("{}: no rules", path.display());
    }
    for (line, r) in &rules {
        check_arities(r).map_err(|e| anyhow!("{}:{line}: {e}", path.display()))?;
        if !is_well_formed(r) {
            let v: Vec<String> = validate(r)?
                .into_iter()
                .filter(|v| !matches!(v, Violation::Singleton(_)))
                .map(|v| v.to_string())
                .collect();
            bail!("{}:{line}: invalid rule: {}", path.display(), v.join("; "));
        }
    }
    Ok(rules)
}

fn load_signature(path: &Path) -> Result<Signature> {
    parse_signature(&read(path)?).map_err(|e| located(path, e))
}

fn var_set(vars: impl IntoIterator<Item = Variable>) -> String {
    let v: Vec<String> = vars.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

/// `--k` if given, else the largest arity seen.
fn context(k: Option<usize>, max_arity: usize) -> Result<SafetyContext> {
    let k = k.unwrap_or(max_arity.max(1));
    if k < max_arity {
        return Err(Error::PaddingTooSmall { k, max_arity }.into());
    }
    Ok(SafetyContext::new(k)?)
}

pub fn run(cli: &Cli, command_line: &str) -> Result<Report> {
    let exec = match cli.jobs {
        Some(0) => bail!("--jobs must be positive"),
        Some(1) => Exec::Sequential,
        _ if Exec::available() => Exec::Parallel,
        _ => Exec::Sequential,
    };
    let go = || dispatch(&cli.command, command_line.to_string(), exec);
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.jobs.filter(|&n| n > 1) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        return pool.install(go);
    }
    go()
}

fn dispatch(cmd: &Command, command: String, exec: Exec) -> Result<Report> {
    match cmd {
        Command::Check { rules, signature, k } => check(command, rules, signature.as_deref(), *k),
        Command::Canon { rules, k, trace } => canon(command, rules, *k, *trace),
        Command::Variant { a, b, hypothesis, graphs } => {
            if *graphs {
                variant_graphs(command, a, b)
            } else if *hypothesis {
                variant_hypotheses(command, a, b)
            } else {
                variant_rules(command, a, b)
            }
        }
        Command::Enumerate(args) => enumerate(command, args, exec),
        Command::EmitAsp { signature, max_vars, k, standalone, no_body_var_defs, out } => {
            let opts = EmitOptions {
                k: *k,
                define_body_var: !no_body_var_defs,
                standalone_max_body: *standalone,
            };
            emit_asp(command, signature, *max_vars, opts, out.as_deref())
        }
        Command::Graph2rule { graph } => graph2rule(command, graph),
    }
}

fn check(command: String, path: &Path, sig: Option<&Path>, k: Option<usize>) -> Result<Report> {
    let rules = load_rules(path)?;
    let mut max_arity = rules.iter().map(|(_, r)| r.max_body_arity()).max().unwrap_or(1);
    if let Some(sig_path) = sig {
        let sig = load_signature(sig_path)?;
        for (line, r) in &rules {
            sig.admits(r).map_err(|e| anyhow!("{}:{line}: {e}", path.display()))?;
        }
        max_arity = max_arity.max(sig.max_body_arity());
    }
    let ctx = context(k, max_arity)?;
    let mut items = Vec::new();
    let mut human = String::new();
    let mut all_safe = true;
    for (line, r) in &rules {
        let skips = unsafe_skips(r, &ctx)?;
        let vars: BTreeSet<Variable> = skips.iter().map(|s| s.var).collect();
        let status = if vars.is_empty() { "SAFE" } else { "UNSAFE" };
        all_safe &= vars.is_empty();
        let detail: Vec<String> = skips.iter().map(|s| format!("{}@{}", s.var, s.literal)).collect();
        items.push(
            Item::new()
                .field("line", line)
                .field("rule", r)
                .field("status", status)
                .field("unsafe", var_set(vars.iter().copied()))
                .field("skips", detail.join(";")),
        );
        if vars.is_empty() {
            let _ = writeln!(human, "{}:{line}: SAFE {r}", path.display());
        } else {
            let _ = writeln!(human, "{}:{line}: UNSAFE {} {r}", path.display(), var_set(vars));
            for s in &skips {
                let _ = writeln!(
                    human,
                    "  {} is skipped by {} and no smaller literal contains it",
                    s.var, s.literal
                );
            }
        }
    }
    Ok(Report {
        command,
        items,
        outcome: if all_safe { Outcome::Success } else { Outcome::Negative },
        human,
    })
}

fn canon(command: String, path: &Path, k: Option<usize>, trace: bool) -> Result<Report> {
    let rules = load_rules(path)?;
    let max_arity = rules.iter().map(|(_, r)| r.max_body_arity()).max().unwrap_or(1);
    let ctx = context(k, max_arity)?;
    let mut items = Vec::new();
    let mut human = String::new();
    let mut all_ok = true;
    for (line, r) in &rules {
        let t = safe_variant(r, &ctx).map_err(|e| anyhow!("{}:{line}: {e}", path.display()))?;
        let verified = is_safe(&t.final_rule, &ctx)? && is_body_variant(r, &t.final_rule)?.is_some();
        all_ok &= verified;
        let steps: Vec<String> = t.steps.iter().map(|s| s.to_string()).collect();
        let mut item = Item::new()
            .field("line", line)
            .field("input", r)
            .field("output", &t.final_rule)
            .field("steps", t.steps.len())
            .field("renaming", &t.composed)
            .field("verified", verified);
        if trace {
            item = item.field("trace", steps.join(";"));
        }
        items.push(item);
        let _ = writeln!(human, "{}", t.final_rule);
        if trace {
            for (i, s) in steps.iter().enumerate() {
                let _ = writeln!(human, "  step {}: {s}", i + 1);
            }
            let _ = writeln!(human, "  composed: {}", t.composed);
        }
        let _ = writeln!(human, "  verified: {verified}");
    }
    Ok(Report {
        command,
        items,
        outcome: if all_ok { Outcome::Success } else { Outcome::Negative },
        human,
    })
}

fn single_rule(path: &Path) -> Result<Rule> {
    let mut rules = load_rules(path)?;
    if rules.len() != 1 {
        bail!("{}: expected one rule, found {}", path.display(), rules.len());
    }
    Ok(rules.remove(0).1)
}

fn verdict(command: String, item: Item, witness: Option<String>) -> Report {
    let (status, outcome) = match &witness {
        Some(_) => ("VARIANT", Outcome::Success),
        None => ("NOT-VARIANT", Outcome::Negative),
    };
    let human = match &witness {
        Some(w) => format!("VARIANT {w}\n"),
        None => "NOT-VARIANT\n".into(),
    };
    let mut item = item.field("status", status);
    if let Some(w) = witness {
        item = item.field("witness", w);
    }
    Report {
        command,
        items: vec![item],
        outcome,
        human,
    }
}

fn variant_rules(command: String, a: &Path, b: &Path) -> Result<Report> {
    let (r1, r2) = (single_rule(a)?, single_rule(b)?);
    let w = is_body_variant(&r1, &r2)?;
    let item = Item::new().field("a", &r1).field("b", &r2);
    Ok(verdict(command, item, w.map(|s| s.to_string())))
}

fn variant_hypotheses(command: String, a: &Path, b: &Path) -> Result<Report> {
    let h1 = parse_hypothesis(&read(a)?).map_err(|e| located(a, e))?;
    let h2 = parse_hypothesis(&read(b)?).map_err(|e| located(b, e))?;
    let w = is_hypothesis_variant(&h1, &h2)?;
    let item = Item::new().field("a_rules", h1.len()).field("b_rules", h2.len());
    Ok(verdict(command, item, w.map(|w| w.to_string())))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Graph::parse(&read(path)?).map_err(|e| located(path, e))
}

fn variant_graphs(command: String, a: &Path, b: &Path) -> Result<Report> {
    let (g1, g2) = (load_graph(a)?, load_graph(b)?);
    let (e1, e2) = (graph_to_rule(&g1)?, graph_to_rule(&g2)?);
    let w = is_body_variant(&e1.rule, &e2.rule)?;
    let iso = graphs_isomorphic(&g1, &g2)?;
    if iso != w.is_some() {
        bail!("internal disagreement between the graph and rule tests");
    }
    let item = Item::new().field("a", &e1.rule).field("b", &e2.rule).field("isomorphic", iso);
    Ok(verdict(command, item, w.map(|s| s.to_string())))
}

fn enumerate(command: String, args: &EnumerateArgs, exec: Exec) -> Result<Report> {
    let sig = load_signature(&args.signature)?;
    let mut cfg = SpaceConfig::new(sig, args.max_body, args.max_vars)?;
    if let Some(k) = args.k {
        cfg = cfg.with_k(k)?;
    }
    cfg.allow_repeated = !args.no_repeated;
    cfg.allow_singletons = args.allow_singletons;
    let opts = StatsOptions {
        with_classes: args.classes,
        exec,
        ..StatsOptions::default()
    };
    let stats = space_stats(&cfg, &opts)?;
    let mut item = Item::new();
    for line in stats.to_kv().lines() {
        let (k, v) = line.split_once('=').expect("kv line");
        item = item.field(k, v);
    }
    let mut human = format!("{stats}\n");
    let _ = writeln!(
        human,
        "time: generation {} ms, safety {} ms",
        stats.gen_time.as_millis(),
        stats.prune_time.as_millis()
    );
    if let Some(out) = &args.out {
        let mut rules = enumerate_rules_with(&cfg, exec)?;
        if !args.no_symmetry {
            let ctx = cfg.safety_context();
            let keep = exec.try_map(&rules, |r| is_safe(r, &ctx))?;
            let mut it = keep.into_iter();
            rules.retain(|_| it.next().unwrap_or(false));
        }
        let text: String = rules.iter().map(|r| format!("{r}\n")).collect();
        fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?;
        item = item.field("written", rules.len());
        let _ = writeln!(human, "wrote {} rules to {}", rules.len(), out.display());
    }
    Ok(Report {
        command,
        items: vec![item],
        outcome: Outcome::Success,
        human,
    })
}

fn emit_asp(
    command: String,
    sig_path: &Path,
    max_vars: usize,
    opts: EmitOptions,
    out: Option<&Path>,
) -> Result<Report> {
    let sig = load_signature(sig_path)?;
    let standalone = opts.standalone_max_body.is_some();
    let doc = emit_encoding(&sig, max_vars, opts)?;
    let text = doc.render();
    let item = Item::new()
        .field("k", doc.k())
        .field("max_vars", doc.max_vars())
        .field("facts", doc.fact_lines().len())
        .field("standalone", standalone);
    match out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            let item = item.field("out", path.display());
            Ok(Report {
                command,
                items: vec![item],
                outcome: Outcome::Success,
                human: format!("wrote {}\n", path.display()),
            })
        }
        // Without --out the document itself is the output, whatever the format.
        None => Ok(Report {
            command,
            items: vec![item],
            outcome: Outcome::Success,
            human: text,
        }),
    }
}

fn graph2rule(command: String, path: &Path) -> Result<Report> {
    let g = load_graph(path)?;
    let enc = graph_to_rule(&g)?;
    let isolated = enc.isolated.iter().map(|&v| Variable(v));
    let mut human = format!("{}\n", enc.rule);
    if !enc.isolated.is_empty() {
        let _ = writeln!(human, "% isolated nodes: {}", var_set(isolated.clone()));
    }
    Ok(Report {
        command,
        items: vec![Item::new()
            .field("nodes", g.n())
            .field("rule", &enc.rule)
            .field("isolated", var_set(isolated))],
        outcome: Outcome::Success,
        human,
    })
}
