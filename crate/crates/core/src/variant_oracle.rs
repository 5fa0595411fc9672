//! Exact, exponential-time decision procedures for body-variance of rules
//! and hypotheses, plus the graph encoding that reduces graph isomorphism to
//! body-variance.
//!
//! These are test oracles. Every search is bounded by an [`OracleLimits`]
//! cap and refuses larger inputs instead of guessing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::rule_model::{Literal, PredicateSym, Renaming, Rule, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest number of body-only variables a rule may have.
    pub max_body_only_vars: usize,
    /// Largest node count for [`graphs_isomorphic`].
    pub max_graph_nodes: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_body_only_vars: 10,
            max_graph_nodes: 8,
        }
    }
}

/// Multiset of predicate symbols in the body.
fn predicate_profile(r: &Rule) -> BTreeMap<&PredicateSym, usize> {
    let mut m = BTreeMap::new();
    for l in r.body() {
        *m.entry(l.pred()).or_insert(0) += 1;
    }
    m
}

/// For each body-only variable, the sorted list of (predicate, position)
/// slots it occupies. Preserved by any renaming of body-only variables.
fn slot_signatures(r: &Rule, vars: &[Variable]) -> Vec<Vec<(String, usize, usize)>> {
    vars.iter()
        .map(|&v| {
            let mut sig: Vec<_> = r
                .body()
                .iter()
                .flat_map(|l| {
                    l.args()
                        .iter()
                        .enumerate()
                        .filter(move |(_, &a)| a == v)
                        .map(move |(i, _)| (l.name().to_string(), l.arity(), i))
                })
                .collect();
            sig.sort();
            sig
        })
        .collect()
}

/// True when a cheap invariant already rules out variance.
fn cheap_reject(r1: &Rule, r2: &Rule) -> bool {
    r1.head() != r2.head()
        || r1.body().len() != r2.body().len()
        || r1.body_only_vars().len() != r2.body_only_vars().len()
        || predicate_profile(r1) != predicate_profile(r2)
}

fn check_cap(r: &Rule, limits: &OracleLimits) -> Result<()> {
    let n = r.body_only_vars().len();
    if n > limits.max_body_only_vars {
        return Err(Error::TooLarge(format!(
            "{n} body-only variables exceed the cap of {}",
            limits.max_body_only_vars
        )));
    }
    Ok(())
}

fn renaming_from(src: &[Variable], img: &[Variable]) -> Renaming {
    Renaming::from_pairs(src.iter().copied().zip(img.iter().copied()))
        .expect("bijection between disjoint-or-equal variable lists")
}

/// Finds the lexicographically smallest bijection `s` from the body-only
/// variables of `r1` onto those of `r2` (head variables fixed) with
/// `r1 s = r2`, or `None` when the rules are not body-variants.
pub fn is_body_variant(r1: &Rule, r2: &Rule) -> Result<Option<Renaming>> {
    is_body_variant_with(r1, r2, &OracleLimits::default())
}

pub fn is_body_variant_with(
    r1: &Rule,
    r2: &Rule,
    limits: &OracleLimits,
) -> Result<Option<Renaming>> {
    if cheap_reject(r1, r2) {
        return Ok(None);
    }
    check_cap(r1, limits)?;
    let src: Vec<Variable> = r1.body_only_vars().into_iter().collect();
    let dst: Vec<Variable> = r2.body_only_vars().into_iter().collect();
    let sig1 = slot_signatures(r1, &src);
    let sig2 = slot_signatures(r2, &dst);
    {
        let mut a = sig1.clone();
        let mut b = sig2.clone();
        a.sort();
        b.sort();
        if a != b {
            return Ok(None);
        }
    }
    let position: BTreeMap<Variable, usize> =
        src.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // checks[i] = literals of r1 whose body-only variables are all among
    // src[..=i] with src[i] the last of them.
    let mut checks: Vec<Vec<&Literal>> = vec![Vec::new(); src.len()];
    for l in r1.body() {
        if let Some(last) = l.args().iter().filter_map(|v| position.get(v)).max() {
            checks[*last].push(l);
        }
    }
    let candidates: Vec<Vec<usize>> = sig1
        .iter()
        .map(|s| (0..dst.len()).filter(|&j| sig2[j] == *s).collect())
        .collect();

    struct Search<'a> {
        src: &'a [Variable],
        dst: &'a [Variable],
        position: &'a BTreeMap<Variable, usize>,
        checks: &'a [Vec<&'a Literal>],
        candidates: &'a [Vec<usize>],
        target: &'a BTreeSet<Literal>,
        image: Vec<usize>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn map(&self, v: Variable) -> Variable {
            match self.position.get(&v) {
                Some(&i) => self.dst[self.image[i]],
                None => v,
            }
        }

        fn go(&mut self, i: usize) -> bool {
            if i == self.src.len() {
                return true;
            }
            for ci in 0..self.candidates[i].len() {
                let j = self.candidates[i][ci];
                if self.used[j] {
                    continue;
                }
                self.image.push(j);
                self.used[j] = true;
                let ok = self.checks[i]
                    .iter()
                    .all(|l| self.target.contains(&l.map_vars(|v| self.map(v))));
                if ok && self.go(i + 1) {
                    return true;
                }
                self.used[j] = false;
                self.image.pop();
            }
            false
        }
    }

    let mut search = Search {
        src: &src,
        dst: &dst,
        position: &position,
        checks: &checks,
        candidates: &candidates,
        target: r2.body(),
        image: Vec::with_capacity(src.len()),
        used: vec![false; dst.len()],
    };
    // Literals without body-only variables must match as they are.
    let ground_ok = r1
        .body()
        .iter()
        .filter(|l| !l.args().iter().any(|v| position.contains_key(v)))
        .all(|l| r2.body().contains(l));
    if !ground_ok || !search.go(0) {
        return Ok(None);
    }
    let img: Vec<Variable> = search.image.iter().map(|&j| dst[j]).collect();
    Ok(Some(renaming_from(&src, &img)))
}

/// Reference search: every permutation in lexicographic order, no pruning.
/// Same contract and same answer as [`is_body_variant_with`].
pub fn is_body_variant_exhaustive(
    r1: &Rule,
    r2: &Rule,
    limits: &OracleLimits,
) -> Result<Option<Renaming>> {
    if r1.head() != r2.head() || r1.body().len() != r2.body().len() {
        return Ok(None);
    }
    let src: Vec<Variable> = r1.body_only_vars().into_iter().collect();
    let dst: Vec<Variable> = r2.body_only_vars().into_iter().collect();
    if src.len() != dst.len() {
        return Ok(None);
    }
    check_cap(r1, limits)?;
    for perm in dst.iter().copied().permutations(dst.len()) {
        let sigma = renaming_from(&src, &perm);
        if r1.map_vars(|v| sigma.apply(v)) == *r2 {
            return Ok(Some(sigma));
        }
    }
    Ok(None)
}

/// A rule pairing between two hypotheses: `(i, j, s)` says rule `i` of the
/// first maps onto rule `j` of the second under `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisWitness {
    pub pairs: Vec<(usize, usize, Renaming)>,
}

impl fmt::Display for HypothesisWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b, s)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}->{} {s}", a + 1, b + 1)?;
        }
        Ok(())
    }
}

pub fn is_hypothesis_variant(
    h1: &crate::rule_model::Hypothesis,
    h2: &crate::rule_model::Hypothesis,
) -> Result<Option<HypothesisWitness>> {
    is_hypothesis_variant_with(h1, h2, &OracleLimits::default())
}

pub fn is_hypothesis_variant_with(
    h1: &crate::rule_model::Hypothesis,
    h2: &crate::rule_model::Hypothesis,
    limits: &OracleLimits,
) -> Result<Option<HypothesisWitness>> {
    if h1.len() != h2.len() {
        return Ok(None);
    }
    let n = h1.len();
    let mut table: Vec<Vec<Option<Renaming>>> = Vec::with_capacity(n);
    for a in h1.rules() {
        let mut row = Vec::with_capacity(n);
        for b in h2.rules() {
            row.push(is_body_variant_with(a, b, limits)?);
        }
        table.push(row);
    }

    fn assign(i: usize, table: &[Vec<Option<Renaming>>], used: &mut [bool], out: &mut Vec<usize>) -> bool {
        if i == table.len() {
            return true;
        }
        for j in 0..table.len() {
            if used[j] || table[i][j].is_none() {
                continue;
            }
            used[j] = true;
            out.push(j);
            if assign(i + 1, table, used, out) {
                return true;
            }
            out.pop();
            used[j] = false;
        }
        false
    }

    let mut used = vec![false; n];
    let mut chosen = Vec::with_capacity(n);
    if !assign(0, &table, &mut used, &mut chosen) {
        return Ok(None);
    }
    let pairs = chosen
        .into_iter()
        .enumerate()
        .map(|(i, j)| (i, j, table[i][j].clone().expect("checked")))
        .collect();
    Ok(Some(HypothesisWitness { pairs }))
}

/// A finite undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    pub fn new(n: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Graph(format!("self-loop at {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge {u}-{v} outside 0..{n}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn isolated_nodes(&self) -> Vec<u32> {
        (0..self.n)
            .filter(|&x| !self.edges.iter().any(|&(u, v)| u == x || v == x))
            .collect()
    }

    /// Node count on the first non-blank line, then one `u v` pair per line.
    /// `%` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('%').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Graph("empty graph file".into()))?;
        let n: u32 = first
            .parse()
            .map_err(|_| Error::Graph(format!("line 1: bad node count `{first}`")))?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let [u, v] = parts[..] else {
                return Err(Error::Graph(format!("line {line}: expected `u v`")));
            };
            let parse = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| Error::Graph(format!("line {line}: bad node `{s}`")))
            };
            edges.push((parse(u)?, parse(v)?));
        }
        Graph::new(n, edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

/// A graph encoded as a rule. Isolated nodes have no variable in the rule,
/// so such encodings break the contiguity assumption; they are flagged
/// rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphRule {
    pub rule: Rule,
    pub isolated: Vec<u32>,
}

/// Encodes `g` as `h :- edge(X,Y), edge(Y,X), ...` with node `i` as variable
/// `i`. Both orientations of every edge are emitted so that a renaming maps
/// the body onto another encoding exactly when it is a graph isomorphism.
pub fn graph_to_rule(g: &Graph) -> Result<GraphRule> {
    if g.n == 0 {
        return Err(Error::Graph("graph has no nodes".into()));
    }
    let head = Literal::build("h", &[])?;
    let body = g
        .edges
        .iter()
        .flat_map(|&(u, v)| [[u, v], [v, u]])
        .map(|args| Literal::build("edge", &args))
        .collect::<Result<Vec<_>>>()?;
    Ok(GraphRule {
        rule: Rule::new(head, body),
        isolated: g.isolated_nodes(),
    })
}

/// Exhaustive permutation test.
pub fn graphs_isomorphic(g1: &Graph, g2: &Graph) -> Result<bool> {
    graphs_isomorphic_with(g1, g2, &OracleLimits::default())
}

pub fn graphs_isomorphic_with(g1: &Graph, g2: &Graph, limits: &OracleLimits) -> Result<bool> {
    if g1.n != g2.n || g1.edges.len() != g2.edges.len() {
        return Ok(false);
    }
    if g1.n as usize > limits.max_graph_nodes {
        return Err(Error::TooLarge(format!(
            "{} nodes exceed the cap of {}",
            g1.n, limits.max_graph_nodes
        )));
    }
    let n = g1.n as usize;
    Ok((0..g1.n).permutations(n).any(|p| {
        g1.edges.iter().all(|&(u, v)| {
            let (a, b) = (p[u as usize], p[v as usize]);
            g2.edges.contains(&(a.min(b), a.max(b)))
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_hypothesis, parse_rule};
    use crate::rule_model::apply_renaming;

    fn r(s: &str) -> Rule {
        parse_rule(s).unwrap()
    }

    #[test]
    fn zendo_twins_are_variants() {
        let r1 = r("zendo(A) :- piece(A,B), size(B,C), blue(B), small(C).");
        let r2 = r("zendo(A) :- piece(A,C), size(C,B), blue(C), small(B).");
        let w = is_body_variant(&r1, &r2).unwrap().unwrap();
        assert_eq!(w, Renaming::from_indices(&[(1, 2), (2, 1)]).unwrap());
        assert_eq!(apply_renaming(&r1, &w).unwrap(), r2);
        assert!(is_body_variant(&r1, &r1).unwrap().unwrap().is_identity());
    }

    #[test]
    fn two_safe_rules_can_be_variants() {
        let a = r("h(A,B) :- p(B,D), p(C,E), p(A,C), p(A,D).");
        let b = r("h(A,B) :- p(B,C), p(D,E), p(A,C), p(A,D).");
        let w = is_body_variant(&a, &b).unwrap().unwrap();
        assert_eq!(w, Renaming::from_indices(&[(2, 3), (3, 2)]).unwrap());
    }

    #[test]
    fn non_variants() {
        let a = r("h(A) :- p(A,B), p(B,C), p(C,A).");
        let b = r("h(A) :- p(A,B), p(B,C), p(A,C).");
        assert_eq!(is_body_variant(&a, &b).unwrap(), None);
        let c = r("h(B) :- p(B,A), p(A,B).");
        let d = r("h(A) :- p(B,A), p(A,B).");
        assert_eq!(is_body_variant(&c, &d).unwrap(), None);
    }

    #[test]
    fn head_variables_are_fixed() {
        // Swapping A and B would be a variant under unrestricted renaming.
        let a = r("h(A,B) :- p(A,C), q(B,C).");
        let b = r("h(A,B) :- p(B,C), q(A,C).");
        assert_eq!(is_body_variant(&a, &b).unwrap(), None);
    }

    #[test]
    fn cap_is_enforced() {
        let limits = OracleLimits {
            max_body_only_vars: 1,
            ..OracleLimits::default()
        };
        let a = r("h(A) :- p(A,B), p(B,C), p(C,A).");
        assert!(matches!(
            is_body_variant_with(&a, &a, &limits),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            is_body_variant_exhaustive(&a, &a, &limits),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn hypothesis_examples() {
        let h1 = parse_hypothesis(
            "zendo(A) :- piece(A,B), size(B,C), blue(B), small(C).\n\
             zendo(A) :- piece(A,C), size(C,B), red(C), large(B).",
        )
        .unwrap();
        let h2 = parse_hypothesis(
            "zendo(A) :- piece(A,C), size(C,B), blue(C), small(B).\n\
             zendo(A) :- piece(A,B), size(B,C), red(B), large(C).",
        )
        .unwrap();
        let w = is_hypothesis_variant(&h1, &h2).unwrap().unwrap();
        let swap = Renaming::from_indices(&[(1, 2), (2, 1)]).unwrap();
        assert_eq!(w.pairs, vec![(0, 0, swap.clone()), (1, 1, swap)]);
        let same = is_hypothesis_variant(&h1, &h1).unwrap().unwrap();
        assert!(same.pairs.iter().all(|(i, j, s)| i == j && s.is_identity()));
        let one = crate::rule_model::Hypothesis::new([h1.rules()[0].clone()]);
        assert_eq!(is_hypothesis_variant(&one, &h1).unwrap(), None);
    }

    #[test]
    fn graph_encoding() {
        let tri = Graph::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let g = graph_to_rule(&tri).unwrap();
        assert!(g.isolated.is_empty());
        assert_eq!(
            g.rule.to_string(),
            "h :- edge(A,B), edge(A,C), edge(B,A), edge(B,C), edge(C,A), edge(C,B)."
        );
        let one = graph_to_rule(&Graph::new(2, [(0, 1)]).unwrap()).unwrap();
        assert_eq!(one.rule.to_string(), "h :- edge(A,B), edge(B,A).");
        let lonely = graph_to_rule(&Graph::new(3, [(0, 1)]).unwrap()).unwrap();
        assert_eq!(lonely.isolated, vec![2]);
    }

    #[test]
    fn isomorphic_paths_encode_to_variants() {
        let p1 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let p2 = Graph::new(3, [(1, 0), (0, 2)]).unwrap();
        assert!(graphs_isomorphic(&p1, &p2).unwrap());
        let a = graph_to_rule(&p1).unwrap().rule;
        let b = graph_to_rule(&p2).unwrap().rule;
        assert!(is_body_variant(&a, &b).unwrap().is_some());
    }

    #[test]
    fn isomorphism_basics() {
        let tri = Graph::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(graphs_isomorphic(&tri, &tri).unwrap());
        assert!(!graphs_isomorphic(&tri, &path).unwrap());
        let big = Graph::new(9, [(0, 1)]).unwrap();
        assert!(graphs_isomorphic(&big, &big).is_err());
    }

    #[test]
    fn graph_file_format() {
        let g = Graph::parse("3\n0 1\n% comment\n1 2\n").unwrap();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(Graph::parse(&g.to_string()).unwrap(), g);
        assert!(Graph::parse("").is_err());
        assert!(Graph::parse("2\n0 0").is_err());
        assert!(Graph::parse("2\n0 5").is_err());
        assert!(Graph::parse("x").is_err());
        assert!(Graph::parse("2\n0").is_err());
    }
}
