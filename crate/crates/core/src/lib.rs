//! Symmetry breaking for hypothesis spaces of constant-free definite rules.
//!
//! Two rules that differ only in the names of their body-only variables are
//! *body-variants*; deciding this is as hard as graph isomorphism. This crate
//! implements a cheap, sound filter instead: a rule is kept only when every
//! variable skipped by a body literal is *witnessed* by a smaller literal
//! (see [`safety`]). Every rule has a body-variant that passes the filter
//! ([`canonicalizer`]), so filtering never loses a rule up to renaming.
//!
//! Around that core the crate provides exact variant oracles
//! ([`variant_oracle`]), exhaustive space enumeration with pruning
//! statistics ([`enumerator`]), and an ASP encoding of the filter for
//! solver-based rule generators ([`asp_emitter`]).

pub mod asp_emitter;
pub mod canonicalizer;
pub mod enumerator;
pub mod error;
pub mod exec;
pub mod parser;
pub mod rule_model;
pub mod safety;
pub mod variant_oracle;

pub use error::{Error, Result};
pub use exec::Exec;
pub use parser::{parse_hypothesis, parse_rule, parse_rules, parse_signature, render_rule, Signature};
pub use rule_model::{
    apply_renaming, body_only_vars, normalize, validate, Hypothesis, Literal, PredicateSym,
    Renaming, Rule, Variable, Violation,
};
pub use safety::{is_safe, unsafe_vars, SafetyContext};
