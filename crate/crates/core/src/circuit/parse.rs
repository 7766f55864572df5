//! The line-oriented `.ncc` circuit format.
//!
//! ```text
//! # commutator
//! field 101
//! vars 2
//! g1 = x1
//! g2 = x2
//! g3 = mul g1 g2
//! g4 = mul g2 g1
//! g5 = const -1
//! g6 = mul g5 g4
//! g7 = add g3 g6
//! output g7
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Circuit, Gate, GateId};
use crate::field::{FieldError, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: g{label} is used before it is defined")]
    ForwardReference { line: usize, label: u64 },
    #[error("line {line}: unknown gate g{label}")]
    UnknownGate { line: usize, label: u64 },
    #[error("line {line}: variable x{var} outside 1..={n}")]
    VarOutOfRange { line: usize, var: u64, n: usize },
    #[error("line {line}: gate id g{label} is not larger than the previous id")]
    NonIncreasingId { line: usize, label: u64 },
    #[error("line {line}: invalid field: {error}")]
    InvalidField { line: usize, error: FieldError },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("missing `output` line")]
    MissingOutput,
}

impl ParseError {
    /// 1-based source line, when the error is tied to one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::ForwardReference { line, .. }
            | ParseError::UnknownGate { line, .. }
            | ParseError::VarOutOfRange { line, .. }
            | ParseError::NonIncreasingId { line, .. }
            | ParseError::InvalidField { line, .. } => Some(*line),
            _ => None,
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_label(tok: &str, prefix: char, line: usize) -> Result<u64, ParseError> {
    tok.strip_prefix(prefix)
        .and_then(|d| d.parse::<u64>().ok())
        .ok_or_else(|| syntax(line, format!("expected {prefix}<number>, found `{tok}`")))
}

/// Parses a circuit; the `field` header is required.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    parse_inner(text, None, false)
}

/// Parses a circuit, using `field` when the file has no `field` header.
pub fn parse_with_default_field(text: &str, field: PrimeField) -> Result<Circuit, ParseError> {
    parse_inner(text, Some(field), false)
}

/// Parses a circuit over `field`, ignoring any `field` header in the file.
pub fn parse_over(text: &str, field: PrimeField) -> Result<Circuit, ParseError> {
    parse_inner(text, Some(field), true)
}

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

fn parse_inner(
    text: &str,
    default_field: Option<PrimeField>,
    override_field: bool,
) -> Result<Circuit, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| Line {
            number: i + 1,
            tokens: raw.split('#').next().unwrap_or("").split_whitespace().collect(),
        })
        .filter(|l| !l.tokens.is_empty())
        .peekable();

    let mut field = default_field;
    if let Some(l) = lines.next_if(|l| l.tokens[0] == "field") {
        let [_, p] = l.tokens[..] else {
            return Err(syntax(l.number, "expected `field <p>`"));
        };
        let p: u64 = p
            .parse()
            .map_err(|_| syntax(l.number, format!("invalid modulus `{p}`")))?;
        let parsed =
            PrimeField::new(p).map_err(|error| ParseError::InvalidField { line: l.number, error })?;
        if !(override_field && field.is_some()) {
            field = Some(parsed);
        }
    }
    let field = field.ok_or(ParseError::MissingHeader("field"))?;

    let n = match lines.next() {
        Some(l) if l.tokens[0] == "vars" => {
            let [_, n] = l.tokens[..] else {
                return Err(syntax(l.number, "expected `vars <n>`"));
            };
            n.parse::<usize>()
                .map_err(|_| syntax(l.number, format!("invalid variable count `{n}`")))?
        }
        _ => return Err(ParseError::MissingHeader("vars")),
    };

    let body: Vec<Line> = lines.collect();
    // every label defined anywhere, to tell forward references from unknown ids
    let defined: HashSet<u64> = body
        .iter()
        .filter(|l| l.tokens.len() >= 2 && l.tokens[1] == "=")
        .filter_map(|l| l.tokens[0].strip_prefix('g')?.parse().ok())
        .collect();

    let mut index: HashMap<u64, GateId> = HashMap::new();
    let mut gates = Vec::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut output = None;

    let lookup = |index: &HashMap<u64, GateId>, tok: &str, line: usize| -> Result<GateId, ParseError> {
        let label = parse_label(tok, 'g', line)?;
        match index.get(&label) {
            Some(&id) => Ok(id),
            None if defined.contains(&label) => Err(ParseError::ForwardReference { line, label }),
            None => Err(ParseError::UnknownGate { line, label }),
        }
    };

    for l in &body {
        let line = l.number;
        if output.is_some() {
            return Err(syntax(line, "content after the `output` line"));
        }
        match l.tokens[..] {
            ["output", g] => {
                output = Some(lookup(&index, g, line)?);
            }
            [g, "=", ref rhs @ ..] => {
                let label = parse_label(g, 'g', line)?;
                if labels.last().is_some_and(|&prev| label <= prev) {
                    return Err(ParseError::NonIncreasingId { line, label });
                }
                let gate = match rhs {
                    [x] if x.starts_with('x') => {
                        let var = parse_label(x, 'x', line)?;
                        if var == 0 || var > n as u64 {
                            return Err(ParseError::VarOutOfRange { line, var, n });
                        }
                        Gate::Input(var as usize - 1)
                    }
                    ["const", c] => {
                        let c: BigInt = c
                            .parse()
                            .map_err(|_| syntax(line, format!("invalid constant `{c}`")))?;
                        let p = BigInt::from(field.modulus());
                        let r = ((c % &p) + &p) % &p;
                        Gate::Const(field.elem(r.to_u64().expect("reduced below p")))
                    }
                    [op @ ("add" | "mul"), a, b] => {
                        let a = lookup(&index, a, line)?;
                        let b = lookup(&index, b, line)?;
                        if *op == "add" {
                            Gate::Add(a, b)
                        } else {
                            Gate::Mul(a, b)
                        }
                    }
                    _ => return Err(syntax(line, format!("cannot parse gate `{}`", rhs.join(" ")))),
                };
                index.insert(label, gates.len());
                gates.push(gate);
                labels.push(label);
            }
            _ => return Err(syntax(line, format!("unexpected `{}`", l.tokens.join(" ")))),
        }
    }
    let output = output.ok_or(ParseError::MissingOutput)?;
    Ok(Circuit::from_parts(field, n, gates, labels, output))
}

/// Writes a circuit in `.ncc` form, keeping its gate labels.
pub fn serialize(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "field {}", c.field().modulus());
    let _ = writeln!(s, "vars {}", c.num_vars());
    for (i, g) in c.gates().iter().enumerate() {
        let label = c.label(i);
        let _ = match *g {
            Gate::Input(v) => writeln!(s, "g{label} = x{}", v + 1),
            Gate::Const(k) => writeln!(s, "g{label} = const {}", k.value()),
            Gate::Add(a, b) => writeln!(s, "g{label} = add g{} g{}", c.label(a), c.label(b)),
            Gate::Mul(a, b) => writeln!(s, "g{label} = mul g{} g{}", c.label(a), c.label(b)),
        };
    }
    let _ = writeln!(s, "output g{}", c.label(c.output()));
    s
}
