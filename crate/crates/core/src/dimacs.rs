//! DIMACS CNF with a few metadata comments ahead of the header:
//!
//! ```text
//! c k 3
//! c seed 1
//! c rng chacha8/rand-0.8/v1
//! c dist planted
//! c root 0110
//! c planted_energy 0
//! p cnf 4 2
//! 1 -2 3 0
//! -1 2 4 0
//! ```
//!
//! Unrecognised comment lines are kept verbatim and written back in order.

use thiserror::Error;

use crate::formula::{Formula, FormulaError, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("no `p cnf` header found")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: clause data before the header")]
    DataBeforeHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range 1..={n_vars}")]
    LiteralOutOfRange { line: usize, lit: i64, n_vars: usize },
    #[error("clause {clause} has {found} literals, expected {expected}")]
    ClauseWidth {
        clause: usize,
        expected: usize,
        found: usize,
    },
    #[error("clause {clause} repeats variable {var}")]
    DuplicateVar { clause: usize, var: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    UnterminatedClause,
    #[error("line {line}: bad `c {key}` metadata `{value}`")]
    BadMeta {
        line: usize,
        key: &'static str,
        value: String,
    },
    #[error("root has length {found}, formula has {expected} variables")]
    RootLength { expected: usize, found: usize },
    #[error("clause width unknown: no `c k` line and no clauses")]
    MissingWidth,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Metadata carried in the comment block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DimacsMeta {
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub distribution: Option<String>,
    pub root: Option<Vec<bool>>,
    pub planted_energy: Option<u64>,
    /// Other comment lines, without the leading `c `.
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsFile {
    pub formula: Formula,
    pub meta: DimacsMeta,
}

pub fn write_dimacs(f: &Formula, meta: &DimacsMeta) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "c k {}", f.k()).unwrap();
    if let Some(seed) = meta.seed {
        writeln!(out, "c seed {seed}").unwrap();
    }
    if let Some(rng) = &meta.rng {
        writeln!(out, "c rng {rng}").unwrap();
    }
    if let Some(d) = &meta.distribution {
        writeln!(out, "c dist {d}").unwrap();
    }
    if let Some(root) = &meta.root {
        let bits: String = root.iter().map(|&b| if b { '1' } else { '0' }).collect();
        writeln!(out, "c root {bits}").unwrap();
    }
    if let Some(e) = meta.planted_energy {
        writeln!(out, "c planted_energy {e}").unwrap();
    }
    for c in &meta.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            writeln!(out, "c {c}").unwrap();
        }
    }
    writeln!(out, "p cnf {} {}", f.n_vars(), f.n_clauses()).unwrap();
    for clause in f.clauses() {
        for lit in clause {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

fn parse_meta<T: std::str::FromStr>(
    line: usize,
    key: &'static str,
    value: &str,
) -> Result<T, DimacsError> {
    value.parse().map_err(|_| DimacsError::BadMeta {
        line,
        key,
        value: value.to_string(),
    })
}

pub fn read_dimacs(text: &str) -> Result<DimacsFile, DimacsError> {
    let mut meta = DimacsMeta::default();
    let mut k: Option<usize> = None;
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "c" || line.starts_with("c ") || line.starts_with("c\t") {
            let body = line[1..].trim_start();
            let (key, value) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
            let value = value.trim();
            match key {
                "k" => k = Some(parse_meta(line_no, "k", value)?),
                "seed" => meta.seed = Some(parse_meta(line_no, "seed", value)?),
                "rng" => meta.rng = Some(value.to_string()),
                "dist" => meta.distribution = Some(value.to_string()),
                "planted_energy" => {
                    meta.planted_energy = Some(parse_meta(line_no, "planted_energy", value)?)
                }
                "root" => {
                    let bits = value
                        .chars()
                        .map(|ch| match ch {
                            '1' => Ok(true),
                            '0' => Ok(false),
                            _ => Err(DimacsError::BadMeta {
                                line: line_no,
                                key: "root",
                                value: value.to_string(),
                            }),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    meta.root = Some(bits);
                }
                _ => meta.comments.push(body.to_string()),
            }
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", n, m] => n.parse().ok().zip(m.parse().ok()),
                _ => None,
            };
            if header.is_some() || parsed.is_none() {
                return Err(DimacsError::MalformedHeader {
                    line: line_no,
                    text: line.to_string(),
                });
            }
            header = parsed;
            continue;
        }
        let Some((n_vars, _)) = header else {
            return Err(DimacsError::DataBeforeHeader { line: line_no });
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| DimacsError::BadToken {
                line: line_no,
                token: tok.to_string(),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if lit.unsigned_abs() as usize > n_vars {
                return Err(DimacsError::LiteralOutOfRange {
                    line: line_no,
                    lit,
                    n_vars,
                });
            }
            current.push(Literal::new(lit.unsigned_abs() as usize - 1, lit > 0));
        }
    }

    let (n_vars, n_clauses) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    if clauses.len() != n_clauses {
        return Err(DimacsError::ClauseCount {
            declared: n_clauses,
            found: clauses.len(),
        });
    }
    let k = match k {
        Some(k) => k,
        None => clauses.first().map(Vec::len).ok_or(DimacsError::MissingWidth)?,
    };
    for (a, c) in clauses.iter().enumerate() {
        if c.len() != k {
            return Err(DimacsError::ClauseWidth {
                clause: a,
                expected: k,
                found: c.len(),
            });
        }
        for (p, lit) in c.iter().enumerate() {
            if c[..p].iter().any(|l| l.var() == lit.var()) {
                return Err(DimacsError::DuplicateVar {
                    clause: a,
                    var: lit.var() + 1,
                });
            }
        }
    }
    if let Some(root) = &meta.root {
        if root.len() != n_vars {
            return Err(DimacsError::RootLength {
                expected: n_vars,
                found: root.len(),
            });
        }
    }
    let formula = Formula::new(n_vars, k, clauses)?;
    Ok(DimacsFile { formula, meta })
}
