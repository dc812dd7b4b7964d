//! Line-based DPI text formats.
//!
//! Propositional instances use sections `[K]` (`id: formula`), `[B]`, `[P]`,
//! `[N]` (one formula per line) and `[PR]` (`id: value`). Abstract instances
//! use `[COMPONENTS]` (a count), `[CONFLICTS]` (space-separated component
//! numbers, one conflict per line) and `[PR]`. `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use mbd_core::dpi::{AxiomSet, Dpi, DpiError, FaultProbabilities};
use mbd_core::logic::{parse_formula, Formula};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Formula { line: usize, column: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] DpiError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// A parsed instance and its fault probabilities, if the file lists them.
#[derive(Clone, Debug)]
pub struct LoadedDpi {
    pub dpi: Dpi,
    pub pr: Option<FaultProbabilities>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    K,
    B,
    P,
    N,
    Pr,
    Components,
    Conflicts,
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(l, _)| l).trim()
}

fn formula_at(text: &str, line: usize, offset: usize) -> Result<Formula, FormatError> {
    parse_formula(text).map_err(|e| FormatError::Formula { line, column: offset + e.column, message: e.message })
}

fn split_entry(text: &str, line: usize) -> Result<(&str, &str), FormatError> {
    let (id, rest) = text.split_once(':').ok_or_else(|| syntax(line, "expected `id: value`"))?;
    let id = id.trim();
    if id.is_empty() {
        return Err(syntax(line, "empty id"));
    }
    Ok((id, rest))
}

pub fn parse_dpi(text: &str) -> Result<LoadedDpi, FormatError> {
    let mut section = Section::None;
    let mut axioms: Vec<(String, Formula)> = Vec::new();
    let (mut b, mut p, mut n) = (Vec::new(), Vec::new(), Vec::new());
    let mut probs: Vec<(usize, String, f64)> = Vec::new();
    let mut components: Option<usize> = None;
    let mut conflicts: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut seen_abstract = false;
    let mut seen_propositional = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[K]" => Section::K,
                "[B]" => Section::B,
                "[P]" => Section::P,
                "[N]" => Section::N,
                "[PR]" => Section::Pr,
                "[COMPONENTS]" => Section::Components,
                "[CONFLICTS]" => Section::Conflicts,
                other => return Err(syntax(line, format!("unknown section {other}"))),
            };
            match section {
                Section::K | Section::B | Section::P | Section::N => seen_propositional = true,
                Section::Components | Section::Conflicts => seen_abstract = true,
                _ => {}
            }
            if seen_abstract && seen_propositional {
                return Err(syntax(line, "abstract and propositional sections cannot be mixed"));
            }
            continue;
        }
        let offset = raw.len() - raw.trim_start().len();
        match section {
            Section::None => return Err(syntax(line, "content before the first section")),
            Section::K => {
                let (id, rest) = split_entry(content, line)?;
                if !is_identifier(id) {
                    return Err(syntax(line, format!("invalid axiom id `{id}`")));
                }
                let col = offset + content.len() - rest.len();
                axioms.push((id.to_string(), formula_at(rest, line, col)?));
            }
            Section::B | Section::P | Section::N => {
                let f = formula_at(content, line, offset)?;
                match section {
                    Section::B => b.push(f),
                    Section::P => p.push(f),
                    _ => n.push(f),
                }
            }
            Section::Pr => {
                let (id, rest) = split_entry(content, line)?;
                let value: f64 = rest.trim().parse().map_err(|_| syntax(line, format!("invalid probability `{}`", rest.trim())))?;
                if !(value > 0.0 && value < 1.0) {
                    return Err(FormatError::Invalid(DpiError::ProbabilityOutOfRange { id: id.to_string(), value }));
                }
                probs.push((line, id.to_string(), value));
            }
            Section::Components => {
                if components.is_some() {
                    return Err(syntax(line, "component count given twice"));
                }
                let count: usize = content.parse().map_err(|_| syntax(line, "expected a component count"))?;
                if count == 0 {
                    return Err(syntax(line, "component count must be positive"));
                }
                components = Some(count);
            }
            Section::Conflicts => {
                let ids = content
                    .split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| syntax(line, format!("invalid component `{t}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                conflicts.push((line, ids));
            }
        }
    }

    if seen_abstract {
        let count = components.ok_or_else(|| syntax(text.lines().count().max(1), "missing [COMPONENTS] section"))?;
        let mut family = Vec::with_capacity(conflicts.len());
        for (line, ids) in conflicts {
            if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > count) {
                return Err(syntax(line, format!("component {bad} outside 1..={count}")));
            }
            let set = AxiomSet::from_indices(ids.iter().map(|i| i - 1));
            if set.len() != ids.len() {
                return Err(syntax(line, "repeated component in conflict"));
            }
            family.push(set);
        }
        let dpi = Dpi::abstract_components(count, family)?;
        let pr = collect_probabilities(&dpi, probs)?;
        return Ok(LoadedDpi { dpi, pr });
    }

    if axioms.is_empty() {
        return Err(syntax(text.lines().count().max(1), "no axioms in [K]"));
    }
    let dpi = Dpi::propositional(axioms, b, p, n)?;
    let pr = collect_probabilities(&dpi, probs)?;
    Ok(LoadedDpi { dpi, pr })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn collect_probabilities(dpi: &Dpi, probs: Vec<(usize, String, f64)>) -> Result<Option<FaultProbabilities>, FormatError> {
    if probs.is_empty() {
        return Ok(None);
    }
    let mut by_id: HashMap<usize, f64> = HashMap::new();
    for (line, id, value) in probs {
        let axiom = dpi.axiom_id(&id).map_err(|_| syntax(line, format!("unknown id `{id}` in [PR]")))?;
        if by_id.insert(axiom.index(), value).is_some() {
            return Err(FormatError::Invalid(DpiError::DuplicateId(id)));
        }
    }
    let values = (0..dpi.num_axioms())
        .map(|i| by_id.get(&i).copied().ok_or_else(|| DpiError::MissingProbability(dpi.names()[i].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(FaultProbabilities::new(values)?))
}

pub fn load_dpi_file(path: &Path) -> Result<LoadedDpi, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_dpi(&text)
}

/// Renders an instance (with its measurements folded in) in the format
/// [`parse_dpi`] reads.
pub fn format_dpi(dpi: &Dpi, pr: Option<&FaultProbabilities>) -> String {
    let mut out = dpi.to_string();
    if let Some(pr) = pr {
        out.push_str("[PR]\n");
        for (name, v) in dpi.names().iter().zip(pr.values()) {
            let _ = writeln!(out, "{name}: {v}");
        }
    }
    out
}
