use std::collections::HashMap;
use std::fmt::Write as _;

use super::{MilpModel, Sense, VarKind};
use crate::error::{Error, Result};

const MAX_NAME_LEN: usize = 255;
const TERMS_PER_LINE: usize = 8;

fn allowed(c: char) -> bool {
    c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c)
}

/// Rewrites a name so it is a legal LP identifier: illegal characters become
/// `_`, names that could read as numbers get an `n` prefix, and the result is
/// cut to 255 characters.
pub fn sanitize_name(name: &str) -> String {
    let mut out: String = name.chars().map(|c| if allowed(c) { c } else { '_' }).collect();
    let mut chars = out.chars();
    let first = chars.next();
    let second = chars.next();
    let numeric_like = match first {
        None => true,
        Some(c) if c.is_ascii_digit() || c == '.' => true,
        Some('e') | Some('E') => matches!(second, Some(c) if c.is_ascii_digit() || c == 'e' || c == 'E'),
        _ => false,
    };
    if numeric_like {
        out.insert(0, 'n');
    }
    out.truncate(MAX_NAME_LEN);
    out
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

fn write_terms(out: &mut String, terms: &[(String, f64)]) {
    for (k, (name, coef)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *coef < 0.0 { "-" } else { "+" };
        if k == 0 {
            if *coef < 0.0 {
                let _ = write!(out, " - {} {name}", fmt_num(-coef));
            } else {
                let _ = write!(out, " {} {name}", fmt_num(*coef));
            }
        } else {
            let _ = write!(out, " {sign} {} {name}", fmt_num(coef.abs()));
        }
    }
}

/// Renders the model in CPLEX LP format. Output is a pure function of the model.
pub fn export_lp(model: &MilpModel) -> Result<String> {
    let mut seen: HashMap<String, &str> = HashMap::new();
    let mut var_names = Vec::with_capacity(model.variables.len());
    for v in &model.variables {
        let s = sanitize_name(&v.name);
        if let Some(prev) = seen.insert(s.clone(), &v.name) {
            return Err(Error::NameCollision(format!("{prev} and {} both become {s}", v.name)));
        }
        var_names.push(s);
    }
    let mut row_seen: HashMap<String, &str> = HashMap::new();
    let mut row_names = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let s = sanitize_name(&c.name);
        if let Some(prev) = row_seen.insert(s.clone(), &c.name) {
            return Err(Error::NameCollision(format!("{prev} and {} both become {s}", c.name)));
        }
        row_names.push(s);
    }

    let mut out = String::new();
    out.push_str("\\ vrpdr routing model\n");
    out.push_str("Minimize\n obj:");
    let obj: Vec<(String, f64)> = model
        .objective
        .terms
        .iter()
        .map(|&(v, c)| (var_names[v.0].clone(), c))
        .collect();
    write_terms(&mut out, &obj);
    out.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(&row_names) {
        let _ = write!(out, " {name}:");
        let mut terms: Vec<(String, f64)> = c.terms.iter().map(|&(v, k)| (var_names[v.0].clone(), k)).collect();
        if terms.is_empty() {
            // An infeasible empty row still needs a variable to be legal LP text.
            terms.push((var_names.first().cloned().unwrap_or_else(|| "G".into()), 0.0));
        }
        write_terms(&mut out, &terms);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&var_names) {
        let (lo, hi) = (v.lower, v.upper);
        let default = match v.kind {
            VarKind::Binary => lo == 0.0 && hi == 1.0,
            VarKind::Continuous => lo == 0.0 && hi == f64::INFINITY,
        };
        if default {
            continue;
        }
        if lo == hi {
            let _ = writeln!(out, " {name} = {}", fmt_num(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else if hi == f64::INFINITY {
            let _ = writeln!(out, " {name} >= {}", fmt_num(lo));
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", fmt_num(lo), fmt_num(hi));
        }
    }
    out.push_str("Binaries\n");
    let bins: Vec<&String> = model
        .variables
        .iter()
        .zip(&var_names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    for chunk in bins.chunks(TERMS_PER_LINE) {
        out.push(' ');
        out.push_str(&chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedConstraint {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedLp {
    pub objective: Vec<(String, f64)>,
    pub constraints: Vec<ParsedConstraint>,
    pub bounds: Vec<String>,
    pub binaries: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Done,
}

fn section_header(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::Done),
        _ => None,
    }
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| Error::LpParse { line, msg: format!("expected a number, found {tok:?}") }),
    }
}

/// Parses a linear expression of whitespace-separated `[sign] coef name` items.
fn parse_terms(tokens: &[(usize, String)]) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for (line, tok) in tokens {
        match tok.as_str() {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(x) = tok.parse::<f64>() {
                    coef = Some(x);
                } else {
                    if tok.is_empty() {
                        return Err(Error::LpParse { line: *line, msg: "empty token".into() });
                    }
                    terms.push((tok.clone(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    Ok(terms)
}

/// Reads the subset of LP format that `export_lp` produces.
pub fn parse_lp(text: &str) -> Result<ParsedLp> {
    let mut section = Section::Preamble;
    let mut objective_tokens: Vec<(usize, String)> = Vec::new();
    let mut row_tokens: Vec<(usize, String)> = Vec::new();
    let mut parsed = ParsedLp::default();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_header(line) {
            section = s;
            continue;
        }
        match section {
            Section::Preamble | Section::Done => {
                return Err(Error::LpParse { line: line_no, msg: "text outside a section".into() })
            }
            Section::Objective => objective_tokens.extend(line.split_whitespace().map(|t| (line_no, t.to_string()))),
            Section::Rows => row_tokens.extend(line.split_whitespace().map(|t| (line_no, t.to_string()))),
            Section::Bounds => parsed.bounds.push(line.trim().to_string()),
            Section::Binaries => parsed.binaries.extend(line.split_whitespace().map(str::to_string)),
        }
    }
    if section != Section::Done {
        return Err(Error::LpParse { line: text.lines().count(), msg: "missing End".into() });
    }

    if let Some(first) = objective_tokens.first() {
        if first.1.ends_with(':') {
            objective_tokens.remove(0);
        }
    }
    parsed.objective = parse_terms(&objective_tokens)?;

    let mut i = 0;
    while i < row_tokens.len() {
        let (line, tok) = &row_tokens[i];
        let name = tok
            .strip_suffix(':')
            .ok_or_else(|| Error::LpParse { line: *line, msg: format!("expected a row name, found {tok:?}") })?
            .to_string();
        i += 1;
        let start = i;
        while i < row_tokens.len() && parse_sense(&row_tokens[i].1).is_none() {
            i += 1;
        }
        if i + 1 >= row_tokens.len() {
            return Err(Error::LpParse { line: *line, msg: format!("row {name} has no sense and right-hand side") });
        }
        let terms = parse_terms(&row_tokens[start..i])?;
        let sense = parse_sense(&row_tokens[i].1).unwrap();
        let rhs = parse_num(&row_tokens[i + 1].1, row_tokens[i + 1].0)?;
        i += 2;
        parsed.constraints.push(ParsedConstraint { name, terms, sense, rhs });
    }
    Ok(parsed)
}
