//! OPB input format and a sidecar weights format.
//!
//! Constraint lines are sequences of `<coefficient> <literal>` terms
//! followed by a relational operator, the degree, and a `;` terminator:
//!
//! ```text
//! * #variable= 2 #constraint= 1
//! +2 x1 +3 ~x2 >= 4 ;
//! ```
//!
//! Literals are `x<k>` or `~x<k>` with `k >= 1`; coefficients and degrees
//! are arbitrary-precision integers with optional sign; the operator is one
//! of `>=, <=, >, <, =`. Lines starting with `*` are comments, except
//! weight directives `* w <var> <pos> <neg>`. Weights also live in a
//! sidecar file of `w <var> <pos> <neg>` lines (with `#` comments); values
//! are decimals (`0.3`, `2.5e-1`) or exact fractions (`3/10`), parsed
//! exactly in both cases.

use std::fmt::Write as _;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use thiserror::Error;

use crate::formula::{Literal, PBConstraint, PBFormula, RelOp, Var, WeightFunction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpbError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: variable index must be positive")]
    BadVarIndex { line: usize, col: usize },
    #[error("line {line}: constraint not terminated by ';'")]
    MissingTerminator { line: usize },
    #[error("duplicate weight directive for x{var}")]
    DuplicateWeight { var: u32 },
    #[error("{line}:{col}: invalid weight value '{value}'")]
    BadWeight { line: usize, col: usize, value: String },
}

/// A parsed OPB instance: formula, weights (defaulting to 1), preserved
/// comment lines and non-fatal warnings (e.g. header/body count mismatch).
#[derive(Clone, Debug)]
pub struct ParsedInstance {
    pub formula: PBFormula,
    pub weights: WeightFunction,
    pub comments: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize<'a>(line: &'a str, line_no: usize, out: &mut Vec<Token<'a>>) {
    let mut col = 0;
    for raw in line.split_whitespace() {
        let start = line[col..].find(raw).map(|p| p + col).unwrap_or(col);
        col = start + raw.len();
        // A ';' glued to the previous token is split off.
        if raw.len() > 1 && raw.ends_with(';') {
            out.push(Token { text: &raw[..raw.len() - 1], line: line_no, col: start + 1 });
            out.push(Token { text: ";", line: line_no, col: start + raw.len() });
        } else {
            out.push(Token { text: raw, line: line_no, col: start + 1 });
        }
    }
}

fn parse_int(tok: &Token) -> Result<BigInt, OpbError> {
    tok.text.parse::<BigInt>().map_err(|_| OpbError::Syntax {
        line: tok.line,
        col: tok.col,
        msg: format!("expected an integer, found '{}'", tok.text),
    })
}

fn parse_literal(tok: &Token) -> Result<Literal, OpbError> {
    let (positive, rest) = match tok.text.strip_prefix('~') {
        Some(rest) => (false, rest),
        None => (true, tok.text),
    };
    let idx = rest
        .strip_prefix('x')
        .and_then(|d| d.parse::<u32>().ok())
        .ok_or_else(|| OpbError::Syntax {
            line: tok.line,
            col: tok.col,
            msg: format!("expected a literal like x3 or ~x3, found '{}'", tok.text),
        })?;
    if idx == 0 {
        return Err(OpbError::BadVarIndex { line: tok.line, col: tok.col });
    }
    Ok(Literal { var: Var(idx), positive })
}

fn parse_operator(tok: &Token) -> Option<RelOp> {
    match tok.text {
        ">=" => Some(RelOp::Ge),
        "<=" => Some(RelOp::Le),
        ">" => Some(RelOp::Gt),
        "<" => Some(RelOp::Lt),
        "=" => Some(RelOp::Eq),
        _ => None,
    }
}

fn parse_constraint(tokens: &[Token]) -> Result<PBConstraint, OpbError> {
    let mut terms = Vec::new();
    let mut i = 0;
    loop {
        let tok = tokens.get(i).ok_or_else(|| OpbError::Syntax {
            line: tokens.last().map_or(0, |t| t.line),
            col: tokens.last().map_or(0, |t| t.col),
            msg: "constraint ended before its operator".into(),
        })?;
        if let Some(op) = parse_operator(tok) {
            let degree_tok = tokens.get(i + 1).ok_or_else(|| OpbError::Syntax {
                line: tok.line,
                col: tok.col,
                msg: "missing degree after operator".into(),
            })?;
            let degree = parse_int(degree_tok)?;
            if let Some(extra) = tokens.get(i + 2) {
                return Err(OpbError::Syntax {
                    line: extra.line,
                    col: extra.col,
                    msg: format!("unexpected token '{}' after degree", extra.text),
                });
            }
            return Ok(PBConstraint::new(terms, op, degree));
        }
        let coeff = parse_int(tok)?;
        let lit_tok = tokens.get(i + 1).ok_or_else(|| OpbError::Syntax {
            line: tok.line,
            col: tok.col,
            msg: "coefficient without a literal".into(),
        })?;
        let lit = parse_literal(lit_tok)?;
        terms.push((coeff, lit));
        i += 2;
    }
}

/// Parses a weight value: decimal (optionally with exponent) or `p/q`.
pub fn parse_weight_value(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let numer: BigInt = p.parse().ok()?;
        let denom: BigInt = q.parse().ok()?;
        if denom.is_zero() {
            return None;
        }
        return Some(BigRational::new(numer, denom));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{}{}", int_part, frac_part);
    let numer: BigInt = if joined.is_empty() { BigInt::zero() } else { joined.parse().ok()? };
    let mut value = BigRational::new(numer * BigInt::from(sign), pow10(frac_part.len() as u32));
    if exp > 0 {
        value *= BigRational::from_integer(pow10(exp as u32));
    } else if exp < 0 {
        value /= BigRational::from_integer(pow10(exp.unsigned_abs()));
    }
    Some(value)
}

fn pow10(k: u32) -> BigInt {
    let mut v = BigInt::one();
    for _ in 0..k {
        v *= 10;
    }
    v
}

/// Renders a rational as a finite decimal when its reduced denominator is
/// of the form `2^a 5^b`, otherwise as `p/q`. Integers print bare.
pub fn format_weight(w: &BigRational) -> String {
    if w.denom().is_one() {
        return w.numer().to_string();
    }
    let mut denom = w.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return format!("{}/{}", w.numer(), w.denom());
    }
    // Scale to 10^k.
    let k = twos.max(fives);
    let mut scaled = w.numer().clone();
    for _ in 0..k - twos {
        scaled *= &two;
    }
    for _ in 0..k - fives {
        scaled *= &five;
    }
    let negative = scaled < BigInt::zero();
    let digits = scaled.magnitude().to_string();
    let k = k as usize;
    let (int_part, frac_part) = if digits.len() > k {
        (digits[..digits.len() - k].to_string(), digits[digits.len() - k..].to_string())
    } else {
        ("0".to_string(), format!("{:0>width$}", digits, width = k))
    };
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{}{}", sign, int_part)
    } else {
        format!("{}{}.{}", sign, int_part, frac_part)
    }
}

/// Parses OPB text. Weight directives embedded as `* w` comments are
/// applied; everything else after `*` is preserved verbatim.
pub fn parse_opb(text: &str) -> Result<ParsedInstance, OpbError> {
    let mut comments = Vec::new();
    let mut warnings = Vec::new();
    let mut declared_vars: Option<u32> = None;
    let mut declared_constraints: Option<usize> = None;
    let mut weight_directives: Vec<(u32, BigRational, BigRational)> = Vec::new();
    let mut constraints = Vec::new();
    let mut pending: Vec<Token> = Vec::new();
    let mut max_var = 0u32;
    let mut in_objective = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim_start();
        // Optimization objectives don't affect the model count.
        if !in_objective
            && pending.is_empty()
            && (trimmed.starts_with("min:") || trimmed.starts_with("max:"))
        {
            warnings.push(format!("line {}: objective ignored", line_no));
            in_objective = true;
        }
        if in_objective {
            if trimmed.contains(';') {
                in_objective = false;
            }
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('*') {
            let fields: Vec<&str> = comment.split_whitespace().collect();
            if fields.first() == Some(&"w") {
                let (var, pos, neg) = parse_weight_fields(&fields[1..], line_no)?;
                if weight_directives.iter().any(|(v, _, _)| *v == var) {
                    return Err(OpbError::DuplicateWeight { var });
                }
                weight_directives.push((var, pos, neg));
            } else if comment.contains("#variable=") {
                let grab = |key: &str| -> Option<u64> {
                    let at = comment.find(key)? + key.len();
                    comment[at..].split_whitespace().next()?.parse().ok()
                };
                declared_vars = grab("#variable=").map(|v| v as u32);
                declared_constraints = grab("#constraint=").map(|v| v as usize);
            } else {
                comments.push(comment.to_string());
            }
            continue;
        }
        let mut tokens = Vec::new();
        tokenize(line, line_no, &mut tokens);
        for tok in tokens {
            if tok.text == ";" {
                let c = parse_constraint(&pending)?;
                max_var = max_var.max(c.vars().map(|v| v.0).max().unwrap_or(0));
                constraints.push(c);
                pending.clear();
            } else {
                pending.push(tok);
            }
        }
    }
    if let Some(tok) = pending.first() {
        return Err(OpbError::MissingTerminator { line: tok.line });
    }

    for (var, _, _) in &weight_directives {
        max_var = max_var.max(*var);
    }
    let num_vars = declared_vars.unwrap_or(0).max(max_var);
    if let Some(n) = declared_vars {
        if n < max_var {
            warnings.push(format!(
                "header declares {} variables but x{} appears",
                n, max_var
            ));
        }
    }
    if let Some(m) = declared_constraints {
        if m != constraints.len() {
            warnings.push(format!(
                "header declares {} constraints but {} were parsed",
                m,
                constraints.len()
            ));
        }
    }

    let mut weights = WeightFunction::unweighted(num_vars);
    for (var, pos, neg) in weight_directives {
        weights.set(Var(var), pos, neg);
    }
    Ok(ParsedInstance {
        formula: PBFormula::with_constraints(num_vars, constraints),
        weights,
        comments,
        warnings,
    })
}

fn parse_weight_fields(
    fields: &[&str],
    line: usize,
) -> Result<(u32, BigRational, BigRational), OpbError> {
    if fields.len() != 3 {
        return Err(OpbError::Syntax {
            line,
            col: 1,
            msg: "weight directive needs '<var> <pos> <neg>'".into(),
        });
    }
    let var: u32 = fields[0].parse().map_err(|_| OpbError::Syntax {
        line,
        col: 1,
        msg: format!("invalid variable index '{}'", fields[0]),
    })?;
    if var == 0 {
        return Err(OpbError::BadVarIndex { line, col: 1 });
    }
    let pos = parse_weight_value(fields[1]).ok_or_else(|| OpbError::BadWeight {
        line,
        col: 1,
        value: fields[1].to_string(),
    })?;
    let neg = parse_weight_value(fields[2]).ok_or_else(|| OpbError::BadWeight {
        line,
        col: 1,
        value: fields[2].to_string(),
    })?;
    Ok((var, pos, neg))
}

/// Parses a sidecar weights file as `(var, pos, neg)` directives.
pub fn parse_weight_directives(
    text: &str,
    num_vars: u32,
) -> Result<Vec<(u32, BigRational, BigRational)>, OpbError> {
    let mut directives: Vec<(u32, BigRational, BigRational)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.first() != Some(&"w") {
            return Err(OpbError::Syntax {
                line: line_no,
                col: 1,
                msg: format!("expected 'w <var> <pos> <neg>', found '{}'", content),
            });
        }
        let (var, pos, neg) = parse_weight_fields(&fields[1..], line_no)?;
        if var > num_vars {
            return Err(OpbError::Syntax {
                line: line_no,
                col: 1,
                msg: format!("weight for x{} but the instance has {} variables", var, num_vars),
            });
        }
        if directives.iter().any(|(v, _, _)| *v == var) {
            return Err(OpbError::DuplicateWeight { var });
        }
        directives.push((var, pos, neg));
    }
    Ok(directives)
}

/// Parses a sidecar weights file into a complete weight function;
/// unmentioned variables default to 1/1.
pub fn parse_weights(text: &str, num_vars: u32) -> Result<WeightFunction, OpbError> {
    let mut weights = WeightFunction::unweighted(num_vars);
    for (var, pos, neg) in parse_weight_directives(text, num_vars)? {
        weights.set(Var(var), pos, neg);
    }
    Ok(weights)
}

/// Serializes an instance in canonical form: header, preserved comments,
/// non-default weight directives, constraints, then fixed literals as unit
/// constraints. Parsing the output reproduces the instance semantics, and
/// serializing again reproduces the bytes.
pub fn serialize_opb(instance: &ParsedInstance) -> String {
    let f = &instance.formula;
    let mut out = String::new();
    let total = f.constraints.len() + f.fixed.len();
    writeln!(out, "* #variable= {} #constraint= {}", f.num_vars, total).unwrap();
    for comment in &instance.comments {
        writeln!(out, "*{}", comment).unwrap();
    }
    for v in (1..=f.num_vars).map(Var) {
        let pos = instance.weights.pos_weight(v);
        let neg = instance.weights.neg_weight(v);
        if !pos.is_one() || !neg.is_one() {
            writeln!(out, "* w {} {} {}", v.0, format_weight(pos), format_weight(neg)).unwrap();
        }
    }
    for c in &f.constraints {
        write_constraint(&mut out, c);
    }
    for l in &f.fixed {
        writeln!(out, "1 {} >= 1 ;", l).unwrap();
    }
    out
}

fn write_constraint(out: &mut String, c: &PBConstraint) {
    for (a, l) in &c.terms {
        write!(out, "{} {} ", a, l).unwrap();
    }
    writeln!(out, "{} {} ;", c.op, c.degree).unwrap();
}
