//! Line-oriented problem files:
//!
//! ```text
//! dim 2
//! x0 3 0
//! hyperplane 1 0 0.5
//! point 0.5 1
//! ```
//!
//! `hyperplane` lines carry the `d` normal entries followed by the offset,
//! `point` lines carry `d` coordinates. Blank lines and `#` comments are
//! skipped.

use thiserror::Error;

use crate::geometry::AffineSet;
use crate::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub dim: usize,
    pub x0: Vector,
    pub sets: Vec<AffineSet>,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn reals(line: usize, fields: &[&str], expected: usize) -> Result<Vec<f64>, ParseError> {
    if fields.len() != expected {
        return Err(err(line, format!("expected {expected} numbers, found {}", fields.len())));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("invalid number `{f}`")))
        })
        .collect()
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut dim = None;
    let mut x0 = None;
    let mut sets = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let (keyword, rest) = (fields[0], &fields[1..]);
        match (keyword, dim, &x0) {
            ("dim", None, _) => {
                let [d] = rest else {
                    return Err(err(line, "`dim` takes exactly one integer"));
                };
                let d: usize = d.parse().map_err(|_| err(line, format!("invalid dimension `{d}`")))?;
                if d == 0 {
                    return Err(err(line, "dimension must be at least 1"));
                }
                dim = Some(d);
            }
            (_, None, _) => return Err(err(line, "expected `dim <d>` first")),
            ("x0", Some(d), None) => x0 = Some(Vector::from_vec(reals(line, rest, d)?)),
            (_, Some(_), None) => return Err(err(line, "expected `x0 <d reals>` after `dim`")),
            ("hyperplane", Some(d), Some(_)) => {
                let mut v = reals(line, rest, d + 1)?;
                let b = v.pop().expect("d + 1 entries");
                let set = AffineSet::hyperplane(Vector::from_vec(v), b).map_err(|e| err(line, e.to_string()))?;
                sets.push(set);
            }
            ("point", Some(d), Some(_)) => {
                let p = Vector::from_vec(reals(line, rest, d)?);
                sets.push(AffineSet::point(p).map_err(|e| err(line, e.to_string()))?);
            }
            (other, _, _) => return Err(err(line, format!("unknown keyword `{other}`"))),
        }
    }
    let (Some(dim), Some(x0)) = (dim, x0) else {
        return Err(err(last_line.max(1), "missing `dim` or `x0` line"));
    };
    if sets.is_empty() {
        return Err(err(last_line.max(1), "no sets given"));
    }
    Ok(Problem { dim, x0, sets })
}
