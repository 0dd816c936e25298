//! Plain-text instance format.
//!
//! ```text
//! # n: 3
//! # ground_energy: -2.5
//! 0 1 1.0
//! 1 2 -0.5
//! b 2 0.25
//! ```
//!
//! Each `i j J_ij` line sets one unordered pair (0-based, mirrored into both
//! triangles); missing pairs are zero. `b i b_i` lines set biases. Lines
//! starting with `#` are comments, except for the `n`, `offset` and
//! `ground_energy` metadata keys. CRLF line endings are accepted.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil::atomic_write;
use crate::ising::IsingProblem;
use crate::matrix::SymMatrix;

const RESERVED_KEYS: [&str; 3] = ["n", "offset", "ground_energy"];

struct Line<'a> {
    source: &'a str,
    number: usize,
}

impl Line<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line: self.number,
            message: message.into(),
        }
    }

    fn index(&self, token: &str) -> Result<usize> {
        token
            .parse()
            .map_err(|_| self.error(format!("invalid spin index {token:?}")))
    }

    fn value(&self, token: &str) -> Result<f64> {
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(format!("invalid value {token:?}"))),
        }
    }
}

/// Parses an instance; `source` names the input in error messages.
pub fn parse_instance<R: BufRead>(reader: R, source: &str) -> Result<IsingProblem> {
    let mut declared_n: Option<(usize, usize)> = None;
    let mut offset = 0.0;
    let mut ground_energy = None;
    let mut pairs: Vec<(usize, usize, f64, usize, bool)> = Vec::new();
    let mut biases: Vec<(usize, f64, usize)> = Vec::new();

    for (k, raw) in reader.lines().enumerate() {
        let line = Line {
            source,
            number: k + 1,
        };
        let raw = raw.map_err(|e| line.error(format!("read failed: {e}")))?;
        let text = raw.trim_end_matches('\r').trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "n" => declared_n = Some((line.index(value)?, line.number)),
                    "offset" => offset = line.value(value)?,
                    "ground_energy" => ground_energy = Some(line.value(value)?),
                    _ => {}
                }
            }
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(line.error(format!("expected 3 fields, found {}", tokens.len())));
        }
        if tokens[0] == "b" {
            biases.push((line.index(tokens[1])?, line.value(tokens[2])?, line.number));
            continue;
        }
        let i = line.index(tokens[0])?;
        let j = line.index(tokens[1])?;
        if i == j {
            return Err(line.error(format!("self-coupling {i} {j} is not allowed; use `b {i} <value>` for a bias")));
        }
        let value = line.value(tokens[2])?;
        pairs.push((i.min(j), i.max(j), value, line.number, i > j));
    }

    let max_index = pairs
        .iter()
        .map(|p| p.1)
        .chain(biases.iter().map(|b| b.0))
        .max();
    let n = match (declared_n, max_index) {
        (Some((n, number)), Some(m)) if m >= n => {
            return Err(Line { source, number }.error(format!("index {m} out of range for n = {n}")))
        }
        (Some((n, _)), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };

    pairs.sort_by_key(|p| (p.0, p.1, p.3));
    for w in pairs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if (a.0, a.1) == (b.0, b.1) {
            let line = Line {
                source,
                number: b.3,
            };
            return Err(if a.4 != b.4 && a.2 != b.2 {
                line.error(format!(
                    "asymmetric coupling for pair ({}, {}): {} vs {} on line {}",
                    a.0, a.1, b.2, a.2, a.3
                ))
            } else {
                line.error(format!("duplicate pair ({}, {}), first given on line {}", a.0, a.1, a.3))
            });
        }
    }
    let mut couplings = SymMatrix::zeros(n);
    for &(i, j, v, _, _) in &pairs {
        couplings.set_pair(i, j, v);
    }

    let mut bias = vec![0.0; n];
    let mut seen = vec![None; n];
    for &(i, v, number) in &biases {
        if let Some(first) = seen[i] {
            return Err(Line { source, number }.error(format!("duplicate bias for spin {i}, first given on line {first}")));
        }
        seen[i] = Some(number);
        bias[i] = v;
    }

    Ok(IsingProblem::new(couplings, bias)?
        .with_offset(offset)
        .with_ground_energy(ground_energy))
}

pub fn load_instance(path: &Path) -> Result<IsingProblem> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_instance(BufReader::new(file), &path.display().to_string())
}

/// Writes `p` in the text format. `meta` entries become `# key: value`
/// comments after the reserved keys; their keys must not collide with them.
pub fn write_instance(p: &IsingProblem, meta: &[(&str, String)], out: &mut dyn Write) -> Result<()> {
    let io = |e| Error::io("<instance>", e);
    writeln!(out, "# n: {}", p.n()).map_err(io)?;
    if p.offset() != 0.0 {
        writeln!(out, "# offset: {}", p.offset()).map_err(io)?;
    }
    if let Some(c0) = p.ground_energy() {
        writeln!(out, "# ground_energy: {c0}").map_err(io)?;
    }
    for (key, value) in meta {
        assert!(!RESERVED_KEYS.contains(key), "metadata key {key:?} is reserved");
        writeln!(out, "# {key}: {value}").map_err(io)?;
    }
    for (i, j, v) in p.couplings().upper_pairs() {
        if v != 0.0 {
            writeln!(out, "{i} {j} {v}").map_err(io)?;
        }
    }
    for (i, &b) in p.bias().iter().enumerate() {
        if b != 0.0 {
            writeln!(out, "b {i} {b}").map_err(io)?;
        }
    }
    Ok(())
}

/// Atomically writes `p` to `path`.
pub fn save_instance(path: &Path, p: &IsingProblem, meta: &[(&str, String)]) -> Result<()> {
    atomic_write(path, |w| write_instance(p, meta, w))
}
