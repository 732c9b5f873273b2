//! SDPA sparse format (`.dat-s`).
//!
//! The file describes the pair
//!
//! ```text
//! min cᵀy  s.t.  Σ y_i F_i − F_0 ⪰ 0
//! max ⟨F_0, Y⟩  s.t.  ⟨F_i, Y⟩ = c_i,  Y ⪰ 0
//! ```
//!
//! and is read into the standard form of [`ConicProblem`] with `X = Y`,
//! `C = −F_0`, `A_i = F_i` and `b = c`. Since this flips the sign of the
//! objective the problem carries `report_sign = −1`, so reported objective
//! values are in the SDPA convention (SDPLIB optimal values can be compared
//! directly).
//!
//! Layout: optional comment lines starting with `"` or `*`, then `m`, the
//! number of blocks, the block sizes (negative means a diagonal block of
//! nonnegative scalars), the `m` values of `c`, and entry lines
//! `matno blkno i j value` with one-based indices, `matno = 0` for `F_0`.
//! Braces, commas and parentheses in the header are ignored, as is text
//! after the numbers on the `m` and block-count lines.
//!
//! Extension directives such as `*EQUALS*` are not supported and are
//! rejected with a parse error.

use std::fmt::Write as _;
use std::path::Path;

use cliquesdp_core::{ConeSpec, ConicProblem, DataEntry};

use crate::Error;

pub fn read_sdpa(path: impl AsRef<Path>) -> Result<ConicProblem, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_sdpa(&text)
}

/// Lines with their one-based numbers, after dropping blank lines and
/// comments and stripping header punctuation.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    /// Last line number seen, for end-of-file errors.
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<Option<(usize, &'a str)>, Error> {
        for (k, raw) in self.inner.by_ref() {
            self.last = k + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if is_directive(line) {
                return Err(Error::parse(k + 1, format!("unsupported SDPA directive `{}`", first_token(line))));
            }
            if line.starts_with('"') || line.starts_with('*') {
                continue;
            }
            return Ok(Some((k + 1, line)));
        }
        Ok(None)
    }
}

fn first_token(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or("")
}

/// `*NAME*` style extension lines.
fn is_directive(line: &str) -> bool {
    let t = first_token(line);
    t.len() > 2 && t.starts_with('*') && t.ends_with('*') && t[1..t.len() - 1].chars().all(|c| c.is_ascii_alphabetic() || c == '_')
}

/// Numeric tokens of a header line, stopping at trailing text such as
/// `=mdim`.
fn header_numbers(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
        .filter(|t| !t.is_empty())
        .take_while(|t| t.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '+' | '-' | '.')))
}

fn parse_int(tok: &str, line: usize, what: &str) -> Result<i64, Error> {
    tok.parse::<i64>().map_err(|_| Error::parse(line, format!("expected integer {what}, found `{tok}`")))
}

fn parse_real(tok: &str, line: usize) -> Result<f64, Error> {
    let v = match tok.parse::<f64>() {
        Ok(v) => v,
        // Fortran-style exponents appear in some older files
        Err(_) => tok.replace(['D', 'd'], "e").parse::<f64>().map_err(|_| Error::parse(line, format!("expected number, found `{tok}`")))?,
    };
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

/// Read `count` numbers spread over one or more header lines.
fn header_list<'a>(lines: &mut Lines<'a>, count: usize, what: &str) -> Result<Vec<(usize, &'a str)>, Error> {
    let mut out = Vec::new();
    while out.len() < count {
        let Some((ln, line)) = lines.next_line()? else {
            return Err(Error::parse(lines.last.max(1), format!("unexpected end of file while reading {what}")));
        };
        let before = out.len();
        for tok in header_numbers(line) {
            if out.len() == count {
                return Err(Error::parse(ln, format!("too many values in {what}")));
            }
            out.push((ln, tok));
        }
        if out.len() == before {
            return Err(Error::parse(ln, format!("expected {what}")));
        }
    }
    Ok(out)
}

fn header_scalar(lines: &mut Lines<'_>, what: &str) -> Result<(usize, i64), Error> {
    let Some((ln, line)) = lines.next_line()? else {
        return Err(Error::parse(lines.last.max(1), format!("unexpected end of file while reading {what}")));
    };
    let tok = header_numbers(line).next().ok_or_else(|| Error::parse(ln, format!("expected {what}")))?;
    Ok((ln, parse_int(tok, ln, what)?))
}

pub fn parse_sdpa(text: &str) -> Result<ConicProblem, Error> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };

    let (ln, m) = header_scalar(&mut lines, "number of constraints")?;
    if m < 1 {
        return Err(Error::parse(ln, "number of constraints must be positive"));
    }
    let m = m as usize;
    let (ln, nblocks) = header_scalar(&mut lines, "number of blocks")?;
    if nblocks < 1 {
        return Err(Error::parse(ln, "number of blocks must be positive"));
    }

    let mut cones = Vec::new();
    for (ln, tok) in header_list(&mut lines, nblocks as usize, "block sizes")? {
        let s = parse_int(tok, ln, "block size")?;
        cones.push(match s {
            0 => return Err(Error::parse(ln, "block size 0")),
            s if s > 0 => ConeSpec::Psd(s as usize),
            s => ConeSpec::NonNeg(s.unsigned_abs() as usize),
        });
    }

    let mut b = Vec::with_capacity(m.min(1 << 16));
    for (ln, tok) in header_list(&mut lines, m, "objective vector")? {
        b.push(parse_real(tok, ln)?);
    }

    let mut entries = Vec::new();
    while let Some((ln, line)) = lines.next_line()? {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::parse(ln, format!("expected `matno blkno i j value`, found {} fields", toks.len())));
        }
        let mat = parse_int(toks[0], ln, "matrix number")?;
        let blk = parse_int(toks[1], ln, "block number")?;
        let i = parse_int(toks[2], ln, "row index")?;
        let j = parse_int(toks[3], ln, "column index")?;
        let value = parse_real(toks[4], ln)?;
        if mat < 0 || mat as usize > m {
            return Err(Error::parse(ln, format!("matrix number {mat} outside 0..={m}")));
        }
        if blk < 1 || blk as usize > cones.len() {
            return Err(Error::parse(ln, format!("block number {blk} outside 1..={}", cones.len())));
        }
        let block = blk as usize - 1;
        let cone = cones[block];
        let size = cone.side();
        if i < 1 || j < 1 || i as usize > size || j as usize > size || (!cone.is_psd() && i != j) {
            return Err(Error::InconsistentBlock {
                line: ln,
                block: blk as usize,
                i: i.max(0) as usize,
                j: j.max(0) as usize,
                size,
            });
        }
        // lower-triangle entries are accepted and mirrored
        let (i, j) = ((i.min(j) - 1) as usize, (i.max(j) - 1) as usize);
        let value = if mat == 0 { -value } else { value };
        entries.push(DataEntry { mat: mat as usize, block, i, j, value });
    }

    let mut p = ConicProblem::new(cones, entries, b);
    p.report_sign = -1.0;
    Ok(p)
}

/// Canonical SDPA text: entries sorted by `(matno, blkno, i, j)` with
/// `i ≤ j`, duplicates summed, zeros dropped, 17 significant digits.
pub fn format_sdpa(problem: &ConicProblem) -> Result<String, Error> {
    if problem.m() == 0 {
        return Err(Error::Unsupported("the SDPA format needs at least one constraint"));
    }
    if problem.cones.is_empty() {
        return Err(Error::Unsupported("the SDPA format needs at least one block"));
    }
    problem.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "{}", problem.m());
    let _ = writeln!(out, "{}", problem.cones.len());
    let mut sizes = Vec::with_capacity(problem.cones.len());
    for c in &problem.cones {
        sizes.push(match *c {
            ConeSpec::Psd(n) => n.to_string(),
            ConeSpec::NonNeg(n) => format!("-{n}"),
            ConeSpec::Free(_) => return Err(Error::Unsupported("free variables have no SDPA block type")),
        });
    }
    let _ = writeln!(out, "{}", sizes.join(" "));
    let b: Vec<String> = problem.b.iter().map(|v| format!("{v:.16e}")).collect();
    let _ = writeln!(out, "{}", b.join(" "));
    for e in problem.canonical_entries() {
        let v = if e.mat == 0 { -e.value } else { e.value };
        let _ = writeln!(out, "{} {} {} {} {v:.16e}", e.mat, e.block + 1, e.i + 1, e.j + 1);
    }
    Ok(out)
}

pub fn write_sdpa(problem: &ConicProblem, path: impl AsRef<Path>) -> Result<(), Error> {
    let text = format_sdpa(problem)?;
    std::fs::write(path, text)?;
    Ok(())
}
