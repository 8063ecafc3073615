//! JSON file formats for operators and generators.
//!
//! Operator file (`rows = dimK`, `cols = dimH`, `data` row-major):
//!
//! ```json
//! { "rows": 1, "cols": 2, "dimH": 2, "dimK": 1, "data": [[1.0, 0.0], [0.5, -2.0]] }
//! ```
//!
//! Generator file: a ball automorphism `Z -> eta_A(U Z V)` as three matrix
//! blocks `{rows, cols, data}`. `A` is `dimH x dimK`, `U` is `dimH x dimH`,
//! `V` is `dimK x dimK`; `U` and `V` default to the identity.
//!
//! ```json
//! { "dimH": 1, "dimK": 1, "A": { "rows": 1, "cols": 1, "data": [[0.5, 0.0]] } }
//! ```
//!
//! Bare `NaN` / `Infinity` tokens and `null` components are read as non-finite
//! entries and rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::ball::{BallAutomorphism, BallPoint};
use crate::chk::ClosedOperator;
use crate::dynamics::HBiholomorphicMap;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};

/// Parsed document plus the line on which each value starts, keyed by JSON pointer.
struct Located {
    root: Value,
    lines: HashMap<String, usize>,
}

impl Located {
    fn parse(text: &str) -> Result<Self> {
        let cleaned = replace_nonfinite_tokens(text);
        let root: Value = serde_json::from_str(&cleaned)
            .map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        let mut lines = HashMap::new();
        Locator { bytes: cleaned.as_bytes(), pos: 0, line: 1 }.value(String::new(), &mut lines);
        Ok(Located { root, lines })
    }

    fn line(&self, pointer: &str) -> usize {
        self.lines.get(pointer).copied().unwrap_or(1)
    }

    fn at(&self, pointer: &str, err: Error) -> Error {
        Error::AtLine { line: self.line(pointer), source: Box::new(err) }
    }

    fn parse_error(&self, pointer: &str, message: String) -> Error {
        Error::Parse { line: self.line(pointer), column: 0, message }
    }

    fn get(&self, pointer: &str) -> Option<&Value> {
        self.root.pointer(pointer)
    }

    fn usize_field(&self, pointer: &str, required: bool) -> Result<Option<usize>> {
        match self.get(pointer) {
            None if required => Err(self.parse_error("", format!("missing field `{}`", field_name(pointer)))),
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| self.parse_error(pointer, format!("`{}` must be a nonnegative integer", field_name(pointer)))),
        }
    }

    /// A `{rows, cols, data}` block at `base`.
    fn matrix(&self, base: &str) -> Result<ComplexMatrix> {
        let rows = self.usize_field(&format!("{base}/rows"), true)?.unwrap();
        let cols = self.usize_field(&format!("{base}/cols"), true)?.unwrap();
        let data_ptr = format!("{base}/data");
        let data = self
            .get(&data_ptr)
            .ok_or_else(|| self.parse_error(base, "missing field `data`".into()))?
            .as_array()
            .ok_or_else(|| self.parse_error(&data_ptr, "`data` must be an array of [re, im] pairs".into()))?;
        if data.len() != rows * cols {
            return Err(self.at(
                &data_ptr,
                Error::DimensionMismatch {
                    expected: format!("{} entries for a {rows}x{cols} matrix", rows * cols),
                    found: format!("{} entries", data.len()),
                },
            ));
        }
        let mut entries = Vec::with_capacity(data.len());
        for (k, pair) in data.iter().enumerate() {
            let ptr = format!("{data_ptr}/{k}");
            let parts = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| self.parse_error(&ptr, format!("entry {k} is not an [re, im] pair")))?;
            let mut z = [0.0; 2];
            for (slot, part) in z.iter_mut().zip(parts) {
                *slot = match part {
                    Value::Null => f64::NAN,
                    Value::Number(x) => x.as_f64().unwrap_or(f64::NAN),
                    _ => return Err(self.parse_error(&ptr, format!("entry {k} has a non-numeric component"))),
                };
            }
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(self.at(&ptr, Error::NonFiniteEntry { row: k / cols.max(1), col: k % cols.max(1) }));
            }
            entries.push(C64::new(z[0], z[1]));
        }
        Ok(linalg::from_row_major(rows, cols, &entries)?)
    }
}

fn field_name(pointer: &str) -> &str {
    pointer.rsplit('/').next().unwrap_or(pointer)
}

/// Rewrites `NaN`, `Infinity`, `-Infinity` outside strings as `null`.
fn replace_nonfinite_tokens(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        let token = ["-Infinity", "+Infinity", "Infinity", "NaN"].into_iter().find(|t| rest.starts_with(t));
        match token {
            Some(t) => {
                out.push_str("null");
                rest = &rest[t.len()..];
            }
            None => {
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    out
}

/// Records the starting line of every value in an already-validated document.
struct Locator<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl Locator<'_> {
    fn skip_ws(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b'\n' => self.line += 1,
                b' ' | b'\t' | b'\r' => {}
                _ => return,
            }
            self.pos += 1;
        }
    }

    fn string(&mut self) -> String {
        let start = self.pos + 1;
        self.pos += 1;
        while let Some(&b) = self.bytes.get(self.pos) {
            self.pos += 1;
            match b {
                b'\\' => self.pos += 1,
                b'"' => break,
                _ => {}
            }
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos.saturating_sub(1)]).into_owned()
    }

    fn value(&mut self, pointer: String, lines: &mut HashMap<String, usize>) {
        self.skip_ws();
        lines.insert(pointer.clone(), self.line);
        match self.bytes.get(self.pos) {
            Some(b'{') => {
                self.pos += 1;
                loop {
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        Some(b'"') => {
                            let key = self.string();
                            self.skip_ws();
                            self.pos += 1; // ':'
                            self.value(format!("{pointer}/{key}"), lines);
                        }
                        Some(b',') => self.pos += 1,
                        _ => {
                            self.pos += 1;
                            return;
                        }
                    }
                }
            }
            Some(b'[') => {
                self.pos += 1;
                let mut index = 0;
                loop {
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        Some(b']') | None => {
                            self.pos += 1;
                            return;
                        }
                        Some(b',') => self.pos += 1,
                        _ => {
                            self.value(format!("{pointer}/{index}"), lines);
                            index += 1;
                        }
                    }
                }
            }
            Some(b'"') => {
                self.string();
            }
            _ => {
                while let Some(&b) = self.bytes.get(self.pos) {
                    if matches!(b, b',' | b']' | b'}') || b.is_ascii_whitespace() {
                        break;
                    }
                    self.pos += 1;
                }
            }
        }
    }
}

/// Parses an operator document.
pub fn parse_operator_str(text: &str) -> Result<ClosedOperator> {
    let doc = Located::parse(text)?;
    if !doc.root.is_object() {
        return Err(Error::Parse { line: 1, column: 1, message: "expected a JSON object".into() });
    }
    let mat = doc.matrix("")?;
    let (rows, cols) = mat.shape();
    for (key, expected) in [("dimH", cols), ("dimK", rows)] {
        let ptr = format!("/{key}");
        if let Some(found) = doc.usize_field(&ptr, false)? {
            if found != expected {
                return Err(doc.at(
                    &ptr,
                    Error::DimensionMismatch { expected: format!("{key} = {expected}"), found: format!("{key} = {found}") },
                ));
            }
        }
    }
    ClosedOperator::new(mat)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn in_file(path: &Path, err: Error) -> Error {
    match err {
        Error::Io { .. } => err,
        other => Error::InFile { path: path.display().to_string(), source: Box::new(other) },
    }
}

/// Reads an operator file.
pub fn parse_operator_file(path: impl AsRef<Path>) -> Result<ClosedOperator> {
    parse_operator_str(&read_text(path.as_ref())?)
}

/// Like [`parse_operator_file`], with the path attached to errors.
pub fn read_operator(path: impl AsRef<Path>) -> Result<ClosedOperator> {
    let path = path.as_ref();
    parse_operator_file(path).map_err(|e| in_file(path, e))
}

fn push_f64(out: &mut String, x: f64) {
    // serde_json prints the shortest representation that reads back exactly.
    out.push_str(&serde_json::to_string(&x).unwrap_or_else(|_| "null".into()));
}

fn push_block_fields(out: &mut String, m: &ComplexMatrix, indent: &str) {
    let _ = writeln!(out, "{indent}\"rows\": {},", m.nrows());
    let _ = writeln!(out, "{indent}\"cols\": {},", m.ncols());
    push_data(out, m, indent);
}

fn push_data(out: &mut String, m: &ComplexMatrix, indent: &str) {
    let entries = linalg::to_row_major(m);
    let _ = write!(out, "{indent}\"data\": [");
    for (k, z) in entries.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "{indent}  [");
        push_f64(out, z.re);
        out.push_str(", ");
        push_f64(out, z.im);
        out.push(']');
    }
    if !entries.is_empty() {
        let _ = write!(out, "\n{indent}");
    }
    out.push(']');
}

/// Serializes an operator; [`parse_operator_str`] reads it back exactly.
pub fn operator_to_string(t: &ClosedOperator) -> String {
    let m = t.matrix();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"rows\": {},", m.nrows());
    let _ = writeln!(out, "  \"cols\": {},", m.ncols());
    let _ = writeln!(out, "  \"dimH\": {},", t.dim_h());
    let _ = writeln!(out, "  \"dimK\": {},", t.dim_k());
    push_data(&mut out, m, "  ");
    out.push_str("\n}\n");
    out
}

pub fn write_operator_file(path: impl AsRef<Path>, t: &ClosedOperator) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, operator_to_string(t))
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Parses a generator document.
pub fn parse_generator_str(text: &str) -> Result<HBiholomorphicMap> {
    let doc = Located::parse(text)?;
    if !doc.root.is_object() {
        return Err(Error::Parse { line: 1, column: 1, message: "expected a JSON object".into() });
    }
    let dim_h = doc.usize_field("/dimH", true)?.unwrap();
    let dim_k = doc.usize_field("/dimK", true)?.unwrap();
    let block = |name: &str, shape: (usize, usize), default: Option<ComplexMatrix>| -> Result<ComplexMatrix> {
        let ptr = format!("/{name}");
        let m = match (doc.get(&ptr), default) {
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(doc.parse_error("", format!("missing block `{name}`"))),
            (Some(_), _) => doc.matrix(&ptr)?,
        };
        if m.shape() != shape {
            return Err(doc.at(
                &ptr,
                Error::DimensionMismatch {
                    expected: format!("{name} of shape {}x{}", shape.0, shape.1),
                    found: format!("{}x{}", m.nrows(), m.ncols()),
                },
            ));
        }
        Ok(m)
    };
    let a = block("A", (dim_h, dim_k), None)?;
    let u = block("U", (dim_h, dim_h), Some(linalg::identity(dim_h)))?;
    let v = block("V", (dim_k, dim_k), Some(linalg::identity(dim_k)))?;
    let a = BallPoint::new(a).map_err(|e| doc.at("/A", e))?;
    let auto = BallAutomorphism::new(a, u, v).map_err(|e| doc.at("/U", e))?;
    Ok(HBiholomorphicMap::new(auto))
}

pub fn parse_generator_file(path: impl AsRef<Path>) -> Result<HBiholomorphicMap> {
    parse_generator_str(&read_text(path.as_ref())?)
}

pub fn read_generator(path: impl AsRef<Path>) -> Result<HBiholomorphicMap> {
    let path = path.as_ref();
    parse_generator_file(path).map_err(|e| in_file(path, e))
}

pub fn generator_to_string(g: &HBiholomorphicMap) -> String {
    let auto = g.automorphism();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"dimH\": {},", g.dim_h());
    let _ = writeln!(out, "  \"dimK\": {},", g.dim_k());
    let blocks = [("A", auto.parameter().matrix()), ("U", auto.left_unitary()), ("V", auto.right_unitary())];
    for (k, (name, m)) in blocks.iter().enumerate() {
        let _ = writeln!(out, "  \"{name}\": {{");
        push_block_fields(&mut out, m, "    ");
        out.push_str(if k + 1 < blocks.len() { "\n  },\n" } else { "\n  }\n" });
    }
    out.push_str("}\n");
    out
}

pub fn write_generator_file(path: impl AsRef<Path>, g: &HBiholomorphicMap) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, generator_to_string(g))
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

/// `x` with 17 significant digits, as a JSON number literal.
pub fn format_17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-5..17).contains(&exp) {
        return format!("{mantissa}e{exp}");
    }
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m.replace('.', "")),
        None => ("", mantissa.replace('.', "")),
    };
    if exp < 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split.min(digits.len()));
        if frac.is_empty() {
            format!("{sign}{int}.0")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}
