//! The line-oriented A-infinity structure and morphism file formats.
//!
//! ```text
//! ainfty v1
//! field GF 2 | field QQ
//! basis <index> <p> <q>        # indices 1..N, (0,0) element is the unit
//! m <n> : <i_1> ... <i_n> -> <coeff>*<j> [+ <coeff>*<j> ...]
//! ```
//!
//! Morphism files share the header and basis block and carry `f <n> : ...`
//! lines instead. Omitted tuples are zero. Writing then re-reading any
//! structure reproduces it exactly.

use crate::ainfty::{AInftyMorphism, AInftyStructure, MultiMap, StructureError};
use crate::field::Field;
use crate::linalg::SparseVec;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Structure { line: usize, source: StructureError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

struct Parsed {
    field: Field,
    basis: Vec<(i64, i64)>,
    maps: BTreeMap<usize, MultiMap>,
    kind: char, // 'm' or 'f'
}

fn parse_file(text: &str, expect_kind: char) -> Result<Parsed, FormatError> {
    let mut field: Option<Field> = None;
    let mut basis: Vec<(i64, i64)> = Vec::new();
    let mut maps: BTreeMap<usize, MultiMap> = BTreeMap::new();
    let mut saw_header = false;
    let mut kind = expect_kind;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "ainfty" => {
                if toks.get(1) != Some(&"v1") {
                    return Err(syntax(line_no, "expected `ainfty v1`"));
                }
                saw_header = true;
            }
            "field" => match toks.get(1) {
                Some(&"GF") => {
                    let p: u64 = toks
                        .get(2)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| syntax(line_no, "expected a prime after GF"))?;
                    field = Some(Field::prime(p).map_err(|m| syntax(line_no, m))?);
                }
                Some(&"QQ") => field = Some(Field::Rational),
                _ => return Err(syntax(line_no, "expected `field GF <p>` or `field QQ`")),
            },
            "basis" => {
                let idx: usize = toks
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| syntax(line_no, "expected `basis <index> <p> <q>`"))?;
                let p: i64 = toks
                    .get(2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| syntax(line_no, "expected `basis <index> <p> <q>`"))?;
                let q: i64 = toks
                    .get(3)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| syntax(line_no, "expected `basis <index> <p> <q>`"))?;
                if idx != basis.len() + 1 {
                    return Err(syntax(
                        line_no,
                        format!("basis indices must be consecutive from 1; expected {}", basis.len() + 1),
                    ));
                }
                basis.push((p, q));
            }
            t @ ("m" | "f") => {
                let k = t.chars().next().unwrap();
                if k != expect_kind {
                    return Err(syntax(line_no, format!("unexpected `{t}` line in this file kind")));
                }
                kind = k;
                let f = field.ok_or_else(|| syntax(line_no, "map line before field header"))?;
                let arity: usize = toks
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| syntax(line_no, "expected an arity"))?;
                if arity < 1 {
                    return Err(syntax(line_no, "arity must be >= 1"));
                }
                if toks.get(2) != Some(&":") {
                    return Err(syntax(line_no, "expected `:` after the arity"));
                }
                let rest = &toks[3..];
                let arrow = rest
                    .iter()
                    .position(|s| *s == "->")
                    .ok_or_else(|| syntax(line_no, "expected `->`"))?;
                if arrow != arity {
                    return Err(syntax(line_no, format!("expected {arity} input indices")));
                }
                let mut key = Vec::with_capacity(arity);
                for s in &rest[..arrow] {
                    let i: usize =
                        s.parse().map_err(|_| syntax(line_no, format!("bad index `{s}`")))?;
                    if i < 1 || i > basis.len() {
                        return Err(syntax(line_no, format!("index {i} outside declared basis")));
                    }
                    key.push(i - 1);
                }
                let mut value = SparseVec::zero();
                for term in rest[arrow + 1..].split(|s| *s == "+") {
                    if term.len() != 1 {
                        return Err(syntax(line_no, "each term must be `<coeff>*<index>`"));
                    }
                    let (cs, is) = term[0]
                        .rsplit_once('*')
                        .ok_or_else(|| syntax(line_no, "each term must be `<coeff>*<index>`"))?;
                    let c = f.parse_scalar(cs).map_err(|m| syntax(line_no, m))?;
                    let j: usize =
                        is.parse().map_err(|_| syntax(line_no, format!("bad index `{is}`")))?;
                    if j < 1 || j > basis.len() {
                        return Err(syntax(line_no, format!("index {j} outside declared basis")));
                    }
                    value.add_entry(&f, j - 1, &c);
                }
                if !value.is_zero() {
                    maps.entry(arity).or_insert_with(|| MultiMap::new(arity)).insert(key, value);
                }
            }
            other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_header {
        return Err(syntax(0, "missing `ainfty v1` header"));
    }
    let field = field.ok_or_else(|| syntax(0, "missing field header"))?;
    if basis.is_empty() {
        return Err(syntax(0, "missing basis lines"));
    }
    Ok(Parsed { field, basis, maps, kind })
}

/// Reads a structure file; bidegree violations are format errors.
pub fn read_structure(text: &str, truncation: Option<i64>) -> Result<AInftyStructure, FormatError> {
    let parsed = parse_file(text, 'm')?;
    debug_assert_eq!(parsed.kind, 'm');
    AInftyStructure::new(parsed.field, parsed.basis, parsed.maps, truncation)
        .map_err(|source| FormatError::Structure { line: 0, source })
}

/// Reads a morphism file as an endomorphism-shaped map family; the caller
/// attaches source and target structures.
pub fn read_morphism_maps(
    text: &str,
) -> Result<(Field, Vec<(i64, i64)>, BTreeMap<usize, MultiMap>), FormatError> {
    let parsed = parse_file(text, 'f')?;
    Ok((parsed.field, parsed.basis, parsed.maps))
}

/// Combines a morphism file with explicit source and target structures.
pub fn morphism_between(
    source: &AInftyStructure,
    target: &AInftyStructure,
    text: &str,
) -> Result<AInftyMorphism, FormatError> {
    let (field, basis, maps) = read_morphism_maps(text)?;
    if field != source.field {
        return Err(syntax(0, "morphism field differs from the structure field"));
    }
    if basis != source.basis {
        return Err(syntax(0, "morphism basis differs from the structure basis"));
    }
    AInftyMorphism::new(source.clone(), target.clone(), maps)
        .map_err(|source| FormatError::Structure { line: 0, source })
}

fn write_common(field: &Field, basis: &[(i64, i64)]) -> String {
    let mut out = String::from("ainfty v1\n");
    out.push_str(&format!("field {field}\n"));
    for (i, (p, q)) in basis.iter().enumerate() {
        out.push_str(&format!("basis {} {} {}\n", i + 1, p, q));
    }
    out
}

fn write_maps(field: &Field, maps: &BTreeMap<usize, MultiMap>, kind: char, out: &mut String) {
    for (n, mm) in maps {
        for (key, val) in &mm.table {
            if val.is_zero() {
                continue;
            }
            let inputs: Vec<String> = key.iter().map(|i| (i + 1).to_string()).collect();
            let terms: Vec<String> = val
                .iter()
                .map(|(j, c)| format!("{}*{}", field.format_scalar(c), j + 1))
                .collect();
            out.push_str(&format!("{kind} {n} : {} -> {}\n", inputs.join(" "), terms.join(" + ")));
        }
    }
}

/// Canonical structure serialization; `read_structure(write_structure(s))`
/// reproduces `s` exactly.
pub fn write_structure(s: &AInftyStructure) -> String {
    let mut out = write_common(&s.field, &s.basis);
    write_maps(&s.field, &s.maps, 'm', &mut out);
    out
}

/// Canonical morphism serialization (header and basis from the source).
pub fn write_morphism(f: &AInftyMorphism) -> String {
    let mut out = write_common(&f.source.field, &f.source.basis);
    write_maps(&f.source.field, &f.maps, 'f', &mut out);
    out
}
