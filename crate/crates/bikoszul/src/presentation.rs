//! Finitely presented connected graded algebras A = T(V)/(relations), with
//! all generators in internal degree 1 and homogeneous relations.
//!
//! Normal-form bases are computed degree by degree: the span of
//! `{u * r * v : r relation}` inside the words of degree q is eliminated with
//! the deterministic sparse reduction of [`crate::linalg`], and the surviving
//! (non-pivot) monomials under the degree-then-lexicographic order form the
//! basis of A_q. Larger monomials are eliminated first, so `x*y` survives
//! `x*y + y*x` rather than `y*x`.

use crate::field::{Field, FieldScalar};
use crate::linalg::{rref, SparseMatrix, SparseVec};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

/// A word in the generators; internal degree = word length, empty word = unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> i64 {
        self.0.len() as i64
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut w = self.0.clone();
        w.extend_from_slice(&other.0);
        Monomial(w)
    }
}

/// A noncommutative polynomial: monomial -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct NcPolynomial {
    terms: BTreeMap<Monomial, FieldScalar>,
}

impl NcPolynomial {
    pub fn zero() -> NcPolynomial {
        NcPolynomial::default()
    }

    pub fn add_term(&mut self, field: &Field, m: Monomial, c: FieldScalar) {
        if field.is_zero(&c) {
            return;
        }
        match self.terms.remove(&m) {
            None => {
                self.terms.insert(m, c);
            }
            Some(old) => {
                let s = field.add(&old, &c);
                if !field.is_zero(&s) {
                    self.terms.insert(m, s);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FieldScalar)> {
        self.terms.iter()
    }

    /// Homogeneous degree, if all terms agree.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys();
        let d = it.next()?.degree();
        if it.all(|m| m.degree() == d) {
            Some(d)
        } else {
            None
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("relation `{relation}` is not homogeneous of degree >= 2")]
    Inhomogeneous { relation: String },
    #[error("internal degree {degree} exceeds truncation bound {maxdeg}")]
    TruncationExceeded { degree: i64, maxdeg: i64 },
    #[error("maxdeg {maxdeg} is below the largest relation degree {needed}")]
    MaxdegTooSmall { maxdeg: i64, needed: i64 },
}

/// Per-degree normal-form data: the chosen basis monomials and the rewrite
/// of every eliminated (pivot) monomial over that basis.
struct DegreeData {
    basis: Vec<Monomial>,
    basis_index: HashMap<Monomial, usize>,
    pivot_rewrite: HashMap<Monomial, SparseVec>,
}

/// A validated presentation: field, degree-1 generators, homogeneous
/// relations and the truncation bound `D_max`. Immutable after parse; the
/// per-degree caches are invisible to callers.
pub struct Presentation {
    pub field: Field,
    pub gens: Vec<String>,
    pub relations: Vec<NcPolynomial>,
    pub maxdeg: i64,
    degrees: RefCell<BTreeMap<i64, Rc<DegreeData>>>,
    products: RefCell<HashMap<(i64, usize, i64, usize), Rc<SparseVec>>>,
}

impl Presentation {
    pub fn new(
        field: Field,
        gens: Vec<String>,
        relations: Vec<NcPolynomial>,
        maxdeg: i64,
    ) -> Result<Presentation, PresentationError> {
        for r in &relations {
            match r.homogeneous_degree() {
                Some(d) if d >= 2 => {}
                _ => {
                    return Err(PresentationError::Inhomogeneous {
                        relation: format_ncpoly(&field, &gens, r),
                    })
                }
            }
        }
        let max_rel = relations.iter().filter_map(|r| r.homogeneous_degree()).max().unwrap_or(0);
        if maxdeg < max_rel {
            return Err(PresentationError::MaxdegTooSmall { maxdeg, needed: max_rel });
        }
        Ok(Presentation {
            field,
            gens,
            relations,
            maxdeg,
            degrees: RefCell::new(BTreeMap::new()),
            products: RefCell::new(HashMap::new()),
        })
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    /// All words of the given degree in descending deglex order (largest
    /// first). The leading monomial of each ideal element is eliminated, so
    /// normal forms prefer lexicographically smaller words.
    fn words_desc(&self, q: i64) -> Vec<Monomial> {
        let g = self.num_gens() as u64;
        let q = q as u32;
        let total = g.pow(q);
        let mut out = Vec::with_capacity(total as usize);
        for code in (0..total).rev() {
            let mut w = Vec::with_capacity(q as usize);
            let mut c = code;
            for _ in 0..q {
                w.push((c / g.pow(q - 1 - w.len() as u32) % g) as u16);
                c %= g.pow(q - w.len() as u32);
            }
            out.push(Monomial(w));
        }
        out
    }

    fn degree_data(&self, q: i64) -> Result<Rc<DegreeData>, PresentationError> {
        if q > self.maxdeg || q < 0 {
            return Err(PresentationError::TruncationExceeded { degree: q, maxdeg: self.maxdeg });
        }
        if let Some(d) = self.degrees.borrow().get(&q) {
            return Ok(Rc::clone(d));
        }
        let data = Rc::new(self.build_degree(q));
        self.degrees.borrow_mut().insert(q, Rc::clone(&data));
        Ok(data)
    }

    fn build_degree(&self, q: i64) -> DegreeData {
        if q == 0 {
            let one = Monomial::one();
            return DegreeData {
                basis: vec![one.clone()],
                basis_index: HashMap::from([(one, 0)]),
                pivot_rewrite: HashMap::new(),
            };
        }
        let words = self.words_desc(q);
        let col_of: HashMap<&Monomial, usize> =
            words.iter().enumerate().map(|(j, w)| (w, j)).collect();

        // degree-q slice of the two-sided ideal: u * r * v over all words u, v
        let mut rows = Vec::new();
        for r in &self.relations {
            let e = r.homogeneous_degree().unwrap();
            if e > q {
                continue;
            }
            let rest = q - e;
            for ulen in 0..=rest {
                let vlen = rest - ulen;
                for u in self.words_desc(ulen) {
                    for v in self.words_desc(vlen) {
                        let mut row = SparseVec::zero();
                        for (m, c) in r.terms() {
                            let w = u.concat(m).concat(&v);
                            row.add_entry(&self.field, col_of[&w], c);
                        }
                        if !row.is_zero() {
                            rows.push(row);
                        }
                    }
                }
            }
        }
        let m = SparseMatrix::from_rows(self.field, words.len(), rows);
        let (reduced, pivots) = rref(&m);
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();

        let mut basis: Vec<Monomial> = words
            .iter()
            .enumerate()
            .filter(|(j, _)| !pivot_set.contains(j))
            .map(|(_, w)| w.clone())
            .collect();
        basis.sort(); // ascending deglex for stable downstream indexing
        let basis_index: HashMap<Monomial, usize> =
            basis.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

        let mut pivot_rewrite = HashMap::new();
        for (k, pc) in pivots.iter().enumerate() {
            let mut rhs = SparseVec::zero();
            for (j, c) in reduced.row(k).iter() {
                if j == *pc {
                    continue;
                }
                let w = &words[j];
                rhs.add_entry(&self.field, basis_index[w], &self.field.neg(c));
            }
            pivot_rewrite.insert(words[*pc].clone(), rhs);
        }
        DegreeData { basis, basis_index, pivot_rewrite }
    }

    /// dim A_q within the truncation bound.
    pub fn graded_dim(&self, q: i64) -> Result<usize, PresentationError> {
        Ok(self.degree_data(q)?.basis.len())
    }

    pub fn basis(&self, q: i64) -> Result<Vec<Monomial>, PresentationError> {
        Ok(self.degree_data(q)?.basis.clone())
    }

    /// Normal form of a word as coordinates over the basis of its degree.
    pub fn reduce_word(&self, w: &Monomial) -> Result<SparseVec, PresentationError> {
        let data = self.degree_data(w.degree())?;
        if let Some(i) = data.basis_index.get(w) {
            return Ok(SparseVec::unit(*i, self.field.one()));
        }
        Ok(data.pivot_rewrite.get(w).cloned().unwrap_or_else(SparseVec::zero))
    }

    /// Product of two basis elements, cached.
    pub fn multiply_basis(
        &self,
        q1: i64,
        i1: usize,
        q2: i64,
        i2: usize,
    ) -> Result<Rc<SparseVec>, PresentationError> {
        let key = (q1, i1, q2, i2);
        if let Some(v) = self.products.borrow().get(&key) {
            return Ok(Rc::clone(v));
        }
        let w1 = self.degree_data(q1)?.basis[i1].clone();
        let w2 = self.degree_data(q2)?.basis[i2].clone();
        let v = Rc::new(self.reduce_word(&w1.concat(&w2))?);
        self.products.borrow_mut().insert(key, Rc::clone(&v));
        Ok(v)
    }

    /// Product of elements of A_q1 and A_q2 in basis coordinates.
    pub fn multiply(
        &self,
        q1: i64,
        a: &SparseVec,
        q2: i64,
        b: &SparseVec,
    ) -> Result<SparseVec, PresentationError> {
        if q1 + q2 > self.maxdeg {
            return Err(PresentationError::TruncationExceeded {
                degree: q1 + q2,
                maxdeg: self.maxdeg,
            });
        }
        let mut out = SparseVec::zero();
        for (i1, c1) in a.iter() {
            for (i2, c2) in b.iter() {
                let prod = self.multiply_basis(q1, i1, q2, i2)?;
                out.add_scaled(&self.field, &prod, &self.field.mul(c1, c2));
            }
        }
        Ok(out)
    }

    /// Canonical text form; `parse_presentation(print(p))` reproduces `p`.
    pub fn print(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("field {}\n", self.field));
        out.push_str(&format!("gens {}\n", self.gens.join(" ")));
        for r in &self.relations {
            out.push_str(&format!("rel {}\n", format_ncpoly(&self.field, &self.gens, r)));
        }
        out.push_str(&format!("maxdeg {}\n", self.maxdeg));
        out
    }
}

impl fmt::Debug for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Presentation({} gens, {} relations, maxdeg {})", self.num_gens(), self.relations.len(), self.maxdeg)
    }
}

/// Formats a polynomial with leading (largest) monomial first.
pub fn format_ncpoly(field: &Field, gens: &[String], p: &NcPolynomial) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts = String::new();
    for (k, (m, c)) in p.terms.iter().rev().enumerate() {
        let cs = field.format_scalar(c);
        let (neg, mag) = match cs.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, cs),
        };
        if k == 0 {
            if neg {
                parts.push_str("- ");
            }
        } else {
            parts.push_str(if neg { " - " } else { " + " });
        }
        let mono = format_monomial(gens, m);
        if mag == "1" {
            parts.push_str(&mono);
        } else {
            parts.push_str(&format!("{mag}*{mono}"));
        }
    }
    parts
}

fn format_monomial(gens: &[String], m: &Monomial) -> String {
    let mut factors: Vec<String> = Vec::new();
    let mut i = 0;
    while i < m.0.len() {
        let g = m.0[i];
        let mut run = 1;
        while i + run < m.0.len() && m.0[i + run] == g {
            run += 1;
        }
        if run == 1 {
            factors.push(gens[g as usize].clone());
        } else {
            factors.push(format!("{}^{}", gens[g as usize], run));
        }
        i += run;
    }
    factors.join("*")
}

// ---------------------------------------------------------------------------
// parsing

struct Token {
    col: usize,
    kind: TokKind,
}

#[derive(PartialEq, Eq, Debug, Clone)]
enum TokKind {
    Ident(String),
    Int(i64),
    Star,
    Caret,
    Plus,
    Minus,
}

fn lex_line(line_no: usize, line: &str) -> Result<Vec<Token>, PresentationError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '*' => {
                toks.push(Token { col, kind: TokKind::Star });
                i += 1;
            }
            '^' => {
                toks.push(Token { col, kind: TokKind::Caret });
                i += 1;
            }
            '+' => {
                toks.push(Token { col, kind: TokKind::Plus });
                i += 1;
            }
            '-' => {
                toks.push(Token { col, kind: TokKind::Minus });
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse().map_err(|_| PresentationError::Syntax {
                    line: line_no,
                    col,
                    msg: format!("integer `{text}` out of range"),
                })?;
                toks.push(Token { col, kind: TokKind::Int(n) });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Token { col, kind: TokKind::Ident(chars[start..i].iter().collect()) });
            }
            other => {
                return Err(PresentationError::Syntax {
                    line: line_no,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

fn parse_ncpoly(
    field: &Field,
    gen_index: &HashMap<String, u16>,
    line_no: usize,
    toks: &[Token],
) -> Result<NcPolynomial, PresentationError> {
    let err = |col: usize, msg: String| PresentationError::Syntax { line: line_no, col, msg };
    if toks.is_empty() {
        return Err(err(1, "empty polynomial".into()));
    }
    let mut poly = NcPolynomial::zero();
    let mut i = 0;
    loop {
        // sign
        let mut sign = 1i64;
        while i < toks.len() {
            match toks[i].kind {
                TokKind::Plus => {
                    i += 1;
                }
                TokKind::Minus => {
                    sign = -sign;
                    i += 1;
                }
                _ => break,
            }
        }
        if i >= toks.len() {
            return Err(err(toks.last().map_or(1, |t| t.col), "expected a term".into()));
        }
        // optional integer coefficient followed by '*'
        let mut coeff = field.from_i64(sign);
        if let TokKind::Int(n) = toks[i].kind {
            coeff = field.mul(&coeff, &field.from_i64(n));
            i += 1;
            if i >= toks.len() || toks[i].kind != TokKind::Star {
                return Err(err(
                    toks.get(i).or(toks.last()).map_or(1, |t| t.col),
                    "expected `*` after coefficient".into(),
                ));
            }
            i += 1;
        }
        // generator factors joined by '*', with optional exponents
        let mut word: Vec<u16> = Vec::new();
        loop {
            let t = toks.get(i).ok_or_else(|| {
                err(toks.last().map_or(1, |t| t.col), "expected a generator".into())
            })?;
            let TokKind::Ident(name) = &t.kind else {
                return Err(err(t.col, format!("expected a generator, found {:?}", t.kind)));
            };
            let g = *gen_index
                .get(name)
                .ok_or_else(|| err(t.col, format!("unknown generator `{name}`")))?;
            i += 1;
            let mut exp = 1i64;
            if i < toks.len() && toks[i].kind == TokKind::Caret {
                i += 1;
                let t2 = toks.get(i).ok_or_else(|| {
                    err(toks.last().map_or(1, |t| t.col), "expected an exponent".into())
                })?;
                let TokKind::Int(n) = t2.kind else {
                    return Err(err(t2.col, "expected an integer exponent".into()));
                };
                if n < 1 {
                    return Err(err(t2.col, format!("exponent must be >= 1, got {n}")));
                }
                exp = n;
                i += 1;
            }
            for _ in 0..exp {
                word.push(g);
            }
            if i < toks.len() && toks[i].kind == TokKind::Star {
                // lookahead: `* gen` continues the term, `* int` is an error
                i += 1;
                continue;
            }
            break;
        }
        poly.add_term(field, Monomial(word), coeff);
        if i >= toks.len() {
            break;
        }
        match toks[i].kind {
            TokKind::Plus | TokKind::Minus => continue,
            _ => return Err(err(toks[i].col, "expected `+` or `-`".into())),
        }
    }
    Ok(poly)
}

/// Parses the line-oriented presentation format.
///
/// ```text
/// field GF <p> | field QQ
/// gens <name> ...
/// rel <ncpoly>          # zero or more
/// maxdeg <D>
/// ```
pub fn parse_presentation(text: &str) -> Result<Presentation, PresentationError> {
    let mut field: Option<Field> = None;
    let mut gens: Option<Vec<String>> = None;
    let mut gen_index: HashMap<String, u16> = HashMap::new();
    let mut relations: Vec<NcPolynomial> = Vec::new();
    let mut maxdeg: Option<i64> = None;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let toks = lex_line(line_no, raw)?;
        if toks.is_empty() {
            continue;
        }
        let err = |col: usize, msg: String| PresentationError::Syntax { line: line_no, col, msg };
        let TokKind::Ident(head) = &toks[0].kind else {
            return Err(err(toks[0].col, "expected a directive".into()));
        };
        match head.as_str() {
            "field" => {
                if field.is_some() {
                    return Err(err(toks[0].col, "duplicate field line".into()));
                }
                match toks.get(1).map(|t| &t.kind) {
                    Some(TokKind::Ident(s)) if s == "GF" => {
                        let Some(Token { kind: TokKind::Int(p), col }) = toks.get(2) else {
                            return Err(err(toks[1].col, "expected a prime after GF".into()));
                        };
                        let f = Field::prime(*p as u64).map_err(|m| err(*col, m))?;
                        field = Some(f);
                    }
                    Some(TokKind::Ident(s)) if s == "QQ" => field = Some(Field::Rational),
                    _ => return Err(err(toks[0].col, "expected `field GF <p>` or `field QQ`".into())),
                }
            }
            "gens" => {
                if gens.is_some() {
                    return Err(err(toks[0].col, "duplicate gens line".into()));
                }
                let mut names = Vec::new();
                for t in &toks[1..] {
                    let TokKind::Ident(name) = &t.kind else {
                        return Err(err(t.col, "expected a generator name".into()));
                    };
                    if gen_index.contains_key(name) {
                        return Err(err(t.col, format!("duplicate generator `{name}`")));
                    }
                    gen_index.insert(name.clone(), names.len() as u16);
                    names.push(name.clone());
                }
                if names.is_empty() {
                    return Err(err(toks[0].col, "at least one generator required".into()));
                }
                gens = Some(names);
            }
            "rel" => {
                if gens.is_none() || field.is_none() {
                    return Err(err(toks[0].col, "rel before field/gens headers".into()));
                }
                let poly = parse_ncpoly(field.as_ref().unwrap(), &gen_index, line_no, &toks[1..])?;
                if poly.is_zero() {
                    return Err(err(toks[0].col, "relation is identically zero".into()));
                }
                match poly.homogeneous_degree() {
                    Some(d) if d >= 2 => {}
                    _ => {
                        return Err(PresentationError::Inhomogeneous {
                            relation: format_ncpoly(field.as_ref().unwrap(), gens.as_ref().unwrap(), &poly),
                        })
                    }
                }
                relations.push(poly);
            }
            "maxdeg" => {
                if maxdeg.is_some() {
                    return Err(err(toks[0].col, "duplicate maxdeg line".into()));
                }
                let Some(Token { kind: TokKind::Int(d), col }) = toks.get(1) else {
                    return Err(err(toks[0].col, "expected an integer after maxdeg".into()));
                };
                if *d < 1 {
                    return Err(err(*col, format!("maxdeg must be >= 1, got {d}")));
                }
                maxdeg = Some(*d);
            }
            other => return Err(err(toks[0].col, format!("unknown directive `{other}`"))),
        }
    }

    let field = field.ok_or(PresentationError::Syntax { line: 0, col: 0, msg: "missing field header".into() })?;
    let gens = gens.ok_or(PresentationError::Syntax { line: 0, col: 0, msg: "missing gens header".into() })?;
    let maxdeg = maxdeg.ok_or(PresentationError::Syntax { line: 0, col: 0, msg: "missing maxdeg header".into() })?;
    Presentation::new(field, gens, relations, maxdeg)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TRUNC3_GF2: &str = "field GF 2\ngens x\nrel x*x*x\nmaxdeg 9\n";
    pub(crate) const EXTERIOR2_QQ: &str =
        "field QQ\ngens x y\nrel x*x\nrel y*y\nrel x*y + y*x\nmaxdeg 8\n";

    #[test]
    fn parse_truncated_polynomial() {
        let p = parse_presentation(TRUNC3_GF2).unwrap();
        assert_eq!(p.field, Field::prime(2).unwrap());
        assert_eq!(p.gens, vec!["x"]);
        assert_eq!(p.relations.len(), 1);
        assert_eq!(p.maxdeg, 9);
    }

    #[test]
    fn parse_exterior_algebra() {
        let p = parse_presentation(EXTERIOR2_QQ).unwrap();
        assert_eq!(p.field, Field::Rational);
        assert_eq!(p.gens.len(), 2);
        assert_eq!(p.relations.len(), 3);
    }

    #[test]
    fn inhomogeneous_relation_rejected() {
        let e = parse_presentation("field GF 2\ngens x y\nrel x*x + y\nmaxdeg 5\n").unwrap_err();
        assert!(matches!(e, PresentationError::Inhomogeneous { .. }), "{e:?}");
    }

    #[test]
    fn unknown_generator_rejected() {
        let e = parse_presentation("field GF 2\ngens x\nrel x*z\nmaxdeg 5\n").unwrap_err();
        match e {
            PresentationError::Syntax { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("unknown generator"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_headers_rejected() {
        assert!(parse_presentation("gens x\nmaxdeg 3\n").is_err());
        assert!(parse_presentation("field QQ\nmaxdeg 3\n").is_err());
        assert!(parse_presentation("field QQ\ngens x\n").is_err());
    }

    #[test]
    fn graded_dims_trunc3() {
        let p = parse_presentation(TRUNC3_GF2).unwrap();
        // GF(2)[x]/(x^3): dims 1,1,1,0,...
        assert_eq!(p.graded_dim(0).unwrap(), 1);
        assert_eq!(p.graded_dim(1).unwrap(), 1);
        assert_eq!(p.graded_dim(2).unwrap(), 1);
        assert_eq!(p.graded_dim(3).unwrap(), 0);
        assert_eq!(p.graded_dim(9).unwrap(), 0);
        assert!(p.graded_dim(10).is_err());
    }

    #[test]
    fn graded_dims_exterior2() {
        let p = parse_presentation(EXTERIOR2_QQ).unwrap();
        assert_eq!(p.graded_dim(0).unwrap(), 1);
        assert_eq!(p.graded_dim(1).unwrap(), 2);
        assert_eq!(p.graded_dim(2).unwrap(), 1);
        assert_eq!(p.graded_dim(3).unwrap(), 0);
    }

    #[test]
    fn graded_dims_free_algebra() {
        let p = parse_presentation("field GF 2\ngens x y\nmaxdeg 7\n").unwrap();
        assert_eq!(p.graded_dim(3).unwrap(), 8);
        assert_eq!(p.graded_dim(7).unwrap(), 128);
    }

    #[test]
    fn multiply_in_quotient() {
        let p = parse_presentation(TRUNC3_GF2).unwrap();
        let f = p.field;
        let x = SparseVec::unit(0, f.one());
        let x2 = p.multiply(1, &x, 1, &x).unwrap();
        assert_eq!(x2, SparseVec::unit(0, f.one())); // x^2 is the only basis monomial of A_2
        let x3 = p.multiply(1, &x, 2, &x2).unwrap();
        assert!(x3.is_zero());
    }

    #[test]
    fn multiply_exterior_signs() {
        let p = parse_presentation(EXTERIOR2_QQ).unwrap();
        let f = p.field;
        // basis of A_1 is [x, y] in declaration order; basis of A_2 is [xy]
        assert_eq!(p.basis(2).unwrap(), vec![Monomial(vec![0, 1])]);
        let x = SparseVec::unit(0, f.one());
        let y = SparseVec::unit(1, f.one());
        let xy = p.multiply(1, &x, 1, &y).unwrap();
        assert_eq!(xy, SparseVec::unit(0, f.one()));
        let yx = p.multiply(1, &y, 1, &x).unwrap();
        assert_eq!(yx, SparseVec::unit(0, f.from_i64(-1)));
    }

    #[test]
    fn multiply_is_associative_and_unital() {
        let p = parse_presentation(EXTERIOR2_QQ).unwrap();
        let f = p.field;
        let one = SparseVec::unit(0, f.one());
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let a = SparseVec::unit(i, f.one());
                    let b = SparseVec::unit(j, f.one());
                    let c = SparseVec::unit(k, f.one());
                    let ab = p.multiply(1, &a, 1, &b).unwrap();
                    let bc = p.multiply(1, &b, 1, &c).unwrap();
                    assert_eq!(p.multiply(2, &ab, 1, &c).unwrap(), p.multiply(1, &a, 2, &bc).unwrap());
                    assert_eq!(p.multiply(0, &one, 1, &a).unwrap(), a);
                    assert_eq!(p.multiply(1, &a, 0, &one).unwrap(), a);
                }
            }
        }
    }

    /// Independent dense-elimination oracle for graded dimensions: build the
    /// full slice matrix and do naive dense Gaussian elimination.
    fn dense_dim_oracle(p: &Presentation, q: i64) -> usize {
        let g = p.num_gens();
        let words: Vec<Monomial> = {
            // ascending enumeration, order irrelevant for rank
            let mut all = vec![Monomial::one()];
            for _ in 0..q {
                let mut next = Vec::new();
                for w in &all {
                    for k in 0..g {
                        let mut v = w.0.clone();
                        v.push(k as u16);
                        next.push(Monomial(v));
                    }
                }
                all = next;
            }
            all
        };
        let col: HashMap<&Monomial, usize> = words.iter().enumerate().map(|(j, w)| (w, j)).collect();
        let mut dense: Vec<Vec<FieldScalar>> = Vec::new();
        for r in &p.relations {
            let e = r.homogeneous_degree().unwrap();
            if e > q {
                continue;
            }
            for ulen in 0..=(q - e) {
                let vlen = q - e - ulen;
                for u in p.words_desc(ulen) {
                    for v in p.words_desc(vlen) {
                        let mut row = vec![p.field.zero(); words.len()];
                        for (m, c) in r.terms() {
                            let w = u.concat(m).concat(&v);
                            let j = col[&w];
                            row[j] = p.field.add(&row[j], c);
                        }
                        dense.push(row);
                    }
                }
            }
        }
        // dense elimination
        let f = p.field;
        let mut rank = 0usize;
        for c in 0..words.len() {
            let Some(r) = (rank..dense.len()).find(|&r| !f.is_zero(&dense[r][c])) else { continue };
            dense.swap(rank, r);
            let inv = f.inv(&dense[rank][c]).unwrap();
            for x in dense[rank].iter_mut() {
                *x = f.mul(x, &inv);
            }
            for r2 in 0..dense.len() {
                if r2 != rank && !f.is_zero(&dense[r2][c]) {
                    let piv = dense[rank].clone();
                    let coef = f.neg(&dense[r2][c]);
                    for (x, pv) in dense[r2].iter_mut().zip(piv.iter()) {
                        *x = f.add(x, &f.mul(pv, &coef));
                    }
                }
            }
            rank += 1;
        }
        words.len() - rank
    }

    #[test]
    fn graded_dim_matches_dense_oracle() {
        for text in [TRUNC3_GF2, EXTERIOR2_QQ, "field GF 2\ngens x y\nrel x*x\nrel y^3\nmaxdeg 6\n"] {
            let p = parse_presentation(text).unwrap();
            for q in 0..=std::cmp::min(6, p.maxdeg) {
                assert_eq!(p.graded_dim(q).unwrap(), dense_dim_oracle(&p, q), "degree {q} of {text}");
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random monomial presentations on two generators.
        fn arb_presentation() -> impl Strategy<Value = Presentation> {
            let rel = proptest::collection::vec(0u16..2, 2..=3);
            proptest::collection::vec(rel, 1..=3).prop_map(|words| {
                let field = Field::prime(3).unwrap();
                let mut rels = Vec::new();
                for w in words {
                    let mut p = NcPolynomial::zero();
                    p.add_term(&field, Monomial(w), field.one());
                    rels.push(p);
                }
                Presentation::new(field, vec!["x".into(), "y".into()], rels, 6).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn multiply_associative_on_random_quotients(p in arb_presentation()) {
                let f = p.field;
                for q1 in 1..=2i64 {
                    for q2 in 1..=2i64 {
                        for q3 in 1..=2i64 {
                            for i in 0..p.graded_dim(q1).unwrap() {
                                for j in 0..p.graded_dim(q2).unwrap() {
                                    for k in 0..p.graded_dim(q3).unwrap() {
                                        let a = SparseVec::unit(i, f.one());
                                        let b = SparseVec::unit(j, f.one());
                                        let c = SparseVec::unit(k, f.one());
                                        let ab = p.multiply(q1, &a, q2, &b).unwrap();
                                        let bc = p.multiply(q2, &b, q3, &c).unwrap();
                                        prop_assert_eq!(
                                            p.multiply(q1 + q2, &ab, q3, &c).unwrap(),
                                            p.multiply(q1, &a, q2 + q3, &bc).unwrap()
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }

            #[test]
            fn dims_bounded_and_connected(p in arb_presentation()) {
                prop_assert_eq!(p.graded_dim(0).unwrap(), 1);
                prop_assert_eq!(p.graded_dim(1).unwrap(), p.num_gens());
                for q in 2..=4i64 {
                    prop_assert!(p.graded_dim(q).unwrap() <= 2usize.pow(q as u32));
                }
            }
        }
    }

    #[test]
    fn print_parse_round_trip() {
        for text in [
            TRUNC3_GF2,
            EXTERIOR2_QQ,
            "field QQ\ngens x y\nrel 3*x*y^2 - 2*y*x*y\nmaxdeg 5\n",
            "field GF 2\ngens x y\nmaxdeg 7\n",
        ] {
            let p = parse_presentation(text).unwrap();
            let printed = p.print();
            let p2 = parse_presentation(&printed).unwrap();
            assert_eq!(p2.print(), printed);
            assert_eq!(p2.field, p.field);
            assert_eq!(p2.gens, p.gens);
            assert_eq!(p2.relations, p.relations);
            assert_eq!(p2.maxdeg, p.maxdeg);
        }
    }
}
