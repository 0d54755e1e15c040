//! Finite bigraded minimal A-infinity structures and morphisms, with exact
//! verification of the Stasheff identities SI(n), the morphism identities
//! MI(n), strict unitality, and strictification of quasi-isomorphisms.
//!
//! Sign conventions, fixed once for the whole crate and certified against the
//! transfer output by the SI suite:
//! - SI(n): sum of (-1)^(i + j*t) m_(i+1+j)(1^i x m_t x 1^j) over n = i+t+j;
//! - evaluating 1^i x m_t x 1^j on elements contributes the Koszul sign
//!   (-1)^((2-t) * (|x_1| + ... + |x_i|)) with |.| the cohomological degree;
//! - MI(n) right-hand signs: w = (r-1)(i_1-1) + (r-2)(i_2-1) + ... + (i_{r-1}-1),
//!   plus the analogous Koszul signs for f_{i_1} x ... x f_{i_r}.

use crate::field::{Field, FieldScalar};
use crate::linalg::{rref, SparseMatrix, SparseVec};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// One multilinear operation m_n (or morphism component f_n) as a coefficient
/// table on basis tuples. Tuples not present map to zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiMap {
    pub arity: usize,
    pub table: BTreeMap<Vec<usize>, SparseVec>,
}

impl MultiMap {
    pub fn new(arity: usize) -> MultiMap {
        assert!(arity >= 1);
        MultiMap { arity, table: BTreeMap::new() }
    }

    pub fn insert(&mut self, key: Vec<usize>, value: SparseVec) {
        assert_eq!(key.len(), self.arity);
        if !value.is_zero() {
            self.table.insert(key, value);
        }
    }

    pub fn get(&self, key: &[usize]) -> Option<&SparseVec> {
        self.table.get(key)
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    /// Multilinear extension to tuples of vectors.
    pub fn apply_multilinear(&self, field: &Field, args: &[SparseVec]) -> SparseVec {
        assert_eq!(args.len(), self.arity);
        let mut out = SparseVec::zero();
        let mut key = vec![0usize; self.arity];
        self.expand(field, args, 0, &mut key, &field.one(), &mut out);
        out
    }

    fn expand(
        &self,
        field: &Field,
        args: &[SparseVec],
        pos: usize,
        key: &mut Vec<usize>,
        coeff: &FieldScalar,
        out: &mut SparseVec,
    ) {
        if pos == args.len() {
            if let Some(v) = self.table.get(key) {
                out.add_scaled(field, v, coeff);
            }
            return;
        }
        for (i, c) in args[pos].iter() {
            key[pos] = i;
            self.expand(field, args, pos + 1, key, &field.mul(coeff, c), out);
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("basis index {index} out of range (basis size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("m_{arity} entry on {tuple:?} hits index {target} of bidegree ({tp},{tq}), expected ({ep},{eq})")]
    BidegreeMismatch { arity: usize, tuple: Vec<usize>, target: usize, tp: i64, tq: i64, ep: i64, eq: i64 },
    #[error("minimal structure cannot carry a nonzero m_1")]
    NonzeroM1,
    #[error("morphism component f_1 must map the unit to the unit")]
    NonUnitalMorphism,
    #[error("f_1 is not invertible in bidegree ({p},{q})")]
    NonInvertible { p: i64, q: i64 },
    #[error("source and target bigraded dimensions differ in bidegree ({p},{q})")]
    DimensionMismatch { p: i64, q: i64 },
}

/// A finite bigraded space with a distinguished basis. `basis[i]` is the
/// bidegree (cohomological, internal) of the i-th element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AInftyStructure {
    pub field: Field,
    pub basis: Vec<(i64, i64)>,
    pub maps: BTreeMap<usize, MultiMap>,
    /// Internal-degree bound beyond which the structure is a truncation of
    /// something larger; `None` means the listed basis is the whole space.
    pub truncation: Option<i64>,
}

impl AInftyStructure {
    pub fn new(
        field: Field,
        basis: Vec<(i64, i64)>,
        maps: BTreeMap<usize, MultiMap>,
        truncation: Option<i64>,
    ) -> Result<AInftyStructure, StructureError> {
        for (n, mm) in &maps {
            assert_eq!(mm.arity, *n);
            if *n == 1 && !mm.is_zero() {
                return Err(StructureError::NonzeroM1);
            }
            for (key, val) in &mm.table {
                let mut p = 0i64;
                let mut q = 0i64;
                for &i in key {
                    let (bp, bq) = *basis.get(i).ok_or(StructureError::IndexOutOfRange {
                        index: i,
                        size: basis.len(),
                    })?;
                    p += bp;
                    q += bq;
                }
                let (ep, eq) = (p + 2 - *n as i64, q);
                for (t, _) in val.iter() {
                    let (tp, tq) = *basis.get(t).ok_or(StructureError::IndexOutOfRange {
                        index: t,
                        size: basis.len(),
                    })?;
                    if (tp, tq) != (ep, eq) {
                        return Err(StructureError::BidegreeMismatch {
                            arity: *n,
                            tuple: key.clone(),
                            target: t,
                            tp,
                            tq,
                            ep,
                            eq,
                        });
                    }
                }
            }
        }
        Ok(AInftyStructure { field, basis, maps, truncation })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn bidegree(&self, i: usize) -> (i64, i64) {
        self.basis[i]
    }

    /// The distinguished unit: the unique basis element at (0,0), if any.
    pub fn unit(&self) -> Option<usize> {
        let mut it = self.basis.iter().enumerate().filter(|(_, b)| **b == (0, 0));
        let first = it.next()?;
        if it.next().is_some() {
            return None;
        }
        Some(first.0)
    }

    pub fn indices_at(&self, p: i64, q: i64) -> Vec<usize> {
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, b)| **b == (p, q))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn bidegrees(&self) -> BTreeSet<(i64, i64)> {
        self.basis.iter().copied().collect()
    }

    pub fn map(&self, n: usize) -> Option<&MultiMap> {
        self.maps.get(&n).filter(|m| !m.is_zero())
    }

    /// Arities with at least one nonzero entry.
    pub fn support(&self) -> Vec<usize> {
        self.maps.iter().filter(|(_, m)| !m.is_zero()).map(|(n, _)| *n).collect()
    }

    pub fn total_internal(&self, tuple: &[usize]) -> i64 {
        tuple.iter().map(|&i| self.basis[i].1).sum()
    }

    fn beyond_truncation(&self, tuple: &[usize]) -> bool {
        match self.truncation {
            Some(b) => self.total_internal(tuple) > b,
            None => false,
        }
    }
}

/// A morphism f: source -> target with components f_n of bidegree (1-n, 0).
#[derive(Clone, Debug)]
pub struct AInftyMorphism {
    pub source: AInftyStructure,
    pub target: AInftyStructure,
    pub maps: BTreeMap<usize, MultiMap>,
}

impl AInftyMorphism {
    pub fn new(
        source: AInftyStructure,
        target: AInftyStructure,
        maps: BTreeMap<usize, MultiMap>,
    ) -> Result<AInftyMorphism, StructureError> {
        for (n, mm) in &maps {
            assert_eq!(mm.arity, *n);
            for (key, val) in &mm.table {
                let mut p = 0i64;
                let mut q = 0i64;
                for &i in key {
                    let (bp, bq) = *source.basis.get(i).ok_or(StructureError::IndexOutOfRange {
                        index: i,
                        size: source.basis.len(),
                    })?;
                    p += bp;
                    q += bq;
                }
                let (ep, eq) = (p + 1 - *n as i64, q);
                for (t, _) in val.iter() {
                    let (tp, tq) = *target.basis.get(t).ok_or(StructureError::IndexOutOfRange {
                        index: t,
                        size: target.basis.len(),
                    })?;
                    if (tp, tq) != (ep, eq) {
                        return Err(StructureError::BidegreeMismatch {
                            arity: *n,
                            tuple: key.clone(),
                            target: t,
                            tp,
                            tq,
                            ep,
                            eq,
                        });
                    }
                }
            }
        }
        // strict unitality of the morphism itself
        if let (Some(us), Some(ut)) = (source.unit(), target.unit()) {
            if let Some(f1) = maps.get(&1) {
                let img = f1.get(&[us]).cloned().unwrap_or_else(SparseVec::zero);
                if img != SparseVec::unit(ut, source.field.one()) {
                    return Err(StructureError::NonUnitalMorphism);
                }
            }
            for (n, mm) in &maps {
                if *n >= 2 {
                    for key in mm.table.keys() {
                        if key.contains(&us) {
                            return Err(StructureError::NonUnitalMorphism);
                        }
                    }
                }
            }
        }
        Ok(AInftyMorphism { source, target, maps })
    }

    /// The identity morphism on a structure.
    pub fn identity(s: &AInftyStructure) -> AInftyMorphism {
        let mut f1 = MultiMap::new(1);
        for i in 0..s.dim() {
            f1.insert(vec![i], SparseVec::unit(i, s.field.one()));
        }
        AInftyMorphism::new(s.clone(), s.clone(), BTreeMap::from([(1, f1)])).unwrap()
    }

    pub fn component(&self, n: usize) -> Option<&MultiMap> {
        self.maps.get(&n).filter(|m| !m.is_zero())
    }
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub tuple: Vec<usize>,
    pub residual: SparseVec,
}

/// Outcome of one identity or property check. Violations carry the full
/// residual vector; tuples whose total internal degree exceeds the truncation
/// bound are reported as unknown, never silently assumed zero.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub status: CheckStatus,
    pub violations: Vec<Violation>,
    pub unknown: Vec<Vec<usize>>,
    pub checked: usize,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn pass(name: impl Into<String>, checked: usize) -> CheckReport {
        CheckReport {
            name: name.into(),
            status: CheckStatus::Pass,
            violations: Vec::new(),
            unknown: Vec::new(),
            checked,
            notes: Vec::new(),
        }
    }

    pub fn inapplicable(name: impl Into<String>, note: impl Into<String>) -> CheckReport {
        CheckReport {
            name: name.into(),
            status: CheckStatus::Inapplicable,
            violations: Vec::new(),
            unknown: Vec::new(),
            checked: 0,
            notes: vec![note.into()],
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self.status, CheckStatus::Pass)
    }

    fn resolve(mut self) -> CheckReport {
        if !self.violations.is_empty() {
            self.status = CheckStatus::Fail;
        }
        self
    }
}

pub fn fmt_tuple(tuple: &[usize]) -> String {
    // one-based, matching the file format
    tuple.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

pub fn fmt_vec(field: &Field, v: &SparseVec) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    v.iter()
        .map(|(i, c)| format!("{}*{}", field.format_scalar(c), i + 1))
        .collect::<Vec<_>>()
        .join(" + ")
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            CheckStatus::Pass => {
                write!(f, "{}: pass (checked {} tuples", self.name, self.checked)?;
                if !self.unknown.is_empty() {
                    write!(f, ", {} unknown beyond truncation", self.unknown.len())?;
                }
                write!(f, ")")?;
            }
            CheckStatus::Fail => {
                writeln!(f, "{}: FAIL ({} violations)", self.name, self.violations.len())?;
                for v in self.violations.iter().take(5) {
                    write!(f, "  tuple [{}] residual {:?}", fmt_tuple(&v.tuple), v.residual)?;
                }
            }
            CheckStatus::Inapplicable => {
                write!(f, "{}: inapplicable", self.name)?;
            }
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// identity evaluation

/// Index of table entries by (slot position, basis index) for the join step.
struct SlotIndex<'a> {
    keys: Vec<&'a Vec<usize>>,
    by_slot: HashMap<(usize, usize), Vec<usize>>,
}

impl<'a> SlotIndex<'a> {
    fn new(mm: &'a MultiMap) -> SlotIndex<'a> {
        let keys: Vec<&Vec<usize>> = mm.table.keys().collect();
        let mut by_slot: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (kid, key) in keys.iter().enumerate() {
            for (pos, &idx) in key.iter().enumerate() {
                by_slot.entry((pos, idx)).or_default().push(kid);
            }
        }
        SlotIndex { keys, by_slot }
    }

    fn matching(&self, pos: usize, idx: usize) -> impl Iterator<Item = &Vec<usize>> + '_ {
        self.by_slot
            .get(&(pos, idx))
            .into_iter()
            .flatten()
            .map(move |kid| self.keys[*kid])
    }
}

/// The SI(n) residual on one basis tuple:
/// sum over n = i+t+j of (-1)^(i+jt) * koszul * m_(i+1+j)(.., m_t(..), ..).
pub fn si_residual(s: &AInftyStructure, xs: &[usize]) -> SparseVec {
    let n = xs.len();
    let field = s.field;
    let mut acc = SparseVec::zero();
    for (t, inner) in &s.maps {
        let t = *t;
        if t > n || inner.is_zero() {
            continue;
        }
        let l = n - t + 1;
        let Some(outer) = s.maps.get(&l) else { continue };
        for i in 0..=(n - t) {
            let j = n - t - i;
            let Some(val) = inner.get(&xs[i..i + t]) else { continue };
            let prefix_deg: i64 = xs[..i].iter().map(|&x| s.basis[x].0).sum();
            let sign = (i as i64) + (j as i64) * (t as i64) + (2 - t as i64) * prefix_deg;
            let sgn = field.sign(sign);
            let mut key: Vec<usize> = Vec::with_capacity(l);
            key.extend_from_slice(&xs[..i]);
            key.push(0);
            key.extend_from_slice(&xs[i + t..]);
            for (y, c) in val.iter() {
                key[i] = y;
                if let Some(out) = outer.get(&key) {
                    acc.add_scaled(&field, out, &field.mul(&sgn, c));
                }
            }
        }
    }
    acc
}

/// Candidate tuples on which SI(n) can possibly be nonzero: splices of an
/// inner table key into an outer table key. Violations only occur where at
/// least one term is nonzero, so this join is complete.
fn si_candidates(s: &AInftyStructure, n: usize) -> BTreeSet<Vec<usize>> {
    let mut cands = BTreeSet::new();
    for (t, inner) in &s.maps {
        let t = *t;
        if t > n || inner.is_zero() {
            continue;
        }
        let l = n - t + 1;
        let Some(outer) = s.maps.get(&l) else { continue };
        let outer_index = SlotIndex::new(outer);
        for (kin, vin) in &inner.table {
            for i in 0..=(n - t) {
                for (y, _) in vin.iter() {
                    for kout in outer_index.matching(i, y) {
                        let mut tuple = Vec::with_capacity(n);
                        tuple.extend_from_slice(&kout[..i]);
                        tuple.extend_from_slice(kin);
                        tuple.extend_from_slice(&kout[i + 1..]);
                        cands.insert(tuple);
                    }
                }
            }
        }
    }
    cands
}

/// Verifies the Stasheff identity SI(n) on every checkable basis tuple.
pub fn check_si(s: &AInftyStructure, n: usize) -> CheckReport {
    let name = format!("SI({n})");
    if n == 0 {
        return CheckReport::inapplicable(name, "n must be >= 1");
    }
    let mut report = CheckReport::pass(name, 0);
    for tuple in si_candidates(s, n) {
        if s.beyond_truncation(&tuple) {
            report.unknown.push(tuple);
            continue;
        }
        report.checked += 1;
        let r = si_residual(s, &tuple);
        if !r.is_zero() {
            report.violations.push(Violation { tuple, residual: r });
        }
    }
    report.resolve()
}

/// MI(n) residual (left minus right) on one source tuple.
pub fn mi_residual(f: &AInftyMorphism, xs: &[usize]) -> SparseVec {
    let n = xs.len();
    let field = f.source.field;
    let mut acc = SparseVec::zero();
    // left: sum (-1)^(i+jt) f_(i+1+j)(1^i x m_t x 1^j)
    for (t, inner) in &f.source.maps {
        let t = *t;
        if t > n || inner.is_zero() {
            continue;
        }
        let l = n - t + 1;
        let Some(fl) = f.maps.get(&l) else { continue };
        for i in 0..=(n - t) {
            let j = n - t - i;
            let Some(val) = inner.get(&xs[i..i + t]) else { continue };
            let prefix_deg: i64 = xs[..i].iter().map(|&x| f.source.basis[x].0).sum();
            let sign = (i as i64) + (j as i64) * (t as i64) + (2 - t as i64) * prefix_deg;
            let sgn = field.sign(sign);
            let mut key: Vec<usize> = Vec::with_capacity(l);
            key.extend_from_slice(&xs[..i]);
            key.push(0);
            key.extend_from_slice(&xs[i + t..]);
            for (y, c) in val.iter() {
                key[i] = y;
                if let Some(out) = fl.get(&key) {
                    acc.add_scaled(&field, out, &field.mul(&sgn, c));
                }
            }
        }
    }
    // right: sum (-1)^w m'_r(f_{i_1} x ... x f_{i_r})
    for r in 1..=n {
        let Some(mr) = f.target.maps.get(&r) else { continue };
        if mr.is_zero() {
            continue;
        }
        for comp in compositions(n, r) {
            if comp.iter().any(|i| f.maps.get(i).map_or(true, |m| m.is_zero())) {
                continue;
            }
            // w = (r-1)(i_1-1) + (r-2)(i_2-1) + ... + (i_{r-1}-1)
            let mut w = 0i64;
            for (u, iu) in comp.iter().enumerate() {
                w += (r as i64 - 1 - u as i64) * (*iu as i64 - 1);
            }
            // Koszul: each f_{i_v} (degree 1 - i_v) moves past the blocks before it
            let mut koszul = 0i64;
            let mut offset = 0usize;
            let mut block_deg_sum = 0i64;
            let mut parts: Vec<&SparseVec> = Vec::with_capacity(r);
            let mut ok = true;
            for (v, iv) in comp.iter().enumerate() {
                if v > 0 {
                    koszul += (1 - *iv as i64) * block_deg_sum;
                }
                let block = &xs[offset..offset + iv];
                block_deg_sum += block.iter().map(|&x| f.source.basis[x].0).sum::<i64>();
                offset += iv;
                match f.maps[iv].get(block) {
                    Some(val) => parts.push(val),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let sgn = field.neg(&field.sign(w + koszul)); // minus: residual is left - right
            let mut key = vec![0usize; r];
            expand_product(&field, &parts, 0, &mut key, &sgn, mr, &mut acc);
        }
    }
    acc
}

fn expand_product(
    field: &Field,
    parts: &[&SparseVec],
    pos: usize,
    key: &mut Vec<usize>,
    coeff: &FieldScalar,
    mr: &MultiMap,
    acc: &mut SparseVec,
) {
    if pos == parts.len() {
        if let Some(out) = mr.get(key) {
            acc.add_scaled(field, out, coeff);
        }
        return;
    }
    for (z, c) in parts[pos].iter() {
        key[pos] = z;
        expand_product(field, parts, pos + 1, key, &field.mul(coeff, c), mr, acc);
    }
}

/// Ordered compositions of n into r positive parts.
pub fn compositions(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r == 0 || r > n {
        return out;
    }
    let mut cur = vec![1usize; r];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        let remaining_min = cur.len() - 1 - pos;
        for k in 1..=(left - remaining_min) {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

fn mi_candidates(f: &AInftyMorphism, n: usize) -> BTreeSet<Vec<usize>> {
    let mut cands = BTreeSet::new();
    // left join: inner m_t key spliced into an f_l key
    for (t, inner) in &f.source.maps {
        let t = *t;
        if t > n || inner.is_zero() {
            continue;
        }
        let l = n - t + 1;
        let Some(fl) = f.maps.get(&l) else { continue };
        let fl_index = SlotIndex::new(fl);
        for (kin, vin) in &inner.table {
            for i in 0..=(n - t) {
                for (y, _) in vin.iter() {
                    for kout in fl_index.matching(i, y) {
                        let mut tuple = Vec::with_capacity(n);
                        tuple.extend_from_slice(&kout[..i]);
                        tuple.extend_from_slice(kin);
                        tuple.extend_from_slice(&kout[i + 1..]);
                        cands.insert(tuple);
                    }
                }
            }
        }
    }
    // right join: per m'_r entry, concatenations of f-preimages of its slots
    for r in 1..=n {
        let Some(mr) = f.target.maps.get(&r) else { continue };
        if mr.is_zero() {
            continue;
        }
        for comp in compositions(n, r) {
            if comp.iter().any(|i| f.maps.get(i).map_or(true, |m| m.is_zero())) {
                continue;
            }
            // reverse indices: output basis idx -> keys of f_{i_u} hitting it
            let rev: Vec<HashMap<usize, Vec<&Vec<usize>>>> = comp
                .iter()
                .map(|iu| {
                    let mut m: HashMap<usize, Vec<&Vec<usize>>> = HashMap::new();
                    for (k, v) in &f.maps[iu].table {
                        for (z, _) in v.iter() {
                            m.entry(z).or_default().push(k);
                        }
                    }
                    m
                })
                .collect();
            for key in mr.table.keys() {
                let choices: Vec<&Vec<&Vec<usize>>> = match key
                    .iter()
                    .enumerate()
                    .map(|(u, z)| rev[u].get(z))
                    .collect::<Option<Vec<_>>>()
                {
                    Some(c) => c,
                    None => continue,
                };
                let mut stack = vec![Vec::<usize>::new()];
                for ch in choices {
                    let mut next = Vec::new();
                    for partial in &stack {
                        for blk in ch {
                            let mut t = partial.clone();
                            t.extend_from_slice(blk);
                            next.push(t);
                        }
                    }
                    stack = next;
                }
                for t in stack {
                    if t.len() == n {
                        cands.insert(t);
                    }
                }
            }
        }
    }
    cands
}

/// Verifies the morphism identity MI(n) on every checkable tuple.
pub fn check_mi(f: &AInftyMorphism, n: usize) -> CheckReport {
    let name = format!("MI({n})");
    if n == 0 {
        return CheckReport::inapplicable(name, "n must be >= 1");
    }
    let mut report = CheckReport::pass(name, 0);
    for tuple in mi_candidates(f, n) {
        if f.source.beyond_truncation(&tuple) {
            report.unknown.push(tuple);
            continue;
        }
        report.checked += 1;
        let r = mi_residual(f, &tuple);
        if !r.is_zero() {
            report.violations.push(Violation { tuple, residual: r });
        }
    }
    report.resolve()
}

/// Full SI suite: SI(1)..SI(n_max). Every report must pass.
pub fn check_si_suite(s: &AInftyStructure, n_max: usize) -> Vec<CheckReport> {
    (1..=n_max).map(|n| check_si(s, n)).collect()
}

pub fn check_mi_suite(f: &AInftyMorphism, n_max: usize) -> Vec<CheckReport> {
    (1..=n_max).map(|n| check_mi(f, n)).collect()
}

/// Strict unitality: the (0,0) class is a two-sided m_2-identity and
/// annihilates every m_n with n != 2.
pub fn check_unitality(s: &AInftyStructure) -> CheckReport {
    let name = "unitality".to_string();
    let field = s.field;
    let Some(u) = s.unit() else {
        let mut r = CheckReport::pass(name, 0);
        r.status = CheckStatus::Fail;
        r.notes.push("no unit: the structure has no one-dimensional (0,0) component".into());
        return r;
    };
    let mut report = CheckReport::pass(name, 0);
    let empty = MultiMap::new(2);
    let m2 = s.maps.get(&2).unwrap_or(&empty);
    for x in 0..s.dim() {
        report.checked += 2;
        let expect = SparseVec::unit(x, field.one());
        for key in [vec![u, x], vec![x, u]] {
            let got = m2.get(&key).cloned().unwrap_or_else(SparseVec::zero);
            if got != expect {
                let mut residual = got;
                residual.add_scaled(&field, &expect, &field.from_i64(-1));
                report.violations.push(Violation { tuple: key, residual });
            }
        }
    }
    for (n, mm) in &s.maps {
        if *n == 2 {
            continue;
        }
        for (key, val) in &mm.table {
            if key.contains(&u) {
                report.checked += 1;
                report.violations.push(Violation { tuple: key.clone(), residual: val.clone() });
            }
        }
    }
    report.resolve()
}

// ---------------------------------------------------------------------------
// strictification (quasi-isomorphism -> strict isomorphism)

/// Global matrix of f_1 over the basis indices (bidegree-preserving).
pub fn f1_matrix(f: &AInftyMorphism) -> SparseMatrix {
    let field = f.source.field;
    let n = f.source.dim();
    let mut cols: Vec<SparseVec> = Vec::with_capacity(n);
    let empty = MultiMap::new(1);
    let f1 = f.maps.get(&1).unwrap_or(&empty);
    for i in 0..n {
        cols.push(f1.get(&[i]).cloned().unwrap_or_else(SparseVec::zero));
    }
    SparseMatrix::from_columns(field, f.target.dim(), &cols)
}

pub fn invert(m: &SparseMatrix) -> Option<SparseMatrix> {
    if m.rows != m.cols {
        return None;
    }
    let aug = m.hcat(&SparseMatrix::identity(m.field, m.rows));
    let (r, pivots) = rref(&aug);
    if pivots.len() != m.rows || pivots.iter().enumerate().any(|(k, p)| *p != k) {
        return None;
    }
    let mut rows = Vec::with_capacity(m.rows);
    for i in 0..m.rows {
        let mut v = SparseVec::zero();
        for (j, c) in r.row(i).iter() {
            if j >= m.cols {
                v.add_entry(&m.field, j - m.cols, c);
            }
        }
        rows.push(v);
    }
    Some(SparseMatrix::from_rows(m.field, m.cols, rows))
}

/// Builds the conjugated structure m''_i := f_1 m_i (f_1^{-1} x ... x f_1^{-1})
/// on the target space, plus the strict morphism g with g_1 = f_1. Both are
/// certified by the caller via `check_si` / `check_mi`.
pub fn strictify(
    f: &AInftyMorphism,
) -> Result<(AInftyStructure, AInftyMorphism), StructureError> {
    let field = f.source.field;
    // source and target must agree bidegree-wise and f_1 must be invertible
    let bds: BTreeSet<(i64, i64)> =
        f.source.bidegrees().union(&f.target.bidegrees()).copied().collect();
    for bd in bds {
        let ds = f.source.indices_at(bd.0, bd.1).len();
        let dt = f.target.indices_at(bd.0, bd.1).len();
        if ds != dt {
            return Err(StructureError::DimensionMismatch { p: bd.0, q: bd.1 });
        }
    }
    let f1m = f1_matrix(f);
    let f1inv = match invert(&f1m) {
        Some(inv) => inv,
        None => {
            // locate a non-invertible bidegree for the error message
            for (p, q) in f.source.bidegrees() {
                let idx = f.source.indices_at(p, q);
                let tgt = f.target.indices_at(p, q);
                let mut block = SparseMatrix::zero(field, tgt.len(), idx.len());
                for (jj, j) in idx.iter().enumerate() {
                    for (ii, i) in tgt.iter().enumerate() {
                        block.set(ii, jj, f1m.get(*i, *j));
                    }
                }
                if crate::linalg::rank(&block) < idx.len() {
                    return Err(StructureError::NonInvertible { p, q });
                }
            }
            return Err(StructureError::NonInvertible { p: 0, q: 0 });
        }
    };

    let mut new_maps: BTreeMap<usize, MultiMap> = BTreeMap::new();
    for (n, mm) in &f.source.maps {
        if mm.is_zero() {
            continue;
        }
        let mut out = MultiMap::new(*n);
        // bidegree profiles on which m_n is supported
        let profiles: BTreeSet<Vec<(i64, i64)>> = mm
            .table
            .keys()
            .map(|key| key.iter().map(|&i| f.source.basis[i]).collect())
            .collect();
        for profile in profiles {
            let slots: Vec<Vec<usize>> =
                profile.iter().map(|(p, q)| f.target.indices_at(*p, *q)).collect();
            let mut tuple = vec![0usize; *n];
            build_conjugated(&field, mm, &f1m, &f1inv, &slots, 0, &mut tuple, &mut out);
        }
        if !out.is_zero() {
            new_maps.insert(*n, out);
        }
    }
    let strict_target =
        AInftyStructure::new(field, f.target.basis.clone(), new_maps, f.source.truncation)?;
    let mut g1 = MultiMap::new(1);
    for i in 0..f.source.dim() {
        let col = f1m.column(i);
        g1.insert(vec![i], col);
    }
    let g = AInftyMorphism::new(f.source.clone(), strict_target.clone(), BTreeMap::from([(1, g1)]))?;
    Ok((strict_target, g))
}

#[allow(clippy::too_many_arguments)]
fn build_conjugated(
    field: &Field,
    mm: &MultiMap,
    f1m: &SparseMatrix,
    f1inv: &SparseMatrix,
    slots: &[Vec<usize>],
    pos: usize,
    tuple: &mut Vec<usize>,
    out: &mut MultiMap,
) {
    if pos == slots.len() {
        let args: Vec<SparseVec> =
            tuple.iter().map(|&y| f1inv.apply(&SparseVec::unit(y, field.one()))).collect();
        let inner = mm.apply_multilinear(field, &args);
        if inner.is_zero() {
            return;
        }
        let v = f1m.apply(&inner);
        if !v.is_zero() {
            out.insert(tuple.clone(), v);
        }
        return;
    }
    for &y in &slots[pos] {
        tuple[pos] = y;
        build_conjugated(field, mm, f1m, f1inv, slots, pos + 1, tuple, out);
    }
}

// ---------------------------------------------------------------------------
// two-higher-multiplication equivalence (support {m_2, m_d, m_t})

/// For a structure with multiplication support in {2, d, t} (2 < d < t,
/// 2 + t != 2d), exactly six Stasheff identities are non-vacuous:
/// SI(3), SI(d+1), SI(t+1), SI(2d-1), SI(d+t-1), SI(2t-1). Verifies those six
/// and confirms by arity accounting that every other SI(n) is vacuous.
pub fn check_two_higher_equivalence(
    s: &AInftyStructure,
    d: usize,
    t: usize,
) -> Result<Vec<CheckReport>, String> {
    if !(2 < d && d < t) {
        return Err(format!("need 2 < d < t, got d={d}, t={t}"));
    }
    if 2 + t == 2 * d {
        return Err(format!("need 2 + t != 2d, got d={d}, t={t}"));
    }
    let support = s.support();
    if support.iter().any(|n| ![2, d, t].contains(n)) {
        return Err(format!("multiplication support {support:?} is not within {{2, {d}, {t}}}"));
    }
    let six: BTreeSet<usize> = [3, d + 1, t + 1, 2 * d - 1, d + t - 1, 2 * t - 1].into();
    // arity accounting: SI(n) is non-vacuous only when n = a + b - 1 for two
    // supported arities a, b
    let mut nonvacuous = BTreeSet::new();
    for a in [2, d, t] {
        for b in [2, d, t] {
            nonvacuous.insert(a + b - 1);
        }
    }
    if !nonvacuous.is_subset(&six) {
        return Err(format!("arity accounting mismatch: {nonvacuous:?} vs {six:?}"));
    }
    let mut reports: Vec<CheckReport> = six.iter().map(|n| check_si(s, *n)).collect();
    // spot-check a few allegedly vacuous identities numerically
    let mut spot = Vec::new();
    for n in 2..=(2 * t) {
        if !six.contains(&n) {
            spot.push(n);
        }
    }
    for n in spot.into_iter().take(4) {
        let mut r = check_si(s, n);
        r.notes.push("vacuous by arity accounting".into());
        reports.push(r);
    }
    Ok(reports)
}
