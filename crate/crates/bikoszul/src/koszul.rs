//! Degree-distribution machinery: the two-valued distribution delta_d, the
//! Koszul-type classifier, the admissible-arity enumerator (re-deriving the
//! solution lists from the three inequality systems), and the admissibility
//! tables for reduced and truncated structures.

use crate::ainfty::{AInftyStructure, CheckReport, CheckStatus, Violation};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Observed degrees (with multiplicities) per cohomological degree, together
/// with the truncation bound the observation is valid up to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DegreeDistribution {
    pub bound: i64,
    dims: BTreeMap<i64, BTreeMap<i64, usize>>,
}

impl DegreeDistribution {
    pub fn new(bound: i64) -> DegreeDistribution {
        DegreeDistribution { bound, dims: BTreeMap::new() }
    }

    pub fn insert(&mut self, p: i64, q: i64, dim: usize) {
        if dim > 0 {
            self.dims.entry(p).or_default().insert(q, dim);
        }
    }

    pub fn degrees(&self, p: i64) -> BTreeSet<i64> {
        self.dims.get(&p).map(|m| m.keys().copied().collect()).unwrap_or_default()
    }

    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.dims.get(&p).and_then(|m| m.get(&q)).copied().unwrap_or(0)
    }

    pub fn rows(&self) -> impl Iterator<Item = (i64, &BTreeMap<i64, usize>)> {
        self.dims.iter().map(|(p, m)| (*p, m))
    }

    pub fn max_p(&self) -> i64 {
        self.dims.keys().next_back().copied().unwrap_or(0)
    }
}

/// delta_d(n) from the three residue cases, as the ordered pair.
pub fn delta_d(d: i64, n: i64) -> (i64, i64) {
    assert!(d >= 2 && n >= 0);
    match n % 3 {
        0 => (2 * d * (n / 3), 2 * d * (n / 3)),
        1 => (2 * d * ((n - 1) / 3) + 1, 2 * d * ((n - 1) / 3) + 1),
        _ => (2 * d * ((n - 2) / 3) + d, 2 * d * ((n - 2) / 3) + d + 1),
    }
}

/// delta_d(n) as a set (the pair collapses when both entries agree).
pub fn delta_d_set(d: i64, n: i64) -> BTreeSet<i64> {
    let (a, b) = delta_d(d, n);
    BTreeSet::from([a, b])
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Classification {
    Koszul { terminates: bool },
    PKoszul { p: i64 },
    BiKoszul { d: i64 },
    Other,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassifyResult {
    pub class: Classification,
    pub bound: i64,
}

impl fmt::Display for ClassifyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.class {
            Classification::Koszul { terminates: true } => {
                write!(f, "Koszul (resolution terminates at p=1)")
            }
            Classification::Koszul { terminates: false } => {
                write!(f, "Koszul up to degree {}", self.bound)
            }
            Classification::PKoszul { p } => write!(f, "{p}-Koszul up to degree {}", self.bound),
            Classification::BiKoszul { d } => {
                write!(f, "bi-Koszul (d={d}) up to degree {}", self.bound)
            }
            Classification::Other => {
                write!(f, "other (no recognized pattern) up to degree {}", self.bound)
            }
        }
    }
}

/// Pure p-Koszul degree pattern: even n -> (n/2)p, odd n -> ((n-1)/2)p + 1.
fn p_koszul_degree(p: i64, n: i64) -> i64 {
    if n % 2 == 0 {
        (n / 2) * p
    } else {
        ((n - 1) / 2) * p + 1
    }
}

/// Classifies an observed distribution. Truncation can refute the infinite
/// conditions but never certify them, so every verdict carries the bound.
pub fn classify(obs: &DegreeDistribution, resolution_terminated: bool) -> ClassifyResult {
    let bound = obs.bound;
    let max_p = obs.max_p();
    let koszul = (0..=max_p).all(|n| obs.degrees(n).iter().all(|q| *q == n));
    if koszul {
        return ClassifyResult { class: Classification::Koszul { terminates: resolution_terminated }, bound };
    }
    // p-Koszul with detected p from the degree of E^2
    let e2 = obs.degrees(2);
    if e2.len() == 1 {
        let p0 = *e2.iter().next().unwrap();
        if p0 >= 3 {
            let ok = (0..=max_p).all(|n| obs.degrees(n).iter().all(|q| *q == p_koszul_degree(p0, n)));
            if ok {
                return ClassifyResult { class: Classification::PKoszul { p: p0 }, bound };
            }
        }
    }
    // bi-Koszul with detected d: candidates from the E^2 degrees
    let mut candidates: BTreeSet<i64> = BTreeSet::new();
    for q in &e2 {
        if *q >= 2 {
            candidates.insert(*q);
        }
        if *q - 1 >= 2 {
            candidates.insert(*q - 1);
        }
    }
    for d in candidates {
        if !e2.iter().all(|q| *q == d || *q == d + 1) {
            continue;
        }
        let ok = (0..=max_p).all(|n| obs.degrees(n).is_subset(&delta_d_set(d, n)));
        if ok {
            return ClassifyResult { class: Classification::BiKoszul { d }, bound };
        }
    }
    ClassifyResult { class: Classification::Other, bound }
}

// ---------------------------------------------------------------------------
// arity enumeration (the three inequality systems)

/// One solution (k, beta, l) of a case's inequality system.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct AritySolution {
    pub case: usize,
    /// internal-degree shift of the case: 0, 1, d or d+1
    pub shift: Shift,
    pub k: i64,
    pub beta: i64,
    pub arity: i64,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Shift {
    Zero,
    One,
    D,
    D1,
}

impl Shift {
    fn value(&self, d: i64) -> i64 {
        match self {
            Shift::Zero => 0,
            Shift::One => 1,
            Shift::D => d,
            Shift::D1 => d + 1,
        }
    }
}

/// Re-derives, by direct enumeration of the inequality systems, the solutions
/// (k, beta, l) and the admissible arity set for a concrete d.
///
/// The bounds are forced: T <= alpha = l - beta gives 3k + r <= beta + 2, and
/// beta/2 <= k makes beta <= 4; generous margins are used below.
pub fn enumerate_arities(d: i64) -> (BTreeSet<i64>, Vec<AritySolution>) {
    assert!(d >= 2);
    let mut solutions = Vec::new();
    let cases: [(usize, i64, Vec<Shift>); 3] = [
        (1, 0, vec![Shift::Zero]),
        (2, 1, vec![Shift::One]),
        (3, 2, vec![Shift::D, Shift::D1]),
    ];
    for (case, r, shifts) in cases {
        for shift in shifts {
            let sh = shift.value(d);
            let mut found = Vec::new();
            for beta in 0..=8i64 {
                for k in 0..=3i64 {
                    for t_sum in 0..=(7 * d + 1) {
                        let l = t_sum + 2 * beta + 2 - 3 * k - r;
                        if l < 2 || beta > l || t_sum > l - beta {
                            continue;
                        }
                        let lhs = t_sum + d * beta;
                        let target = 2 * k * d + sh;
                        if lhs <= target && target <= lhs + beta {
                            found.push(AritySolution { case, shift, k, beta, arity: l });
                        }
                    }
                }
            }
            found.sort();
            found.dedup();
            solutions.extend(found);
        }
    }
    let arities = solutions.iter().map(|s| s.arity).collect();
    (arities, solutions)
}

/// A symbolic arity: a constant or d + offset.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum SymArity {
    Const(i64),
    DPlus(i64),
}

impl fmt::Display for SymArity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymArity::Const(c) => write!(f, "{c}"),
            SymArity::DPlus(0) => write!(f, "d"),
            SymArity::DPlus(o) => write!(f, "d+{o}"),
        }
    }
}

/// Symbolic solution lists for d treated as >= 5, one list per case
/// (the case-3 list concatenates the two shift sub-systems, duplicates kept).
pub fn enumerate_arities_symbolic() -> [Vec<(i64, i64, SymArity)>; 3] {
    // run the concrete enumerator at several large primes-apart values and
    // check the symbolic shape is stable
    let symbolize = |d: i64| -> [Vec<(i64, i64, SymArity)>; 3] {
        let (_, sols) = enumerate_arities(d);
        let mut out: [Vec<(i64, i64, SymArity)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for s in sols {
            let arity = if s.arity == d {
                SymArity::DPlus(0)
            } else if s.arity == d + 1 {
                SymArity::DPlus(1)
            } else {
                SymArity::Const(s.arity)
            };
            out[s.case - 1].push((s.k, s.beta, arity));
        }
        out
    };
    let a = symbolize(101);
    let b = symbolize(37);
    assert_eq!(a, b, "symbolic solution lists are not stable in d");
    a
}

// ---------------------------------------------------------------------------
// component classes and admissibility tables

/// The four component classes of a bi-Koszul Ext-algebra.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum ComponentClass {
    /// p = 3k, q = 2dk
    E0,
    /// p = 3k+1, q = 2dk+1
    E1,
    /// p = 3k+2, q = 2dk+d
    E2d,
    /// p = 3k+2, q = 2dk+d+1
    E2d1,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 4] =
        [ComponentClass::E0, ComponentClass::E1, ComponentClass::E2d, ComponentClass::E2d1];

    pub fn residue(&self) -> i64 {
        match self {
            ComponentClass::E0 => 0,
            ComponentClass::E1 => 1,
            ComponentClass::E2d | ComponentClass::E2d1 => 2,
        }
    }

    /// internal-degree offset as a linear form c + e*d
    pub fn offset(&self) -> (i64, i64) {
        match self {
            ComponentClass::E0 => (0, 0),
            ComponentClass::E1 => (1, 0),
            ComponentClass::E2d => (0, 1),
            ComponentClass::E2d1 => (1, 1),
        }
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentClass::E0 => write!(f, "E[0]"),
            ComponentClass::E1 => write!(f, "E[1]"),
            ComponentClass::E2d => write!(f, "E[2]d"),
            ComponentClass::E2d1 => write!(f, "E[2]d+1"),
        }
    }
}

/// The class of a bidegree under the delta_d grading, if any.
pub fn bidegree_class(d: i64, p: i64, q: i64) -> Option<ComponentClass> {
    if p < 0 {
        return None;
    }
    let k = p / 3;
    let o = q - 2 * d * k;
    match p % 3 {
        0 => (o == 0).then_some(ComponentClass::E0),
        1 => (o == 1).then_some(ComponentClass::E1),
        _ => {
            if o == d {
                Some(ComponentClass::E2d)
            } else if o == d + 1 {
                Some(ComponentClass::E2d1)
            } else {
                None
            }
        }
    }
}

/// A table row: an input class multiset (sorted) and the target class.
/// Permutations of the inputs are implied.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TableRow {
    pub arity: usize,
    pub inputs: Vec<ComponentClass>,
    pub target: ComponentClass,
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {} : ", self.arity)?;
        for (i, c) in self.inputs.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " -> {}", self.target)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdmissibilityTable {
    pub d: i64,
    pub rows: BTreeSet<TableRow>,
}

impl AdmissibilityTable {
    pub fn permits(&self, arity: usize, inputs: &[ComponentClass], target: ComponentClass) -> bool {
        let mut sorted = inputs.to_vec();
        sorted.sort();
        self.rows.contains(&TableRow { arity, inputs: sorted, target })
    }
}

/// Class-level bidegree consistency at a concrete d: given an input multiset,
/// the target class the images must land in, if any. Concrete evaluation is
/// the correct derivation even for generic d, because rows of arity d carry
/// their d-dependence in the input count; stability across d >= 5 is
/// asserted by the tests.
fn consistent_target(inputs: &[ComponentClass], arity: usize, d: i64) -> Vec<ComponentClass> {
    let sum_r: i64 = inputs.iter().map(|c| c.residue()).sum();
    let sum_o: i64 = inputs.iter().map(|c| { let (oc, od) = c.offset(); oc + od * d }).sum();
    let mut out = Vec::new();
    for target in ComponentClass::ALL {
        let r = target.residue();
        let num = sum_r + 2 - arity as i64 - r;
        if num % 3 != 0 {
            continue;
        }
        let m = num / 3;
        // required offset: sum_o - 2d*m must equal the target offset
        let (tc, td) = target.offset();
        if sum_o - 2 * d * m == tc + td * d {
            out.push(target);
        }
    }
    out
}

fn multisets(classes: &[ComponentClass], size: usize) -> Vec<Vec<ComponentClass>> {
    fn rec(
        classes: &[ComponentClass],
        start: usize,
        size: usize,
        cur: &mut Vec<ComponentClass>,
        out: &mut Vec<Vec<ComponentClass>>,
    ) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..classes.len() {
            cur.push(classes[i]);
            rec(classes, i, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(classes, 0, size, &mut Vec::new(), &mut out);
    out
}

/// Derives the full admissibility table for the multiplications of a reduced
/// structure: all class-consistent rows over the admissible arity set. For
/// d >= 5 this reproduces the five-multiplication table; for d in {2,3,4}
/// the merged-arity variants are derived, not assumed.
pub fn admissible_components(d: i64) -> AdmissibilityTable {
    assert!(d >= 2);
    let (arities, _) = enumerate_arities(d);
    let mut rows = BTreeSet::new();
    for l in &arities {
        let l = *l as usize;
        for inputs in multisets(&ComponentClass::ALL, l) {
            for target in consistent_target(&inputs, l, d) {
                rows.insert(TableRow { arity: l, inputs: inputs.clone(), target });
            }
        }
    }
    AdmissibilityTable { d, rows }
}

/// The truncated component table: supports only m_2, m_d, m_d+1
/// with the restricted component rows.
pub fn truncated_table(d: i64) -> AdmissibilityTable {
    assert!(d >= 3);
    use ComponentClass::*;
    let mut rows = BTreeSet::new();
    let mut add = |arity: usize, mut inputs: Vec<ComponentClass>, target: ComponentClass| {
        inputs.sort();
        rows.insert(TableRow { arity, inputs, target });
    };
    // m_2 rows
    add(2, vec![E0, E0], E0);
    add(2, vec![E0, E1], E1);
    add(2, vec![E2d, E2d1], E1);
    add(2, vec![E0, E2d], E2d);
    add(2, vec![E0, E2d1], E2d1);
    // m_d rows
    let du = d as usize;
    let mut md_in = vec![E1; du - 1];
    md_in.push(E2d1);
    add(du, md_in, E0);
    add(du, vec![E1; du], E2d);
    // m_{d+1} rows
    let mut md1_in = vec![E1; du];
    md1_in.push(E2d);
    add(du + 1, md1_in, E0);
    add(du + 1, vec![E1; du + 1], E2d1);
    AdmissibilityTable { d, rows }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum KoszulError {
    #[error("basis bidegree ({p},{q}) lies outside all four delta_{d} component classes")]
    ComponentClassUndefined { d: i64, p: i64, q: i64 },
}

fn check_against_table(
    s: &AInftyStructure,
    d: i64,
    table: &AdmissibilityTable,
    name: &str,
    allowed_arities: Option<&BTreeSet<usize>>,
) -> Result<CheckReport, KoszulError> {
    let classes: Vec<ComponentClass> = s
        .basis
        .iter()
        .map(|(p, q)| {
            bidegree_class(d, *p, *q)
                .ok_or(KoszulError::ComponentClassUndefined { d, p: *p, q: *q })
        })
        .collect::<Result<_, _>>()?;
    let mut report = CheckReport::pass(name, 0);
    for (n, mm) in &s.maps {
        for (key, val) in &mm.table {
            report.checked += 1;
            if let Some(allowed) = allowed_arities {
                if !allowed.contains(n) {
                    report.violations.push(Violation { tuple: key.clone(), residual: val.clone() });
                    continue;
                }
            }
            let inputs: Vec<ComponentClass> = key.iter().map(|&i| classes[i]).collect();
            let ok = val.iter().all(|(y, _)| table.permits(*n, &inputs, classes[y]));
            if !ok {
                report.violations.push(Violation { tuple: key.clone(), residual: val.clone() });
            }
        }
    }
    Ok(report.finish())
}

impl CheckReport {
    fn finish(mut self) -> CheckReport {
        if !self.violations.is_empty() {
            self.status = CheckStatus::Fail;
        }
        self
    }
}

/// Every nonzero multiplication component must match an admissibility row.
pub fn is_reduced(s: &AInftyStructure, d: i64) -> Result<CheckReport, KoszulError> {
    let table = admissible_components(d);
    let (arities, _) = enumerate_arities(d);
    let allowed: BTreeSet<usize> = arities.iter().map(|a| *a as usize).collect();
    check_against_table(s, d, &table, "reduced", Some(&allowed))
}

/// Multiplication support within {2, d, d+1} and components per the
/// truncated table.
pub fn is_truncated(s: &AInftyStructure, d: i64) -> Result<CheckReport, KoszulError> {
    let table = truncated_table(d);
    let allowed: BTreeSet<usize> = [2usize, d as usize, d as usize + 1].into();
    check_against_table(s, d, &table, "truncated", Some(&allowed))
}

/// Infers d from the internal degrees of E^2: {d, d+1} or a singleton.
pub fn infer_d(s: &AInftyStructure) -> Option<i64> {
    let mut qs: BTreeSet<i64> = BTreeSet::new();
    for (p, q) in &s.basis {
        if *p == 2 {
            qs.insert(*q);
        }
    }
    match qs.len() {
        1 => {
            let q = *qs.iter().next().unwrap();
            (q >= 2).then_some(q)
        }
        2 => {
            let v: Vec<i64> = qs.into_iter().collect();
            (v[1] == v[0] + 1 && v[0] >= 2).then_some(v[0])
        }
        _ => None,
    }
}
