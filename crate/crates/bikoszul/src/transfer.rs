//! Homotopy transfer: the minimal A-infinity structure on the cohomology of
//! the dual-bar DG algebra, via the Merkulov recursion
//!
//!   lambda_n = sum over s+t=n, s,t >= 1 of (-1)^(s+1) mu(G lambda_s (x) G lambda_t),
//!
//! with the convention G lambda_1 = -id on the leaves, and
//! m_n = pr . lambda_n . iota^(x n). Evaluating a tensor product of maps on
//! elements contributes the Koszul sign (-1)^(|G lambda_t| * |left block|)
//! with |G lambda_t| = 1 - t and degrees cohomological. The SI suite of
//! [`crate::ainfty`] is the ground truth certifying this sign convention.

use crate::ainfty::{AInftyStructure, MultiMap, StructureError};
use crate::bar::{cohomology_and_retraction, BarVec, BigradedSpace, DualBarComplex, Retraction};
use crate::koszul::DegreeDistribution;
use crate::linalg::SparseVec;
use crate::presentation::{Presentation, PresentationError};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

/// The transferred structure together with the bidegree layout of its basis.
pub struct Transferred {
    pub structure: AInftyStructure,
    /// basis index -> (p, q, position within the bidegree)
    pub layout: Vec<(i64, i64, usize)>,
}

/// Memoized evaluation of the recursion on one input tuple.
struct LambdaCtx<'a> {
    complex: &'a DualBarComplex,
    retr: &'a Retraction,
    inputs: Vec<BarVec>,
    lambda: HashMap<(usize, usize), BarVec>,
    glambda: HashMap<(usize, usize), BarVec>,
}

impl<'a> LambdaCtx<'a> {
    fn new(complex: &'a DualBarComplex, retr: &'a Retraction, inputs: Vec<BarVec>) -> Self {
        LambdaCtx { complex, retr, inputs, lambda: HashMap::new(), glambda: HashMap::new() }
    }

    fn coh_deg_sum(&self, lo: usize, hi: usize) -> i64 {
        self.inputs[lo..hi].iter().map(|x| x.p).sum()
    }

    fn g_lambda(&mut self, lo: usize, hi: usize) -> BarVec {
        if let Some(v) = self.glambda.get(&(lo, hi)) {
            return v.clone();
        }
        let v = if hi - lo == 1 {
            self.inputs[lo].neg(&self.complex.field)
        } else {
            let l = self.lambda(lo, hi);
            self.retr.g(&l)
        };
        self.glambda.insert((lo, hi), v.clone());
        v
    }

    fn lambda(&mut self, lo: usize, hi: usize) -> BarVec {
        if let Some(v) = self.lambda.get(&(lo, hi)) {
            return v.clone();
        }
        let n = hi - lo;
        assert!(n >= 2);
        let field = self.complex.field;
        let p_out: i64 = self.coh_deg_sum(lo, hi) + 2 - n as i64;
        let q_out: i64 = self.inputs[lo..hi].iter().map(|x| x.q).sum();
        let mut acc = BarVec::zero(p_out, q_out);
        for mid in (lo + 1)..hi {
            let s = mid - lo;
            let t = hi - mid;
            let left = self.g_lambda(lo, mid);
            let right = self.g_lambda(mid, hi);
            if left.is_zero() || right.is_zero() {
                continue;
            }
            // (-1)^(s+1) and the Koszul sign for moving G lambda_t (degree
            // 1 - t) past the left block of inputs
            let koszul = (1 - t as i64) * self.coh_deg_sum(lo, mid);
            let sign = field.sign(s as i64 + 1 + koszul);
            let prod = self.complex.product(&left, &right);
            acc.v.add_scaled(&field, &prod.v, &sign);
        }
        self.lambda.insert((lo, hi), acc.clone());
        acc
    }
}

/// Transfers the minimal structure (m_1 = 0, m_2 induced by the cup product)
/// with all m_n, n <= n_max, on every basis tuple within the truncation.
pub fn merkulov_transfer(
    complex: &Rc<DualBarComplex>,
    retr: &Retraction,
    n_max: usize,
) -> Result<Transferred, StructureError> {
    let field = complex.field;
    let h = retr.cohomology();
    // basis layout sorted by bidegree; (0,0) lands first and is the unit
    let mut layout: Vec<(i64, i64, usize)> = Vec::new();
    for ((p, q), d) in h.support() {
        for k in 0..d {
            layout.push((p, q, k));
        }
    }
    layout.sort();
    let index_of: HashMap<(i64, i64, usize), usize> =
        layout.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let basis: Vec<(i64, i64)> = layout.iter().map(|(p, q, _)| (*p, *q)).collect();

    // non-unit support bidegrees for tuple enumeration
    let support: Vec<((i64, i64), usize)> =
        h.support().filter(|((p, q), _)| !(*p == 0 && *q == 0)).collect();

    let mut maps: BTreeMap<usize, MultiMap> = BTreeMap::new();
    for n in 2..=n_max {
        let mut mm = MultiMap::new(n);
        let mut profile: Vec<(i64, i64)> = Vec::with_capacity(n);
        enumerate_profiles(&h, &support, complex.dmax, n, n == 2, &mut profile, &mut |profile| {
            let p_out: i64 = profile.iter().map(|(p, _)| p).sum::<i64>() + 2 - n as i64;
            let q_out: i64 = profile.iter().map(|(_, q)| q).sum();
            if h.dim(p_out, q_out) == 0 {
                return;
            }
            // all index tuples within this bidegree profile
            let dims: Vec<usize> = profile.iter().map(|(p, q)| h.dim(*p, *q)).collect();
            let mut tuple = vec![0usize; n];
            loop {
                let inputs: Vec<BarVec> = profile
                    .iter()
                    .zip(&tuple)
                    .map(|((p, q), k)| retr.iota(*p, *q, *k))
                    .collect();
                let mut ctx = LambdaCtx::new(complex, retr, inputs);
                let lam = ctx.lambda(0, n);
                let coords = retr.project(&lam);
                if !coords.is_zero() {
                    let key: Vec<usize> = profile
                        .iter()
                        .zip(&tuple)
                        .map(|((p, q), k)| index_of[&(*p, *q, *k)])
                        .collect();
                    let value = SparseVec::from_entries(
                        &field,
                        coords.iter().map(|(k, c)| (index_of[&(p_out, q_out, k)], c.clone())),
                    );
                    mm.insert(key, value);
                }
                // advance the odometer
                let mut pos = n;
                loop {
                    if pos == 0 {
                        return;
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < dims[pos] {
                        break;
                    }
                    tuple[pos] = 0;
                }
            }
        });
        if !mm.is_zero() {
            maps.insert(n, mm);
        }
    }
    let structure = AInftyStructure::new(field, basis, maps, Some(complex.dmax))?;
    Ok(Transferred { structure, layout })
}

/// Enumerates bidegree profiles of length n with total internal degree within
/// the truncation. The unit bidegree (0,0) participates only for n = 2, where
/// the transferred m_2 carries the strict unit action.
fn enumerate_profiles(
    h: &BigradedSpace,
    support: &[((i64, i64), usize)],
    dmax: i64,
    n: usize,
    with_unit: bool,
    profile: &mut Vec<(i64, i64)>,
    f: &mut impl FnMut(&[(i64, i64)]),
) {
    if profile.len() == n {
        f(profile);
        return;
    }
    let used: i64 = profile.iter().map(|(_, q)| q).sum();
    // later slots need at least internal degree 1 each, unless the unit may
    // fill them
    let remaining = if with_unit { 0 } else { (n - profile.len() - 1) as i64 };
    if with_unit && h.dim(0, 0) > 0 {
        profile.push((0, 0));
        enumerate_profiles(h, support, dmax, n, with_unit, profile, f);
        profile.pop();
    }
    for ((p, q), _) in support {
        if used + q + remaining > dmax {
            continue;
        }
        profile.push((*p, *q));
        enumerate_profiles(h, support, dmax, n, with_unit, profile, f);
        profile.pop();
    }
}

/// Builds everything from a presentation: complex, cohomology, transfer.
pub fn transfer_presentation(
    pres: Rc<Presentation>,
    n_max: usize,
) -> Result<Transferred, TransferError> {
    let complex = crate::bar::build_dual_bar(pres)?;
    let (_, retr) = cohomology_and_retraction(&complex);
    let t = merkulov_transfer(&complex, &retr, n_max)?;
    Ok(t)
}

#[derive(thiserror::Error, Debug)]
pub enum TransferError {
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Observed Ext dimensions per bidegree, read off the dual-bar cohomology.
pub fn tor_dimensions(pres: Rc<Presentation>) -> Result<DegreeDistribution, PresentationError> {
    let complex = crate::bar::build_dual_bar(pres)?;
    let (h, _) = cohomology_and_retraction(&complex);
    let mut dist = DegreeDistribution::new(complex.dmax);
    for ((p, q), d) in h.support() {
        dist.insert(p, q, d);
    }
    Ok(dist)
}
