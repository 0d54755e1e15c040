//! Synthetic truncated instances built from the truncated component table.
//!
//! One-dimensional components per class and level:
//!   u_k at (3k, 2dk), a_k at (3k+1, 2dk+1),
//!   b_k at (3k+2, 2dk+d), c_k at (3k+2, 2dk+d+1),
//! with u_0 the unit. The multiplication coefficients carry the unique sign
//! twists compatible with the Stasheff identities for this support:
//!
//!   a_j * u_k = (-1)^k a_{j+k},          u_k * a_j = a_{j+k},
//!   u_k * b_j = b_j * u_k = (-1)^(dk) b_{j+k},
//!   u_k * c_j = c_j * u_k = (-1)^((d+1)k) c_{j+k},
//!   m_d(a_{i_1},...,a_{i_d}) = (-1)^(i_2 + i_4 + ...) b_{sum i},
//!   m_{d+1}(a_{i_1},...,a_{i_{d+1}}) = (-1)^(i_2 + i_4 + ...) c_{sum i},
//!
//! and no products between the b- and c-lines. The cross-component families
//! of m_d and m_{d+1} vanish, which makes the decompose/glue round trip an
//! exact identity. The full SI suite is certified in the tests.

use crate::ainfty::{AInftyStructure, MultiMap};
use crate::field::Field;
use crate::linalg::SparseVec;
use std::collections::BTreeMap;

/// Basis index helpers for the four-lines-per-level layout.
pub struct TruncatedLayout {
    pub d: i64,
    pub kmax: i64,
}

impl TruncatedLayout {
    pub fn u(&self, k: i64) -> usize {
        (4 * k) as usize
    }
    pub fn a(&self, k: i64) -> usize {
        (4 * k + 1) as usize
    }
    pub fn b(&self, k: i64) -> usize {
        (4 * k + 2) as usize
    }
    pub fn c(&self, k: i64) -> usize {
        (4 * k + 3) as usize
    }
}

/// Builds the synthetic truncated instance for d >= 4 with levels 0..=kmax.
/// The structure is a truncation of the infinite pattern; its bound is the
/// largest declared internal degree.
pub fn truncated_instance(field: Field, d: i64, kmax: i64) -> (AInftyStructure, TruncatedLayout) {
    assert!(d >= 4, "the truncated family needs d >= 4");
    assert!(kmax >= 1);
    let layout = TruncatedLayout { d, kmax };
    let mut basis: Vec<(i64, i64)> = Vec::new();
    for k in 0..=kmax {
        basis.push((3 * k, 2 * d * k));
        basis.push((3 * k + 1, 2 * d * k + 1));
        basis.push((3 * k + 2, 2 * d * k + d));
        basis.push((3 * k + 2, 2 * d * k + d + 1));
    }
    let one = field.one();

    let mut m2 = MultiMap::new(2);
    for i in 0..=kmax {
        for j in 0..=kmax {
            if i + j > kmax {
                continue;
            }
            let s = i + j;
            // u_i u_j
            m2.insert(vec![layout.u(i), layout.u(j)], SparseVec::unit(layout.u(s), one.clone()));
            // u acts on the three other lines, with the line twists
            m2.insert(vec![layout.u(i), layout.a(j)], SparseVec::unit(layout.a(s), one.clone()));
            m2.insert(vec![layout.a(j), layout.u(i)], SparseVec::unit(layout.a(s), field.sign(i)));
            let b_tw = field.sign(d * i);
            let c_tw = field.sign((d + 1) * i);
            m2.insert(vec![layout.u(i), layout.b(j)], SparseVec::unit(layout.b(s), b_tw.clone()));
            m2.insert(vec![layout.u(i), layout.c(j)], SparseVec::unit(layout.c(s), c_tw.clone()));
            m2.insert(vec![layout.b(j), layout.u(i)], SparseVec::unit(layout.b(s), b_tw));
            m2.insert(vec![layout.c(j), layout.u(i)], SparseVec::unit(layout.c(s), c_tw));
        }
    }

    let alternating = |idx: &[i64]| -> i64 {
        idx.iter().enumerate().filter(|(pos, _)| pos % 2 == 1).map(|(_, k)| *k).sum()
    };
    let mut md = MultiMap::new(d as usize);
    let mut indices = vec![0i64; d as usize];
    fill_level_tuples(&mut indices, 0, kmax, &mut |idx| {
        let s: i64 = idx.iter().sum();
        let key: Vec<usize> = idx.iter().map(|k| layout.a(*k)).collect();
        md.insert(key, SparseVec::unit(layout.b(s), field.sign(alternating(idx))));
    });
    let mut md1 = MultiMap::new(d as usize + 1);
    let mut indices = vec![0i64; d as usize + 1];
    fill_level_tuples(&mut indices, 0, kmax, &mut |idx| {
        let s: i64 = idx.iter().sum();
        let key: Vec<usize> = idx.iter().map(|k| layout.a(*k)).collect();
        md1.insert(key, SparseVec::unit(layout.c(s), field.sign(alternating(idx))));
    });

    let maps = BTreeMap::from([(2usize, m2), (d as usize, md), (d as usize + 1, md1)]);
    let bound = 2 * d * kmax + d + 1;
    let s = AInftyStructure::new(field, basis, maps, Some(bound)).expect("valid by construction");
    (s, layout)
}

/// All level tuples with sum <= kmax (entries outside stay unpopulated, in
/// line with the truncation bound).
fn fill_level_tuples(idx: &mut Vec<i64>, pos: usize, kmax: i64, f: &mut impl FnMut(&[i64])) {
    if pos == idx.len() {
        f(idx);
        return;
    }
    let used: i64 = idx[..pos].iter().sum();
    for k in 0..=(kmax - used) {
        idx[pos] = k;
        fill_level_tuples(idx, pos + 1, kmax, f);
        idx[pos] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::{check_si, check_unitality};
    use crate::koszul::is_truncated;

    #[test]
    fn truncated_d4_passes_full_si_suite() {
        let (s, _) = truncated_instance(Field::Rational, 4, 2);
        for n in 1..=11 {
            let r = check_si(&s, n);
            assert!(r.is_pass(), "{r}");
        }
        assert!(check_unitality(&s).is_pass());
        assert!(is_truncated(&s, 4).unwrap().is_pass());
    }

    #[test]
    fn truncated_d5_passes_full_si_suite() {
        let (s, _) = truncated_instance(Field::Rational, 5, 1);
        for n in 1..=13 {
            let r = check_si(&s, n);
            assert!(r.is_pass(), "{r}");
        }
        assert!(is_truncated(&s, 5).unwrap().is_pass());
    }

    #[test]
    fn all_three_multiplications_nonzero() {
        let (s, layout) = truncated_instance(Field::Rational, 4, 2);
        assert_eq!(s.support(), vec![2, 4, 5]);
        let md = s.map(4).unwrap();
        assert!(md.get(&[layout.a(0); 4]).is_some());
        let md1 = s.map(5).unwrap();
        assert!(md1.get(&[layout.a(0); 5]).is_some());
    }

    #[test]
    fn truncated_over_prime_field() {
        let (s, _) = truncated_instance(Field::prime(101).unwrap(), 4, 1);
        for n in 1..=10 {
            assert!(check_si(&s, n).is_pass());
        }
    }
}
