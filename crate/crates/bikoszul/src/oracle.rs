//! Independent brute-force Tor oracle.
//!
//! Computes the same bigraded dimensions as the main pipeline but from the
//! non-dual bar complex with dense Gaussian elimination. This code path
//! shares no elimination logic with `crate::linalg`: the rank routines below
//! are self-contained (a bitset variant for GF(2) and a naive dense variant
//! for other fields).

use crate::field::{Field, FieldScalar};
use crate::koszul::DegreeDistribution;
use crate::presentation::{Presentation, PresentationError};

/// Dense rank over GF(2) with bit-packed rows.
fn rank_gf2(mut rows: Vec<Vec<u64>>, cols: usize) -> usize {
    let words = cols.div_ceil(64);
    let mut rank = 0usize;
    for c in 0..cols {
        let (w, b) = (c / 64, c % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            if row[w] >> b & 1 == 1 {
                for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                    *x ^= *y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
        let _ = words;
    }
    rank
}

/// Dense rank over an arbitrary field, plain Gaussian elimination.
fn rank_dense(field: &Field, mut rows: Vec<Vec<FieldScalar>>, cols: usize) -> usize {
    let mut rank = 0usize;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !field.is_zero(&rows[r][c])) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field.inv(&rows[rank][c]).unwrap();
        for x in rows[rank].iter_mut() {
            *x = field.mul(x, &inv);
        }
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            if !field.is_zero(&row[c]) {
                let coef = field.neg(&row[c]);
                for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                    *x = field.add(x, &field.mul(y, &coef));
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Tensor words of (J^{x p})_q as flat factor lists (degree, basis index).
fn words(pres: &Presentation, p: i64, q: i64) -> Result<Vec<Vec<(i64, usize)>>, PresentationError> {
    let mut out = Vec::new();
    let mut cur: Vec<(i64, usize)> = Vec::new();
    fn rec(
        pres: &Presentation,
        parts_left: i64,
        deg_left: i64,
        cur: &mut Vec<(i64, usize)>,
        out: &mut Vec<Vec<(i64, usize)>>,
    ) -> Result<(), PresentationError> {
        if parts_left == 0 {
            if deg_left == 0 {
                out.push(cur.clone());
            }
            return Ok(());
        }
        for d in 1..=(deg_left - (parts_left - 1)) {
            for k in 0..pres.graded_dim(d)? {
                cur.push((d, k));
                rec(pres, parts_left - 1, deg_left - d, cur, out)?;
                cur.pop();
            }
        }
        Ok(())
    }
    if p == 0 {
        if q == 0 {
            out.push(Vec::new());
        }
        return Ok(out);
    }
    rec(pres, p, q, &mut cur, &mut out)?;
    Ok(out)
}

/// Rank of the bar merge differential b: (J^{x p})_q -> (J^{x p-1})_q,
/// b = sum_i (-1)^(i+1) merge_i, assembled densely.
fn bar_rank(pres: &Presentation, p: i64, q: i64) -> Result<usize, PresentationError> {
    if p <= 1 {
        // b out of (J^{x 1}) lands in (J^{x 0})_q = 0 for q >= 1
        return Ok(0);
    }
    let field = pres.field;
    let src = words(pres, p, q)?;
    let dst = words(pres, p - 1, q)?;
    if src.is_empty() || dst.is_empty() {
        return Ok(0);
    }
    let col_of: std::collections::HashMap<&Vec<(i64, usize)>, usize> =
        dst.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let cols = dst.len();
    match field {
        Field::Prime(2) => {
            let wlen = cols.div_ceil(64);
            let mut rows: Vec<Vec<u64>> = Vec::with_capacity(src.len());
            for w in &src {
                let mut row = vec![0u64; wlen];
                for i in 1..w.len() {
                    let (d1, k1) = w[i - 1];
                    let (d2, k2) = w[i];
                    let prod = pres.multiply_basis(d1, k1, d2, k2)?;
                    for (ak, c) in prod.iter() {
                        if field.is_zero(c) {
                            continue;
                        }
                        let mut merged = w.clone();
                        merged[i - 1] = (d1 + d2, ak);
                        merged.remove(i);
                        let col = col_of[&merged];
                        row[col / 64] ^= 1 << (col % 64);
                    }
                }
                rows.push(row);
            }
            Ok(rank_gf2(rows, cols))
        }
        _ => {
            let mut rows: Vec<Vec<FieldScalar>> = Vec::with_capacity(src.len());
            for w in &src {
                let mut row = vec![field.zero(); cols];
                for i in 1..w.len() {
                    let (d1, k1) = w[i - 1];
                    let (d2, k2) = w[i];
                    let prod = pres.multiply_basis(d1, k1, d2, k2)?;
                    let sign = field.sign(i as i64 + 1);
                    for (ak, c) in prod.iter() {
                        let mut merged = w.clone();
                        merged[i - 1] = (d1 + d2, ak);
                        merged.remove(i);
                        let col = col_of[&merged];
                        row[col] = field.add(&row[col], &field.mul(&sign, c));
                    }
                }
                rows.push(row);
            }
            Ok(rank_dense(&field, rows, cols))
        }
    }
}

/// Tor dimensions by dense elimination on the non-dual bar complex.
pub fn brute_force_tor(pres: &Presentation) -> Result<DegreeDistribution, PresentationError> {
    let dmax = pres.maxdeg;
    let mut dist = DegreeDistribution::new(dmax);
    dist.insert(0, 0, 1);
    for q in 1..=dmax {
        // ranks of b_p for p = 1..=q+1 at this internal degree
        let mut ranks: Vec<usize> = Vec::new();
        for p in 1..=(q + 1) {
            ranks.push(bar_rank(pres, p, q)?);
        }
        for p in 1..=q {
            let dim = words(pres, p, q)?.len();
            let rank_in = ranks[(p - 1) as usize]; // b_p: this row -> shorter words
            let rank_out = ranks[p as usize]; // b_{p+1}: longer words -> this row
            let tor = dim - rank_in - rank_out;
            dist.insert(p, q, tor);
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;
    use crate::transfer::tor_dimensions;
    use std::rc::Rc;

    #[test]
    fn oracle_agrees_with_main_pipeline_trunc3() {
        let pres = Rc::new(parse_presentation("field GF 2\ngens x\nrel x*x*x\nmaxdeg 9\n").unwrap());
        let a = brute_force_tor(&pres).unwrap();
        let b = tor_dimensions(Rc::clone(&pres)).unwrap();
        assert_eq!(a, b);
        // degrees 0,1,3,4,6,7,9 for p = 0..6, all dims 1
        let expected = [(0, 0), (1, 1), (2, 3), (3, 4), (4, 6), (5, 7), (6, 9)];
        for (p, q) in expected {
            assert_eq!(a.dim(p, q), 1, "({p},{q})");
        }
        assert_eq!(a.rows().map(|(_, m)| m.len()).sum::<usize>(), expected.len());
    }

    #[test]
    fn oracle_agrees_exterior2() {
        let pres = Rc::new(parse_presentation(
            "field QQ\ngens x y\nrel x*x\nrel y*y\nrel x*y + y*x\nmaxdeg 6\n",
        )
        .unwrap());
        let a = brute_force_tor(&pres).unwrap();
        let b = tor_dimensions(Rc::clone(&pres)).unwrap();
        assert_eq!(a, b);
        for p in 0..=6 {
            assert_eq!(a.dim(p, p), (p + 1) as usize);
        }
    }

    #[test]
    fn oracle_free_algebra_terminates() {
        let pres = Rc::new(parse_presentation("field GF 2\ngens x y\nmaxdeg 6\n").unwrap());
        let a = brute_force_tor(&pres).unwrap();
        let b = tor_dimensions(Rc::clone(&pres)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(0, 0), 1);
        assert_eq!(a.dim(1, 1), 2);
        assert_eq!(a.rows().map(|(_, m)| m.len()).sum::<usize>(), 2);
    }
}
