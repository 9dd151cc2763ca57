//! Transductions and reduction of polynomial tuples to d-independent form.
//!
//! A tuple `(a_1, ..., a_m)` is right d-dependent when some entry is zero or some nonzero
//! `(b_1, ..., b_m)` has `d(sum a_j b_j) < max_j (d(a_j) + d(b_j))`. The free algebra satisfies
//! the weak algorithm, so for nonzero entries this happens exactly when one entry `a_i` has its
//! leading form in the span of `lead(a_j) * w` over `j != i`, `d(a_j) <= d(a_i)` and words `w`
//! of length `d(a_i) - d(a_j)`. That span membership is an exact linear solve.

use std::collections::BTreeMap;

use super::{NCPoly, PolyMatrix, Word};
use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, ScalarMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The tuple is a row and the transform acts on the right: `reduced = tuple * T`.
    Right,
    /// The tuple is a column and the transform acts on the left: `reduced = T * tuple`.
    Left,
}

#[derive(Clone, Debug)]
pub struct DReduction {
    pub reduced: Vec<NCPoly>,
    pub transform: PolyMatrix,
    /// Exact two-sided inverse of `transform`.
    pub inverse: PolyMatrix,
}

/// `L_a`: sends `w a` to `w` and every monomial without suffix `a` to zero.
pub fn left_transduction(a: &Word, b: &NCPoly) -> NCPoly {
    let k = a.len();
    let mut out = NCPoly::zero(b.nvars());
    for (w, c) in b.terms() {
        if w.len() >= k && w.letters()[w.len() - k..] == *a.letters() {
            out.add_term(Word(w.letters()[..w.len() - k].to_vec()), c);
        }
    }
    out
}

/// Mirror image of [`left_transduction`]: strips the prefix `a`.
pub fn right_transduction(a: &Word, b: &NCPoly) -> NCPoly {
    let k = a.len();
    let mut out = NCPoly::zero(b.nvars());
    for (w, c) in b.terms() {
        if w.len() >= k && w.letters()[..k] == *a.letters() {
            out.add_term(Word(w.letters()[k..].to_vec()), c);
        }
    }
    out
}

fn check_tuple(tuple: &[NCPoly]) -> Result<usize> {
    let nvars = tuple.first().ok_or_else(|| Error::DimensionMismatch("empty tuple".into()))?.nvars();
    if let Some(p) = tuple.iter().find(|p| p.nvars() != nvars) {
        return Err(Error::VarCountMismatch(p.nvars(), nvars));
    }
    Ok(nvars)
}

/// Multipliers `b_j` (homogeneous, `j != i`) with `lead(a_i) = lead(sum_j a_j b_j)`, if any.
fn right_dependence(tuple: &[NCPoly], i: usize) -> Option<Vec<(usize, NCPoly)>> {
    let target = &tuple[i];
    let deg = target.degree()?;
    let nvars = target.nvars();
    let mut unknowns: Vec<(usize, Word, NCPoly)> = Vec::new();
    for (j, a) in tuple.iter().enumerate() {
        match a.degree() {
            Some(dj) if j != i && dj <= deg => {
                let lead = a.leading_form();
                for w in Word::all_of_length(nvars, deg - dj) {
                    let prod = lead.mul(&NCPoly::monomial(nvars, w.clone(), ExactScalar::one())).ok()?;
                    unknowns.push((j, w, prod));
                }
            }
            _ => {}
        }
    }
    if unknowns.is_empty() {
        return None;
    }
    let lead = target.leading_form();
    let mut rows: BTreeMap<Word, usize> = BTreeMap::new();
    for p in std::iter::once(&lead).chain(unknowns.iter().map(|u| &u.2)) {
        for (w, _) in p.terms() {
            let next = rows.len();
            rows.entry(w.clone()).or_insert(next);
        }
    }
    let mut m = ScalarMatrix::zeros(rows.len(), unknowns.len());
    for (col, (_, _, p)) in unknowns.iter().enumerate() {
        for (w, c) in p.terms() {
            m[(rows[w], col)] = c.clone();
        }
    }
    let mut rhs = vec![ExactScalar::zero(); rows.len()];
    for (w, c) in lead.terms() {
        rhs[rows[w]] = c.clone();
    }
    let sol = m.solve(&rhs)?;
    let mut by_entry: BTreeMap<usize, NCPoly> = BTreeMap::new();
    for ((j, w, _), c) in unknowns.into_iter().zip(sol) {
        if !c.is_zero() {
            by_entry.entry(j).or_insert_with(|| NCPoly::zero(nvars)).add_term(w, &c);
        }
    }
    Some(by_entry.into_iter().collect())
}

fn is_right_independent(tuple: &[NCPoly]) -> bool {
    let nonzero: Vec<NCPoly> = tuple.iter().filter(|p| !p.is_zero()).cloned().collect();
    (0..nonzero.len()).all(|i| right_dependence(&nonzero, i).is_none())
}

/// Whether the nonzero entries of `tuple` are d-independent on the given side.
pub fn is_d_independent(tuple: &[NCPoly], side: Side) -> Result<bool> {
    check_tuple(tuple)?;
    Ok(match side {
        Side::Right => is_right_independent(tuple),
        Side::Left => is_right_independent(&tuple.iter().map(NCPoly::reversed).collect::<Vec<_>>()),
    })
}

fn reduce_right(tuple: &[NCPoly], nvars: usize) -> Result<DReduction> {
    let m = tuple.len();
    let mut cur = tuple.to_vec();
    let mut t = PolyMatrix::identity(m, nvars);
    let mut tinv = PolyMatrix::identity(m, nvars);
    loop {
        // Highest-degree dependent entry; ties go to the largest index.
        let mut order: Vec<usize> = (0..m).filter(|&i| !cur[i].is_zero()).collect();
        order.sort_by(|&a, &b| (cur[b].degree(), b).cmp(&(cur[a].degree(), a)));
        let nonzero: Vec<usize> = (0..m).filter(|&i| !cur[i].is_zero()).collect();
        let step = order.iter().find_map(|&i| {
            let compact: Vec<NCPoly> = nonzero.iter().map(|&k| cur[k].clone()).collect();
            let pos = nonzero.iter().position(|&k| k == i)?;
            right_dependence(&compact, pos).map(|bs| (i, bs.into_iter().map(|(p, b)| (nonzero[p], b)).collect::<Vec<_>>()))
        });
        let Some((i, bs)) = step else { break };
        let mut e = PolyMatrix::identity(m, nvars);
        let mut einv = PolyMatrix::identity(m, nvars);
        let mut next = cur[i].clone();
        for (j, b) in &bs {
            next = next.sub(&cur[*j].mul(b)?)?;
            e.set(*j, i, b.neg());
            einv.set(*j, i, b.clone());
        }
        debug_assert!(next.degree() < cur[i].degree());
        cur[i] = next;
        t = t.mul(&e)?;
        tinv = einv.mul(&tinv)?;
    }
    Ok(DReduction { reduced: cur, transform: t, inverse: tinv })
}

fn reversed_transpose(m: &PolyMatrix) -> PolyMatrix {
    let mut out = PolyMatrix::zeros(m.cols(), m.rows(), m.nvars());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(j, i, m.get(i, j).reversed());
        }
    }
    out
}

/// Reduces `tuple` by an invertible polynomial matrix so that its nonzero entries are
/// d-independent on `side`.
///
/// Each round subtracts from one entry a combination of the others that lowers its degree,
/// through a unit-diagonal elementary matrix. The entry chosen is the dependent one of highest
/// degree, with ties broken towards the largest index.
pub fn d_independence_reduce(tuple: &[NCPoly], side: Side) -> Result<DReduction> {
    let nvars = check_tuple(tuple)?;
    match side {
        Side::Right => reduce_right(tuple, nvars),
        Side::Left => {
            let rev: Vec<NCPoly> = tuple.iter().map(NCPoly::reversed).collect();
            let r = reduce_right(&rev, nvars)?;
            Ok(DReduction {
                reduced: r.reduced.iter().map(NCPoly::reversed).collect(),
                transform: reversed_transpose(&r.transform),
                inverse: reversed_transpose(&r.inverse),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NCPoly {
        NCPoly::parse(s, Some(3)).unwrap()
    }

    fn row(entries: &[NCPoly]) -> PolyMatrix {
        PolyMatrix::from_rows(entries[0].nvars(), vec![entries.to_vec()]).unwrap()
    }

    fn col(entries: &[NCPoly]) -> PolyMatrix {
        PolyMatrix::from_rows(entries[0].nvars(), entries.iter().map(|e| vec![e.clone()]).collect()).unwrap()
    }

    #[test]
    fn transduction_examples() {
        let x1 = Word::letter(0);
        assert_eq!(left_transduction(&x1, &p("x2*x1")), p("x2"));
        assert!(left_transduction(&x1, &p("x1*x2")).is_zero());
        let a = Word::from_letters(&[1, 0]);
        assert_eq!(left_transduction(&a, &p("x3*x2*x1 + x1")), p("x3"));
        assert_eq!(left_transduction(&Word::unit(), &p("x1 + 2")), p("x1 + 2"));
        assert_eq!(right_transduction(&x1, &p("x1*x2 + x2*x1")), p("x2"));
    }

    #[test]
    fn duplicated_entry_reduces_to_zero() {
        let r = d_independence_reduce(&[p("x1"), p("x1")], Side::Right).unwrap();
        assert_eq!(r.reduced, vec![p("x1"), NCPoly::zero(3)]);
        let expected = PolyMatrix::from_rows(3, vec![vec![p("1"), p("-1")], vec![p("0"), p("1")]]).unwrap();
        assert_eq!(r.transform, expected);
    }

    #[test]
    fn independent_tuples_are_untouched() {
        let t = [p("x1"), p("x2*x3 + 1")];
        assert!(is_d_independent(&t, Side::Right).unwrap());
        let r = d_independence_reduce(&t, Side::Right).unwrap();
        assert_eq!(r.reduced, t.to_vec());
        assert_eq!(r.transform, PolyMatrix::identity(2, 3));
    }

    #[test]
    fn a_unit_makes_every_other_entry_dependent() {
        // 1 * x1 - x1 * 1 = 0 drops below the degree bound 1.
        let t = [p("1"), p("x1")];
        assert!(!is_d_independent(&t, Side::Right).unwrap());
        let r = d_independence_reduce(&t, Side::Right).unwrap();
        assert_eq!(r.reduced, vec![p("1"), NCPoly::zero(3)]);
    }

    #[test]
    fn right_versus_left_dependence() {
        // x1*x2 = x1 * x2 is a right combination but not a left one.
        let t = [p("x1*x2"), p("x1")];
        assert!(!is_d_independent(&t, Side::Right).unwrap());
        assert!(is_d_independent(&t, Side::Left).unwrap());
        let r = d_independence_reduce(&t, Side::Right).unwrap();
        assert!(is_d_independent(&r.reduced, Side::Right).unwrap());
        assert_eq!(row(&t).mul(&r.transform).unwrap(), row(&r.reduced));
    }

    #[test]
    fn left_reduction_acts_on_columns() {
        let t = [p("x2*x1 + x3"), p("x1"), p("x3")];
        let r = d_independence_reduce(&t, Side::Left).unwrap();
        assert_eq!(r.transform.mul(&col(&t)).unwrap(), col(&r.reduced));
        assert!(is_d_independent(&r.reduced, Side::Left).unwrap());
        assert_eq!(r.transform.mul(&r.inverse).unwrap(), PolyMatrix::identity(3, 3));
    }
}
