//! The free algebra `C<x_1, ..., x_n>` with exact coefficients, matrices over it, and
//! evaluation on matrix tuples.

mod matrix;
mod parse;
mod reduce;
mod tuple;

pub use matrix::PolyMatrix;
pub use reduce::{
    d_independence_reduce, is_d_independent, left_transduction, right_transduction, DReduction,
    Side,
};
pub use tuple::MatrixTuple;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::ExactScalar;

/// A monomial `x_{j1} x_{j2} ... x_{js}`; letters are 0-based variable indices.
/// The empty word is the unit monomial.
///
/// Ordered by length first, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: u32) -> Self {
        Word(vec![i])
    }

    pub fn from_letters(letters: &[u32]) -> Self {
        Word(letters.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn max_letter(&self) -> Option<u32> {
        self.0.iter().copied().max()
    }

    /// All words of length `len` over `nvars` letters, in lexicographic order.
    pub fn all_of_length(nvars: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::unit()];
        for _ in 0..len {
            out = out
                .iter()
                .flat_map(|w| (0..nvars as u32).map(move |i| w.concat(&Word::letter(i))))
                .collect();
        }
        out
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut k = 0;
        while k < self.0.len() {
            let letter = self.0[k];
            let mut run = 1;
            while k + run < self.0.len() && self.0[k + run] == letter {
                run += 1;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", letter + 1)?;
            if run > 1 {
                write!(f, "^{run}")?;
            }
            k += run;
        }
        Ok(())
    }
}

/// A noncommutative polynomial. No zero coefficient is ever stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NCPoly {
    nvars: usize,
    terms: BTreeMap<Word, ExactScalar>,
}

impl NCPoly {
    pub fn zero(nvars: usize) -> Self {
        NCPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        NCPoly::constant(nvars, ExactScalar::one())
    }

    pub fn constant(nvars: usize, c: ExactScalar) -> Self {
        NCPoly::monomial(nvars, Word::unit(), c)
    }

    /// The variable `x_{i+1}` (0-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        NCPoly::monomial(nvars, Word::letter(i as u32), ExactScalar::one())
    }

    pub fn monomial(nvars: usize, word: Word, c: ExactScalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(word, c);
        }
        NCPoly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Word, ExactScalar)>) -> Result<Self> {
        let mut p = NCPoly::zero(nvars);
        for (w, c) in terms {
            if let Some(m) = w.max_letter() {
                if m as usize >= nvars {
                    return Err(Error::VarCountMismatch(m as usize + 1, nvars));
                }
            }
            p.add_term(w, &c);
        }
        Ok(p)
    }

    fn add_term(&mut self, w: Word, c: &ExactScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Reinterprets the polynomial in a larger variable count.
    pub fn with_nvars(&self, nvars: usize) -> Result<Self> {
        if let Some(m) = self.terms.keys().filter_map(Word::max_letter).max() {
            if m as usize >= nvars {
                return Err(Error::VarCountMismatch(m as usize + 1, nvars));
            }
        }
        Ok(NCPoly { nvars, terms: self.terms.clone() })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &Word) -> ExactScalar {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `None` encodes the degree of the zero polynomial (minus infinity).
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Word::len)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    pub fn constant_term(&self) -> ExactScalar {
        self.coefficient(&Word::unit())
    }

    /// Terms of exactly degree `k`.
    pub fn homogeneous_component(&self, k: usize) -> NCPoly {
        NCPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(w, _)| w.len() == k).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    /// Top-degree homogeneous component.
    pub fn leading_form(&self) -> NCPoly {
        match self.degree() {
            Some(d) => self.homogeneous_component(d),
            None => self.clone(),
        }
    }

    /// Highest monomial in the degree-then-lexicographic order.
    pub fn leading_word(&self) -> Option<&Word> {
        self.terms.keys().next_back()
    }

    fn check_vars(&self, other: &NCPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn add(&self, other: &NCPoly) -> Result<NCPoly> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NCPoly) -> Result<NCPoly> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), &-c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &NCPoly) -> Result<NCPoly> {
        self.check_vars(other)?;
        let mut out = NCPoly::zero(self.nvars);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.concat(wb), &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &ExactScalar) -> NCPoly {
        if s.is_zero() {
            return NCPoly::zero(self.nvars);
        }
        NCPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect(),
        }
    }

    pub fn neg(&self) -> NCPoly {
        self.scale(&-ExactScalar::one())
    }

    /// The involution fixing every `x_i`: words reversed, coefficients conjugated.
    pub fn adjoint(&self) -> NCPoly {
        NCPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(w, c)| (w.reversed(), c.conj())).collect(),
        }
    }

    /// Word reversal without conjugation (the opposite-algebra anti-isomorphism).
    pub fn reversed(&self) -> NCPoly {
        NCPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(w, c)| (w.reversed(), c.clone())).collect(),
        }
    }

    /// Evaluates at a matrix tuple: `x_i -> X_i`, `1 -> identity`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<CMat> {
        if x.n() < self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "polynomial in {} variables evaluated at a {}-tuple",
                self.nvars,
                x.n()
            )));
        }
        let d = x.dim();
        let mut out = linalg::zeros(d, d);
        for (w, c) in &self.terms {
            let mut prod = linalg::identity(d);
            for &l in w.letters() {
                prod *= &x.mats()[l as usize];
            }
            out += prod * c.to_c64();
        }
        Ok(out)
    }

    /// Evaluates at scalars.
    pub fn eval_scalar(&self, point: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(w, c)| w.letters().iter().fold(c.to_c64(), |acc, &l| acc * point[l as usize]))
            .sum()
    }
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::write_poly(self, f)
    }
}

impl std::str::FromStr for NCPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NCPoly::parse(s, None)
    }
}

impl NCPoly {
    /// Parses the text format `(3/2+1/2i)*x1*x2^3 - x2 + 4`. When `nvars` is `None` it is
    /// the largest variable index that occurs (at least 1).
    pub fn parse(text: &str, nvars: Option<usize>) -> Result<Self> {
        parse::parse_poly(text, nvars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NCPoly {
        NCPoly::parse(s, Some(3)).unwrap()
    }

    #[test]
    fn monomial_concatenation() {
        let prod = p("x1").mul(&p("x2")).unwrap();
        assert_eq!(prod.num_terms(), 1);
        assert_eq!(prod.coefficient(&Word::from_letters(&[0, 1])), ExactScalar::one());
    }

    #[test]
    fn difference_of_squares_in_one_variable() {
        let a = NCPoly::parse("x1 + 1", Some(1)).unwrap();
        let b = NCPoly::parse("x1 - 1", Some(1)).unwrap();
        assert_eq!(a.mul(&b).unwrap(), NCPoly::parse("x1^2 - 1", Some(1)).unwrap());
    }

    #[test]
    fn degree_is_additive() {
        let a = p("x1*x2 + 1");
        let b = p("x3");
        assert_eq!(a.mul(&b).unwrap().degree(), Some(3));
        assert_eq!(NCPoly::zero(2).degree(), None);
    }

    #[test]
    fn var_count_mismatch_is_an_error() {
        let a = NCPoly::var(2, 0);
        let b = NCPoly::var(3, 0);
        assert!(matches!(a.add(&b), Err(Error::VarCountMismatch(2, 3))));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn cancellation_drops_terms() {
        let a = p("x1*x2 + x2");
        let r = a.sub(&p("x1*x2")).unwrap();
        assert_eq!(r, p("x2"));
        assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(p("i*x1*x2").adjoint(), p("-i*x2*x1"));
        assert_eq!(p("x1").adjoint(), p("x1"));
    }

    #[test]
    fn evaluation_of_a_variable() {
        let x = MatrixTuple::from_real_rows(&[&[&[0.0, 1.0], &[1.0, 0.0]]], true).unwrap();
        let m = NCPoly::var(1, 0).eval(&x).unwrap();
        assert_eq!(m, x.mats()[0]);
        let one = NCPoly::one(1).eval(&x).unwrap();
        assert_eq!(one, linalg::identity(2));
    }

    #[test]
    fn word_order_is_graded() {
        let mut ws = vec![Word::from_letters(&[1]), Word::from_letters(&[0, 0]), Word::unit(), Word::from_letters(&[0])];
        ws.sort();
        assert_eq!(ws, vec![Word::unit(), Word::from_letters(&[0]), Word::from_letters(&[1]), Word::from_letters(&[0, 0])]);
        assert_eq!(Word::all_of_length(2, 2).len(), 4);
    }
}
