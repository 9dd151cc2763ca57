//! Exact complex rationals.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A complex number `re + im*i` with arbitrary-precision rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactScalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar { re, im }
    }

    pub fn zero() -> Self {
        ExactScalar::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        ExactScalar::from_int(1)
    }

    pub fn i() -> Self {
        ExactScalar::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_parts(re: i64, im: i64) -> Self {
        ExactScalar::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    /// Exact conversion of a finite double (every finite double is a dyadic rational).
    pub fn from_f64(re: f64, im: f64) -> Result<Self> {
        let conv = |x: f64| {
            BigRational::from_float(x)
                .ok_or_else(|| Error::Parse(format!("non-finite number {x}")))
        };
        Ok(ExactScalar::new(conv(re)?, conv(im)?))
    }

    pub fn from_c64(z: Complex64) -> Result<Self> {
        ExactScalar::from_f64(z.re, z.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ExactScalar::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Parse("division by zero scalar".into()));
        }
        let n = self.norm_sqr();
        Ok(ExactScalar::new(&self.re / &n, -&self.im / &n))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        ExactScalar::zero()
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from_int(n)
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: ExactScalar) -> ExactScalar {
        &self + &rhs
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        &self - &rhs
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-self.re, -self.im)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for ExactScalar {
    /// `3/2`, `-1`, `2i`, `(3/2+1/2i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let im = if self.im.abs().is_one() {
            if self.im.is_negative() { "-i".to_string() } else { "i".to_string() }
        } else {
            format!("{}i", fmt_rational(&self.im))
        };
        if self.re.is_zero() {
            return write!(f, "{im}");
        }
        let sign = if self.im.is_negative() { "" } else { "+" };
        write!(f, "({}{}{})", fmt_rational(&self.re), sign, im)
    }
}

/// Parses an unsigned real literal: integer, `p/q`, or decimal (`2.5`, `1e-3`).
pub(crate) fn parse_real_literal(s: &str) -> Option<BigRational> {
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(q)
}

impl FromStr for ExactScalar {
    type Err = Error;

    /// Accepts `3/2`, `-0.5`, `2i`, `-i`, `1/2i`, `3/2+1/2i`, optionally parenthesized.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid scalar literal '{text}'"));
        let mut s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.starts_with('(') && s.ends_with(')') {
            s = s[1..s.len() - 1].to_string();
        }
        if s.is_empty() {
            return Err(bad());
        }
        // split at a sign that is not the leading one and not part of an exponent
        let bytes = s.as_bytes();
        let mut split = None;
        for k in 1..bytes.len() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
            }
        }
        let parts: Vec<&str> = match split {
            Some(k) => vec![&s[..k], &s[k..]],
            None => vec![&s[..]],
        };
        let mut out = ExactScalar::zero();
        let mut seen_re = false;
        let mut seen_im = false;
        for part in parts {
            let (neg, body) = match part.as_bytes()[0] {
                b'-' => (true, &part[1..]),
                b'+' => (false, &part[1..]),
                _ => (false, part),
            };
            let (is_im, body) = match body.strip_suffix('i') {
                Some(b) => (true, b),
                None => (false, body),
            };
            let mut q = if is_im && body.is_empty() {
                BigRational::one()
            } else {
                parse_real_literal(body).ok_or_else(bad)?
            };
            if neg {
                q = -q;
            }
            if is_im {
                if seen_im {
                    return Err(bad());
                }
                seen_im = true;
                out.im = q;
            } else {
                if seen_re {
                    return Err(bad());
                }
                seen_re = true;
                out.re = q;
            }
        }
        Ok(out)
    }
}

/// Dense matrix of exact scalars, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

impl ScalarMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ScalarMatrix { rows, cols, data: vec![ExactScalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ScalarMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ExactScalar::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExactScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ScalarMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<ExactScalar>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(ScalarMatrix { rows: r, cols: c, data: rows.iter().flatten().cloned().collect() })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let c = rows.first().map_or(0, |r| r.len());
        ScalarMatrix::from_fn(rows.len(), c, |i, j| ExactScalar::from_int(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(ExactScalar::is_zero)
    }

    pub fn adjoint(&self) -> Self {
        ScalarMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.adjoint()
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        ScalarMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ScalarMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ScalarMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = ScalarMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        ScalarMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn to_cmat(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_c64())
    }

    pub fn from_cmat(m: &nalgebra::DMatrix<Complex64>) -> Result<Self> {
        let mut out = ScalarMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = ExactScalar::from_c64(m[(i, j)])?;
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (ScalarMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].inv().expect("nonzero pivot");
            for j in col..m.cols {
                m[(row, j)] = &m[(row, j)] * &inv;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let f = m[(r, col)].clone();
                    for j in col..m.cols {
                        let t = &f * &m[(row, j)];
                        m[(r, j)] -= &t;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{c : self * c = 0}` as columns.
    pub fn kernel(&self) -> Vec<Vec<ExactScalar>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![ExactScalar::zero(); self.cols];
                v[f] = ExactScalar::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&r[(row, f)];
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = b`, returning one solution if consistent.
    pub fn solve(&self, b: &[ExactScalar]) -> Option<Vec<ExactScalar>> {
        assert_eq!(b.len(), self.rows);
        let aug = ScalarMatrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols { self[(i, j)].clone() } else { b[i].clone() }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![ExactScalar::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = ScalarMatrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                ExactScalar::one()
            } else {
                ExactScalar::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(ScalarMatrix::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn column(&self, j: usize) -> Vec<ExactScalar> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ScalarMatrix {
    type Output = ExactScalar;
    fn index(&self, (i, j): (usize, usize)) -> &ExactScalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ScalarMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactScalar {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        let q: ExactScalar = "3/2+1/2i".parse().unwrap();
        assert_eq!(q, ExactScalar::new(BigRational::new(3.into(), 2.into()), BigRational::new(1.into(), 2.into())));
        assert_eq!("-i".parse::<ExactScalar>().unwrap(), -ExactScalar::i());
        assert_eq!("2.5".parse::<ExactScalar>().unwrap(), ExactScalar::from_ratio(5, 2));
        assert_eq!("1e-2".parse::<ExactScalar>().unwrap(), ExactScalar::from_ratio(1, 100));
        assert_eq!("(0.5-2i)".parse::<ExactScalar>().unwrap().to_string(), "(1/2-2i)");
        assert!("1/0".parse::<ExactScalar>().is_err());
        assert!("abc".parse::<ExactScalar>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["3/2", "-7", "2i", "-i", "(3/2+1/2i)", "(-1-5/3i)"] {
            let q: ExactScalar = s.parse().unwrap();
            assert_eq!(q.to_string(), s);
        }
    }

    #[test]
    fn field_operations_are_exact() {
        let a: ExactScalar = "1/3+2i".parse().unwrap();
        let b: ExactScalar = "-5/7-i".parse().unwrap();
        let q = a.div(&b).unwrap();
        assert_eq!(&q * &b, a);
        assert!(ExactScalar::zero().inv().is_err());
    }

    #[test]
    fn kernel_and_inverse() {
        let m = ScalarMatrix::from_ints(&[&[1, 2, 3], &[2, 4, 6]]);
        let ker = m.kernel();
        assert_eq!(ker.len(), 2);
        for k in &ker {
            let col = ScalarMatrix::from_fn(3, 1, |i, _| k[i].clone());
            assert!(m.mul(&col).is_zero());
        }
        let a = ScalarMatrix::from_ints(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), ScalarMatrix::identity(2));
        assert!(ScalarMatrix::from_ints(&[&[1, 1], &[1, 1]]).inverse().is_none());
    }
}
