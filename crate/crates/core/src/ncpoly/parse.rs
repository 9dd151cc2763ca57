//! Text format for polynomials: `(3/2+1/2i)*x1*x2^3 - x2 + 4`.

use std::fmt;

use num_traits::Signed;

use super::{NCPoly, Word};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

/// Splits at top-level `+`/`-` signs, returning `(offset, negated, term text)`.
fn split_terms(text: &str) -> Result<Vec<(usize, bool, &str)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut neg = false;
    let mut leading_sign = false;
    for (k, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(syntax(k, "unbalanced ')'"));
                }
            }
            b'+' | b'-' if depth == 0 => {
                let prev = text[..k].trim_end();
                let exponent = prev.ends_with(['e', 'E'])
                    && prev[..prev.len() - 1].ends_with(|c: char| c.is_ascii_digit() || c == '.');
                if exponent {
                    continue;
                }
                let piece = &text[start..k];
                if piece.trim().is_empty() {
                    if !out.is_empty() || leading_sign {
                        return Err(syntax(k, "missing term before sign"));
                    }
                    leading_sign = true;
                } else {
                    out.push((start, neg, piece));
                }
                neg = b == b'-';
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(syntax(text.len(), "unbalanced '('"));
    }
    let piece = &text[start..];
    if piece.trim().is_empty() {
        return Err(syntax(text.len(), "missing term"));
    }
    out.push((start, neg, piece));
    Ok(out)
}

fn parse_factor(offset: usize, f: &str) -> Result<(Option<Word>, ExactScalar)> {
    let f = f.trim();
    if f.is_empty() {
        return Err(syntax(offset, "empty factor"));
    }
    if let Some(rest) = f.strip_prefix('x') {
        let (idx, pow) = match rest.split_once('^') {
            Some((i, p)) => (i, p),
            None => (rest, "1"),
        };
        let idx: usize = idx.trim().parse().map_err(|_| syntax(offset, format!("bad variable '{f}'")))?;
        if idx == 0 {
            return Err(syntax(offset, "variables are numbered from x1"));
        }
        let pow: usize = pow.trim().parse().map_err(|_| syntax(offset, format!("bad exponent in '{f}'")))?;
        if pow == 0 {
            return Err(syntax(offset, "exponent must be a positive integer"));
        }
        let letters = vec![(idx - 1) as u32; pow];
        return Ok((Some(Word(letters)), ExactScalar::one()));
    }
    let c: ExactScalar = f.parse().map_err(|_| syntax(offset, format!("bad factor '{f}'")))?;
    Ok((None, c))
}

fn split_factors(term: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (k, b) in term.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'*' if depth == 0 => {
                out.push((start, &term[start..k]));
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push((start, &term[start..]));
    out
}

pub(super) fn parse_poly(text: &str, nvars: Option<usize>) -> Result<NCPoly> {
    let mut terms: Vec<(Word, ExactScalar)> = Vec::new();
    for (off, neg, term) in split_terms(text)? {
        let mut word = Word::unit();
        let mut coeff = ExactScalar::one();
        for (foff, factor) in split_factors(term) {
            let (w, c) = parse_factor(off + foff, factor)?;
            if let Some(w) = w {
                word = word.concat(&w);
            }
            coeff = &coeff * &c;
        }
        if neg {
            coeff = -coeff;
        }
        terms.push((word, coeff));
    }
    let needed = terms.iter().filter_map(|(w, _)| w.max_letter()).max().map_or(0, |m| m as usize + 1);
    let n = match nvars {
        Some(n) if n < needed => return Err(Error::VarCountMismatch(needed, n)),
        Some(n) => n,
        None => needed.max(1),
    };
    NCPoly::from_terms(n, terms)
}

pub(super) fn write_poly(p: &NCPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (k, (w, c)) in p.terms().enumerate() {
        let negative = c.is_real() && c.re.is_negative();
        let mag = if negative { -c } else { c.clone() };
        if k == 0 {
            if negative {
                write!(f, "-")?;
            }
        } else if negative {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mut shown = mag.to_string();
        if shown.starts_with('-') {
            shown = format!("({shown})");
        }
        match (w.is_empty(), mag.is_one()) {
            (true, _) => write!(f, "{shown}")?,
            (false, true) => write!(f, "{w}")?,
            (false, false) => write!(f, "{shown}*{w}")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let p = NCPoly::parse("(3/2+1/2i)*x1*x2^3", None).unwrap();
        assert_eq!(p.nvars(), 2);
        let (w, c) = p.terms().next().unwrap();
        assert_eq!(w.letters(), &[0, 1, 1, 1]);
        assert_eq!(c.to_string(), "(3/2+1/2i)");
    }

    #[test]
    fn printing_is_canonical() {
        let p = NCPoly::parse("x2*x1 - 3/2*x1 + 2 + x1*x1", Some(2)).unwrap();
        assert_eq!(p.to_string(), "2 - 3/2*x1 + x1^2 + x2*x1");
        let q = NCPoly::parse(&p.to_string(), Some(2)).unwrap();
        assert_eq!(p, q);
        assert_eq!(NCPoly::parse("-x1 + x1", None).unwrap().to_string(), "0");
    }

    #[test]
    fn rejects_malformed_text() {
        for bad in ["", "x1 +", "x0", "x1^0", "x1**x2", "(1+2", "x1 + + x2", "y1"] {
            assert!(NCPoly::parse(bad, None).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn leading_minus_and_exponents() {
        let p = NCPoly::parse("-x1 + 1e-2", None).unwrap();
        assert_eq!(p.to_string(), "1/100 - x1");
    }
}
