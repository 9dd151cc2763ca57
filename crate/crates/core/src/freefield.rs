//! Elements of the free field, carried as certified linear representations.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::ncpoly::MatrixTuple;
use crate::ncrank::{self, RankCertificate, RankOptions};
use crate::ratdag::{self, FormalLinearRep, RatExpr};

/// Condition-number bound accepted by [`RationalFunction::evaluate`].
pub const EVAL_CONDITION_LIMIT: f64 = 1e12;
/// Relative agreement required between the representation and the source expression.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// A rational function `u A^{-1} v` whose pencil `A` has been certified full.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    rep: FormalLinearRep,
    source: Option<RatExpr>,
    certificate: RankCertificate,
    opts: RankOptions,
}

impl RationalFunction {
    /// Linearizes `expr` and certifies the pencil full; a non-full pencil means the
    /// expression is not regular.
    pub fn from_expr(expr: &RatExpr, opts: &RankOptions) -> Result<Self> {
        let mut rf = Self::from_rep(ratdag::linearize(expr), opts)?;
        rf.source = Some(expr.clone());
        Ok(rf)
    }

    pub fn from_rep(rep: FormalLinearRep, opts: &RankOptions) -> Result<Self> {
        let certificate = ncrank::is_full(&rep.a, opts)?;
        if !certificate.is_full() {
            return Err(Error::NotRegular(Box::new(certificate)));
        }
        Ok(RationalFunction { rep, source: None, certificate, opts: *opts })
    }

    pub fn parse(text: &str, opts: &RankOptions) -> Result<Self> {
        Self::from_expr(&RatExpr::parse(text)?, opts)
    }

    pub fn rep(&self) -> &FormalLinearRep {
        &self.rep
    }

    pub fn source(&self) -> Option<&RatExpr> {
        self.source.as_ref()
    }

    pub fn certificate(&self) -> &RankCertificate {
        &self.certificate
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::from_rep(self.rep.sum(&other.rep), &self.opts)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::from_rep(self.rep.product(&other.rep), &self.opts)
    }

    /// Same pencil and certificate; `u` changes sign.
    pub fn neg(&self) -> Self {
        RationalFunction { rep: self.rep.negated(), source: None, certificate: self.certificate.clone(), opts: self.opts }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero()? {
            return Err(Error::DivisionByZeroFunction);
        }
        Self::from_rep(self.rep.inverse(), &self.opts)
    }

    /// Zero test through the inner rank of the bordered pencil `[[0, u], [v, A]]`.
    pub fn is_zero(&self) -> Result<bool> {
        ncrank::bordered_is_zero(&self.rep.u, &self.rep.a, &self.rep.v, &self.opts)
    }

    pub fn equals(&self, other: &Self) -> Result<bool> {
        self.sub(other)?.is_zero()
    }

    /// `u A(X)^{-1} v`, cross-checked against the source expression when there is one.
    pub fn evaluate(&self, x: &MatrixTuple) -> Result<CMat> {
        let value = self.rep.eval(x, 1.0 / EVAL_CONDITION_LIMIT)?;
        if let Some(src) = &self.source {
            match ratdag::eval_dag(src, x, ratdag::DOMAIN_TOL) {
                Ok(direct) => {
                    let gap = (&value - &direct).norm();
                    if gap > CROSS_CHECK_TOL * (1.0 + direct.norm()) {
                        return Err(Error::Inconsistent(format!("representation and expression differ by {gap:e}")));
                    }
                }
                Err(Error::Domain { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(value)
    }
}

/// `r_1 + r_2`.
pub fn rf_add(r1: &RationalFunction, r2: &RationalFunction) -> Result<RationalFunction> {
    r1.add(r2)
}

/// `r_1 r_2`.
pub fn rf_mul(r1: &RationalFunction, r2: &RationalFunction) -> Result<RationalFunction> {
    r1.mul(r2)
}

/// `r^{-1}`; fails on the zero function.
pub fn rf_inv(r: &RationalFunction) -> Result<RationalFunction> {
    r.inv()
}

/// Parses, linearizes and zero-tests `text`.
pub fn is_zero_expr(text: &str, opts: &RankOptions) -> Result<bool> {
    RationalFunction::parse(text, opts)?.is_zero()
}
