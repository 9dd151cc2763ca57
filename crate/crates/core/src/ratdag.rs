//! Rational expressions as hash-consed DAGs: parsing, evaluation on matrix tuples with domain
//! tracking, and formal linear representations `r(X) = u A(X)^{-1} v`.
//!
//! Grammar:
//!
//! ```text
//! expr   := ["-"] term {("+" | "-") term}
//! term   := factor {"*" factor}
//! factor := "inv(" expr ")" | "(" expr ")" | scalar | var
//! var    := "x" digits | "x" | "y" | "z"
//! scalar := rational or decimal, optionally with "i"; "(a+bi)" is one complex literal
//! ```
//!
//! Products associate to the right and sums to the left. `a - b` is `a + (-1)*b`, folded into
//! a single constant when `b` is one.

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CMat};
use crate::ncpoly::MatrixTuple;
use crate::pencil::LinearPencil;
use crate::scalar::{ExactScalar, ScalarMatrix};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(ExactScalar),
    /// 0-based variable index.
    Var(usize),
    Add(NodeId, NodeId),
    /// Left factor first.
    Mul(NodeId, NodeId),
    Inv(NodeId),
}

/// Nodes are stored in topological order: children precede parents, the root is last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatExpr {
    nodes: Vec<Node>,
    root: NodeId,
    nvars: usize,
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl Builder {
    fn push(&mut self, n: Node) -> NodeId {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    fn negate(&mut self, id: NodeId) -> NodeId {
        match &self.nodes[id] {
            Node::Const(c) => {
                let c = -c;
                self.push(Node::Const(c))
            }
            _ => {
                let m = self.push(Node::Const(-ExactScalar::one()));
                self.push(Node::Mul(m, id))
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    b: Builder,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<NodeId> {
        self.skip_ws();
        let mut acc = if self.eat('-') {
            let t = self.term()?;
            self.b.negate(t)
        } else {
            self.term()?
        };
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = self.b.push(Node::Add(acc, t));
            } else if self.eat('-') {
                let t = self.term()?;
                let n = self.b.negate(t);
                acc = self.b.push(Node::Add(acc, n));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<NodeId> {
        let mut factors = vec![self.factor()?];
        while self.eat('*') {
            factors.push(self.factor()?);
        }
        let mut acc = factors.pop().expect("at least one factor");
        while let Some(f) = factors.pop() {
            acc = self.b.push(Node::Mul(f, acc));
        }
        Ok(acc)
    }

    fn matching_paren(&self, open: usize) -> Option<usize> {
        let mut depth = 0;
        for (k, c) in self.src[open..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(open + k);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn factor(&mut self) -> Result<NodeId> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Err(syntax(start, "expected a factor, found end of input"));
        };
        if self.src[start..].starts_with("inv") {
            self.pos += 3;
            if !self.eat('(') {
                return Err(syntax(self.pos, "expected '(' after inv"));
            }
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(syntax(self.pos, "expected ')'"));
            }
            return Ok(self.b.push(Node::Inv(e)));
        }
        if c == '(' {
            let close = self.matching_paren(start).ok_or_else(|| syntax(start, "unbalanced '('"))?;
            let inner = &self.src[start + 1..close];
            if let Ok(z) = inner.parse::<ExactScalar>() {
                if inner.contains('i') || inner.trim_start().starts_with(['-', '+']) || !inner.contains(['+', '-']) {
                    self.pos = close + 1;
                    return Ok(self.b.push(Node::Const(z)));
                }
            }
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(syntax(self.pos, "expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            let rest = &self.src[start..];
            let mut end = 0;
            let bytes = rest.as_bytes();
            while end < bytes.len() {
                let b = bytes[end];
                let exp_sign = (b == b'+' || b == b'-') && end > 0 && matches!(bytes[end - 1], b'e' | b'E');
                if b.is_ascii_digit() || b == b'.' || b == b'/' || b == b'e' || b == b'E' || exp_sign {
                    end += 1;
                } else {
                    break;
                }
            }
            if end < bytes.len() && bytes[end] == b'i' {
                end += 1;
            }
            let lit = &rest[..end];
            let z: ExactScalar = lit.parse().map_err(|_| syntax(start, format!("invalid number '{lit}'")))?;
            self.pos += end;
            return Ok(self.b.push(Node::Const(z)));
        }
        let ident_end = self.src[start..]
            .find(|ch: char| !ch.is_ascii_alphanumeric())
            .map_or(self.src.len(), |k| start + k);
        let ident = &self.src[start..ident_end];
        let var = match ident {
            "x" => Some(0),
            "y" => Some(1),
            "z" => Some(2),
            "i" => {
                self.pos = ident_end;
                return Ok(self.b.push(Node::Const(ExactScalar::i())));
            }
            s => s
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| k - 1),
        };
        match var {
            Some(v) => {
                self.pos = ident_end;
                Ok(self.b.push(Node::Var(v)))
            }
            None if ident.is_empty() => Err(syntax(start, format!("unexpected '{c}'"))),
            None => Err(syntax(start, format!("unknown identifier '{ident}'"))),
        }
    }
}

impl RatExpr {
    pub fn parse(text: &str) -> Result<RatExpr> {
        let mut p = Parser { src: text, pos: 0, b: Builder::default() };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(syntax(p.pos, format!("unexpected '{}'", p.peek().unwrap_or(' '))));
        }
        Ok(RatExpr::from_builder(p.b, root))
    }

    /// Keeps the nodes reachable from `root`, numbered in left-to-right post-order so that
    /// equal expressions have equal node vectors.
    fn from_builder(b: Builder, root: NodeId) -> RatExpr {
        let mut remap = vec![usize::MAX; b.nodes.len()];
        let mut nodes = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if remap[id] != usize::MAX {
                continue;
            }
            let children: Vec<NodeId> = match b.nodes[id] {
                Node::Add(l, r) | Node::Mul(l, r) => vec![l, r],
                Node::Inv(c) => vec![c],
                _ => vec![],
            };
            if expanded || children.is_empty() {
                remap[id] = nodes.len();
                nodes.push(match b.nodes[id].clone() {
                    Node::Add(l, r) => Node::Add(remap[l], remap[r]),
                    Node::Mul(l, r) => Node::Mul(remap[l], remap[r]),
                    Node::Inv(c) => Node::Inv(remap[c]),
                    other => other,
                });
            } else {
                stack.push((id, true));
                for &c in children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        let nvars = nodes.iter().filter_map(|n| if let Node::Var(v) = n { Some(v + 1) } else { None }).max().unwrap_or(0);
        let root = nodes.len() - 1;
        RatExpr { nodes, root, nvars }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// One more than the largest variable index that occurs.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Size of [`linearize`]'s output: 2 per leaf occurrence, sums and products add, an
    /// inverse adds one, with shared subexpressions counted once per use.
    pub fn linear_dimension(&self) -> usize {
        let mut dim = vec![0usize; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            dim[id] = match *n {
                Node::Const(_) | Node::Var(_) => 2,
                Node::Add(l, r) | Node::Mul(l, r) => dim[l] + dim[r],
                Node::Inv(c) => dim[c] + 1,
            };
        }
        dim[self.root]
    }

    fn write_node(&self, id: NodeId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.nodes[id] {
            Node::Const(c) => {
                let s = c.to_string();
                if s.starts_with('-') && !s.starts_with('(') {
                    write!(f, "({s})")
                } else {
                    write!(f, "{s}")
                }
            }
            Node::Var(v) => write!(f, "x{}", v + 1),
            Node::Add(l, r) => {
                self.write_node(*l, f)?;
                write!(f, " + ")?;
                self.write_wrapped(*r, f, |n| matches!(n, Node::Add(..)))
            }
            Node::Mul(l, r) => {
                self.write_wrapped(*l, f, |n| matches!(n, Node::Add(..) | Node::Mul(..)))?;
                write!(f, "*")?;
                self.write_wrapped(*r, f, |n| matches!(n, Node::Add(..)))
            }
            Node::Inv(c) => {
                write!(f, "inv(")?;
                self.write_node(*c, f)?;
                write!(f, ")")
            }
        }
    }

    fn write_wrapped(&self, id: NodeId, f: &mut fmt::Formatter<'_>, wrap: impl Fn(&Node) -> bool) -> fmt::Result {
        if wrap(&self.nodes[id]) {
            write!(f, "(")?;
            self.write_node(id, f)?;
            write!(f, ")")
        } else {
            self.write_node(id, f)
        }
    }
}

impl fmt::Display for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_node(self.root, f)
    }
}

impl std::str::FromStr for RatExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RatExpr::parse(s)
    }
}

/// Default domain tolerance: an inverse is refused when the smallest singular value of its
/// argument is at most `DOMAIN_TOL` times the argument's propagated scale.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Evaluates bottom-up. An `Inv` node whose argument `M` has `sigma_min(M) <= tol * scale(M)`
/// raises [`Error::Domain`], where `scale` bounds the size of the unrounded value: `|c|` for
/// constants, `||X_i||` for variables, sums for `Add`, products for `Mul` and `||M^{-1}||` for
/// inverses. Cancellation down to rounding noise is thereby recognised as a zero argument.
pub fn eval_dag(r: &RatExpr, x: &MatrixTuple, tol: f64) -> Result<CMat> {
    if x.n() < r.nvars() {
        return Err(Error::DimensionMismatch(format!("expression in {} variables, tuple of {}", r.nvars(), x.n())));
    }
    let d = x.dim();
    let mut vals: Vec<CMat> = Vec::with_capacity(r.nodes.len());
    let mut scale: Vec<f64> = Vec::with_capacity(r.nodes.len());
    for (id, n) in r.nodes.iter().enumerate() {
        let (v, s) = match *n {
            Node::Const(ref c) => (linalg::identity(d) * c.to_c64(), c.to_c64().norm()),
            Node::Var(i) => (x.mats()[i].clone(), linalg::op_norm(&x.mats()[i])),
            Node::Add(a, b) => (&vals[a] + &vals[b], scale[a] + scale[b]),
            Node::Mul(a, b) => (&vals[a] * &vals[b], scale[a] * scale[b]),
            Node::Inv(c) => {
                let sv = linalg::singular_values(&vals[c]);
                let smin = sv.last().copied().unwrap_or(0.0);
                if d > 0 && smin <= tol * scale[c] {
                    return Err(Error::Domain { node: id });
                }
                let inv = vals[c].clone().try_inverse().ok_or(Error::Domain { node: id })?;
                (inv, if d > 0 { 1.0 / smin } else { 0.0 })
            }
        };
        vals.push(v);
        scale.push(s);
    }
    Ok(vals.swap_remove(r.root))
}

/// `(u, A, v)` with `r(X) = u A(X)^{-1} v` wherever `r` is defined.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalLinearRep {
    pub u: Vec<ExactScalar>,
    pub a: LinearPencil,
    pub v: Vec<ExactScalar>,
}

struct Parts {
    u: Vec<ExactScalar>,
    coeffs: Vec<ScalarMatrix>,
    v: Vec<ExactScalar>,
}

fn leaf(nvars: usize, constant: ExactScalar, var: Option<usize>) -> Parts {
    let mut coeffs = vec![ScalarMatrix::zeros(2, 2); nvars + 1];
    coeffs[0] = ScalarMatrix::from_rows(&[vec![-constant, ExactScalar::one()], vec![ExactScalar::one(), ExactScalar::zero()]])
        .expect("2x2");
    if let Some(j) = var {
        coeffs[j + 1][(0, 0)] = -ExactScalar::one();
    }
    Parts { u: vec![ExactScalar::zero(), ExactScalar::one()], coeffs, v: vec![ExactScalar::zero(), ExactScalar::one()] }
}

fn place(dst: &mut ScalarMatrix, src: &ScalarMatrix, r0: usize, c0: usize) {
    for i in 0..src.rows() {
        for j in 0..src.cols() {
            dst[(r0 + i, c0 + j)] = src[(i, j)].clone();
        }
    }
}

fn direct_sum(a: &Parts, b: &Parts) -> Parts {
    let (k1, k2) = (a.u.len(), b.u.len());
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| {
            let mut m = ScalarMatrix::zeros(k1 + k2, k1 + k2);
            place(&mut m, x, 0, 0);
            place(&mut m, y, k1, k1);
            m
        })
        .collect();
    Parts { u: [a.u.clone(), b.u.clone()].concat(), coeffs, v: [a.v.clone(), b.v.clone()].concat() }
}

/// `((0, u_1), [[-v_1 u_2, A_1], [A_2, 0]], (0; v_2))`; column blocks are `(k_2, k_1)`.
fn product(a: &Parts, b: &Parts) -> Parts {
    let (k1, k2) = (a.u.len(), b.u.len());
    let k = k1 + k2;
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .enumerate()
        .map(|(t, (x, y))| {
            let mut m = ScalarMatrix::zeros(k, k);
            if t == 0 {
                let corner = ScalarMatrix::from_fn(k1, k2, |i, j| -(&a.v[i] * &b.u[j]));
                place(&mut m, &corner, 0, 0);
            }
            place(&mut m, x, 0, k2);
            place(&mut m, y, k1, 0);
            m
        })
        .collect();
    let mut u = vec![ExactScalar::zero(); k2];
    u.extend(a.u.iter().cloned());
    let mut v = vec![ExactScalar::zero(); k1];
    v.extend(b.v.iter().cloned());
    Parts { u, coeffs, v }
}

/// `((-1, 0), [[0, u], [v, A]], (1; 0))`. The leading `-1` compensates the bordered Schur
/// complement, which equals `-r` rather than `r`.
fn inverse(a: &Parts) -> Parts {
    let k = a.u.len();
    let coeffs = a
        .coeffs
        .iter()
        .enumerate()
        .map(|(t, x)| {
            let mut m = ScalarMatrix::zeros(k + 1, k + 1);
            if t == 0 {
                for j in 0..k {
                    m[(0, j + 1)] = a.u[j].clone();
                    m[(j + 1, 0)] = a.v[j].clone();
                }
            }
            place(&mut m, x, 1, 1);
            m
        })
        .collect();
    let mut u = vec![ExactScalar::zero(); k + 1];
    u[0] = -ExactScalar::one();
    let mut v = vec![ExactScalar::zero(); k + 1];
    v[0] = ExactScalar::one();
    Parts { u, coeffs, v }
}

impl FormalLinearRep {
    fn from_parts(p: Parts) -> FormalLinearRep {
        FormalLinearRep { u: p.u, a: LinearPencil::new(p.coeffs, false).expect("square blocks"), v: p.v }
    }

    fn parts(&self) -> Parts {
        Parts { u: self.u.clone(), coeffs: self.a.exact_coeffs().to_vec(), v: self.v.clone() }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn nvars(&self) -> usize {
        self.a.nvars()
    }

    /// Same representation in `nvars >= self.nvars()` variables.
    pub fn with_nvars(&self, nvars: usize) -> FormalLinearRep {
        let mut p = self.parts();
        let k = self.dim();
        p.coeffs.resize(nvars + 1, ScalarMatrix::zeros(k, k));
        FormalLinearRep::from_parts(p)
    }

    pub fn sum(&self, other: &FormalLinearRep) -> FormalLinearRep {
        let n = self.nvars().max(other.nvars());
        FormalLinearRep::from_parts(direct_sum(&self.with_nvars(n).parts(), &other.with_nvars(n).parts()))
    }

    pub fn product(&self, other: &FormalLinearRep) -> FormalLinearRep {
        let n = self.nvars().max(other.nvars());
        FormalLinearRep::from_parts(product(&self.with_nvars(n).parts(), &other.with_nvars(n).parts()))
    }

    pub fn inverse(&self) -> FormalLinearRep {
        FormalLinearRep::from_parts(inverse(&self.parts()))
    }

    /// Scales `u` by `-1`.
    pub fn negated(&self) -> FormalLinearRep {
        FormalLinearRep { u: self.u.iter().map(|c| -c).collect(), a: self.a.clone(), v: self.v.clone() }
    }

    /// `(u (x) 1) A(X)^{-1} (v (x) 1)`; refuses `A(X)` with condition number above `1 / tol`.
    pub fn eval(&self, x: &MatrixTuple, tol: f64) -> Result<CMat> {
        let d = x.dim();
        let k = self.dim();
        let ax = self.a.eval(x)?;
        let sv = linalg::singular_values(&ax);
        let (smax, smin) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
        if smin <= tol * smax {
            return Err(Error::Domain { node: usize::MAX });
        }
        let row = CMat::from_fn(1, k, |_, j| self.u[j].to_c64());
        let col = CMat::from_fn(k, 1, |i, _| self.v[i].to_c64());
        let vr = linalg::kron(&col, &linalg::identity(d));
        let z = ax.lu().solve(&vr).ok_or(Error::Domain { node: usize::MAX })?;
        Ok(linalg::kron(&row, &linalg::identity(d)) * z)
    }

    /// `{"pencil": <pencil JSON>, "u": [...], "v": [...]}`.
    pub fn to_json_value(&self) -> Value {
        json!({
            "pencil": self.a.to_json_value(),
            "u": self.u.iter().map(io::scalar_to_value).collect::<Vec<_>>(),
            "v": self.v.iter().map(io::scalar_to_value).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_value(value: &Value) -> Result<FormalLinearRep> {
        let a = LinearPencil::from_json_value(value.get("pencil").ok_or_else(|| Error::Parse("missing \"pencil\"".into()))?)?;
        let vec_of = |key: &str| -> Result<Vec<ExactScalar>> {
            value
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("missing \"{key}\" array")))?
                .iter()
                .map(io::scalar_from_value)
                .collect()
        };
        let (u, v) = (vec_of("u")?, vec_of("v")?);
        if u.len() != a.size() || v.len() != a.size() {
            return Err(Error::DimensionMismatch("u and v must match the pencil size".into()));
        }
        Ok(FormalLinearRep { u, a, v })
    }
}

/// Formal linear representation built by structural recursion over the DAG.
pub fn linearize(r: &RatExpr) -> FormalLinearRep {
    let n = r.nvars();
    let mut reps: Vec<Parts> = Vec::with_capacity(r.nodes.len());
    for node in &r.nodes {
        let p = match *node {
            Node::Const(ref c) => leaf(n, c.clone(), None),
            Node::Var(j) => leaf(n, ExactScalar::zero(), Some(j)),
            Node::Add(a, b) => direct_sum(&reps[a], &reps[b]),
            Node::Mul(a, b) => product(&reps[a], &reps[b]),
            Node::Inv(c) => inverse(&reps[c]),
        };
        reps.push(p);
    }
    FormalLinearRep::from_parts(reps.swap_remove(r.root))
}

/// `||u A(X)^{-1} v - r(X)|| <= tol * (1 + ||r(X)||)`, Frobenius norms; the point must lie in
/// the domain of `r`.
pub fn rep_eval_consistency(r: &RatExpr, rep: &FormalLinearRep, x: &MatrixTuple, tol: f64) -> Result<bool> {
    let direct = eval_dag(r, x, DOMAIN_TOL)?;
    let via_rep = rep.eval(x, 1e-15)?;
    Ok((via_rep - &direct).norm() <= tol * (1.0 + direct.norm()))
}
