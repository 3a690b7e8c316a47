//! Forward-mode second-order differentiation over the doubled variable set.
//!
//! A [`Taylor2`] carries the value, gradient and Hessian of a complex-valued
//! expression with respect to `(z_1..z_n, z̄_1..z̄_n)`, all treated as
//! independent. Index `j < n` is `z_j`, index `n + j` is `z̄_j`. Conjugating
//! an expression conjugates every coefficient and swaps the two halves.

use super::ast::{Ast, Node};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone)]
struct Taylor2 {
    n: usize,
    value: C64,
    grad: Vec<C64>,
    /// Row-major `2n × 2n`; empty when only first order is tracked.
    hess: Vec<C64>,
}

const ZERO: C64 = C64::new(0.0, 0.0);

impl Taylor2 {
    fn m(&self) -> usize {
        2 * self.n
    }

    fn constant(n: usize, value: C64, second: bool) -> Self {
        let m = 2 * n;
        Taylor2 {
            n,
            value,
            grad: vec![ZERO; m],
            hess: if second {
                vec![ZERO; m * m]
            } else {
                Vec::new()
            },
        }
    }

    fn variable(n: usize, j: usize, value: C64, second: bool) -> Self {
        let mut t = Self::constant(n, value, second);
        t.grad[j] = C64::new(1.0, 0.0);
        t
    }

    fn second(&self) -> bool {
        !self.hess.is_empty()
    }

    fn conj(&self) -> Self {
        let n = self.n;
        let m = self.m();
        let swap = |a: usize| if a < n { a + n } else { a - n };
        let grad = (0..m).map(|a| self.grad[swap(a)].conj()).collect();
        let hess = if self.second() {
            let mut h = vec![ZERO; m * m];
            for a in 0..m {
                for b in 0..m {
                    h[a * m + b] = self.hess[swap(a) * m + swap(b)].conj();
                }
            }
            h
        } else {
            Vec::new()
        };
        Taylor2 {
            n,
            value: self.value.conj(),
            grad,
            hess,
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Taylor2 {
            n: self.n,
            value: f(self.value, other.value),
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(&other.hess)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let m = self.m();
        let (f, g) = (self.value, other.value);
        let grad = (0..m)
            .map(|a| self.grad[a] * g + f * other.grad[a])
            .collect();
        let hess = if self.second() {
            let mut h = vec![ZERO; m * m];
            for a in 0..m {
                for b in 0..m {
                    h[a * m + b] = self.hess[a * m + b] * g
                        + self.grad[a] * other.grad[b]
                        + self.grad[b] * other.grad[a]
                        + f * other.hess[a * m + b];
                }
            }
            h
        } else {
            Vec::new()
        };
        Taylor2 {
            n: self.n,
            value: f * g,
            grad,
            hess,
        }
    }

    /// `φ(self)` given `φ(v)`, `φ'(v)`, `φ''(v)` at the current value.
    fn chain(&self, d0: C64, d1: C64, d2: C64) -> Self {
        let m = self.m();
        let grad = self.grad.iter().map(|g| d1 * g).collect();
        let hess = if self.second() {
            let mut h = vec![ZERO; m * m];
            for a in 0..m {
                for b in 0..m {
                    h[a * m + b] = d1 * self.hess[a * m + b] + d2 * self.grad[a] * self.grad[b];
                }
            }
            h
        } else {
            Vec::new()
        };
        Taylor2 {
            n: self.n,
            value: d0,
            grad,
            hess,
        }
    }

    fn recip(&self) -> Result<Self> {
        let v = self.value;
        if v == ZERO {
            return Err(Error::DivisionByZero);
        }
        let inv = v.inv();
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    fn powi(&self, k: i32) -> Result<Self> {
        let v = self.value;
        if k == 0 {
            return Ok(Self::constant(self.n, C64::new(1.0, 0.0), self.second()));
        }
        if k < 0 && v == ZERO {
            return Err(Error::DivisionByZero);
        }
        let kf = f64::from(k);
        // v^(k-2) is only formed when it is finite
        let d0 = v.powi(k);
        let d1 = if k == 1 {
            C64::new(1.0, 0.0)
        } else {
            kf * v.powi(k - 1)
        };
        let d2 = match k {
            1 => ZERO,
            2 => C64::new(2.0, 0.0),
            _ => kf * (kf - 1.0) * v.powi(k - 2),
        };
        Ok(self.chain(d0, d1, d2))
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|z| z.is_finite())
            && self.hess.iter().all(|z| z.is_finite())
    }
}

fn propagate(node: &Node, point: &[C64], second: bool) -> Result<Taylor2> {
    let n = point.len();
    let out = match node {
        Node::Var(j) => Taylor2::variable(n, *j, point[*j], second),
        Node::Const(z) => Taylor2::constant(n, *z, second),
        Node::Conj(a) => propagate(a, point, second)?.conj(),
        Node::Add(a, b) => {
            propagate(a, point, second)?.zip(&propagate(b, point, second)?, |x, y| x + y)
        }
        Node::Sub(a, b) => {
            propagate(a, point, second)?.zip(&propagate(b, point, second)?, |x, y| x - y)
        }
        Node::Mul(a, b) => propagate(a, point, second)?.mul(&propagate(b, point, second)?),
        Node::Div(a, b) => {
            let den = propagate(b, point, second)?.recip()?;
            propagate(a, point, second)?.mul(&den)
        }
        Node::Pow(a, k) => propagate(a, point, second)?.powi(*k)?,
        Node::Exp(a) => propagate(a, point, second)?.exp(),
    };
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// Second-order Wirtinger jet of a real-valued function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct WirtingerJet {
    pub value: f64,
    /// `∂ρ/∂z_j`
    pub grad: Vec<C64>,
    /// `∂²ρ/∂z_j∂z̄_k`
    pub mixed: CMatrix,
    /// `∂²ρ/∂z_j∂z_k`
    pub holo: CMatrix,
}

impl WirtingerJet {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// `Σ mixed_jk Z_j conj(Z_k)` before taking the real part.
    pub fn levi_raw(&self, z: &[C64]) -> C64 {
        let n = self.dim();
        let mut s = ZERO;
        for j in 0..n {
            for k in 0..n {
                s += self.mixed[(j, k)] * z[j] * z[k].conj();
            }
        }
        s
    }
}

fn check_point(ast: &Ast, point: &[C64]) -> Result<()> {
    if point.len() != ast.dim() {
        return Err(Error::DimensionMismatch {
            expected: ast.dim(),
            got: point.len(),
        });
    }
    Ok(())
}

/// Raw complex value of the expression.
pub fn eval_value(ast: &Ast, point: &[C64]) -> Result<C64> {
    check_point(ast, point)?;
    fn go(node: &Node, p: &[C64]) -> Result<C64> {
        let v = match node {
            Node::Var(j) => p[*j],
            Node::Const(z) => *z,
            Node::Conj(a) => go(a, p)?.conj(),
            Node::Add(a, b) => go(a, p)? + go(b, p)?,
            Node::Sub(a, b) => go(a, p)? - go(b, p)?,
            Node::Mul(a, b) => go(a, p)? * go(b, p)?,
            Node::Div(a, b) => {
                let den = go(b, p)?;
                if den == ZERO {
                    return Err(Error::DivisionByZero);
                }
                go(a, p)? / den
            }
            Node::Pow(a, k) => {
                let base = go(a, p)?;
                if *k < 0 && base == ZERO {
                    return Err(Error::DivisionByZero);
                }
                base.powi(*k)
            }
            Node::Exp(a) => go(a, p)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }
    go(ast.root(), point)
}

/// Value and holomorphic gradient only; used by Newton projection.
pub fn eval_gradient(ast: &Ast, point: &[C64]) -> Result<(f64, Vec<C64>)> {
    check_point(ast, point)?;
    let t = propagate(ast.root(), point, false)?;
    Ok((t.value.re, t.grad[..ast.dim()].to_vec()))
}

/// Full second-order Wirtinger jet.
pub fn eval_jet(ast: &Ast, point: &[C64]) -> Result<WirtingerJet> {
    check_point(ast, point)?;
    let n = ast.dim();
    let m = 2 * n;
    let t = propagate(ast.root(), point, true)?;
    let mixed = CMatrix::from_fn(n, n, |j, k| t.hess[j * m + n + k]);
    let holo = CMatrix::from_fn(n, n, |j, k| t.hess[j * m + k]);
    Ok(WirtingerJet {
        value: t.value.re,
        grad: t.grad[..n].to_vec(),
        mixed,
        holo,
    })
}
