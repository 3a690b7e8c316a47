use std::fmt;

use crate::linalg::C64;

/// Expression node. `re`, `im`, `abs2` and unary minus are desugared by the
/// parser, so only these kinds reach the evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// `z_j`, stored 0-based.
    Var(usize),
    Const(C64),
    Conj(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Exp(Box<Node>),
}

impl Node {
    pub(crate) fn constant(re: f64, im: f64) -> Node {
        Node::Const(C64::new(re, im))
    }

    pub(crate) fn add(a: Node, b: Node) -> Node {
        Node::Add(Box::new(a), Box::new(b))
    }

    pub(crate) fn sub(a: Node, b: Node) -> Node {
        Node::Sub(Box::new(a), Box::new(b))
    }

    pub(crate) fn mul(a: Node, b: Node) -> Node {
        Node::Mul(Box::new(a), Box::new(b))
    }

    pub(crate) fn div(a: Node, b: Node) -> Node {
        Node::Div(Box::new(a), Box::new(b))
    }

    pub(crate) fn conj(a: Node) -> Node {
        Node::Conj(Box::new(a))
    }

    /// Largest 1-based variable index appearing in the tree.
    pub fn max_var(&self) -> usize {
        match self {
            Node::Var(j) => j + 1,
            Node::Const(_) => 0,
            Node::Conj(a) | Node::Exp(a) | Node::Pow(a, _) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Var(_) | Node::Const(_) => 1,
            Node::Conj(a) | Node::Exp(a) | Node::Pow(a, _) => 1 + a.node_count(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

/// Real parts and imaginary parts are written with `{:?}` so the printed
/// form reparses to bit-identical constants.
fn write_const(f: &mut fmt::Formatter<'_>, z: C64) -> fmt::Result {
    if z.im == 0.0 {
        if z.re.is_sign_negative() {
            write!(f, "({:?})", z.re)
        } else {
            write!(f, "{:?}", z.re)
        }
    } else {
        write!(f, "({:?}+({:?})*i)", z.re, z.im)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(j) => write!(f, "z{}", j + 1),
            Node::Const(z) => write_const(f, *z),
            Node::Conj(a) => write!(f, "conj({a})"),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Pow(a, k) => write!(f, "({a})^{k}"),
            Node::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

/// Parsed defining-function expression together with its dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    root: Node,
    n: usize,
}

impl Ast {
    /// Wraps a node; `n` is raised to the largest variable index if needed.
    pub fn new(root: Node, n: usize) -> Self {
        let n = n.max(root.max_var());
        Ast { root, n }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Same tree viewed in a larger ambient dimension.
    pub fn with_dim(&self, n: usize) -> crate::Result<Ast> {
        if n < self.root.max_var() {
            return Err(crate::Error::DimensionMismatch {
                expected: self.root.max_var(),
                got: n,
            });
        }
        Ok(Ast {
            root: self.root.clone(),
            n,
        })
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
