//! Defining-function expressions: parsing, printing, Wirtinger jets, and
//! symbolic substitution of an affine map.

mod ast;
mod jet;
mod parse;

pub use ast::{Ast, Node};
pub use jet::{eval_gradient, eval_jet, eval_value, WirtingerJet};
pub use parse::parse;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sampling::{index_rng, SamplingBox};

/// Imaginary parts above `REALNESS_TOL·(1 + |value|)` mark an expression as complex.
pub const REALNESS_TOL: f64 = 1e-10;

/// Samples `trial_count` points of `bounds` and reports whether every raw
/// value is real within tolerance.
pub fn check_real_valued_in(
    ast: &Ast,
    bounds: &SamplingBox,
    trial_count: usize,
    seed: u64,
) -> Result<bool> {
    Ok(max_imaginary_part(ast, bounds, trial_count, seed)? <= REALNESS_TOL)
}

/// [`check_real_valued_in`] over the cube `[-2, 2]^{2n}`.
pub fn check_real_valued(ast: &Ast, trial_count: usize, seed: u64) -> Result<bool> {
    let bounds = SamplingBox::cube(ast.dim().max(1), -2.0, 2.0).expect("valid cube");
    check_real_valued_in(ast, &bounds, trial_count, seed)
}

/// Largest relative imaginary part `|Im ρ| / (1 + |ρ|)` seen over the trials.
pub fn max_imaginary_part(
    ast: &Ast,
    bounds: &SamplingBox,
    trial_count: usize,
    seed: u64,
) -> Result<f64> {
    if trial_count == 0 {
        return Err(Error::Precondition("trial_count must be at least 1".into()));
    }
    if bounds.dim() != ast.dim().max(1) {
        return Err(Error::DimensionMismatch {
            expected: ast.dim(),
            got: bounds.dim(),
        });
    }
    let mut worst = 0.0f64;
    for i in 0..trial_count {
        let mut p = bounds.sample(&mut index_rng(seed, i as u64));
        p.truncate(ast.dim());
        let v = eval_value(ast, &p)?;
        worst = worst.max(v.im.abs() / (1.0 + v.norm()));
    }
    Ok(worst)
}

/// Substitutes `z_j ← a_j + b_j·w1 + c_j·w2`, producing a 2-variable tree
/// whose variables `z1`, `z2` are `w1`, `w2`. Zero coefficients are omitted.
pub fn compose_with_affine(ast: &Ast, a: &[C64], b: &[C64], c: &[C64]) -> Result<Ast> {
    let n = ast.dim();
    for v in [a, b, c] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let zero = C64::new(0.0, 0.0);
    let coordinate = |j: usize| -> Node {
        let mut terms: Vec<Node> = Vec::new();
        if a[j] != zero {
            terms.push(Node::Const(a[j]));
        }
        for (coef, var) in [(b[j], 0), (c[j], 1)] {
            if coef != zero {
                terms.push(Node::mul(Node::Const(coef), Node::Var(var)));
            }
        }
        terms
            .into_iter()
            .reduce(Node::add)
            .unwrap_or(Node::Const(zero))
    };
    fn substitute(node: &Node, coord: &dyn Fn(usize) -> Node) -> Node {
        let sub = |x: &Node| Box::new(substitute(x, coord));
        match node {
            Node::Var(j) => coord(*j),
            Node::Const(z) => Node::Const(*z),
            Node::Conj(x) => Node::Conj(sub(x)),
            Node::Exp(x) => Node::Exp(sub(x)),
            Node::Pow(x, k) => Node::Pow(sub(x), *k),
            Node::Add(x, y) => Node::Add(sub(x), sub(y)),
            Node::Sub(x, y) => Node::Sub(sub(x), sub(y)),
            Node::Mul(x, y) => Node::Mul(sub(x), sub(y)),
            Node::Div(x, y) => Node::Div(sub(x), sub(y)),
        }
    }
    Ok(Ast::new(substitute(ast.root(), &coordinate), 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn realness() {
        assert!(check_real_valued(&parse("abs2(z1)-1").unwrap(), 16, 1).unwrap());
        assert!(!check_real_valued(&parse("z1").unwrap(), 16, 1).unwrap());
        assert!(check_real_valued(&parse("re(z1)+im(z2)").unwrap(), 16, 1).unwrap());
        assert!(check_real_valued(&parse("exp(re(z1*z2))*abs2(z2)^3").unwrap(), 16, 1).unwrap());
        assert!(check_real_valued(&parse("z1*conj(z2)+z2*conj(z1)").unwrap(), 16, 1).unwrap());
        assert!(!check_real_valued(&parse("z1*conj(z2)").unwrap(), 16, 1).unwrap());
        assert!(check_real_valued(&parse("1").unwrap(), 1, 0).is_ok());
        assert!(check_real_valued(&parse("z1").unwrap(), 0, 1).is_err());
    }

    #[test]
    fn compose_coordinate_swap() {
        let ast = parse("re(z2)").unwrap();
        let zero = [c(0.0, 0.0); 2];
        let composed = compose_with_affine(
            &ast,
            &zero,
            &[c(0.0, 0.0), c(1.0, 0.0)],
            &[c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(composed.dim(), 2);
        for w in [[c(0.3, 1.0), c(-2.0, 0.5)], [c(-1.5, 0.2), c(0.0, 0.0)]] {
            assert_eq!(eval_value(&composed, &w).unwrap(), c(w[0].re, 0.0));
        }
    }

    #[test]
    fn compose_identity_slice_of_ball() {
        let ball = parse("abs2(z1)+abs2(z2)-1").unwrap();
        let zero = [c(0.0, 0.0); 2];
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(0.0, 0.0), c(1.0, 0.0)];
        let composed = compose_with_affine(&ball, &zero, &e1, &e2).unwrap();
        let w = [c(0.25, -0.5), c(0.75, 0.1)];
        let direct = eval_value(&ball, &w).unwrap();
        assert!((eval_value(&composed, &w).unwrap() - direct).norm() < 1e-15);
    }

    #[test]
    fn compose_saddle_witness_slice() {
        // hand substitution: 0.1·re(w1) − 0.1 − |w2|²
        let saddle = parse("re(z2)-abs2(z1)").unwrap();
        let composed = compose_with_affine(
            &saddle,
            &[c(0.0, 0.0), c(-0.1, 0.0)],
            &[c(0.0, 0.0), c(0.1, 0.0)],
            &[c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        for w in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.3, -0.7), c(0.2, 0.9)]] {
            let expected = 0.1 * w[0].re - 0.1 - w[1].norm_sqr();
            let got = eval_value(&composed, &w).unwrap();
            assert!((got.re - expected).abs() < 1e-15);
            assert!(got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn compose_length_mismatch() {
        let ast = parse("abs2(z1)+abs2(z2)").unwrap();
        let short = [c(0.0, 0.0)];
        let ok = [c(0.0, 0.0); 2];
        assert!(compose_with_affine(&ast, &short, &ok, &ok).is_err());
    }

    fn point(n: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| c(a, b)), n)
    }

    const SOURCES: &[&str] = &[
        "abs2(z1)+abs2(z2)-1",
        "abs2(z1)^2+abs2(z2)-1",
        "re(z2)-abs2(z1)",
        "exp(re(z1))*abs2(z2) - im(z1*z2)/(2+abs2(z1))",
        "re((1.5-0.25*i)*z1^3) + abs2(z1 - 2*conj(z2))^-1",
    ];

    proptest! {
        #[test]
        fn print_parse_round_trip(k in 0usize..5, p in point(2)) {
            let ast = parse(SOURCES[k]).unwrap();
            let reparsed = parse(&ast.to_string()).unwrap();
            let a = eval_value(&ast, &p).unwrap();
            let b = eval_value(&reparsed, &p).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn compose_matches_direct_value(
            k in 0usize..5,
            (a, b, cc, w) in (point(2), point(2), point(2), point(2)),
        ) {
            let ast = parse(SOURCES[k]).unwrap();
            let composed = compose_with_affine(&ast, &a, &b, &cc).unwrap();
            let z: Vec<C64> = (0..2).map(|j| a[j] + b[j] * w[0] + cc[j] * w[1]).collect();
            let direct = eval_value(&ast, &z);
            let via = eval_value(&composed, &w);
            if let (Ok(direct), Ok(via)) = (direct, via) {
                prop_assert!((direct - via).norm() <= 1e-12 * (1.0 + direct.norm()));
            }
        }
    }
}
