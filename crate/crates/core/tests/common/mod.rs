//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use levislice::expr::{self, Ast, WirtingerJet};
use levislice::linalg::{CMatrix, C64};

pub const CATALOG_EXPRESSIONS: [&str; 5] = [
    "abs2(z1)+abs2(z2)-1",
    "abs2(z1)^2+abs2(z2)-1",
    "re(z2)-abs2(z1)",
    "re(z3)-abs2(z1)-abs2(z2)",
    "1-abs2(z1)-abs2(z2)",
];

/// Value, gradient and Hessians of `ast` from central differences in the
/// real coordinates `x_j = re z_j`, `y_j = im z_j`.
pub struct FdJet {
    pub value: f64,
    pub grad: Vec<C64>,
    pub mixed: CMatrix,
    pub holo: CMatrix,
}

pub fn fd_jet(ast: &Ast, z: &[C64]) -> FdJet {
    let n = z.len();
    let x0: Vec<f64> = z.iter().flat_map(|c| [c.re, c.im]).collect();
    let f = |moves: &[(usize, f64)]| {
        let mut x = x0.clone();
        for &(i, d) in moves {
            x[i] += d;
        }
        let p: Vec<C64> = x.chunks(2).map(|q| C64::new(q[0], q[1])).collect();
        expr::eval_value(ast, &p).expect("finite value").re
    };
    // Rounding in a second difference grows like eps/h^2, so the second
    // derivatives use a wider step than the first.
    let h1: Vec<f64> = x0
        .iter()
        .map(|x| f64::EPSILON.cbrt() * (1.0 + x.abs()))
        .collect();
    let h2: Vec<f64> = x0
        .iter()
        .map(|x| f64::EPSILON.powf(0.25) * (1.0 + x.abs()))
        .collect();
    let f0 = f(&[]);
    let d1: Vec<f64> = (0..2 * n)
        .map(|i| (f(&[(i, h1[i])]) - f(&[(i, -h1[i])])) / (2.0 * h1[i]))
        .collect();
    let mut hess = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..2 * n {
        for j in 0..2 * n {
            let (hi, hj) = (h2[i], h2[j]);
            hess[i][j] = if i == j {
                (f(&[(i, hi)]) - 2.0 * f0 + f(&[(i, -hi)])) / (hi * hi)
            } else {
                (f(&[(i, hi), (j, hj)]) - f(&[(i, hi), (j, -hj)]) - f(&[(i, -hi), (j, hj)])
                    + f(&[(i, -hi), (j, -hj)]))
                    / (4.0 * hi * hj)
            };
        }
    }
    let xx = |j: usize, k: usize| hess[2 * j][2 * k];
    let yy = |j: usize, k: usize| hess[2 * j + 1][2 * k + 1];
    let xy = |j: usize, k: usize| hess[2 * j][2 * k + 1];
    let yx = |j: usize, k: usize| hess[2 * j + 1][2 * k];
    FdJet {
        value: f0,
        grad: (0..n)
            .map(|j| C64::new(d1[2 * j], -d1[2 * j + 1]) / 2.0)
            .collect(),
        mixed: CMatrix::from_fn(n, n, |j, k| {
            C64::new(xx(j, k) + yy(j, k), xy(j, k) - yx(j, k)) / 4.0
        }),
        holo: CMatrix::from_fn(n, n, |j, k| {
            C64::new(xx(j, k) - yy(j, k), -(xy(j, k) + yx(j, k))) / 4.0
        }),
    }
}

/// `|a - b| / max(1, |b|)`
pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn max_rel_matrix(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            worst = worst.max(rel(a[(i, j)], b[(i, j)]));
        }
    }
    worst
}

/// Largest componentwise relative error between a jet and its difference
/// quotient oracle.
pub fn jet_vs_fd(ad: &WirtingerJet, fd: &FdJet) -> f64 {
    let mut worst = rel(C64::new(ad.value, 0.0), C64::new(fd.value, 0.0));
    for (a, b) in ad.grad.iter().zip(&fd.grad) {
        worst = worst.max(rel(*a, *b));
    }
    worst
        .max(max_rel_matrix(&ad.mixed, &fd.mixed))
        .max(max_rel_matrix(&ad.holo, &fd.holo))
}

pub fn jet_vs_jet(a: &WirtingerJet, b: &WirtingerJet) -> f64 {
    let mut worst = rel(C64::new(a.value, 0.0), C64::new(b.value, 0.0));
    for (x, y) in a.grad.iter().zip(&b.grad) {
        worst = worst.max(rel(*x, *y));
    }
    worst
        .max(max_rel_matrix(&a.mixed, &b.mixed))
        .max(max_rel_matrix(&a.holo, &b.holo))
}

/// Strips the trailing timing object so two reports can be compared byte for byte.
pub fn without_timing(json: &str) -> &str {
    let cut = json.find("\"timing\"").expect("report has timing");
    &json[..cut]
}
