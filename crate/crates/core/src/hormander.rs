//! Local quadratic witness of nonpseudoconvexity.
//!
//! At a boundary point `M` with a complex tangent direction `Z` of negative
//! Levi form `λ`, the second-order Taylor polynomial of `ρ` plus `ε|z − M|²`
//! (with `ε = |λ|/2`) is a real quadratic `q` with `q(M) = 0`, `∂q(M) ≠ 0`,
//! `Z` complex tangent for `q`, Levi form `λ + ε < 0` at `Z`, and
//! `{q < 0} ⊂ Ω` near `M`. The last property is checked by sampling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levi::{Domain, LeviProbe};
use crate::linalg::{self, CMatrix, C64};
use crate::sampling::{index_rng, uniform_in_ball};

pub const MAX_HALVINGS: usize = 20;
pub const MIN_VERIFY_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticWitness {
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub center: Vec<C64>,
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub lin: Vec<C64>,
    #[serde(serialize_with = "crate::report::ser_cmat")]
    pub holo2: CMatrix,
    #[serde(serialize_with = "crate::report::ser_cmat")]
    pub mixed2: CMatrix,
    pub eps: f64,
    pub radius: f64,
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub direction: Vec<C64>,
    /// Levi value of `ρ` at `(center, direction)` the witness was built from.
    pub lambda: f64,
}

impl QuadraticWitness {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Levi form of `q` (constant in `z`): `Σ mixed2_jk W_j conj(W_k) + ε|W|²`.
    pub fn levi_form(&self, w: &[C64]) -> f64 {
        let n = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += self.mixed2[(j, k)] * w[j] * w[k].conj();
            }
        }
        s.re + self.eps * linalg::norm(w).powi(2)
    }

    /// `q` written in the expression grammar; reparses to the same polynomial.
    pub fn to_expression(&self) -> String {
        let n = self.dim();
        let cst = |z: C64| format!("({:?}+({:?})*i)", z.re, z.im);
        let d = |j: usize| format!("(z{}-{})", j + 1, cst(self.center[j]));
        let mut lin = Vec::new();
        let mut holo = Vec::new();
        let mut mixed = Vec::new();
        let mut iso = Vec::new();
        for j in 0..n {
            lin.push(format!("{}*{}", cst(self.lin[j]), d(j)));
            iso.push(format!("abs2({})", d(j)));
            for k in 0..n {
                holo.push(format!("{}*{}*{}", cst(self.holo2[(j, k)]), d(j), d(k)));
                mixed.push(format!(
                    "{}*{}*conj({})",
                    cst(self.mixed2[(j, k)]),
                    d(j),
                    d(k)
                ));
            }
        }
        format!(
            "2*re({}) + re({}) + re({}) + {:?}*({})",
            lin.join("+"),
            holo.join("+"),
            mixed.join("+"),
            self.eps,
            iso.join("+")
        )
    }
}

/// `2 Re(Σ lin_j d_j) + Re(Σ holo2_jk d_j d_k) + Σ mixed2_jk d_j conj(d_k) + ε|d|²`, `d = z − M`.
pub fn eval_quadratic(q: &QuadraticWitness, z: &[C64]) -> f64 {
    let d: Vec<C64> = z.iter().zip(&q.center).map(|(a, b)| a - b).collect();
    let n = d.len();
    let linear = 2.0 * linalg::bilinear(&q.lin, &d).re;
    let mut holo = C64::new(0.0, 0.0);
    let mut mixed = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            holo += q.holo2[(j, k)] * d[j] * d[k];
            mixed += q.mixed2[(j, k)] * d[j] * d[k].conj();
        }
    }
    linear + holo.re + mixed.re + q.eps * linalg::norm(&d).powi(2)
}

/// Initial containment radius `0.1·(1 + |M|)`.
pub fn initial_radius(center: &[C64]) -> f64 {
    0.1 * (1.0 + linalg::norm(center))
}

pub fn build_quadratic_witness(domain: &Domain, probe: &LeviProbe) -> Result<QuadraticWitness> {
    if !(probe.lambda_min < -domain.tol().levi_eps) {
        return Err(Error::Precondition(format!(
            "quadratic witness needs a negative Levi value, got {:e}",
            probe.lambda_min
        )));
    }
    let jet = domain.jet(&probe.point)?;
    Ok(QuadraticWitness {
        center: probe.point.clone(),
        lin: jet.grad,
        holo2: jet.holo,
        mixed2: jet.mixed,
        eps: probe.lambda_min.abs() / 2.0,
        radius: initial_radius(&probe.point),
        direction: probe.direction.clone(),
        lambda: probe.lambda_min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticVerification {
    pub value_at_center: f64,
    pub check1_vanishes_at_center: bool,
    pub grad_norm: f64,
    pub check2_gradient_nonzero: bool,
    pub tangency_residual: f64,
    pub check3_direction_tangent: bool,
    pub levi_value: f64,
    pub check4_levi_negative: bool,
    pub check5_containment: bool,
    pub initial_radius: f64,
    pub radius: f64,
    pub halvings: usize,
    pub samples: usize,
    pub seed: u64,
}

impl QuadraticVerification {
    pub fn all_passed(&self) -> bool {
        self.check1_vanishes_at_center
            && self.check2_gradient_nonzero
            && self.check3_direction_tangent
            && self.check4_levi_negative
            && self.check5_containment
    }
}

/// Runs the five witness checks. Containment is sampled in shrinking balls
/// around `M`; a point with `q(z) < 0` but `ρ(z) ≥ 0` halves the radius.
pub fn verify_quadratic_witness(
    domain: &Domain,
    q: &QuadraticWitness,
    samples: usize,
    seed: u64,
) -> Result<QuadraticVerification> {
    if samples < MIN_VERIFY_SAMPLES {
        return Err(Error::Precondition(format!(
            "containment check needs at least {MIN_VERIFY_SAMPLES} samples"
        )));
    }
    if q.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: q.dim(),
        });
    }
    let value_at_center = eval_quadratic(q, &q.center);
    let grad_norm = linalg::norm(&q.lin);
    let tangency_residual = linalg::bilinear(&q.lin, &q.direction).norm();
    let levi_value = q.levi_form(&q.direction);

    let initial = q.radius;
    let mut radius = initial;
    let mut halvings = 0;
    loop {
        let attempt = halvings as u64;
        let violated = (0..samples).into_par_iter().any(|i| {
            let mut rng = index_rng(seed, attempt * samples as u64 + i as u64);
            let z = uniform_in_ball(&q.center, radius, &mut rng);
            eval_quadratic(q, &z) < 0.0 && domain.rho(&z).map_or(true, |r| r >= 0.0)
        });
        if !violated {
            break;
        }
        if halvings == MAX_HALVINGS {
            return Err(Error::ContainmentUnverifiable { halvings });
        }
        halvings += 1;
        radius /= 2.0;
    }

    Ok(QuadraticVerification {
        value_at_center,
        check1_vanishes_at_center: value_at_center.abs() <= 1e-15,
        grad_norm,
        check2_gradient_nonzero: grad_norm > domain.tol().grad_floor,
        tangency_residual,
        check3_direction_tangent: tangency_residual <= 1e-10,
        levi_value,
        check4_levi_negative: levi_value < 0.0,
        check5_containment: true,
        initial_radius: initial,
        radius,
        halvings,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{self, parse};
    use crate::levi::restricted_levi_min;
    use crate::sampling::SamplingBox;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn domain(src: &str) -> Domain {
        let ast = parse(src).unwrap();
        let n = ast.dim();
        Domain::new(ast, SamplingBox::cube(n, -0.5, 0.5).unwrap()).unwrap()
    }

    fn saddle_witness() -> (Domain, QuadraticWitness) {
        let d = domain("re(z2)-abs2(z1)");
        let probe = restricted_levi_min(&d, &[c(0.0, 0.0); 2]).unwrap();
        let q = build_quadratic_witness(&d, &probe).unwrap();
        (d, q)
    }

    #[test]
    fn saddle_witness_coefficients() {
        let (_, q) = saddle_witness();
        assert_eq!(q.lin, vec![c(0.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(q.mixed2, CMatrix::from_diag(&[c(-1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(q.holo2.max_abs(), 0.0);
        assert!((q.eps - 0.5).abs() < 1e-15);
        assert!((q.radius - 0.1).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        let (_, q) = saddle_witness();
        assert_eq!(eval_quadratic(&q, &q.center), 0.0);
        assert!((eval_quadratic(&q, &[c(0.0, 0.0), c(-0.1, 0.0)]) + 0.095).abs() < 1e-15);
        assert!((eval_quadratic(&q, &[c(0.1, 0.0), c(0.0, 0.0)]) + 0.005).abs() < 1e-15);
    }

    #[test]
    fn saddle3_coefficients() {
        let d = domain("re(z3)-abs2(z1)-abs2(z2)");
        let probe = restricted_levi_min(&d, &[c(0.0, 0.0); 3]).unwrap();
        let q = build_quadratic_witness(&d, &probe).unwrap();
        assert_eq!(q.lin, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(
            q.mixed2,
            CMatrix::from_diag(&[c(-1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)])
        );
        assert!((q.eps - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ball_probe_is_rejected() {
        let d = domain("abs2(z1)+abs2(z2)-1");
        let probe = restricted_levi_min(&d, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            build_quadratic_witness(&d, &probe).unwrap_err(),
            Error::Precondition(_)
        ));
    }

    #[test]
    fn saddle_verification_passes_at_full_radius() {
        let (d, q) = saddle_witness();
        let rec = verify_quadratic_witness(&d, &q, 2000, 1).unwrap();
        assert!(rec.all_passed());
        assert_eq!(rec.halvings, 0);
        assert!((rec.radius - 0.1).abs() < 1e-15);
        assert!((rec.levi_value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_tangent_direction_fails_check3() {
        let (d, mut q) = saddle_witness();
        q.direction = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let rec = verify_quadratic_witness(&d, &q, 200, 1).unwrap();
        assert!(!rec.check3_direction_tangent);
        assert!(!rec.all_passed());
    }

    #[test]
    fn oversized_eps_fails_check4() {
        let (d, mut q) = saddle_witness();
        q.eps = 2.0 * q.lambda.abs();
        let rec = verify_quadratic_witness(&d, &q, 200, 1).unwrap();
        assert!(!rec.check4_levi_negative);
        assert!(rec.levi_value > 0.0);
    }

    #[test]
    fn too_few_samples() {
        let (d, q) = saddle_witness();
        assert!(verify_quadratic_witness(&d, &q, 99, 1).is_err());
    }

    #[test]
    fn shrinks_radius_for_curved_boundary() {
        // quartic remainder makes {q<0} leave Ω far from M
        let d = domain("re(z2)-abs2(z1)+100*abs2(z1)^2");
        let probe = restricted_levi_min(&d, &[c(0.0, 0.0); 2]).unwrap();
        let q = build_quadratic_witness(&d, &probe).unwrap();
        let rec = verify_quadratic_witness(&d, &q, 5000, 3).unwrap();
        assert!(rec.check5_containment);
        assert!(rec.radius < rec.initial_radius);
    }

    #[test]
    fn construction_identity_on_quadratic_rho() {
        for src in [
            "re(z2)-abs2(z1)",
            "re(z3)-abs2(z1)-abs2(z2)",
            "1-abs2(z1)-abs2(z2)",
        ] {
            let d = domain(src);
            let n = d.dim();
            let m: Vec<C64> = if src.starts_with('1') {
                vec![c(0.6, 0.0), c(0.0, 0.8)]
            } else {
                vec![c(0.0, 0.0); n]
            };
            let probe = restricted_levi_min(&d, &m).unwrap();
            let q = build_quadratic_witness(&d, &probe).unwrap();
            let rho_m = d.rho(&m).unwrap();
            for i in 0..100 {
                let z = uniform_in_ball(&m, 1.0, &mut index_rng(17, i));
                let d2 = z
                    .iter()
                    .zip(&m)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>();
                let taylor = d.rho(&z).unwrap() - rho_m;
                assert!((eval_quadratic(&q, &z) - taylor - q.eps * d2).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn levi_matches_rendered_expression() {
        let d = domain("re(z2)-abs2(z1)+re(z1^2*z2)+abs2(z1)*re(z2)");
        let m = crate::levi::project_to_boundary(&d, &[c(0.1, 0.05), c(0.02, 0.0)]).unwrap();
        let probe = restricted_levi_min(&d, &m).unwrap();
        let q = build_quadratic_witness(&d, &probe).unwrap();
        let rendered = parse(&q.to_expression()).unwrap();
        let jet = expr::eval_jet(&rendered, &[c(0.3, -0.2), c(0.7, 0.1)]).unwrap();
        for w in [
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.3, 0.4), c(-0.2, 1.0)],
            q.direction.clone(),
        ] {
            let direct = q.levi_form(&w);
            let via = jet.levi_raw(&w).re;
            assert!((direct - via).abs() <= 1e-10, "{direct} vs {via}");
        }
        let z = [c(0.2, 0.1), c(-0.3, 0.4)];
        assert!(
            (expr::eval_value(&rendered, &z).unwrap().re - eval_quadratic(&q, &z)).abs() < 1e-12
        );
    }
}
