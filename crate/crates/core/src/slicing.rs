//! Complex affine 2-planes `h(a, b, c) = {a + b·w1 + c·w2}` and the
//! witness-slice construction.
//!
//! Given a boundary point `M` and a complex tangent direction `Z` with
//! negative Levi form, the witness plane uses `a = p0`, `b = M − p0`,
//! `c = Z`, where `p0 ∈ Ω` lies on the complex normal line through `M`.
//! In slice coordinates `M` sits at `μ = (1, 0)`, `Z` becomes `ζ = (0, 1)`,
//! `ζ` is complex tangent to `∂Ω_h`, and the slice Levi form at `(μ, ζ)`
//! equals the ambient one at `(M, Z)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{self, WirtingerJet};
use crate::hormander::{self, QuadraticWitness};
use crate::levi::{self, Domain, LeviProbe};
use crate::linalg::{self, CMatrix, C64};
use crate::sampling::SamplingBox;

const MAX_BACKTRACK_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slice {
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub a: Vec<C64>,
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub b: Vec<C64>,
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub c: Vec<C64>,
}

pub fn make_slice(a: Vec<C64>, b: Vec<C64>, c: Vec<C64>) -> Result<Slice> {
    let n = a.len();
    if n < 2 {
        return Err(Error::Precondition("slices need n >= 2".into()));
    }
    for v in [&b, &c] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    linalg::gram_solve_2(&b, &c, &b)?;
    Ok(Slice { a, b, c })
}

impl Slice {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `φ(w) = a + b·w1 + c·w2`
    pub fn phi(&self, w: &[C64; 2]) -> Vec<C64> {
        (0..self.dim())
            .map(|j| self.a[j] + self.b[j] * w[0] + self.c[j] * w[1])
            .collect()
    }

    /// Inverse of `φ` on the plane; points farther than `1e-8·(1 + |z|)`
    /// from it are rejected.
    pub fn phi_inv(&self, z: &[C64]) -> Result<[C64; 2]> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let r: Vec<C64> = z.iter().zip(&self.a).map(|(x, a)| x - a).collect();
        let sol = linalg::gram_solve_2(&self.b, &self.c, &r)?;
        if sol.residual > 1e-8 * (1.0 + linalg::norm(z)) {
            return Err(Error::OffPlane {
                residual: sol.residual,
            });
        }
        Ok([sol.w1, sol.w2])
    }

    /// `ρ_h = ρ∘φ` as an expression in `w1`, `w2`.
    pub fn compose(&self, ast: &expr::Ast) -> Result<expr::Ast> {
        expr::compose_with_affine(ast, &self.a, &self.b, &self.c)
    }

    /// The slice `Ω_h` as a two-dimensional domain sampled in `bounds`.
    pub fn domain(&self, domain: &Domain, bounds: SamplingBox) -> Result<Domain> {
        Domain::with_tolerances(self.compose(domain.ast())?, bounds, *domain.tol())
    }
}

/// Chain rule for `ρ∘φ` with `B = [b c]`:
/// `grad_h = Bᵀ grad`, `mixed_h = Bᵀ mixed B̄`, `holo_h = Bᵀ holo B`.
pub fn pullback_jet(slice: &Slice, jet: &WirtingerJet) -> Result<WirtingerJet> {
    let n = slice.dim();
    if jet.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: jet.dim(),
        });
    }
    let basis = CMatrix::from_columns(&[slice.b.clone(), slice.c.clone()]);
    let bt = basis.transpose();
    let conj_basis = CMatrix::from_fn(n, 2, |i, j| basis[(i, j)].conj());
    Ok(WirtingerJet {
        value: jet.value,
        grad: bt.matvec(&jet.grad),
        mixed: bt.matmul(&jet.mixed).matmul(&conj_basis),
        holo: bt.matmul(&jet.holo).matmul(&basis),
    })
}

/// Whether `ρ_h` has nonzero gradient at `μ`, i.e. `b` or `c` is not
/// complex tangent at `φ(μ)`.
pub fn slice_gradient_check(slice: &Slice, domain: &Domain, mu: &[C64; 2]) -> Result<bool> {
    let jet = domain.jet(&slice.phi(mu))?;
    let pulled = pullback_jet(slice, &jet)?;
    Ok(linalg::norm(&pulled.grad) > domain.tol().grad_floor)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessCertificate {
    #[serde(rename = "M", serialize_with = "crate::report::ser_cvec")]
    pub m: Vec<C64>,
    #[serde(rename = "Z", serialize_with = "crate::report::ser_cvec")]
    pub z: Vec<C64>,
    pub lambda: f64,
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub p0: Vec<C64>,
    pub rho_p0: f64,
    pub t: f64,
    pub slice: Slice,
    #[serde(serialize_with = "crate::report::ser_cpair")]
    pub mu: [C64; 2],
    #[serde(serialize_with = "crate::report::ser_cpair")]
    pub zeta: [C64; 2],
    /// `∂ρ_h/∂w` at `μ`.
    #[serde(serialize_with = "crate::report::ser_cpair")]
    pub slice_grad: [C64; 2],
    /// `∂²ρ_h/∂w2∂w̄2 (μ)` from the chain rule.
    pub lambda_slice: f64,
    /// Same quantity from the symbolically composed `ρ_h`.
    pub lambda_slice_composed: f64,
    /// `levi_form_at(M, Z)`.
    pub levi_at_m: f64,
    pub quadratic: QuadraticWitness,
}

fn invariant(quantity: &str, value: f64, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvariantViolation {
            quantity: quantity.to_string(),
            value,
        })
    }
}

/// Builds the witness plane for a negative-Levi probe, attaching a freshly
/// built quadratic witness.
pub fn witness_slice(domain: &Domain, probe: &LeviProbe) -> Result<WitnessCertificate> {
    let q = hormander::build_quadratic_witness(domain, probe)?;
    witness_slice_with(domain, probe, q)
}

/// [`witness_slice`] with a caller-supplied (e.g. already verified) quadratic.
pub fn witness_slice_with(
    domain: &Domain,
    probe: &LeviProbe,
    quadratic: QuadraticWitness,
) -> Result<WitnessCertificate> {
    let tol = domain.tol();
    if !(probe.lambda_min < -tol.levi_eps) {
        return Err(Error::Precondition(format!(
            "witness slice needs lambda_min < -{:e}, got {:e}",
            tol.levi_eps, probe.lambda_min
        )));
    }
    let m = &probe.point;
    let z = &probe.direction;
    let jet_m = domain.jet(m)?;
    let gnorm = linalg::norm(&jet_m.grad);
    if !(gnorm >= tol.grad_floor) {
        return Err(Error::DegenerateGradient {
            norm: gnorm,
            floor: tol.grad_floor,
        });
    }

    // complex normal ν = conj(∂ρ)/|∂ρ|; every tangent Z is Hermitian-orthogonal to it
    let nu: Vec<C64> = jet_m.grad.iter().map(|g| g.conj() / gnorm).collect();
    let mut t = 0.1 * (1.0 + linalg::norm(m));
    let mut found = None;
    for _ in 0..=MAX_BACKTRACK_HALVINGS {
        let p0: Vec<C64> = m.iter().zip(&nu).map(|(mj, nj)| mj - nj * t).collect();
        let rho_p0 = domain.rho(&p0)?;
        if rho_p0 < -tol.boundary_eps {
            found = Some((p0, rho_p0));
            break;
        }
        t /= 2.0;
    }
    let (p0, rho_p0) = found.ok_or(Error::BacktrackExhausted {
        halvings: MAX_BACKTRACK_HALVINGS,
    })?;

    let b: Vec<C64> = m.iter().zip(&p0).map(|(mj, pj)| mj - pj).collect();
    let slice = make_slice(p0.clone(), b, z.clone())?;

    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mu = [one, zero];
    let zeta = [zero, one];

    let m_on_plane = slice.phi(&mu);
    let phi_err = linalg::norm(
        &m_on_plane
            .iter()
            .zip(m)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    invariant("|phi(mu) - M|", phi_err, phi_err <= 1e-12)?;

    let mu_solved = slice.phi_inv(m)?;
    let mu_err = ((mu_solved[0] - one).norm()).max(mu_solved[1].norm());
    invariant("|phi_inv(M) - (1,0)|", mu_err, mu_err <= 1e-10)?;
    let p0_plus_z: Vec<C64> = p0.iter().zip(z).map(|(p, zj)| p + zj).collect();
    let w_hi = slice.phi_inv(&p0_plus_z)?;
    let w_lo = slice.phi_inv(&p0)?;
    let zeta_err = (w_hi[0] - w_lo[0])
        .norm()
        .max((w_hi[1] - w_lo[1] - one).norm());
    invariant(
        "|phi_inv(p0+Z) - phi_inv(p0) - (0,1)|",
        zeta_err,
        zeta_err <= 1e-10,
    )?;

    invariant("rho(p0)", rho_p0, rho_p0 < 0.0)?;

    let pulled = pullback_jet(&slice, &domain.jet(&m_on_plane)?)?;
    let slice_grad = [pulled.grad[0], pulled.grad[1]];
    invariant(
        "|d rho_h / d w1 (mu)|",
        slice_grad[0].norm(),
        linalg::norm(&pulled.grad) > tol.grad_floor,
    )?;
    invariant(
        "|d rho_h / d w2 (mu)|",
        slice_grad[1].norm(),
        slice_grad[1].norm() <= 1e-10,
    )?;

    let lambda = probe.lambda_min;
    let lambda_slice = levi::levi_from_jet(&pulled, &zeta)?;
    let levi_at_m = levi::levi_from_jet(&jet_m, z)?;
    let slice_err = (lambda_slice - lambda).abs();
    invariant(
        "|lambda_slice - lambda|",
        slice_err,
        slice_err <= 1e-9 * (1.0 + lambda.abs()),
    )?;

    let composed = slice.compose(domain.ast())?;
    let lambda_slice_composed = expr::eval_jet(&composed, &mu)?.mixed[(1, 1)].re;

    Ok(WitnessCertificate {
        m: m.clone(),
        z: z.clone(),
        lambda,
        p0,
        rho_p0,
        t,
        slice,
        mu,
        zeta,
        slice_grad,
        lambda_slice,
        lambda_slice_composed,
        levi_at_m,
        quadratic,
    })
}

/// Sampling box for re-classifying a witness slice: half-width 0.5 in `w1`
/// and half of `|∂ρ_h/∂w1(μ)|` in `w2`, centred at `μ`.
pub fn witness_slice_box(cert: &WitnessCertificate) -> SamplingBox {
    let h2 = 0.5 * cert.slice_grad[0].norm();
    SamplingBox::around(&cert.mu, &[0.5, 0.5, h2, h2]).expect("positive half-widths")
}
