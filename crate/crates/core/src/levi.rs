//! Boundary geometry: Newton projection onto `{ρ = 0}`, the Levi form, its
//! minimum over complex tangent directions, and sampled classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{self, Ast, WirtingerJet};
use crate::linalg::{self, HermitianMatrix, C64};
use crate::sampling::{index_rng, SamplingBox};

const NEWTON_MAX_ITERS: usize = 50;
const REALNESS_TRIALS: usize = 16;
const REALNESS_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub boundary_eps: f64,
    pub grad_floor: f64,
    pub levi_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            boundary_eps: 1e-9,
            grad_floor: 1e-8,
            levi_eps: 1e-7,
        }
    }
}

/// `Ω = {ρ < 0}` with a sampling box for its boundary.
#[derive(Debug, Clone)]
pub struct Domain {
    ast: Ast,
    bounds: SamplingBox,
    tol: Tolerances,
}

impl Domain {
    pub fn new(ast: Ast, bounds: SamplingBox) -> Result<Self> {
        Self::with_tolerances(ast, bounds, Tolerances::default())
    }

    pub fn with_tolerances(ast: Ast, bounds: SamplingBox, tol: Tolerances) -> Result<Self> {
        if bounds.dim() != ast.dim() {
            return Err(Error::DimensionMismatch {
                expected: ast.dim(),
                got: bounds.dim(),
            });
        }
        let imag = expr::max_imaginary_part(&ast, &bounds, REALNESS_TRIALS, REALNESS_SEED)?;
        if imag > expr::REALNESS_TOL {
            return Err(Error::NotRealValued { max_imag: imag });
        }
        Ok(Domain { ast, bounds, tol })
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    pub fn dim(&self) -> usize {
        self.ast.dim()
    }

    pub fn bounds(&self) -> &SamplingBox {
        &self.bounds
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn rho(&self, z: &[C64]) -> Result<f64> {
        Ok(expr::eval_value(&self.ast, z)?.re)
    }

    pub fn jet(&self, z: &[C64]) -> Result<WirtingerJet> {
        expr::eval_jet(&self.ast, z)
    }
}

/// Newton iteration along the real gradient `2·conj(∂ρ/∂z)` until
/// `|ρ| ≤ boundary_eps·(1 + ‖∇ρ‖)`, followed by one polishing step.
pub fn project_to_boundary(domain: &Domain, z0: &[C64]) -> Result<Vec<C64>> {
    let tol = domain.tol();
    let mut z = z0.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..=NEWTON_MAX_ITERS {
        let (rho, g) = expr::eval_gradient(domain.ast(), &z)?;
        let gnorm = linalg::norm(&g);
        let real_grad_norm = 2.0 * gnorm;
        residual = rho.abs();
        let converged = residual <= tol.boundary_eps * (1.0 + real_grad_norm);
        if converged && (rho == 0.0 || !(real_grad_norm >= tol.grad_floor)) {
            return Ok(z);
        }
        if !(real_grad_norm >= tol.grad_floor) {
            return Err(Error::DegenerateGradient {
                norm: real_grad_norm,
                floor: tol.grad_floor,
            });
        }
        let next = newton_step(&z, rho, &g, gnorm);
        if converged {
            // one polishing step, kept only if it improves the residual
            let polished = expr::eval_value(domain.ast(), &next).map(|v| v.re.abs());
            return Ok(match polished {
                Ok(r) if r < residual => next,
                _ => z,
            });
        }
        z = next;
    }
    Err(Error::NoConvergence { residual })
}

/// `z − ρ ∇ρ / ‖∇ρ‖²` with `∇ρ = 2 conj(g)` and `‖∇ρ‖² = 4|g|²`.
fn newton_step(z: &[C64], rho: f64, g: &[C64], gnorm: f64) -> Vec<C64> {
    let scale = rho / (2.0 * gnorm * gnorm);
    z.iter()
        .zip(g)
        .map(|(zj, gj)| zj - gj.conj() * scale)
        .collect()
}

/// Outcome of projecting a batch of random starts.
#[derive(Debug, Clone, Default)]
pub struct BoundarySample {
    pub points: Vec<Vec<C64>>,
    pub degenerate: usize,
    pub failed: usize,
    pub requested: usize,
}

/// Like [`sample_boundary`] but keeps the failure counts.
pub fn sample_boundary_detailed(
    domain: &Domain,
    count: usize,
    seed: u64,
) -> Result<BoundarySample> {
    if count == 0 {
        return Err(Error::Precondition("count must be at least 1".into()));
    }
    let outcomes: Vec<Result<Vec<C64>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let start = domain.bounds().sample(&mut index_rng(seed, i as u64));
            project_to_boundary(domain, &start)
        })
        .collect();
    let mut out = BoundarySample {
        requested: count,
        ..Default::default()
    };
    for o in outcomes {
        match o {
            Ok(p) => out.points.push(p),
            Err(Error::DegenerateGradient { .. }) => out.degenerate += 1,
            Err(_) => out.failed += 1,
        }
    }
    if 2 * (out.points.len() + out.degenerate) < count {
        return Err(Error::BoundaryNotFound {
            found: out.points.len(),
            requested: count,
        });
    }
    Ok(out)
}

/// `count` random starts in the box, each projected onto `∂Ω`.
pub fn sample_boundary(domain: &Domain, count: usize, seed: u64) -> Result<Vec<Vec<C64>>> {
    Ok(sample_boundary_detailed(domain, count, seed)?.points)
}

/// `Σ_{j,k} ∂²ρ/∂z_j∂z̄_k (M) Z_j conj(Z_k)`.
pub fn levi_form_at(domain: &Domain, m: &[C64], z: &[C64]) -> Result<f64> {
    let jet = domain.jet(m)?;
    levi_from_jet(&jet, z)
}

pub(crate) fn levi_from_jet(jet: &WirtingerJet, z: &[C64]) -> Result<f64> {
    if z.len() != jet.dim() {
        return Err(Error::DimensionMismatch {
            expected: jet.dim(),
            got: z.len(),
        });
    }
    let raw = jet.levi_raw(z);
    if raw.im.abs() > 1e-10 * (1.0 + raw.re.abs()) {
        return Err(Error::InvariantViolation {
            quantity: "imaginary part of Levi form".into(),
            value: raw.im,
        });
    }
    Ok(raw.re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeviProbe {
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub point: Vec<C64>,
    pub lambda_min: f64,
    #[serde(serialize_with = "crate::report::ser_cvec")]
    pub direction: Vec<C64>,
    pub grad_norm: f64,
}

/// Minimum of the Levi form over unit complex tangent vectors at `M`.
///
/// With `P` an orthonormal tangent basis, `L(P y) = yᴴ (Pᴴ Hᵀ P) y` where
/// `H` is the mixed Hessian, so the minimiser is `P` times the bottom
/// eigenvector of that `(n−1)×(n−1)` matrix.
pub fn restricted_levi_min(domain: &Domain, m: &[C64]) -> Result<LeviProbe> {
    let jet = domain.jet(m)?;
    restricted_from_jet(&jet, m, domain.tol())
}

pub(crate) fn restricted_from_jet(
    jet: &WirtingerJet,
    m: &[C64],
    tol: &Tolerances,
) -> Result<LeviProbe> {
    let grad_norm = linalg::norm(&jet.grad);
    if !(grad_norm >= tol.grad_floor) {
        return Err(Error::DegenerateGradient {
            norm: grad_norm,
            floor: tol.grad_floor,
        });
    }
    if jet.dim() < 2 {
        return Err(Error::Precondition(
            "complex tangent space is trivial for n = 1".into(),
        ));
    }
    let basis = linalg::tangent_null_basis(&jet.grad)?;
    let restricted = basis
        .adjoint()
        .matmul(&jet.mixed.transpose())
        .matmul(&basis);
    let (lambda_min, y) = linalg::hermitian_eig_min(&HermitianMatrix::new(restricted)?)?;
    let mut direction = basis.matvec(&y);
    let len = linalg::norm(&direction);
    direction.iter_mut().for_each(|z| *z /= len);
    Ok(LeviProbe {
        point: m.to_vec(),
        lambda_min,
        direction,
        grad_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PseudoconvexAtSamples,
    Nonpseudoconvex,
    Degenerate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PseudoconvexAtSamples => "pseudoconvex-at-samples",
            Verdict::Nonpseudoconvex => "nonpseudoconvex",
            Verdict::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LeviReport {
    pub probes: Vec<LeviProbe>,
    /// Index into `probes`; `None` only when every point was degenerate.
    pub worst: Option<usize>,
    pub verdict: Verdict,
    pub requested: usize,
    pub degenerate: usize,
    pub failed: usize,
}

impl LeviReport {
    pub fn worst_probe(&self) -> Option<&LeviProbe> {
        self.worst.map(|i| &self.probes[i])
    }
}

/// Samples the boundary and probes the restricted Levi form at every point.
pub fn classify(domain: &Domain, count: usize, seed: u64) -> Result<LeviReport> {
    let sample = sample_boundary_detailed(domain, count, seed)?;
    let results: Vec<Result<LeviProbe>> = sample
        .points
        .par_iter()
        .map(|m| restricted_levi_min(domain, m))
        .collect();
    let mut probes = Vec::with_capacity(results.len());
    let mut degenerate = sample.degenerate;
    for r in results {
        match r {
            Ok(p) => probes.push(p),
            Err(Error::DegenerateGradient { .. }) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    if probes.is_empty() && degenerate == 0 {
        return Err(Error::BoundaryNotFound {
            found: 0,
            requested: count,
        });
    }
    let worst = (!probes.is_empty()).then(|| {
        probes.iter().enumerate().fold(0, |best, (i, p)| {
            if p.lambda_min < probes[best].lambda_min {
                i
            } else {
                best
            }
        })
    });
    let verdict = match worst {
        Some(w) if 10 * degenerate <= count => {
            if probes[w].lambda_min < -domain.tol().levi_eps {
                Verdict::Nonpseudoconvex
            } else {
                Verdict::PseudoconvexAtSamples
            }
        }
        _ => Verdict::Degenerate,
    };
    Ok(LeviReport {
        probes,
        worst,
        verdict,
        requested: count,
        degenerate,
        failed: sample.failed,
    })
}

/// Sanity checks a probe against the domain; used by tests and certificates.
pub fn probe_tangency(domain: &Domain, probe: &LeviProbe) -> Result<f64> {
    let jet = domain.jet(&probe.point)?;
    Ok(linalg::bilinear(&jet.grad, &probe.direction).norm())
}
