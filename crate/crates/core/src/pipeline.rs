//! End-to-end check that a domain's verdict agrees with its two-dimensional
//! slices.
//!
//! Nonpseudoconvex domains: the worst boundary probe yields a quadratic
//! witness and a witness slice; the slice, classified on its own as a domain
//! in `C²`, must come out nonpseudoconvex. Pseudoconvex-at-samples domains:
//! random slices through boundary points must all classify as
//! pseudoconvex-at-samples.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::Error;
use crate::hormander::{self, QuadraticVerification};
use crate::levi::{self, Domain, LeviProbe, LeviReport, Verdict};
use crate::linalg::{self, C64};
use crate::sampling::{index_rng, unit_vector, SamplingBox};
use crate::slicing::{self, Slice, WitnessCertificate};

const HORMANDER_STREAM: u64 = 0x484f_524d;
const WITNESS_STREAM: u64 = 0x5749_544e;
const FORWARD_STREAM: u64 = 0x464f_5257;

#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

fn stage<T>(name: &'static str, r: crate::Result<T>) -> Result<T, PipelineError> {
    r.map_err(|source| PipelineError {
        stage: name,
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConfig {
    pub samples: usize,
    pub seed: u64,
    /// Random slices checked when the domain looks pseudoconvex.
    pub slices: usize,
    pub probes_per_slice: usize,
    pub containment_samples: usize,
}

impl TheoremConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        TheoremConfig {
            samples,
            seed,
            slices: samples,
            probes_per_slice: 50,
            containment_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub requested: usize,
    pub probes: usize,
    pub degenerate: usize,
    pub failed: usize,
    pub worst: Option<LeviProbe>,
}

impl From<&LeviReport> for Classification {
    fn from(r: &LeviReport) -> Self {
        Classification {
            verdict: r.verdict,
            requested: r.requested,
            probes: r.probes.len(),
            degenerate: r.degenerate,
            failed: r.failed,
            worst: r.worst_probe().cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessStage {
    pub hormander: QuadraticVerification,
    pub certificate: WitnessCertificate,
    #[serde(rename = "slice_box")]
    pub slice_bounds: Vec<(f64, f64)>,
    pub slice_classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardStage {
    pub slices_requested: usize,
    pub slices_checked: usize,
    pub slices_skipped: usize,
    pub probes_per_slice: usize,
    pub min_probes: usize,
    pub worst_lambda: Option<f64>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremOutcome {
    pub classification: Classification,
    pub witness: Option<WitnessStage>,
    pub forward: Option<ForwardStage>,
    pub consistent: bool,
}

/// Witness branch for a probe with negative Levi value.
pub fn witness_stage(
    domain: &Domain,
    probe: &LeviProbe,
    cfg: &TheoremConfig,
) -> Result<WitnessStage, PipelineError> {
    let q = stage(
        "build_quadratic_witness",
        hormander::build_quadratic_witness(domain, probe),
    )?;
    let record = stage(
        "verify_quadratic_witness",
        hormander::verify_quadratic_witness(
            domain,
            &q,
            cfg.containment_samples,
            cfg.seed ^ HORMANDER_STREAM,
        ),
    )?;
    let q = q.with_radius(record.radius);
    let certificate = stage(
        "witness_slice",
        slicing::witness_slice_with(domain, probe, q),
    )?;
    let bounds = slicing::witness_slice_box(&certificate);
    let slice_domain = stage(
        "slice_domain",
        certificate.slice.domain(domain, bounds.clone()),
    )?;
    let report = stage(
        "classify_witness_slice",
        levi::classify(&slice_domain, cfg.samples, cfg.seed ^ WITNESS_STREAM),
    )?;
    Ok(WitnessStage {
        hormander: record,
        certificate,
        slice_bounds: bounds.bounds().to_vec(),
        slice_classification: Classification::from(&report),
    })
}

/// Random plane through `point`: `a = point`, `(b, c)` a random orthonormal pair.
pub fn random_slice_through(point: &[C64], seed: u64, index: u64) -> crate::Result<Slice> {
    let n = point.len();
    let mut rng = index_rng(seed, index);
    let b = unit_vector(n, &mut rng);
    let raw = unit_vector(n, &mut rng);
    let proj = linalg::inner(&raw, &b);
    let mut c: Vec<C64> = raw.iter().zip(&b).map(|(r, bj)| r - bj * proj).collect();
    let len = linalg::norm(&c);
    c.iter_mut().for_each(|z| *z /= len);
    slicing::make_slice(point.to_vec(), b, c)
}

/// Classifies `cfg.slices` random slices through the given boundary points.
/// Slices whose boundary cannot be sampled are skipped and counted.
pub fn forward_stage(
    domain: &Domain,
    boundary_points: &[Vec<C64>],
    cfg: &TheoremConfig,
) -> Result<ForwardStage, PipelineError> {
    if boundary_points.is_empty() {
        return Err(PipelineError {
            stage: "forward_slices",
            source: Error::Precondition("no boundary points to slice through".into()),
        });
    }
    let seed = cfg.seed ^ FORWARD_STREAM;
    let bounds = SamplingBox::cube(2, -0.5, 0.5).expect("valid cube");
    let outcomes: Vec<Option<LeviReport>> = (0..cfg.slices)
        .into_par_iter()
        .map(|i| {
            let point = &boundary_points[i % boundary_points.len()];
            let slice = random_slice_through(point, seed, i as u64).ok()?;
            let slice_domain = slice.domain(domain, bounds.clone()).ok()?;
            levi::classify(
                &slice_domain,
                cfg.probes_per_slice,
                seed.wrapping_add(i as u64),
            )
            .ok()
        })
        .collect();
    let mut out = ForwardStage {
        slices_requested: cfg.slices,
        slices_checked: 0,
        slices_skipped: 0,
        probes_per_slice: cfg.probes_per_slice,
        min_probes: usize::MAX,
        worst_lambda: None,
        violations: 0,
    };
    for o in outcomes {
        let Some(report) = o else {
            out.slices_skipped += 1;
            continue;
        };
        out.slices_checked += 1;
        out.min_probes = out.min_probes.min(report.probes.len());
        if let Some(p) = report.worst_probe() {
            let lam = p.lambda_min;
            out.worst_lambda = Some(out.worst_lambda.map_or(lam, |w: f64| w.min(lam)));
        }
        if report.verdict != Verdict::PseudoconvexAtSamples {
            out.violations += 1;
        }
    }
    if out.slices_checked == 0 {
        out.min_probes = 0;
    }
    Ok(out)
}

pub fn verify_theorem(
    domain: &Domain,
    cfg: &TheoremConfig,
) -> Result<TheoremOutcome, PipelineError> {
    let report = stage("classify", levi::classify(domain, cfg.samples, cfg.seed))?;
    let classification = Classification::from(&report);
    match report.verdict {
        Verdict::Nonpseudoconvex => {
            let worst = report
                .worst_probe()
                .expect("nonpseudoconvex verdict has a probe");
            let witness = witness_stage(domain, worst, cfg)?;
            let consistent = witness.hormander.all_passed()
                && witness.slice_classification.verdict == Verdict::Nonpseudoconvex;
            Ok(TheoremOutcome {
                classification,
                witness: Some(witness),
                forward: None,
                consistent,
            })
        }
        Verdict::PseudoconvexAtSamples => {
            let points: Vec<Vec<C64>> = report.probes.iter().map(|p| p.point.clone()).collect();
            let forward = forward_stage(domain, &points, cfg)?;
            let consistent = forward.violations == 0 && forward.slices_checked > 0;
            Ok(TheoremOutcome {
                classification,
                witness: None,
                forward: Some(forward),
                consistent,
            })
        }
        Verdict::Degenerate => Ok(TheoremOutcome {
            classification,
            witness: None,
            forward: None,
            consistent: false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn outcome(name: &str) -> TheoremOutcome {
        let file = catalog::builtin(name).unwrap();
        let domain = file.to_domain().unwrap();
        verify_theorem(&domain, &TheoremConfig::new(100, 7)).unwrap()
    }

    #[test]
    fn saddle2_pipeline() {
        let out = outcome("saddle2");
        assert!(out.consistent);
        let w = out.witness.unwrap();
        assert!(w.hormander.all_passed());
        let cert = &w.certificate;
        assert!((cert.lambda_slice - cert.lambda).abs() <= 1e-9 * (1.0 + cert.lambda.abs()));
        assert!(w.slice_classification.worst.unwrap().lambda_min <= -0.5);
    }

    #[test]
    fn ball_pipeline() {
        let out = outcome("ball");
        assert!(out.consistent);
        let f = out.forward.unwrap();
        assert_eq!(f.slices_checked, 100);
        assert_eq!(f.violations, 0);
    }

    #[test]
    fn random_slices_are_orthonormal() {
        let p = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
        for i in 0..20 {
            let s = random_slice_through(&p, 1, i).unwrap();
            assert!(linalg::inner(&s.b, &s.c).norm() < 1e-14);
            assert!((linalg::norm(&s.c) - 1.0).abs() < 1e-14);
            assert_eq!(s.phi(&[C64::new(0.0, 0.0); 2]), p);
        }
    }
}
