//! Counter-based randomness: every sample index gets its own ChaCha stream
//! keyed by the user seed, so results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::C64;

/// Generator for sample `index` under `seed`.
pub fn index_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Axis-aligned box over the real coordinates `(re z1, im z1, re z2, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    bounds: Vec<(f64, f64)>,
}

impl SamplingBox {
    /// `bounds` must hold `2n` finite intervals with `lo < hi`.
    pub fn new(bounds: Vec<(f64, f64)>) -> Option<Self> {
        let ok = !bounds.is_empty()
            && bounds.len().is_multiple_of(2)
            && bounds
                .iter()
                .all(|&(lo, hi)| lo.is_finite() && hi.is_finite() && lo < hi);
        ok.then_some(SamplingBox { bounds })
    }

    /// Same interval on every real coordinate of `C^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Option<Self> {
        Self::new(vec![(lo, hi); 2 * n])
    }

    /// Box of half-widths `half[k]` around `center`.
    pub fn around(center: &[C64], half: &[f64]) -> Option<Self> {
        let bounds = center
            .iter()
            .flat_map(|z| [z.re, z.im])
            .zip(half)
            .map(|(c, h)| (c - h, c + h))
            .collect();
        Self::new(bounds)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len() / 2
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<C64> {
        let reals: Vec<f64> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        reals.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
    }

    pub fn center(&self) -> Vec<C64> {
        self.bounds
            .chunks(2)
            .map(|p| C64::new(0.5 * (p[0].0 + p[0].1), 0.5 * (p[1].0 + p[1].1)))
            .collect()
    }
}

/// Uniform point in the Euclidean ball of `radius` around `center` in `C^n ≅ R^{2n}`.
pub fn uniform_in_ball(center: &[C64], radius: f64, rng: &mut impl Rng) -> Vec<C64> {
    let dim = 2 * center.len();
    let gauss: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let len = gauss.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    center
        .iter()
        .enumerate()
        .map(|(j, z)| z + C64::new(gauss[2 * j], gauss[2 * j + 1]) * (r / len))
        .collect()
}

/// Uniformly distributed unit vector in `C^n`.
pub fn unit_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let len = crate::linalg::norm(&v);
    v.into_iter().map(|z| z / len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = index_rng(7, 3).random();
        let b: f64 = index_rng(7, 3).random();
        let c: f64 = index_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn box_validation() {
        assert!(SamplingBox::new(vec![(0.0, 1.0)]).is_none());
        assert!(SamplingBox::new(vec![(0.0, 1.0), (1.0, 1.0)]).is_none());
        assert!(SamplingBox::new(vec![(0.0, f64::INFINITY), (0.0, 1.0)]).is_none());
        let b = SamplingBox::cube(2, -1.0, 1.0).unwrap();
        assert_eq!(b.dim(), 2);
        let p = b.sample(&mut index_rng(1, 0));
        assert!(p.iter().all(|z| z.re.abs() < 1.0 && z.im.abs() < 1.0));
    }

    #[test]
    fn ball_samples_stay_inside() {
        let center = [C64::new(1.0, 2.0), C64::new(-1.0, 0.0)];
        for i in 0..200 {
            let p = uniform_in_ball(&center, 0.1, &mut index_rng(5, i));
            let d: Vec<C64> = p.iter().zip(&center).map(|(a, b)| a - b).collect();
            assert!(crate::linalg::norm(&d) <= 0.1);
        }
    }
}
