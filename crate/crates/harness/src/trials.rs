//! Seeded random trial fields.
//!
//! Trial `i` of a suite draws from its own ChaCha stream, so results do not
//! depend on scheduling. Field kinds come in the fixed proportion 2:1:1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use setval::convex_body::ConvexBody;
use setval::set_field::{DyadicDomain, SetField};
use setval::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Generators modulated by smooth periodic profiles.
    Smooth,
    /// A few nonzero cells.
    Spike,
    /// Two bodies alternating on a dyadic checkerboard.
    Checkerboard,
}

const PATTERN: [TrialKind; 4] = [TrialKind::Smooth, TrialKind::Spike, TrialKind::Smooth, TrialKind::Checkerboard];

impl TrialKind {
    pub fn for_trial(i: usize) -> Self {
        PATTERN[i % PATTERN.len()]
    }
}

/// Independent stream for `(suite, trial)` under `seed`.
pub fn trial_rng(seed: u64, suite: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((suite << 40) | trial as u64);
    rng
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn random_body(rng: &mut ChaCha8Rng, d: usize, count: usize, scale: f64) -> Result<ConvexBody> {
    let gens: Vec<Vec<f64>> = (0..count).map(|_| random_vector(rng, d)).collect();
    Ok(ConvexBody::new(d, &gens)?.scale(scale))
}

/// A random field of the given kind.
pub fn trial_field(kind: TrialKind, domain: DyadicDomain, d: usize, rng: &mut ChaCha8Rng) -> Result<SetField> {
    let n = domain.n();
    match kind {
        TrialKind::Smooth => {
            let count = rng.random_range(1..=3usize);
            let waves: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = (0..count)
                .map(|_| {
                    let v = random_vector(rng, d);
                    let freq: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(1..=3u8))).collect();
                    (v, freq, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.1..0.9))
                })
                .collect();
            let amp = rng.random_range(0.5..4.0);
            SetField::from_fn(domain, d, |c| {
                let x = domain.center(c);
                let gens: Vec<Vec<f64>> = waves
                    .iter()
                    .map(|(v, freq, phase, depth)| {
                        let arg: f64 = freq.iter().zip(&x).map(|(f, xi)| f * xi).sum::<f64>();
                        let a = amp * (1.0 + depth * (std::f64::consts::TAU * arg + phase).sin());
                        v.iter().map(|vi| a * vi).collect()
                    })
                    .collect();
                ConvexBody::new(d, &gens)
            })
        }
        TrialKind::Spike => {
            let spikes = rng.random_range(1..=3usize);
            let mut cells = vec![ConvexBody::zero(d)?; domain.num_cells()];
            for _ in 0..spikes {
                let c = rng.random_range(0..domain.num_cells());
                let count = rng.random_range(1..=2usize);
                let scale = rng.random_range(1.0..10.0);
                cells[c] = random_body(rng, d, count, scale)?;
            }
            SetField::new(domain, d, cells)
        }
        TrialKind::Checkerboard => {
            let k = domain.level();
            let j = if k == 0 { 0 } else { rng.random_range(1..=k) };
            let (count, scale) = (rng.random_range(1..=2usize), rng.random_range(0.5..3.0));
            let a = random_body(rng, d, count, scale)?;
            let b = if rng.random_bool(0.5) {
                ConvexBody::zero(d)?
            } else {
                let scale = rng.random_range(0.5..3.0);
                random_body(rng, d, 1, scale)?
            };
            SetField::from_fn(domain, d, |c| {
                let xy = domain.coords(c);
                let shift = k - j;
                let parity = ((xy[0] >> shift) + if n == 2 { xy[1] >> shift } else { 0 }) % 2;
                Ok(if parity == 0 { a.clone() } else { b.clone() })
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_follow_the_pattern() {
        let counts = (0..400).fold([0usize; 3], |mut acc, i| {
            acc[TrialKind::for_trial(i) as usize] += 1;
            acc
        });
        assert_eq!(counts, [200, 100, 100]);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let dom = DyadicDomain::new(2, 3).unwrap();
        let a = trial_field(TrialKind::Smooth, dom, 2, &mut trial_rng(7, 1, 5)).unwrap();
        let _ = trial_field(TrialKind::Spike, dom, 2, &mut trial_rng(7, 1, 4)).unwrap();
        let b = trial_field(TrialKind::Smooth, dom, 2, &mut trial_rng(7, 1, 5)).unwrap();
        assert_eq!(a, b);
        let c = trial_field(TrialKind::Smooth, dom, 2, &mut trial_rng(7, 1, 6)).unwrap();
        assert_ne!(a, c);
    }
}
