//! Deterministic fan-out over independent work items, and the seeded
//! sweeps built on it.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bautin::{sample_component, DivisorComponent};
use crate::curvegeom::Parameters;
use crate::error::Result;
use crate::flowsim::{limit_cycle_census, Census, CensusOptions};
use crate::melnikov::{bifurcation_pair_eval, count_zeros, BifurcationPair, Center, Spacing};

pub const THREADS_ENV: &str = "DCLAB_THREADS";

/// Worker count: `DCLAB_THREADS` if set to a positive integer, else the available parallelism.
pub fn worker_count() -> usize {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => hw,
    }
}

/// Maps `f` over `items` on up to `workers` threads; output order is input order.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let r = f(&items[k]);
                slots.lock().unwrap()[k] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.unwrap()).collect()
}

/// Zero counts of one bifurcation pair on both annuli.
pub fn pair_zero_counts(pair: &BifurcationPair, grid: usize) -> Result<(usize, usize)> {
    let f1 = |h: f64| bifurcation_pair_eval(pair, h, Center::First).unwrap_or(f64::NAN);
    let f2 = |h: f64| bifurcation_pair_eval(pair, h, Center::Second).unwrap_or(f64::NAN);
    let i = count_zeros(f1, (-50.0, -1e-4), grid, Spacing::LogFrom(0.0))?.count;
    let j = count_zeros(f2, (1.0 + 1e-4, 50.0), grid, Spacing::LogFrom(1.0))?.count;
    Ok((i, j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub i: usize,
    pub j: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentHistogram {
    pub component: DivisorComponent,
    pub samples: usize,
    pub histogram: Vec<HistogramEntry>,
}

fn sample_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

/// Histogram of `(i, j)` zero counts over random pairs on one divisor component.
pub fn component_histogram(component: DivisorComponent, samples: usize, seed: u64, workers: usize) -> Result<ComponentHistogram> {
    let seeds = sample_seeds(seed, samples);
    let counts = parallel_map(&seeds, workers, |&s| pair_zero_counts(&sample_component(component, s), 256));
    let mut hist: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in counts {
        *hist.entry(c?).or_default() += 1;
    }
    Ok(ComponentHistogram {
        component,
        samples,
        histogram: hist.into_iter().map(|((i, j), n)| HistogramEntry { i, j, samples: n }).collect(),
    })
}

/// Random small parameter whose generator orders put it near the given component:
/// `E1` has `l5` dominant over `l1, l3`; `E2` has `l1 + l3` of higher order than `l1`;
/// `E3` has `l1, l3` of the same generic order.
pub fn sample_near_component(component: DivisorComponent, max_norm: f64, rng: &mut impl Rng) -> Parameters {
    let s = (max_norm.ln() + (1e-3f64.ln() - max_norm.ln()) * rng.gen::<f64>()).exp();
    let mut u = || rng.gen_range(-1.0..1.0);
    let (u1, u2, u3, u4, u5) = (u(), u(), u(), u(), u());
    let l = match component {
        DivisorComponent::E1 => [s * s * u1, s * u2, s * s * u3, s * u4, s * u5],
        DivisorComponent::E2 => {
            let l1 = s * u1;
            [l1, s * u2, -l1 + s * s * u3, s * u4, s * s * u5]
        }
        DivisorComponent::E3 => [s * u1, s * u2, s * u3, s * u4, s * u5],
    };
    Parameters::from_array(l.map(|v| v.clamp(-max_norm, max_norm)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub component: DivisorComponent,
    pub lambda: Parameters,
}

/// `n` seeded parameter points, cycling through the three components.
pub fn near_component_points(n: usize, seed: u64, max_norm: f64) -> Vec<SweepPoint> {
    let comps = [DivisorComponent::E1, DivisorComponent::E2, DivisorComponent::E3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let component = comps[k % 3];
            SweepPoint {
                component,
                lambda: sample_near_component(component, max_norm, &mut rng),
            }
        })
        .collect()
}

pub fn census_sweep(points: &[Parameters], options: &CensusOptions, workers: usize) -> Vec<Result<Census>> {
    parallel_map(points, workers, |l| limit_cycle_census(l, options))
}
