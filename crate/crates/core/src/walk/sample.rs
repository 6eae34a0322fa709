use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{element, GroupElement, GroupSpec};
use crate::measures::{FiniteMeasure, Weight};

use super::enumerate::Trajectory;
use super::escape::{describe, EscapeEstimate, EscapeMethod};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Independent random stream for sample `index` under `seed`. Streams do
/// not depend on scheduling, so results are identical for any worker count.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF sampler over the atoms of a measure.
#[derive(Clone, Debug)]
pub struct StepSampler {
    elements: Vec<GroupElement>,
    cdf: Vec<f64>,
}

impl StepSampler {
    pub fn new<W: Weight>(mu: &FiniteMeasure<W>) -> Self {
        let mut acc = 0.0;
        let mut elements = Vec::with_capacity(mu.len());
        let mut cdf = Vec::with_capacity(mu.len());
        for a in mu.atoms() {
            acc += a.weight.to_f64();
            elements.push(a.element.clone());
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        *cdf.last_mut().expect("measures are nonempty") = 1.0;
        StepSampler { elements, cdf }
    }

    pub fn index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &GroupElement {
        &self.elements[self.index(rng)]
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }
}

/// One sample path of length `n`.
pub fn sample_walk<W: Weight, R: Rng + ?Sized>(mu: &FiniteMeasure<W>, n: usize, rng: &mut R) -> Result<Trajectory> {
    let sampler = StepSampler::new(mu);
    let increments = (0..n).map(|_| sampler.sample(rng).clone()).collect();
    Trajectory::from_increments(mu.spec(), increments)
}

/// First return time to the identity within `horizon` steps.
fn first_return<R: Rng>(spec: &GroupSpec, sampler: &StepSampler, horizon: usize, rng: &mut R) -> Result<Option<usize>> {
    // integer fast path: no allocation per step
    if let GroupSpec::Lattice(1) = spec {
        let steps: Vec<i64> = sampler.elements.iter().map(|g| g.as_vector().expect("lattice")[0]).collect();
        let mut x = 0i64;
        for t in 1..=horizon {
            x += steps[sampler.index(rng)];
            if x == 0 {
                return Ok(Some(t));
            }
        }
        return Ok(None);
    }
    let mut w = element::identity(spec);
    for t in 1..=horizon {
        element::mul_assign(spec, &mut w, sampler.sample(rng))?;
        if element::is_identity(spec, &w) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn proportion_estimate(hits: usize, samples: usize) -> (f64, f64, f64) {
    let p = hits as f64 / samples as f64;
    let half = Z95 * (p * (1.0 - p) / samples as f64).sqrt();
    (p, (p - half).max(0.0), (p + half).min(1.0))
}

/// Monte Carlo estimates of `P(w_k ≠ e for k = 1..=h)` for each horizon
/// `h`, all read off the same sample paths (so they are nonincreasing in
/// `h`). Each is an upper bound for `p_esc` in expectation.
pub fn mc_escape_nested<W: Weight>(
    mu: &FiniteMeasure<W>,
    horizons: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<EscapeEstimate>> {
    if samples == 0 || horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::InvalidParameter("horizons and sample count must be positive".into()));
    }
    let max_h = *horizons.iter().max().expect("nonempty");
    let sampler = StepSampler::new(mu);
    let spec = mu.spec();
    let returns: Vec<Option<usize>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| first_return(spec, &sampler, max_h, &mut stream(seed, i)))
        .collect::<Result<_>>()?;
    let measure = describe(mu);
    Ok(horizons
        .iter()
        .map(|&h| {
            let escaped = returns.iter().filter(|r| r.map_or(true, |t| t > h)).count();
            let (value, lo, hi) = proportion_estimate(escaped, samples);
            EscapeEstimate {
                method: EscapeMethod::MonteCarlo,
                value,
                lo,
                hi,
                horizon: Some(h),
                n: None,
                samples: Some(samples),
                seed: Some(seed),
                group: spec.to_string(),
                measure: measure.clone(),
                note: Some("no return within horizon; biased upward for p_esc".into()),
            }
        })
        .collect())
}

pub fn mc_escape<W: Weight>(mu: &FiniteMeasure<W>, horizon: usize, samples: usize, seed: u64) -> Result<EscapeEstimate> {
    Ok(mc_escape_nested(mu, &[horizon], samples, seed)?.remove(0))
}

/// Number of distinct points among `w_0, …, w_n` of one sample path.
fn range_of_path<R: Rng>(spec: &GroupSpec, sampler: &StepSampler, n: usize, rng: &mut R) -> Result<usize> {
    if let GroupSpec::Lattice(1) = spec {
        let steps: Vec<i64> = sampler.elements.iter().map(|g| g.as_vector().expect("lattice")[0]).collect();
        let reach = steps.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0) as usize * n;
        let mut seen = vec![false; 2 * reach + 1];
        let mut x = reach as i64;
        seen[x as usize] = true;
        let mut count = 1;
        for _ in 0..n {
            x += steps[sampler.index(rng)];
            let slot = &mut seen[x as usize];
            if !*slot {
                *slot = true;
                count += 1;
            }
        }
        return Ok(count);
    }
    let mut seen: HashSet<GroupElement> = HashSet::with_capacity(n + 1);
    let mut w = element::identity(spec);
    seen.insert(w.clone());
    for _ in 0..n {
        element::mul_assign(spec, &mut w, sampler.sample(rng))?;
        if !seen.contains(&w) {
            seen.insert(w.clone());
        }
    }
    Ok(seen.len())
}

/// Monte Carlo mean of `R_n / n`, `R_n` the number of distinct points among
/// `w_0, …, w_n`, with a 95% normal interval. `R_n / n` converges to
/// `p_esc`; at finite `n` it is biased upward by roughly `(1 + E[(τ-1); τ < ∞]) / n`.
pub fn range_rate<W: Weight>(mu: &FiniteMeasure<W>, n: usize, samples: usize, seed: u64) -> Result<EscapeEstimate> {
    if n == 0 || samples < 2 {
        return Err(Error::InvalidParameter("range rate needs n >= 1 and at least two samples".into()));
    }
    let sampler = StepSampler::new(mu);
    let spec = mu.spec();
    let rates: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| range_of_path(spec, &sampler, n, &mut stream(seed, i)).map(|r| r as f64 / n as f64))
        .collect::<Result<_>>()?;
    let mean = rates.iter().sum::<f64>() / samples as f64;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (samples - 1) as f64;
    let half = Z95 * (var / samples as f64).sqrt();
    Ok(EscapeEstimate {
        method: EscapeMethod::RangeRate,
        value: mean,
        lo: mean - half,
        hi: mean + half,
        horizon: None,
        n: Some(n),
        samples: Some(samples),
        seed: Some(seed),
        group: spec.to_string(),
        measure: describe(mu),
        note: Some(format!("R_n counts w_0..w_n; finite-n bias is O(1/n) = O({:.1e})", 1.0 / n as f64)),
    })
}
