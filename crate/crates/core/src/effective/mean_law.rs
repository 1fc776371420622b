use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EffectiveError, MeasureSpec};
use crate::rng;

const CHUNK: usize = 8192;

/// Rejection sampler for `μ_S` with a `N(0, σ²)` envelope.
#[derive(Clone, Copy, Debug)]
struct Sampler {
    spec: MeasureSpec,
    sd: f64,
    log_bound: f64,
}

impl Sampler {
    fn new(spec: MeasureSpec) -> Result<Self, EffectiveError> {
        spec.validate()?;
        // sup of the non-Gaussian part −c₃x³ − c₄x⁴ is at 0 or −3c₃/(4c₄).
        let mut log_bound: f64 = 0.0;
        if spec.quartic > 0.0 {
            let x = -3.0 * spec.cubic / (4.0 * spec.quartic);
            log_bound = log_bound.max(Self::tilt(&spec, x));
        }
        Ok(Sampler { spec, sd: spec.variance.sqrt(), log_bound })
    }

    fn tilt(spec: &MeasureSpec, x: f64) -> f64 {
        -spec.cubic * x.powi(3) - spec.quartic * x.powi(4)
    }

    fn draw<R: Rng>(&self, r: &mut R) -> f64 {
        loop {
            let z: f64 = r.sample(StandardNormal);
            let x = self.sd * z;
            let u: f64 = r.random();
            if u.ln() <= Self::tilt(&self.spec, x) - self.log_bound {
                return x;
            }
        }
    }
}

/// Runs `count` independent jobs in chunks; chunk `c` owns stream `c` of
/// `seed`, so the result is independent of the thread count.
fn chunked<T: Send>(seed: u64, count: usize, job: impl Fn(&mut rand_chacha::ChaCha12Rng) -> T + Sync) -> Vec<T> {
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| job(&mut r)).collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanLawConfig {
    /// Number of averaged samples `N`.
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub bins: usize,
    /// Histogram range; defaults to the sample mean ± 6 standard deviations.
    pub range: Option<(f64, f64)>,
}

/// Histogram of the empirical mean `(ξ₁+…+ξ_N)/N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanLawHistogram {
    pub n: usize,
    pub samples: usize,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub mean: f64,
    pub variance: f64,
    pub variance_std_error: f64,
}

impl MeanLawHistogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.bin_width()) as usize).min(self.counts.len() - 1))
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.samples as f64
    }

    /// `−(1/N) ln(P(bin)/width)`; `None` for empty bins.
    pub fn rate(&self, i: usize) -> Option<f64> {
        let p = self.probability(i);
        (p > 0.0).then(|| -(p / self.bin_width()).ln() / self.n as f64)
    }

    pub fn rate_at(&self, x: f64) -> Option<f64> {
        self.bin_of(x).and_then(|i| self.rate(i))
    }
}

pub fn empirical_mean_law(spec: &MeasureSpec, config: &MeanLawConfig) -> Result<MeanLawHistogram, EffectiveError> {
    if config.n == 0 || config.samples < 2 || config.bins == 0 {
        return Err(EffectiveError::Invalid("mean law needs N >= 1, at least 2 samples and 1 bin".into()));
    }
    let sampler = Sampler::new(*spec)?;
    let n = config.n;
    let means = chunked(config.seed, config.samples, |r| (0..n).map(|_| sampler.draw(r)).sum::<f64>() / n as f64);
    let m = means.len() as f64;
    let mean = means.iter().sum::<f64>() / m;
    let variance = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let m4 = means.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    let variance_std_error = ((m4 - variance * variance).max(0.0) / m).sqrt();
    let (lo, hi) = match config.range {
        Some((lo, hi)) if lo < hi => (lo, hi),
        Some(_) => return Err(EffectiveError::Invalid("histogram range must have lo < hi".into())),
        None => (mean - 6.0 * variance.sqrt(), mean + 6.0 * variance.sqrt()),
    };
    let mut hist = MeanLawHistogram {
        n,
        samples: config.samples,
        lo,
        hi,
        counts: vec![0; config.bins],
        underflow: 0,
        overflow: 0,
        mean,
        variance,
        variance_std_error,
    };
    for x in &means {
        match hist.bin_of(*x) {
            Some(i) => hist.counts[i] += 1,
            None if *x < lo => hist.underflow += 1,
            None => hist.overflow += 1,
        }
    }
    Ok(hist)
}

/// Means of `(a ∗_L b) ∗_L c` and `a ∗_L (b ∗_L c)`, where `∗_L` is the law
/// of `(X+Y)/2` and the three laws are `μ_S` shifted by `shifts`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AssociativityReport {
    pub left_mean: f64,
    pub right_mean: f64,
    pub left_std_error: f64,
    pub right_std_error: f64,
    /// `|left − right|` in units of the combined standard error.
    pub separation: f64,
}

pub fn star_l_associativity(spec: &MeasureSpec, shifts: [f64; 3], samples: usize, seed: u64) -> Result<AssociativityReport, EffectiveError> {
    if samples < 2 {
        return Err(EffectiveError::Invalid("need at least 2 samples".into()));
    }
    let sampler = Sampler::new(*spec)?;
    let [sa, sb, sc] = shifts;
    let pairs = chunked(seed, samples, |r| {
        let (x, y, z) = (sampler.draw(r) + sa, sampler.draw(r) + sb, sampler.draw(r) + sc);
        let left = ((x + y) / 2.0 + z) / 2.0;
        let (x, y, z) = (sampler.draw(r) + sa, sampler.draw(r) + sb, sampler.draw(r) + sc);
        let right = (x + (y + z) / 2.0) / 2.0;
        (left, right)
    });
    let stats = |vals: Vec<f64>| {
        let m = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, (var / m).sqrt())
    };
    let (left_mean, left_std_error) = stats(pairs.iter().map(|p| p.0).collect());
    let (right_mean, right_std_error) = stats(pairs.iter().map(|p| p.1).collect());
    let separation = (left_mean - right_mean).abs() / left_std_error.hypot(right_std_error);
    Ok(AssociativityReport { left_mean, right_mean, left_std_error, right_std_error, separation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, samples: usize) -> MeanLawConfig {
        MeanLawConfig { n, samples, seed: 11, bins: 40, range: None }
    }

    #[test]
    fn gaussian_mean_variance() {
        for n in [1, 4] {
            let h = empirical_mean_law(&MeasureSpec::gaussian(1.0), &config(n, 100_000)).unwrap();
            let want = 1.0 / n as f64;
            assert!((h.variance - want).abs() < 5.0 * h.variance_std_error, "n={n} {h:?}");
        }
    }

    #[test]
    fn single_factor_is_the_measure() {
        // N = 1 reproduces μ_S: compare the variance with quadrature.
        let spec = MeasureSpec::quartic(0.1);
        let h = empirical_mean_law(&spec, &config(1, 200_000)).unwrap();
        let g = super::super::CumulantGenerator::new(spec).unwrap();
        let var = g.cumulants(0.0).unwrap().variance;
        assert!((h.variance - var).abs() < 5.0 * h.variance_std_error);
        assert_eq!(h.counts.iter().sum::<u64>() + h.underflow + h.overflow, 200_000);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = MeasureSpec::quartic(0.1);
        let a = empirical_mean_law(&spec, &config(3, 20_000)).unwrap();
        let b = empirical_mean_law(&spec, &config(3, 20_000)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cubic_envelope_bound() {
        let spec = MeasureSpec { variance: 1.0, cubic: 0.3, quartic: 0.1 };
        let s = Sampler::new(spec).unwrap();
        for i in -400..=400 {
            let x = i as f64 * 0.05;
            assert!(Sampler::tilt(&spec, x) <= s.log_bound + 1e-12);
        }
    }

    #[test]
    fn not_associative() {
        let r = star_l_associativity(&MeasureSpec::quartic(0.1), [0.0, 0.0, 3.0], 100_000, 5).unwrap();
        assert!((r.left_mean - 1.5).abs() < 5.0 * r.left_std_error);
        assert!((r.right_mean - 0.75).abs() < 5.0 * r.right_std_error);
        assert!(r.separation > 10.0);
    }
}
