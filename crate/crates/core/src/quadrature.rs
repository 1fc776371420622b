//! Numerical integration: Gauss–Hermite rules and adaptive Gauss–Kronrod.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand does not decay on the integration domain (log-density {boundary} at the edge vs {peak} at the mode)")]
    Divergent { boundary: f64, peak: f64 },
    #[error("adaptive quadrature did not reach tolerance: estimate {value}, error {error}")]
    NotConverged { value: f64, error: f64 },
    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },
}

/// Nodes and weights for `∫ f(x) e^{-x²} dx ≈ Σ wᵢ f(xᵢ)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        // Initial guesses for the largest roots, then by spacing.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // Ascending order.
    x.reverse();
    w.reverse();
    (x, w)
}

/// Rule for `E[f(X)]` with `X ~ N(0, 1)`.
pub fn gauss_hermite_normal(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_hermite(n);
    let s = 2f64.sqrt();
    let norm = PI.sqrt();
    (x.iter().map(|v| v * s).collect(), w.iter().map(|v| v / norm).collect())
}

/// Tensor-product expectation `E[f(X)]` for independent centered Gaussians
/// with the given variances, `n` nodes per axis. Zero-variance axes are
/// evaluated at 0 only.
pub fn gaussian_expectation<F: FnMut(&[f64]) -> f64>(variances: &[f64], n: usize, mut f: F) -> f64 {
    let (nodes, weights) = gauss_hermite_normal(n);
    let d = variances.len();
    let sd: Vec<f64> = variances.iter().map(|v| v.max(0.0).sqrt()).collect();
    let counts: Vec<usize> = sd.iter().map(|s| if *s == 0.0 { 1 } else { n }).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..d {
            if counts[k] == 1 {
                point[k] = 0.0;
            } else {
                point[k] = sd[k] * nodes[idx[k]];
                w *= weights[idx[k]];
            }
        }
        total += w * f(&point);
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == d {
                return total;
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Estimate, QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite { at: c });
    }
    let mut kron = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let (x1, x2) = (c - dx, c + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite { at: x2 });
        }
        kron += GK_WEIGHTS[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += G_WEIGHTS[j / 2] * (f1 + f2);
        }
    }
    Ok(Estimate { value: kron * h, error: ((kron - gauss) * h).abs() })
}

/// Globally adaptive Gauss–Kronrod (7/15) on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate, QuadratureError> {
    const MAX_INTERVALS: usize = 4000;
    let first = gk15(&mut f, a, b)?;
    let mut pieces = vec![(a, b, first)];
    loop {
        let value: f64 = pieces.iter().map(|p| p.2.value).sum();
        let error: f64 = pieces.iter().map(|p| p.2.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate { value, error });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(QuadratureError::NotConverged { value, error });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("nonempty");
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(&mut f, lo, mid)?));
        pieces.push((mid, hi, gk15(&mut f, mid, hi)?));
    }
}

/// `ln ∫ exp(log_f(x)) dx` for a unimodal, rapidly decaying integrand.
///
/// The rule is centred on the mode and scaled by the curvature there; the
/// domain starts at ±8 standard deviations and is widened until the
/// log-density has dropped by at least 40 below the peak.
pub fn log_integral_peaked<F: Fn(f64) -> f64>(log_f: F, guess: f64, scale: f64) -> Result<f64, QuadratureError> {
    let d = peak_domain(&log_f, guess, scale)?;
    let m0 = accept_tight(integrate(|x| (log_f(x) - d.peak).exp(), d.lo, d.hi, 0.0, 1e-14))?;
    Ok(m0.value.ln() + d.peak)
}

/// Log-normalizer, mean and variance of the density `∝ exp(log_f)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakedMoments {
    pub log_integral: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn moments_peaked<F: Fn(f64) -> f64>(log_f: F, guess: f64, scale: f64) -> Result<PeakedMoments, QuadratureError> {
    let d = peak_domain(&log_f, guess, scale)?;
    let dens = |x: f64| (log_f(x) - d.peak).exp();
    let m0 = accept_tight(integrate(dens, d.lo, d.hi, 0.0, 1e-14))?.value;
    let tol = 1e-13 * m0 * d.sd;
    let m1 = accept_tight(integrate(|x| (x - d.mode) * dens(x), d.lo, d.hi, tol, 1e-14))?.value;
    let m2 = accept_tight(integrate(|x| (x - d.mode).powi(2) * dens(x), d.lo, d.hi, tol * d.sd, 1e-14))?.value;
    let shift = m1 / m0;
    Ok(PeakedMoments { log_integral: m0.ln() + d.peak, mean: d.mode + shift, variance: m2 / m0 - shift * shift })
}

struct PeakDomain {
    mode: f64,
    peak: f64,
    sd: f64,
    lo: f64,
    hi: f64,
}

fn peak_domain<F: Fn(f64) -> f64>(log_f: &F, guess: f64, scale: f64) -> Result<PeakDomain, QuadratureError> {
    let mode = find_mode(log_f, guess, scale);
    let peak = log_f(mode);
    if !peak.is_finite() {
        return Err(QuadratureError::NonFinite { at: mode });
    }
    let h = 1e-3 * scale;
    let curv = -(log_f(mode + h) - 2.0 * peak + log_f(mode - h)) / (h * h);
    let sd = if curv.is_finite() && curv > 0.0 { 1.0 / curv.sqrt() } else { scale };
    let mut lo = mode - 8.0 * sd;
    let mut hi = mode + 8.0 * sd;
    for _ in 0..200 {
        if log_f(lo) < peak - 40.0 {
            break;
        }
        lo -= 2.0 * sd;
    }
    for _ in 0..200 {
        if log_f(hi) < peak - 40.0 {
            break;
        }
        hi += 2.0 * sd;
    }
    let edge = log_f(lo).max(log_f(hi));
    if !(edge < peak - 40.0) {
        return Err(QuadratureError::Divergent { boundary: edge, peak });
    }
    Ok(PeakDomain { mode, peak, sd, lo, hi })
}

fn accept_tight(r: Result<Estimate, QuadratureError>) -> Result<Estimate, QuadratureError> {
    r.or_else(|e| match e {
        QuadratureError::NotConverged { value, error } if error <= 1e-11 * value.abs() => Ok(Estimate { value, error }),
        other => Err(other),
    })
}

fn find_mode<F: Fn(f64) -> f64>(log_f: &F, guess: f64, scale: f64) -> f64 {
    // Coarse scan, then golden-section refinement around the best point.
    let mut best = guess;
    let mut best_val = log_f(guess);
    let step = scale / 4.0;
    for k in -160..=160 {
        let x = guess + step * k as f64;
        let v = log_f(x);
        if v > best_val {
            best = x;
            best_val = v;
        }
    }
    let (mut a, mut b) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if log_f(c) > log_f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-12 * scale.max(1e-300) {
            break;
        }
    }
    0.5 * (a + b)
}
