use serde::Serialize;

use super::SequencesError;

/// Density sampled at `x0 + i·dx`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledDensity {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl SampledDensity {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self, SequencesError> {
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) || values.is_empty() {
            return Err(SequencesError::GridMismatch("need dx > 0 and at least one sample".into()));
        }
        Ok(SampledDensity { x0, dx, values })
    }

    /// Samples `f` on `[a, b]` with `m + 1` points.
    pub fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> Result<Self, SequencesError> {
        let dx = (b - a) / m as f64;
        Self::new(a, dx, (0..=m).map(|i| f(a + i as f64 * dx)).collect())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Indices of nonzero samples.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|i| self.values[*i] != 0.0).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Delta,
    Sampled(SampledDensity),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityConv {
    pub density: SampledDensity,
    /// For each output point `x`, the range of input indices at `x − K`
    /// with `K` in the kernel support.
    pub neighbours: Vec<Option<(usize, usize)>>,
}

/// Riemann-sum convolution on a shared grid spacing.
pub fn density_conv(free: &SampledDensity, kernel: &Kernel) -> Result<DensityConv, SequencesError> {
    let g = match kernel {
        Kernel::Delta => {
            return Ok(DensityConv {
                density: free.clone(),
                neighbours: (0..free.values.len()).map(|i| Some((i, i))).collect(),
            })
        }
        Kernel::Sampled(g) => g,
    };
    if (free.dx - g.dx).abs() > 1e-12 * free.dx {
        return Err(SequencesError::GridMismatch(format!("spacings {} and {} differ", free.dx, g.dx)));
    }
    let len = free.values.len() + g.values.len() - 1;
    let mut values = vec![0.0; len];
    for (j, fj) in free.values.iter().enumerate() {
        for (m, gm) in g.values.iter().enumerate() {
            values[j + m] += fj * gm * free.dx;
        }
    }
    let g_support = g.support();
    let neighbours = (0..len)
        .map(|i| {
            let js: Vec<usize> = g_support
                .iter()
                .filter(|m| **m <= i && i - **m < free.values.len())
                .map(|m| i - m)
                .collect();
            Some((*js.iter().min()?, *js.iter().max()?))
        })
        .collect();
    Ok(DensityConv { density: SampledDensity { x0: free.x0 + g.x0, dx: free.dx, values }, neighbours })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_is_identity() {
        let f = SampledDensity::sample(|x| (-x * x).exp(), -3.0, 3.0, 60).unwrap();
        assert_eq!(density_conv(&f, &Kernel::Delta).unwrap().density, f);
    }

    #[test]
    fn uniform_triangle() {
        let m = 400;
        let u = SampledDensity::sample(|_| 1.0, 0.0, 1.0, m).unwrap();
        let c = density_conv(&u, &Kernel::Sampled(u.clone())).unwrap().density;
        let dx = u.dx;
        let (imax, vmax) = c.values.iter().enumerate().fold((0, 0.0), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
        assert!((c.x(imax) - 1.0).abs() <= dx);
        assert!((vmax - 1.0).abs() <= 2.0 * dx);
        for (i, v) in c.values.iter().enumerate() {
            let x = c.x(i);
            let tri = if x <= 1.0 { x } else { 2.0 - x };
            assert!((v - tri).abs() <= 2.0 * dx);
        }
        assert!((c.x(c.values.len() - 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn support_is_contained_in_sum() {
        let f = SampledDensity::new(0.0, 0.5, vec![0.0, 1.0, 0.0, 2.0]).unwrap();
        let g = SampledDensity::new(1.0, 0.5, vec![3.0, 0.0, 0.0]).unwrap();
        let c = density_conv(&f, &Kernel::Sampled(g.clone())).unwrap();
        let sums: Vec<usize> = f.support().iter().flat_map(|a| g.support().into_iter().map(move |b| a + b)).collect();
        assert!(c.density.support().iter().all(|i| sums.contains(i)));
        assert_eq!(c.neighbours[3], Some((3, 3)));
        assert!(density_conv(&f, &Kernel::Sampled(SampledDensity::new(0.0, 0.3, vec![1.0]).unwrap())).is_err());
    }
}
