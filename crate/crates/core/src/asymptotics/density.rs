use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// A one-dimensional density on `[0, 1]` with a closed-form CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisDensity {
    Uniform,
    /// `λ e^{-λx} / (1 − e^{-λ})`; negative rates tilt mass toward 1.
    TruncatedExponential { rate: f64 },
    /// Mixture of two normals truncated to `[0, 1]`, the first with weight
    /// `weight`.
    TwoBump {
        weight: f64,
        means: [f64; 2],
        sds: [f64; 2],
    },
}

fn truncated_normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    let n = Normal::new(mean, sd).expect("validated parameters");
    let lo = n.cdf(0.0);
    let hi = n.cdf(1.0);
    ((n.cdf(x) - lo) / (hi - lo)).clamp(0.0, 1.0)
}

fn truncated_normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let n = Normal::new(mean, sd).expect("validated parameters");
    n.pdf(x) / (n.cdf(1.0) - n.cdf(0.0))
}

impl AxisDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AxisDensity::Uniform => Ok(()),
            AxisDensity::TruncatedExponential { rate } => {
                if rate.is_finite() && rate != 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("exponential rate must be finite and nonzero, got {rate}")))
                }
            }
            AxisDensity::TwoBump { weight, means, sds } => {
                if !(0.0..=1.0).contains(&weight) {
                    return Err(Error::Config(format!("bump weight {weight} not in [0, 1]")));
                }
                if means.iter().any(|m| !m.is_finite()) || sds.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(Error::Config("bump means must be finite and sds positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match *self {
            AxisDensity::Uniform => 1.0,
            AxisDensity::TruncatedExponential { rate } => {
                rate * (-rate * x).exp() / (1.0 - (-rate).exp())
            }
            AxisDensity::TwoBump { weight, means, sds } => {
                weight * truncated_normal_pdf(x, means[0], sds[0])
                    + (1.0 - weight) * truncated_normal_pdf(x, means[1], sds[1])
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            AxisDensity::Uniform => x,
            AxisDensity::TruncatedExponential { rate } => {
                (1.0 - (-rate * x).exp()) / (1.0 - (-rate).exp())
            }
            AxisDensity::TwoBump { weight, means, sds } => {
                weight * truncated_normal_cdf(x, means[0], sds[0])
                    + (1.0 - weight) * truncated_normal_cdf(x, means[1], sds[1])
            }
        }
    }

    /// Inverse CDF; closed form where available, bisection otherwise.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            AxisDensity::Uniform => u,
            AxisDensity::TruncatedExponential { rate } => {
                (-(1.0 - u * (1.0 - (-rate).exp())).ln() / rate).clamp(0.0, 1.0)
            }
            AxisDensity::TwoBump { .. } => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Product density `f(x) = f_1(x_1) ⋯ f_d(x_d)` on `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableDensity {
    pub axes: Vec<AxisDensity>,
}

impl SeparableDensity {
    pub fn new(axes: Vec<AxisDensity>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Config("density needs at least one axis".into()));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(Self { axes })
    }

    pub fn uniform(d: usize) -> Self {
        Self {
            axes: vec![AxisDensity::Uniform; d],
        }
    }

    pub fn iid(axis: AxisDensity, d: usize) -> Result<Self> {
        Self::new(vec![axis; d])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// `F(x) = Π F_i(x_i)`.
    pub fn cdf(&self, x: &[f64]) -> f64 {
        self.axes.iter().zip(x).map(|(a, &v)| a.cdf(v)).product()
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.axes.iter().zip(x).map(|(a, &v)| a.pdf(v)).product()
    }
}

/// `n` i.i.d. draws (row-major `n × d`) by per-axis inverse-CDF transform.
/// Any value repeated on an axis is redrawn, so coordinates are distinct.
pub fn sample_density(f: &SeparableDensity, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let d = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n * d);
    for _ in 0..n {
        for axis in &f.axes {
            pts.push(axis.quantile(rng.random::<f64>()));
        }
    }
    for a in 0..d {
        loop {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| pts[i * d + a].total_cmp(&pts[j * d + a]));
            let dups: Vec<usize> = order
                .windows(2)
                .filter(|w| pts[w[0] * d + a] == pts[w[1] * d + a])
                .map(|w| w[1])
                .collect();
            if dups.is_empty() {
                break;
            }
            for i in dups {
                pts[i * d + a] = f.axes[a].quantile(rng.random::<f64>());
            }
        }
    }
    Ok(pts)
}
