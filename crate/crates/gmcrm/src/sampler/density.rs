use crate::error::{domain, Result};
use crate::model::{ClusterParam, NigBase};

/// Kernel components are evaluated only this many standard deviations out.
const KERNEL_REACH: f64 = 40.0;

/// Equispaced evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl DensityGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
            return domain(format!(
                "invalid density grid [{min}, {max}] with {points} points"
            ));
        }
        Ok(Self { min, max, points })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| self.min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub theta: ClusterParam,
}

/// Predictive density of one more observation: a Gaussian mixture plus the
/// prior predictive with weight `base_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveMixture {
    pub base: NigBase,
    pub base_weight: f64,
    pub components: Vec<MixtureComponent>,
}

impl PredictiveMixture {
    pub fn density(&self, x: f64) -> f64 {
        let mut v = self.base_weight * self.base.marginal_density(x);
        for c in &self.components {
            v += c.weight * crate::model::kernel_density(x, &c.theta);
        }
        v
    }
}

/// Running average of predictive densities on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityAccumulator {
    pub grid: DensityGrid,
    sums: Vec<f64>,
    count: u64,
}

impl DensityAccumulator {
    pub fn new(grid: DensityGrid) -> Self {
        Self {
            grid,
            sums: vec![0.0; grid.points],
            count: 0,
        }
    }

    pub fn add(&mut self, mix: &PredictiveMixture) {
        let (x0, h) = (self.grid.min, self.grid.step());
        let last = self.grid.points - 1;
        if mix.base_weight > 0.0 {
            for (i, v) in self.sums.iter_mut().enumerate() {
                *v += mix.base_weight * mix.base.marginal_density(x0 + i as f64 * h);
            }
        }
        for c in &mix.components {
            let sd = c.theta.var.sqrt();
            let lo = ((c.theta.mean - KERNEL_REACH * sd - x0) / h)
                .floor()
                .max(0.0);
            let hi = ((c.theta.mean + KERNEL_REACH * sd - x0) / h)
                .ceil()
                .min(last as f64);
            if hi < 0.0 || lo > last as f64 {
                continue;
            }
            let norm = c.weight / (sd * (2.0 * std::f64::consts::PI).sqrt());
            for i in lo as usize..=hi as usize {
                let d = (x0 + i as f64 * h - c.theta.mean) / sd;
                self.sums[i] += norm * (-0.5 * d * d).exp();
            }
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &DensityAccumulator) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Averaged density on the grid.
    pub fn estimate(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return domain("no recorded iterations");
        }
        Ok(self.sums.iter().map(|s| s / self.count as f64).collect())
    }
}

/// Trapezoid rule on an equispaced grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}
