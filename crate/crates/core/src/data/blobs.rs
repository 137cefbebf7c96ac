use super::{DataKind, Dataset};
use crate::error::{invalid, Error, Result};
use crate::numeric::{Matrix, Rng};

const MAX_ATTEMPTS: usize = 10_000;

/// Class centers in `[-1, 1]^dim`, pairwise at least `4 · spread` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobCenters {
    centers: Vec<Vec<f64>>,
    spread: f64,
}

impl BlobCenters {
    /// Rejection-samples `classes` centers; gives up after 10⁴ draws.
    pub fn place(rng: &mut Rng, classes: usize, dim: usize, spread: f64) -> Result<Self> {
        if classes < 2 {
            return Err(invalid(format!("need at least 2 classes, got {classes}")));
        }
        if dim == 0 {
            return Err(invalid("dim must be at least 1"));
        }
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(invalid(format!("spread must be positive, got {spread}")));
        }
        let min_dist = 4.0 * spread;
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
        let mut attempts = 0;
        while centers.len() < classes {
            if attempts == MAX_ATTEMPTS {
                return Err(Error::CenterPlacement {
                    classes,
                    attempts,
                });
            }
            attempts += 1;
            let candidate: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect::<Result<_>>()?;
            let separated = centers.iter().all(|c| {
                let d2: f64 = c.iter().zip(&candidate).map(|(a, b)| (a - b).powi(2)).sum();
                d2.sqrt() >= min_dist
            });
            if separated {
                centers.push(candidate);
            }
        }
        Ok(Self { centers, spread })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn num_classes(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    /// `per_class` points per center, each `center + N(0, spread²)` per
    /// coordinate, grouped by class.
    pub fn sample(&self, rng: &mut Rng, per_class: usize) -> Result<Dataset> {
        if per_class == 0 {
            return Err(invalid("per_class must be at least 1"));
        }
        let mut data = Vec::with_capacity(self.num_classes() * per_class * self.dim());
        let mut labels = Vec::with_capacity(self.num_classes() * per_class);
        for (label, center) in self.centers.iter().enumerate() {
            for _ in 0..per_class {
                for &c in center {
                    data.push(rng.normal(c, self.spread)?);
                }
                labels.push(label);
            }
        }
        Dataset::new(
            Matrix::from_vec(labels.len(), self.dim(), data)?,
            labels,
            self.num_classes(),
            DataKind::Flat,
        )
    }

    /// Index of the closest center.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let dist = |c: &[f64]| -> f64 { c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum() };
        (0..self.centers.len())
            .min_by(|&a, &b| dist(&self.centers[a]).total_cmp(&dist(&self.centers[b])))
            .expect("at least two centers")
    }
}

/// Gaussian blobs around well-separated random centers.
pub fn synthetic_blobs(
    rng: &mut Rng,
    classes: usize,
    per_class: usize,
    dim: usize,
    spread: f64,
) -> Result<Dataset> {
    BlobCenters::place(rng, classes, dim, spread)?.sample(rng, per_class)
}
