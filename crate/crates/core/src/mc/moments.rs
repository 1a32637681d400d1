/// Running means and co-moments of a fixed set of per-drop observables.
///
/// Updates follow Welford; [`Moments::merge`] uses the pairwise formula of
/// Chan et al., so chunks combined in a fixed order give identical results
/// however they were scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    n: u64,
    mean: Vec<f64>,
    /// Row-major `dim × dim` sums of centred cross-products.
    comoment: Vec<f64>,
    delta: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
            delta: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    pub fn push(&mut self, x: &[f64]) {
        let dim = self.dim();
        assert_eq!(x.len(), dim);
        self.n += 1;
        let n = self.n as f64;
        for i in 0..dim {
            self.delta[i] = x[i] - self.mean[i];
            self.mean[i] += self.delta[i] / n;
        }
        for i in 0..dim {
            let after = x[i] - self.mean[i];
            for j in 0..dim {
                self.comoment[i * dim + j] += self.delta[j] * after;
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        assert_eq!(self.dim(), other.dim());
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let dim = self.dim();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..dim {
            self.delta[i] = other.mean[i] - self.mean[i];
        }
        for i in 0..dim {
            for j in 0..dim {
                self.comoment[i * dim + j] += other.comoment[i * dim + j] + self.delta[i] * self.delta[j] * na * nb / n;
            }
        }
        for i in 0..dim {
            self.mean[i] += self.delta[i] * nb / n;
        }
        self.n += other.n;
    }

    /// Sample covariance of observables `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        self.comoment[i * self.dim() + j] / (self.n - 1) as f64
    }

    /// Standard error of `Σ g_i · mean_i`, or of a smooth function of the
    /// means with gradient `g` (delta method).
    pub fn std_error_of(&self, gradient: &[(usize, f64)]) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let mut var = 0.0;
        for &(i, gi) in gradient {
            for &(j, gj) in gradient {
                var += gi * gj * self.covariance(i, j);
            }
        }
        (var.max(0.0) / self.n as f64).sqrt()
    }
}
