//! Streaming descriptive statistics.

/// Single-pass mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `None` when empty. Exact for constant input.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    /// Sample variance with the `n - 1` denominator; zero for a single value.
    pub fn variance(&self) -> Option<f64> {
        match self.count {
            0 => None,
            1 => Some(0.0),
            n => Some((self.m2 / (n - 1) as f64).max(0.0)),
        }
    }

    pub fn std_dev(&self) -> Option<f64> {
        self.variance().map(f64::sqrt)
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

/// Single-pass co-moments of a paired sample.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningCovariance {
    count: usize,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl RunningCovariance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.count += 1;
        let n = self.count as f64;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / n;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Pearson correlation, clamped to `[-1, 1]`. `None` with fewer than two
    /// pairs or when either side has zero variance.
    pub fn pearson(&self) -> Option<f64> {
        if self.count < 2 || self.m2_x <= 0.0 || self.m2_y <= 0.0 {
            return None;
        }
        let r = self.c_xy / (self.m2_x.sqrt() * self.m2_y.sqrt());
        r.is_finite().then(|| r.clamp(-1.0, 1.0))
    }
}

impl FromIterator<(f64, f64)> for RunningCovariance {
    fn from_iter<I: IntoIterator<Item = (f64, f64)>>(iter: I) -> Self {
        let mut s = Self::new();
        iter.into_iter().for_each(|(x, y)| s.push(x, y));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sample_std() {
        let s: RunningStats = [1.0, 2.0, 3.0].into_iter().collect();
        assert_eq!(s.mean(), Some(2.0));
        assert_eq!(s.std_dev(), Some(1.0));
    }

    #[test]
    fn constant_input_is_exact() {
        let s: RunningStats = std::iter::repeat_n(0.1, 1000).collect();
        assert_eq!(s.mean(), Some(0.1));
        assert_eq!(s.variance(), Some(0.0));
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(RunningStats::new().mean(), None);
        let s: RunningStats = [4.0].into_iter().collect();
        assert_eq!(s.variance(), Some(0.0));
    }

    #[test]
    fn pearson_signs_and_degenerate() {
        let up: RunningCovariance = [(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)].into_iter().collect();
        assert!((up.pearson().unwrap() - 1.0).abs() < 1e-15);
        let down: RunningCovariance = [(1.0, 6.0), (2.0, 4.0), (3.0, 2.0)].into_iter().collect();
        assert!((down.pearson().unwrap() + 1.0).abs() < 1e-15);
        let flat: RunningCovariance = [(1.0, 5.0), (2.0, 5.0), (3.0, 5.0)].into_iter().collect();
        assert_eq!(flat.pearson(), None);
    }
}
