//! Running intensity statistics of a growing region.

/// How [`RegionStats`] folds in a new intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatsMode {
    /// Welford update: mean and population standard deviation equal the batch
    /// values of every accepted intensity.
    #[default]
    Exact,
    /// The published recurrence, applied verbatim:
    /// `mean_n = ((n-1) mean_{n-1} + x) / n` and
    /// `std_n = sqrt(((n-2) std_{n-1}^2 + x^2) / n)`.
    /// The second formula has no mean-centering term, so `std` here is not a
    /// standard deviation of the data.
    PaperLiteral,
}

/// Count, mean and standard deviation of the pixels accepted so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    count: u64,
    mean: f64,
    std: f64,
    // Sum of squared deviations from the mean; only maintained in exact mode.
    m2: f64,
}

impl RegionStats {
    /// Statistics of a region holding only its seed: the mean is the seed
    /// intensity and the deviation is zero.
    pub fn seed(intensity: u8) -> Self {
        RegionStats {
            count: 1,
            mean: f64::from(intensity),
            std: 0.0,
            m2: 0.0,
        }
    }

    /// Builds stats from explicit values. `count` must be at least 1 and
    /// `std` non-negative.
    pub fn from_parts(count: u64, mean: f64, std: f64) -> Self {
        assert!(count >= 1, "region stats need at least one pixel");
        assert!(std >= 0.0, "negative standard deviation");
        RegionStats {
            count,
            mean,
            std,
            m2: std * std * count as f64,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Folds one more accepted intensity into the statistics.
    pub fn push(&mut self, intensity: u8, mode: StatsMode) {
        let x = f64::from(intensity);
        self.count += 1;
        let n = self.count as f64;
        match mode {
            StatsMode::Exact => {
                let delta = x - self.mean;
                self.mean += delta / n;
                self.m2 += delta * (x - self.mean);
                // Rounding can push m2 a hair below zero for constant input.
                self.m2 = self.m2.max(0.0);
                self.std = libm::sqrt(self.m2 / n);
            }
            StatsMode::PaperLiteral => {
                self.mean = ((n - 1.0) * self.mean + x) / n;
                self.std = libm::sqrt(((n - 2.0) * (self.std * self.std) + x * x) / n);
            }
        }
    }
}

/// Returns `stats` with `intensity` folded in.
pub fn stats_update(stats: RegionStats, intensity: u8, mode: StatsMode) -> RegionStats {
    let mut next = stats;
    next.push(intensity, mode);
    next
}
