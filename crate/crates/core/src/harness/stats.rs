use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% Student-t critical value `t(0.975, df)`.
pub fn t_critical_95(df: u64) -> f64 {
    assert!(df >= 1, "t quantile needs at least one degree of freedom");
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("valid t parameters")
        .inverse_cdf(0.975)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Summary {
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// Non-overlapping intervals with `self` entirely below `other`.
    pub fn strictly_below(&self, other: &Summary) -> bool {
        self.ci_high < other.ci_low
    }
}

/// Mean, sample standard deviation and 95% t-interval. `None` below two values.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let stddev = var.sqrt();
    let half = t_critical_95(n as u64 - 1) * stddev / (n as f64).sqrt();
    Some(Summary {
        n,
        mean,
        stddev,
        ci_low: mean - half,
        ci_high: mean + half,
    })
}
