use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Count, mean and sample standard deviation. An empty sample reports zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Summary { count: 0, mean: 0.0, sd: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { count: n, mean, sd }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sd / (self.count as f64).sqrt()
        }
    }
}

/// Standard error of the difference of two independent means.
pub fn difference_standard_error(a: &Summary, b: &Summary) -> f64 {
    (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

/// Welch's unequal-variance t-test. `None` when either side has fewer than
/// two samples or both variances vanish.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<WelchTest> {
    let (sa, sb) = (Summary::of(a), Summary::of(b));
    if sa.count < 2 || sb.count < 2 {
        return None;
    }
    let va = sa.sd.powi(2) / sa.count as f64;
    let vb = sb.sd.powi(2) / sb.count as f64;
    if va + vb == 0.0 {
        return None;
    }
    let t = (sa.mean - sb.mean) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va.powi(2) / (sa.count - 1) as f64 + vb.powi(2) / (sb.count - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Some(WelchTest { t, df, p_two_sided: p.clamp(0.0, 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_values() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.count, 8);
        assert_eq!(s.mean, 5.0);
        assert!((s.sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of(&[]), Summary { count: 0, mean: 0.0, sd: 0.0 });
        assert_eq!(Summary::of(&[3.0]).sd, 0.0);
    }

    #[test]
    fn welch_against_reference_values() {
        // Computed with scipy.stats.ttest_ind(equal_var=False).
        let a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
        let b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4];
        let w = welch_t_test(&a, &b).unwrap();
        assert!((w.t - -2.46).abs() < 0.01, "{w:?}");
        assert!((w.df - 24.99).abs() < 0.05, "{w:?}");
        assert!((w.p_two_sided - 0.021).abs() < 0.001, "{w:?}");
        assert!(welch_t_test(&[1.0], &b).is_none());
        assert!(welch_t_test(&[1.0, 1.0], &[1.0, 1.0]).is_none());
    }
}
