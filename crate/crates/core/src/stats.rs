use crate::error::{Error, Result};
use crate::phase::BiasMaeEntry;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Mean and standard error (`s / √n`, with the `n − 1` sample deviation).
/// The standard error is `None` for a single value.
pub fn mean_stderr(values: &[f64]) -> Result<(f64, Option<f64>)> {
    if values.is_empty() {
        return Err(Error::Empty("sample list"));
    }
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    if values.len() == 1 {
        return Ok((mean, None));
    }
    let ss = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .collect::<CompensatedSum>()
        .value();
    Ok((mean, Some((ss / (n - 1.0)).sqrt() / n.sqrt())))
}

impl BiasMaeEntry {
    /// Aggregates signed errors `estimate − truth` (already reduced for circular
    /// quantities) into bias and MAE with standard errors.
    pub fn from_errors(ground_truth: f64, errors: &[f64]) -> Result<Self> {
        let (bias, stderr_bias) = mean_stderr(errors)?;
        let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
        let (mae, stderr_mae) = mean_stderr(&abs)?;
        Ok(BiasMaeEntry {
            ground_truth,
            bias,
            mae,
            stderr_bias,
            stderr_mae,
            n_samples: Some(errors.len() as u64),
        })
    }

    /// `|bias| / stderr_bias`; zero when both vanish, infinite when only the error does.
    pub fn bias_z(&self) -> f64 {
        let se = self.stderr_bias.unwrap_or(0.0);
        if self.bias == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            self.bias.abs() / se
        }
    }
}

/// `√(a² + b²)` of two optional standard errors, treating `None` as zero.
pub fn joint_stderr(a: Option<f64>, b: Option<f64>) -> f64 {
    a.unwrap_or(0.0).hypot(b.unwrap_or(0.0))
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub stderr_intercept: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParams(format!(
            "linear fit needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Empty("linear fit needs at least three points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let sigma2 = rss / (n - 2.0);
    Ok(LinearFit {
        intercept,
        slope,
        r_squared: 1.0 - rss / syy,
        stderr_intercept: (sigma2 * (1.0 / n + mx * mx / sxx)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1e16, 1.0, -1e16];
        values.extend(std::iter::repeat_n(1e-3, 1000));
        let s: CompensatedSum = values.into_iter().collect();
        assert_abs_diff_eq!(s.value(), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn mean_stderr_basic() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert_abs_diff_eq!(se.unwrap(), (5.0f64 / 3.0).sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(mean_stderr(&[7.0]).unwrap(), (7.0, None));
        assert!(mean_stderr(&[]).is_err());
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.intercept, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.slope, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }
}
