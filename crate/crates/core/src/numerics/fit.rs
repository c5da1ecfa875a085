use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares of `ln value` on `ln n`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(invalid(format!("log-log fit needs at least 2 points, got {}", points.len())));
    }
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0)) {
        return Err(invalid(format!("log-log fit needs positive coordinates, got ({n}, {v})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(n, v)| (n.ln(), v.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("log-log fit needs at least two distinct sample sizes"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_gaussian, SeededRng};

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = [32.0, 64.0, 128.0, 256.0, 512.0]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n.powf(-0.5)))
            .collect();
        let fit = loglog_slope(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_points_give_the_line_through_them() {
        let fit = loglog_slope(&[(2.0, 5.0), (8.0, 1.25)]).unwrap();
        let expected = (1.25f64.ln() - 5.0f64.ln()) / (8.0f64.ln() - 2.0f64.ln());
        assert!((fit.slope - expected).abs() < 1e-12);
        assert!((fit.intercept + fit.slope * 2.0f64.ln() - 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = SeededRng::new(11);
        let noise = sample_gaussian(&mut rng, 0.01, 5).unwrap();
        let pts: Vec<_> = [32.0f64, 64.0, 128.0, 256.0, 512.0]
            .iter()
            .zip(&noise)
            .map(|(&n, e)| (n, n.powf(-0.8) * e.exp()))
            .collect();
        let fit = loglog_slope(&pts).unwrap();
        assert!((fit.slope + 0.8).abs() < 0.05);
    }

    #[test]
    fn invalid_inputs() {
        assert!(loglog_slope(&[(1.0, 1.0)]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (-2.0, 1.0)]).is_err());
    }
}
