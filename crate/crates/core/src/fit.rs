//! Least-squares helpers shared by the rate and dimension fits.

/// Ordinary least squares `y ≈ slope·x + intercept`; returns `(slope, intercept, rms)`.
///
/// Needs at least two points with distinct `x`.
pub fn linear_regression(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Fit `y ≈ C·x^ρ` by regression in log-log space over positive pairs; returns `(ρ, C)`.
pub fn power_law(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let (rho, lnc, _) = linear_regression(&logs);
    Some((rho, lnc.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let (s, b, r) = linear_regression(&pts);
        assert!((s - 2.0).abs() < 1e-14 && (b + 1.0).abs() < 1e-14 && r < 1e-14);
    }

    #[test]
    fn power_law_recovers_exponent() {
        let pts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3].iter().map(|&a| (a, 3.0 * a)).collect();
        let (rho, c) = power_law(&pts).unwrap();
        assert!((rho - 1.0).abs() < 1e-12 && (c - 3.0).abs() < 1e-10);
        assert!(power_law(&[(1.0, 0.0), (2.0, 1.0)]).is_none());
    }
}
