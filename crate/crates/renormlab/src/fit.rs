//! Small least-squares helpers shared by the scaling-law estimators.

/// Ordinary least squares y = intercept + slope * x.
/// Returns (slope, intercept, r_squared). Needs at least two points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, intercept, r2))
}

/// Slope of log(y) against log(x), dropping non-positive samples.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pairs: (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys.iter())
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    linear_fit(&pairs.0, &pairs.1).map(|(s, _, r2)| (s, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (s, b, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_log_slope() {
        let xs: Vec<f64> = (1..8).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.37 * x * x * x).collect();
        let (s, r2) = log_log_slope(&xs, &ys).unwrap();
        assert!((s - 3.0).abs() < 1e-10);
        assert!(r2 > 0.999999);
    }
}
