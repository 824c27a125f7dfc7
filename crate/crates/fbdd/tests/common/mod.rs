use std::time::Instant;

/// Least-squares slope of y against x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Slope of log(y) against log(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

/// Report one acceptance criterion and enforce its runtime budget.
pub fn report(criterion: &str, started: Instant, budget_s: f64, pass: bool) {
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "acceptance {}: {} ({:.2}s, budget {:.0}s)",
        criterion,
        if pass { "PASS" } else { "FAIL" },
        elapsed,
        budget_s
    );
    assert!(pass, "criterion failed: {}", criterion);
    assert!(
        elapsed < budget_s,
        "criterion {} exceeded runtime budget: {:.2}s >= {:.0}s",
        criterion,
        elapsed,
        budget_s
    );
}
