//! Diophantine quality of the inverse flux `beta`.

/// Outcome of [`check_diophantine`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineReport {
    pub beta: f64,
    pub c: f64,
    pub kappa: f64,
    pub n_max: u64,
    /// `min_n ||beta n|| n^kappa` over `1 <= n <= n_max`.
    pub min_value: f64,
    pub argmin: u64,
    pub violated: bool,
    /// Continued-fraction convergents `(p, q)` with `q <= n_max`.
    pub convergents: Vec<(i64, i64)>,
}

fn dist_to_int(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Brute-force check of `||beta n|| >= C / n^kappa`, where `||.||` is the
/// distance to the nearest integer. Negative `n` give the same values.
pub fn check_diophantine(beta: f64, c: f64, kappa: f64, n_max: u64) -> DiophantineReport {
    assert!(n_max >= 1, "n_max must be at least 1");
    let mut min_value = f64::INFINITY;
    let mut argmin = 1;
    for n in 1..=n_max {
        let nf = n as f64;
        let v = dist_to_int(beta * nf) * nf.powf(kappa);
        if v < min_value {
            min_value = v;
            argmin = n;
        }
    }
    DiophantineReport {
        beta,
        c,
        kappa,
        n_max,
        min_value,
        argmin,
        violated: min_value < c,
        convergents: continued_fraction_convergents(beta, n_max as i64),
    }
}

/// Convergents `p/q` of `x` with denominators up to `q_max`.
pub fn continued_fraction_convergents(x: f64, q_max: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    out.push((p1, q1));
    let mut rem = x - x.floor();
    // Double precision supports roughly 20 reliable partial quotients.
    for _ in 0..40 {
        if rem.abs() < 1e-12 {
            break;
        }
        let inv = 1.0 / rem;
        let a = inv.floor() as i64;
        rem = inv - inv.floor();
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > q_max {
            break;
        }
        out.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (x - p1 as f64 / q1 as f64).abs() < 1e-15 {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_is_badly_approximable() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let r = check_diophantine(g, 0.38, 1.0, 10_000);
        assert!(!r.violated);
        assert!(r.min_value > 0.38, "{}", r.min_value);
        // Fibonacci convergents
        assert_eq!(&r.convergents[..6], &[(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]);
        // brute-force oracle independent of the report code
        let tail = (100..=10_000u64)
            .map(|n| {
                let t = g * n as f64;
                (t - t.round()).abs() * n as f64
            })
            .fold(f64::INFINITY, f64::min);
        assert!((tail - 1.0 / 5f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn rational_beta_violates() {
        let r = check_diophantine(0.5, 1e-6, 3.0, 100);
        assert!(r.violated);
        assert_eq!(r.argmin, 2);
        assert_eq!(r.min_value, 0.0);
        assert_eq!(r.convergents.last(), Some(&(1, 2)));
    }

    #[test]
    fn sqrt2_has_positive_minimum() {
        let r = check_diophantine(2f64.sqrt(), 0.1, 1.0, 1000);
        assert!(r.min_value > 0.3 && !r.violated);
        assert_eq!(&r.convergents[..4], &[(1, 1), (3, 2), (7, 5), (17, 12)]);
    }
}
