//! Digamma, trigamma and log-gamma for positive arguments.
//!
//! Digamma and trigamma use the recurrence shift into the asymptotic regime;
//! log-gamma uses a Lanczos approximation (g = 7, 9 terms), with the
//! recurrence `lgamma(x) = lgamma(x+1) - ln x` below 0.5.

use crate::error::TensorError;

/// Minimum argument for the digamma/trigamma asymptotic series.
const ASYMPTOTIC_MIN: f64 = 10.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_positive(op: &'static str, x: f64) -> Result<(), TensorError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(TensorError::Domain {
            op,
            detail: format!("argument must be positive and finite, got {x}"),
        });
    }
    Ok(())
}

/// Digamma function ψ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64, TensorError> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < ASYMPTOTIC_MIN {
        shift -= 1.0 / x;
        x += 1.0;
    }
    // ψ(x) ~ ln x - 1/(2x) - Σ B_{2n} / (2n x^{2n})
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    shift + x.ln() - 0.5 * inv - series
}

/// Trigamma function ψ₁(x) for x > 0 (the derivative of digamma).
pub fn trigamma(x: f64) -> Result<f64, TensorError> {
    check_positive("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < ASYMPTOTIC_MIN {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    // ψ₁(x) ~ 1/x + 1/(2x²) + Σ B_{2n} / x^{2n+1}
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0
            + inv * (0.5
                + inv
                    * (1.0 / 6.0
                        - inv2
                            * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0))))));
    shift + series
}

/// Natural log of the Gamma function for x > 0.
pub fn lgamma(x: f64) -> Result<f64, TensorError> {
    check_positive("lgamma", x)?;
    Ok(lgamma_unchecked(x))
}

pub(crate) fn lgamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return lgamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Euler–Mascheroni constant (published value).
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    /// Independent digamma oracle: shift the argument above 1e4 with the
    /// recurrence, then apply the three-term asymptotic expansion whose
    /// truncation error there is below 1e-18.
    fn digamma_oracle(x: f64) -> f64 {
        let mut x = x;
        let mut shift = 0.0;
        while x < 1.0e4 {
            shift -= 1.0 / x;
            x += 1.0;
        }
        let inv = 1.0 / x;
        shift + x.ln() - 0.5 * inv - inv * inv / 12.0
    }

    /// Independent lgamma oracle: recurrence up to 1e4, then Stirling with
    /// two correction terms; the log-sum uses Kahan compensation.
    fn lgamma_oracle(x: f64) -> f64 {
        let mut x = x;
        let mut sum = 0.0;
        let mut comp = 0.0;
        while x < 1.0e4 {
            let term = -x.ln();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            x += 1.0;
        }
        let stirling = (x - 0.5) * x.ln() - x
            + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x);
        sum + stirling
    }

    #[test]
    fn digamma_matches_oracle_over_domain() {
        let mut x = 0.01;
        while x <= 100.0 {
            let got = digamma(x).unwrap();
            let want = digamma_oracle(x);
            assert!(
                (got - want).abs() < 1e-10,
                "digamma({x}) = {got}, oracle {want}"
            );
            x += 0.37;
        }
    }

    #[test]
    fn digamma_at_one_is_minus_euler_gamma() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-12);
    }

    #[test]
    fn digamma_recurrence() {
        for &x in &[0.5, 1.0, 2.0, 10.0] {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((lhs - 1.0 / x).abs() < 1e-10, "recurrence failed at {x}");
        }
        // ψ(2) − ψ(1) = 1 and ψ(4) − ψ(3) = 1/3 exactly (within fp noise).
        assert!((digamma(2.0).unwrap() - digamma(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((digamma(4.0).unwrap() - digamma(3.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn trigamma_matches_finite_difference_of_digamma() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 40.0] {
            let h = 1e-6;
            let fd = (digamma(x + h).unwrap() - digamma(x - h).unwrap()) / (2.0 * h);
            let tg = trigamma(x).unwrap();
            assert!(
                (fd - tg).abs() < 1e-7 * tg.abs().max(1.0),
                "trigamma({x}) = {tg}, fd {fd}"
            );
        }
    }

    #[test]
    fn trigamma_at_one_is_pi_squared_over_six() {
        let want = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!((trigamma(1.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn lgamma_matches_oracle_over_domain() {
        let mut x = 0.05;
        while x <= 200.0 {
            let got = lgamma(x).unwrap();
            let want = lgamma_oracle(x);
            assert!(
                (got - want).abs() < 1e-10,
                "lgamma({x}) = {got}, oracle {want}"
            );
            x += 0.73;
        }
    }

    #[test]
    fn lgamma_known_values() {
        assert!(lgamma(1.0).unwrap().abs() < 1e-13);
        assert!(lgamma(2.0).unwrap().abs() < 1e-13);
        // Γ(5) = 4! = 24
        assert!((lgamma(5.0).unwrap() - 24.0f64.ln()).abs() < 1e-12);
        // Γ(1/2) = √π
        let want = 0.5 * std::f64::consts::PI.ln();
        assert!((lgamma(0.5).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_arguments() {
        for f in [digamma, trigamma, lgamma] {
            assert!(f(0.0).is_err());
            assert!(f(-1.5).is_err());
            assert!(f(f64::NAN).is_err());
        }
    }
}
