//! Bessel functions of the first kind of integer order.

use crate::error::{Error, Result};

/// Arguments above this are outside the supported range.
pub const BESSEL_MAX_ARG: f64 = 100.0;

/// J_alpha(x) for integer alpha and 0 <= x <= 100.
pub fn bessel_j(alpha: i32, x: f64) -> Result<f64> {
    if !(0.0..=BESSEL_MAX_ARG).contains(&x) {
        return Err(Error::BesselRange(x));
    }
    Ok(jn(alpha, x))
}

/// J_alpha(x) without the range check.
pub(crate) fn jn(alpha: i32, x: f64) -> f64 {
    let n = alpha.unsigned_abs();
    let v = if x <= 12.0 { series(n, x) } else { miller(n, x) };
    if alpha < 0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

fn series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let q = -h * h;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > h {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

/// Backward recurrence normalised by J_0 + 2 sum J_{2k} = 1.
fn miller(n: u32, x: f64) -> f64 {
    let start = 2 * ((n.max(x as u32) + 30 + (x.sqrt() * 10.0) as u32) / 2);
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == n {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert!((bessel_j(0, 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(2, 5.0).unwrap() - 0.046_565_116_277_752_21).abs() < 1e-14);
        assert!((bessel_j(0, 20.0).unwrap() - 0.167_024_664_340_583_2).abs() < 1e-13);
        assert!((bessel_j(1, 50.0).unwrap() + 0.097_511_828_125_175_38).abs() < 1e-13);
    }

    #[test]
    fn reflection_for_integer_order() {
        for &x in &[0.5, 1.0, 2.0] {
            assert_eq!(bessel_j(-1, x).unwrap(), -bessel_j(1, x).unwrap());
            assert_eq!(bessel_j(-2, x).unwrap(), bessel_j(2, x).unwrap());
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_the_switch() {
        for n in 0..5 {
            let a = series(n, 12.0);
            let b = miller(n, 12.0);
            assert!((a - b).abs() < 1e-12, "order {n}: {a} vs {b}");
        }
    }

    #[test]
    fn recurrence_identity() {
        // 2 alpha J_alpha(x) = x (J_{alpha+1}(x) + J_{alpha-1}(x))
        for alpha in -2..4 {
            for &x in &[0.3, 2.5, 9.0, 30.0] {
                let lhs = 2.0 * alpha as f64 * jn(alpha, x);
                let rhs = x * (jn(alpha + 1, x) + jn(alpha - 1, x));
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + x));
            }
        }
    }

    #[test]
    fn range_guard() {
        assert!(bessel_j(0, 100.5).is_err());
        assert!(bessel_j(0, -1.0).is_err());
    }
}
