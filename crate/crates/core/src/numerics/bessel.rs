//! Integer-order Bessel functions of the first kind for complex arguments.
//!
//! Small arguments use the ascending series. Larger ones use Miller's
//! downward recurrence, normalized with the Jacobi-Anger sum
//! `J_0 + 2 sum (s^n) J_n = exp(s z)` for whichever `s = +-i` makes the
//! right side large.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 60;
/// Largest supported argument modulus.
pub const MAX_ARG: f64 = 80.0;
const SERIES_RADIUS: f64 = 12.0;

fn check_window(k: usize, z: Complex64) -> Result<()> {
    if !z.is_finite() {
        return Err(Error::NonFinite("Bessel argument"));
    }
    if k > MAX_ORDER || z.norm() > MAX_ARG {
        return Err(Error::DomainExceeded(format!(
            "J_{k}({z}) outside k <= {MAX_ORDER}, |z| <= {MAX_ARG}"
        )));
    }
    Ok(())
}

/// `J_k(z)` for `k <= 60`, `|z| <= 80`.
pub fn bessel_j(k: usize, z: Complex64) -> Result<Complex64> {
    check_window(k, z)?;
    if z.norm() <= SERIES_RADIUS {
        Ok(series(k, z))
    } else {
        Ok(miller(k, z)[k])
    }
}

/// `J_0(z), ..., J_kmax(z)` in one pass.
pub fn bessel_j_orders(kmax: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check_window(kmax, z)?;
    if z.norm() <= SERIES_RADIUS {
        Ok((0..=kmax).map(|k| series(k, z)).collect())
    } else {
        let mut v = miller(kmax, z);
        v.truncate(kmax + 1);
        Ok(v)
    }
}

fn series(k: usize, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    let mut term = Complex64::new(1.0, 0.0);
    for i in 1..=k {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for j in 1..400 {
        term *= q / (j as f64 * (k + j) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && j > 2 {
            break;
        }
    }
    sum
}

fn miller(kmax: usize, z: Complex64) -> Vec<Complex64> {
    let a = z.norm();
    let top = (kmax as f64).max(a);
    let start = (top + 30.0 + 4.0 * top.sqrt()).ceil() as usize + 2;
    let two_over_z = 2.0 / z;
    let mut f = vec![Complex64::new(0.0, 0.0); start + 2];
    f[start] = Complex64::new(1e-300, 0.0);
    for n in (1..=start).rev() {
        f[n - 1] = two_over_z * n as f64 * f[n] - f[n + 1];
        if f[n - 1].norm() > 1e250 {
            for v in f.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // Bring the largest entry to order one so the complex division below cannot underflow.
    let peak = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in f.iter_mut() {
        *v /= peak;
    }
    let s = if z.im >= 0.0 { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 1.0) };
    let mut power = Complex64::new(1.0, 0.0);
    let mut norm_sum = f[0];
    for v in f.iter().take(start + 1).skip(1) {
        power *= s;
        norm_sum += 2.0 * power * v;
    }
    let scale = (s * z).exp() / norm_sum;
    f.iter().map(|v| v * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(bessel_j(3, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn even_order_is_even() {
        let z = c(2.0, 1.0);
        let a = bessel_j(2, z).unwrap();
        let b = bessel_j(2, -z).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn window_enforced() {
        assert!(matches!(bessel_j(61, c(1.0, 0.0)), Err(Error::DomainExceeded(_))));
        assert!(matches!(bessel_j(1, c(81.0, 0.0)), Err(Error::DomainExceeded(_))));
    }

    #[test]
    fn series_and_miller_agree_at_the_seam() {
        for &z in &[c(11.9, 0.5), c(-7.0, 9.0), c(0.0, 11.5)] {
            let seq = miller(20, z);
            for (k, m) in seq.iter().take(21).enumerate() {
                let s = series(k, z);
                assert!((s - m).norm() <= 1e-9 * s.norm().max(1e-3), "k={k} z={z}: {s} vs {m}");
            }
        }
    }
}
