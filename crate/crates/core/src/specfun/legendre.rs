use super::Order;

/// Legendre polynomial by the three-term recurrence.
pub fn legendre_p(ell: Order, x: f64) -> f64 {
    let l = ell.0;
    if l == 0 {
        return 1.0;
    }
    let mut pm = 1.0;
    let mut p = x;
    for k in 1..l {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0) * x * p - k * pm) / (k + 1.0);
        pm = p;
        p = next;
    }
    p
}

/// Monomial coefficients of `P_ell`: entry `k` multiplies `x^k`.
pub fn legendre_coefficients(ell: Order) -> Vec<f64> {
    let l = ell.0 as usize;
    let mut out = vec![0.0; l + 1];
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let scale = 0.5f64.powi(l as i32);
    for k in 0..=l / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out[l - 2 * k] = sign * binom(l, k) * binom(2 * l - 2 * k, l) * scale;
    }
    out
}
