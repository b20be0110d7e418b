//! One-variable reference computation, independent of the jet engine.
//!
//! For a potential `f(t)`, `t = |z|^2`, in one variable the metric is
//! `g(t) = (t f'(t))' = f'(t) + t f''(t)` and the Laplacian is
//! `Delta psi = g(t)^{-1} d_z dbar_z psi`; on radial `psi(t)` this is
//! `g^{-1}(t) (psi'(t) + t psi''(t))`. Series are dense coefficient vectors
//! truncated at a fixed degree in `t`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `-log(1 - t)`, coefficients through `t^n`.
pub fn hyperbolic_profile(n: usize) -> Vec<Q> {
    (0..=n).map(|m| if m == 0 { Q::zero() } else { q(1, m as i64) }).collect()
}

/// `log(1 + t)`, coefficients through `t^n`.
pub fn spherical_profile(n: usize) -> Vec<Q> {
    (0..=n)
        .map(|m| match m {
            0 => Q::zero(),
            m if m % 2 == 1 => q(1, m as i64),
            m => q(-1, m as i64),
        })
        .collect()
}

fn coeff(a: &[Q], i: usize) -> Q {
    a.get(i).cloned().unwrap_or_else(Q::zero)
}

fn derivative(a: &[Q]) -> Vec<Q> {
    (1..a.len()).map(|i| &a[i] * q(i as i64, 1)).collect()
}

fn mul(a: &[Q], b: &[Q], n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1 / a` through `t^n`, by the recursion `b_k = -(sum_{i>=1} a_i b_{k-i}) / a_0`.
fn reciprocal(a: &[Q], n: usize) -> Vec<Q> {
    let a0 = coeff(a, 0);
    assert!(!a0.is_zero());
    let mut b = vec![Q::zero(); n + 1];
    b[0] = a0.recip();
    for k in 1..=n {
        let mut s = Q::zero();
        for i in 1..=k {
            s += coeff(a, i) * &b[k - i];
        }
        b[k] = -s / &a0;
    }
    b
}

/// `g^{-1}(t)` through `t^n` for the profile `f`.
pub fn inverse_metric(f: &[Q], n: usize) -> Vec<Q> {
    let f1 = derivative(f);
    let f2 = derivative(&f1);
    let g: Vec<Q> = (0..=n).map(|i| coeff(&f1, i) + if i > 0 { coeff(&f2, i - 1) } else { Q::zero() }).collect();
    reciprocal(&g, n)
}

/// `g^{-1}(t) (psi' + t psi'')`.
pub fn radial_laplacian(ginv: &[Q], psi: &[Q], n: usize) -> Vec<Q> {
    let d1 = derivative(psi);
    let d2 = derivative(&d1);
    let inner: Vec<Q> = (0..=n).map(|i| coeff(&d1, i) + if i > 0 { coeff(&d2, i - 1) } else { Q::zero() }).collect();
    mul(ginv, &inner, n)
}

/// `Delta^k (t^m) (0)`.
pub fn radial_power(f: &[Q], m: usize, k: usize) -> Q {
    let n = m + 2 * k;
    let ginv = inverse_metric(f, n);
    let mut psi = vec![Q::zero(); n + 1];
    psi[m] = Q::one();
    for _ in 0..k {
        psi = radial_laplacian(&ginv, &psi, n);
    }
    coeff(&psi, 0)
}

/// `Delta^k (z^a zbar^b) (0)` through `Delta psi = g^{-1}(z zbar) d_z dbar_z psi`
/// on polynomials in `(z, zbar)`.
pub fn monomial_power(f: &[Q], a: u32, b: u32, k: usize) -> Q {
    let n = (a + b) as usize + 2 * k;
    let ginv = inverse_metric(f, n);
    let mut psi: BTreeMap<(u32, u32), Q> = BTreeMap::new();
    psi.insert((a, b), Q::one());
    for _ in 0..k {
        let mut next: BTreeMap<(u32, u32), Q> = BTreeMap::new();
        for ((x, y), c) in &psi {
            if *x == 0 || *y == 0 {
                continue;
            }
            let d = c * q(i64::from(*x) * i64::from(*y), 1);
            for (s, gs) in ginv.iter().enumerate() {
                let key = (x - 1 + s as u32, y - 1 + s as u32);
                if (key.0 + key.1) as usize > n {
                    break;
                }
                *next.entry(key).or_insert_with(Q::zero) += &d * gs;
            }
        }
        next.retain(|_, c| !c.is_zero());
        psi = next;
    }
    psi.get(&(0, 0)).cloned().unwrap_or_else(Q::zero)
}
