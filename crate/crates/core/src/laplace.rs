//! Kähler and Euclidean Laplacians on jets, their powers at the origin, and
//! the expanded second- and third-power formulas used as cross-checks.
//!
//! Applying `Delta` costs two degrees of validity, so `Delta^k phi(0)` needs
//! `phi` through degree `2k` and the inverse metric through degree `2k - 2`.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{assert_normal_coordinates, MetricJet};
use crate::ratjet::{int, BiIndex, Jet, Rational};

/// Truncation accounting for `Delta^k`: a potential of order `D` supports
/// powers up to `k` when `D >= 2k + 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaplacianBudget {
    pub k: u32,
    pub order: u32,
}

impl LaplacianBudget {
    pub fn required_order(k: u32) -> u32 {
        2 * k + 2
    }

    /// Largest power a potential of order `order` supports.
    pub fn max_power(order: u32) -> u32 {
        order.saturating_sub(2) / 2
    }

    pub fn new(k: u32, order: u32) -> Result<Self> {
        let needed = Self::required_order(k);
        if order < needed {
            return Err(Error::InsufficientOrder { needed });
        }
        Ok(LaplacianBudget { k, order })
    }
}

/// `Delta_c phi = sum_i d_i dbar_i phi`.
pub fn euclidean_laplacian(phi: &Jet) -> Result<Jet> {
    require_second_order(phi)?;
    let mut acc = Jet::zero(phi.dim(), phi.order())?;
    for i in 0..phi.dim() {
        acc = acc.add(&phi.diff_mixed(i, i)?)?;
    }
    Ok(acc)
}

/// `Delta phi = sum_{i,j} g^{i jbar} d_j dbar_i phi` with `g^{i jbar} = g_inv[i][j]`.
pub fn kahler_laplacian(m: &MetricJet, phi: &Jet) -> Result<Jet> {
    if phi.dim() != m.dim() {
        return Err(Error::DimensionMismatch { left: m.dim(), right: phi.dim() });
    }
    require_second_order(phi)?;
    let mut acc: Option<Jet> = None;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let second = phi.diff_mixed(j, i)?;
            if second.is_zero() && second.is_exact() {
                continue;
            }
            let term = m.g_inv().get(i, j).mul(&second)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
    }
    match acc {
        Some(a) => Ok(a),
        None => Ok(Jet::zero(phi.dim(), phi.order())?.truncate(m.valid_degree().min(phi.valid_degree() - 2))),
    }
}

fn require_second_order(phi: &Jet) -> Result<()> {
    if phi.valid_degree() < 2 {
        return Err(Error::InsufficientOrder { needed: phi.order() + 2 - phi.valid_degree().max(0) as u32 });
    }
    Ok(())
}

/// Which Laplacian to iterate.
#[derive(Clone, Copy, Debug)]
pub enum Operator<'a> {
    Kahler(&'a MetricJet),
    Euclidean,
}

/// `operator^k phi (0)`, exact.
///
/// Before the `j`-th application only the part of degree `<= 2(k - j + 1)`
/// can still reach the origin, so everything above it is dropped.
pub fn power_at_origin(op: Operator<'_>, phi: &Jet, k: u32) -> Result<Rational> {
    let needed = LaplacianBudget::required_order(k);
    if phi.valid_degree() < 2 * k as i32 {
        return Err(Error::InsufficientOrder { needed });
    }
    if let Operator::Kahler(m) = op {
        if m.dim() != phi.dim() {
            return Err(Error::DimensionMismatch { left: m.dim(), right: phi.dim() });
        }
        if k > 0 && m.valid_degree() < 2 * k as i32 - 2 {
            return Err(Error::InsufficientOrder { needed });
        }
    }
    let mut current = phi.clone();
    for j in 1..=k {
        current = current.truncate(2 * (k - j + 1) as i32);
        current = match op {
            Operator::Euclidean => euclidean_laplacian(&current)?,
            Operator::Kahler(m) => kahler_laplacian(&m.truncated(2 * (k - j) as i32)?, &current)?,
        };
    }
    current.eval0()
}

/// `Delta_c^j (z^alpha zbar^beta)(0)`: `j! prod alpha_i!` when `alpha = beta`
/// and `|alpha| = j`, zero otherwise.
pub fn euclidean_moment(hol: &[u32], anti: &[u32], j: u32) -> Rational {
    if hol != anti || hol.iter().sum::<u32>() != j {
        return Rational::zero();
    }
    let fact = |m: u32| (1..=m as i64).fold(Rational::one(), |acc, x| acc * int(x));
    hol.iter().fold(fact(j), |acc, &a| acc * fact(a))
}

/// Memoized linear functionals `psi -> Delta^j psi (0)` on monomials.
///
/// `Delta^j mu (0) = sum_nu (Delta mu)_nu Delta^{j-1} nu (0)` over the
/// monomials `nu` of `Delta mu` of degree `<= 2j - 2`; values are cached per
/// `(j, mu)`, so evaluating a large family shares the lower powers.
pub struct PowerFunctional {
    n: usize,
    k_max: u32,
    /// `g_inv[i][l]` as `(exponents, degree, coefficient)` within validity.
    inverse_terms: Vec<Vec<(Vec<u32>, u32, Rational)>>,
    cache: HashMap<(u32, Vec<u32>), Rational>,
}

impl PowerFunctional {
    pub fn new(m: &MetricJet, k_max: u32) -> Result<Self> {
        if k_max > 0 && m.valid_degree() < 2 * k_max as i32 - 2 {
            return Err(Error::InsufficientOrder { needed: LaplacianBudget::required_order(k_max) });
        }
        let n = m.dim();
        let mut inverse_terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for l in 0..n {
                let terms = m
                    .g_inv()
                    .get(i, l)
                    .valid_terms()
                    .into_iter()
                    .map(|(index, c)| {
                        let degree = index.degree();
                        let mut e = index.hol().to_vec();
                        e.extend_from_slice(index.anti());
                        (e, degree, c)
                    })
                    .collect();
                inverse_terms.push(terms);
            }
        }
        Ok(PowerFunctional { n, k_max, inverse_terms, cache: HashMap::new() })
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// `Delta^j phi (0)`.
    pub fn value(&mut self, phi: &Jet, j: u32) -> Result<Rational> {
        if j > self.k_max {
            return Err(Error::InsufficientOrder { needed: LaplacianBudget::required_order(j) });
        }
        if phi.dim() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: phi.dim() });
        }
        if phi.valid_degree() < 2 * j as i32 {
            return Err(Error::InsufficientOrder { needed: LaplacianBudget::required_order(j) });
        }
        let mut acc = Rational::zero();
        for (index, c) in phi.terms() {
            if index.degree() > 2 * j {
                continue;
            }
            let mut e = index.hol().to_vec();
            e.extend_from_slice(index.anti());
            acc += c * self.monomial(j, e);
        }
        Ok(acc)
    }

    fn monomial(&mut self, j: u32, e: Vec<u32>) -> Rational {
        let degree: u32 = e.iter().sum();
        if j == 0 {
            return if degree == 0 { Rational::one() } else { Rational::zero() };
        }
        if degree > 2 * j || degree < 2 {
            return Rational::zero();
        }
        if let Some(v) = self.cache.get(&(j, e.clone())) {
            return v.clone();
        }
        let n = self.n;
        let budget = 2 * (j - 1) + 2 - degree;
        let mut acc = Rational::zero();
        for i in 0..n {
            if e[n + i] == 0 {
                continue;
            }
            for l in 0..n {
                if e[l] == 0 {
                    continue;
                }
                let factor = int(i64::from(e[l]) * i64::from(e[n + i]));
                let mut base = e.clone();
                base[l] -= 1;
                base[n + i] -= 1;
                let terms: Vec<(Vec<u32>, Rational)> = self.inverse_terms[i * n + l]
                    .iter()
                    .filter(|(_, d, _)| *d <= budget)
                    .map(|(nu, _, c)| (nu.iter().zip(&base).map(|(a, b)| a + b).collect(), c.clone()))
                    .collect();
                for (next, c) in terms {
                    let v = self.monomial(j - 1, next);
                    if !v.is_zero() {
                        acc += &factor * c * v;
                    }
                }
            }
        }
        self.cache.insert((j, e), acc.clone());
        acc
    }
}

/// Both sides of `Delta^2 phi(0) = (Delta_c^2 + lambda Delta_c) phi(0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplQuad {
    pub lambda: Rational,
    pub direct: Rational,
    pub expanded: Rational,
}

impl LaplQuad {
    pub fn pass(&self) -> bool {
        self.direct == self.expanded
    }
}

fn einstein_lambda(m: &MetricJet) -> Result<Rational> {
    let e = m.einstein()?;
    if !e.is_einstein {
        return Err(Error::NotEinstein);
    }
    let check = assert_normal_coordinates(m);
    if !check.ok {
        return Err(Error::NotNormal(check.diagnostics.join("; ")));
    }
    Ok(e.ratio)
}

pub fn laplquad_check(m: &MetricJet, phi: &Jet) -> Result<LaplQuad> {
    let lambda = einstein_lambda(m)?;
    let direct = power_at_origin(Operator::Kahler(m), phi, 2)?;
    let c2 = power_at_origin(Operator::Euclidean, phi, 2)?;
    let c1 = power_at_origin(Operator::Euclidean, phi, 1)?;
    let expanded = c2 + &lambda * c1;
    Ok(LaplQuad { lambda, direct, expanded })
}

/// Term-by-term value of the expanded third-power formula
///
/// `Delta^3 phi(0) = (Delta_c^3 + 3 lambda Delta_c^2 + lambda^2 Delta_c) phi(0)
///   + 2 sum d_l dbar_h g^{i jbar} d_j d_h dbar_l dbar_i phi
///   + sum d_l d_h g^{i jbar} d_j dbar_h dbar_l dbar_i phi
///   + sum dbar_l dbar_h g^{i jbar} d_j d_h d_l dbar_i phi
///   + sum d_l d_h dbar_l dbar_h g^{i jbar} d_j dbar_i phi`, all at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplCube {
    pub lambda: Rational,
    pub euclidean: Rational,
    pub mixed: Rational,
    pub holomorphic: Rational,
    pub antiholomorphic: Rational,
    pub fourth_order: Rational,
}

impl LaplCube {
    pub fn total(&self) -> Rational {
        &self.euclidean + &self.mixed + &self.holomorphic + &self.antiholomorphic + &self.fourth_order
    }
}

pub fn laplcube_rhs(m: &MetricJet, phi: &Jet) -> Result<LaplCube> {
    let lambda = einstein_lambda(m)?;
    if m.valid_degree() < 4 {
        return Err(Error::InsufficientOrder { needed: 8 });
    }
    if phi.valid_degree() < 6 {
        return Err(Error::InsufficientOrder { needed: 8 });
    }
    let n = m.dim();
    let c = |k| power_at_origin(Operator::Euclidean, phi, k);
    let euclidean = c(3)? + int(3) * &lambda * c(2)? + &lambda * &lambda * c(1)?;

    let mut mixed = Rational::zero();
    let mut holomorphic = Rational::zero();
    let mut antiholomorphic = Rational::zero();
    let mut fourth_order = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            let g = m.g_inv().get(i, j);
            let phi_ji = derivative_at_origin(phi, &[j], &[i]);
            for l in 0..n {
                for h in 0..n {
                    let g_lhbar = derivative_at_origin(g, &[l], &[h]);
                    if !g_lhbar.is_zero() {
                        mixed += int(2) * g_lhbar * derivative_at_origin(phi, &[j, h], &[l, i]);
                    }
                    let g_lh = derivative_at_origin(g, &[l, h], &[]);
                    if !g_lh.is_zero() {
                        holomorphic += g_lh * derivative_at_origin(phi, &[j], &[h, l, i]);
                    }
                    let g_lbar_hbar = derivative_at_origin(g, &[], &[l, h]);
                    if !g_lbar_hbar.is_zero() {
                        antiholomorphic += g_lbar_hbar * derivative_at_origin(phi, &[j, h, l], &[i]);
                    }
                    let g4 = derivative_at_origin(g, &[l, h], &[l, h]);
                    if !g4.is_zero() {
                        fourth_order += g4 * &phi_ji;
                    }
                }
            }
        }
    }
    Ok(LaplCube { lambda, euclidean, mixed, holomorphic, antiholomorphic, fourth_order })
}

/// `d_{hol[0]} d_{hol[1]} .. dbar_{anti[0]} .. f (0)`: the matching
/// coefficient times `alpha! beta!`. The caller guarantees validity.
fn derivative_at_origin(f: &Jet, hol: &[usize], anti: &[usize]) -> Rational {
    let n = f.dim();
    let (mut a, mut b) = (vec![0u32; n], vec![0u32; n]);
    for &x in hol {
        a[x] += 1;
    }
    for &x in anti {
        b[x] += 1;
    }
    let fact = |m: u32| (1..=i64::from(m)).product::<i64>();
    let weight: i64 = a.iter().chain(&b).map(|&e| fact(e)).product();
    let index = BiIndex::new(a, b).expect("same length");
    f.coeff(&index) * int(weight)
}
