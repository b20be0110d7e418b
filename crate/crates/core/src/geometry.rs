//! Kähler metric, inverse metric, Ricci form and Einstein data of a potential
//! jet, plus normal-coordinate checks and pullbacks.
//!
//! Index convention: `g[i][j]` is `d^2 Phi / dz_i dzbar_j`, and `g_inv` is the
//! plain matrix inverse, so `sum_j g[i][j] g_inv[j][k] = delta_ik`. With this
//! storage the Laplacian contraction `sum_{i,j} g_inv[i][j] d_j dbar_i phi` is
//! the trace of `g_inv` times the complex Hessian and is coordinate invariant.

use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{JetMatrix, RatMatrix};
use crate::ratjet::{fmt_rational, BiIndex, Jet, Rational};

/// `lambda` with `Ric = lambda g`, when it exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EinsteinData {
    pub is_einstein: bool,
    /// `Ric_11(0) / g_11(0)`; the Einstein constant when `is_einstein`.
    pub ratio: Rational,
    /// Degree through which `Ric - lambda g` was checked.
    pub checked_degree: i32,
}

impl EinsteinData {
    pub fn lambda(&self) -> Option<&Rational> {
        self.is_einstein.then_some(&self.ratio)
    }
}

/// Metric jet `g_{i jbar}` of a potential together with its series inverse.
#[derive(Debug)]
pub struct MetricJet {
    dim: usize,
    g: JetMatrix,
    g_inv: JetMatrix,
    valid: i32,
    einstein: OnceLock<Result<EinsteinData>>,
}

impl Clone for MetricJet {
    fn clone(&self) -> Self {
        let einstein = OnceLock::new();
        if let Some(e) = self.einstein.get() {
            let _ = einstein.set(e.clone());
        }
        MetricJet { dim: self.dim, g: self.g.clone(), g_inv: self.g_inv.clone(), valid: self.valid, einstein }
    }
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self) -> &JetMatrix {
        &self.g
    }

    pub fn g_inv(&self) -> &JetMatrix {
        &self.g_inv
    }

    pub fn valid_degree(&self) -> i32 {
        self.valid
    }

    pub fn order(&self) -> u32 {
        self.g.get(0, 0).order()
    }

    /// Einstein data, computed once and cached.
    pub fn einstein(&self) -> Result<EinsteinData> {
        self.einstein.get_or_init(|| einstein_data(self)).clone()
    }

    /// Same metric with every jet truncated to degree `d`.
    pub fn truncated(&self, d: i32) -> Result<MetricJet> {
        Ok(MetricJet {
            dim: self.dim,
            g: self.g.map(|e| Ok(e.truncate(d)))?,
            g_inv: self.g_inv.map(|e| Ok(e.truncate(d)))?,
            valid: self.valid.min(d),
            einstein: OnceLock::new(),
        })
    }
}

/// `g_{i jbar} = d_i dbar_j Phi` and its series inverse.
pub fn metric_from_potential(potential: &Jet) -> Result<MetricJet> {
    let n = potential.dim();
    if potential.valid_degree() < 2 {
        return Err(Error::InsufficientOrder { needed: 2 });
    }
    let g = JetMatrix::from_fn(n, |i, j| potential.diff_mixed(i, j))?;
    let g0 = g.at_origin();
    let minors = g0.leading_minors();
    if g0.determinant().is_zero() {
        return Err(Error::DegenerateMetric);
    }
    if minors.iter().any(|m| !m.is_positive()) {
        return Err(Error::NotPositiveDefinite);
    }
    let g_inv = g.inverse()?;
    let valid = g.valid_degree();
    Ok(MetricJet { dim: n, g, g_inv, valid, einstein: OnceLock::new() })
}

/// `Ric_{i jbar} = -d_i dbar_j log det g`.
pub fn ricci(m: &MetricJet) -> Result<JetMatrix> {
    if m.valid < 2 {
        return Err(Error::InsufficientOrder { needed: m.order() + 2 - m.valid.max(0) as u32 });
    }
    let det = m.g.determinant()?;
    let c0 = det.constant_term();
    let log_det = det.scale(&c0.recip()).log1()?;
    JetMatrix::from_fn(m.dim, |i, j| Ok(log_det.diff_mixed(i, j)?.neg()))
}

/// Ricci form through the curvature expansion
/// `g^{k hbar} (-d_k dbar_h g_{i jbar} + g^{p qbar} d_k g_{i qbar} dbar_h g_{p jbar})`,
/// contracted so that the result is coordinate invariant: the weight of the
/// `(k, h)` term is `g_inv[h][k]`.
pub fn ricci_from_curvature_expansion(m: &MetricJet) -> Result<JetMatrix> {
    if m.valid < 2 {
        return Err(Error::InsufficientOrder { needed: m.order() + 2 - m.valid.max(0) as u32 });
    }
    let n = m.dim;
    let dk: Vec<JetMatrix> = (0..n).map(|k| m.g.map(|e| e.diff_hol(k))).collect::<Result<_>>()?;
    let dh: Vec<JetMatrix> = (0..n).map(|h| m.g.map(|e| e.diff_anti(h))).collect::<Result<_>>()?;
    let parts: Vec<JetMatrix> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<JetMatrix> {
            // sum_h g_inv[h][k] (-d_k dbar_h g + d_k g . g_inv . dbar_h g)
            let mut acc: Option<JetMatrix> = None;
            let mut weighted_dh: Option<JetMatrix> = None;
            for (h, dh_h) in dh.iter().enumerate() {
                let w = m.g_inv.get(h, k);
                let second = dk[k].map(|e| e.diff_anti(h))?;
                let term = second.scale_by(w)?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term)?,
                });
                let wd = dh_h.scale_by(w)?;
                weighted_dh = Some(match weighted_dh {
                    None => wd,
                    Some(a) => a.add(&wd)?,
                });
            }
            let quad = dk[k].mul(&m.g_inv.mul(&weighted_dh.expect("n >= 1"))?)?;
            quad.sub(&acc.expect("n >= 1"))
        })
        .collect::<Result<_>>()?;
    let mut total = parts[0].clone();
    for p in &parts[1..] {
        total = total.add(p)?;
    }
    Ok(total)
}

/// `lambda = Ric_11(0) / g_11(0)` and whether `Ric - lambda g` vanishes.
pub fn einstein_data(m: &MetricJet) -> Result<EinsteinData> {
    let ric = ricci(m)?;
    let ratio = ric.get(0, 0).constant_term() / m.g.get(0, 0).constant_term();
    let mut is_einstein = true;
    for i in 0..m.dim {
        for j in 0..m.dim {
            let diff = ric.get(i, j).sub(&m.g.get(i, j).scale(&ratio))?;
            if !diff.is_zero() {
                is_einstein = false;
            }
        }
    }
    Ok(EinsteinData { is_einstein, ratio, checked_degree: ric.valid_degree() })
}

/// Result of [`assert_normal_coordinates`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalCheck {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

/// `g(0) = I` and every first-order coefficient of every `g_{i jbar}` vanishes.
pub fn assert_normal_coordinates(m: &MetricJet) -> NormalCheck {
    let mut diagnostics = Vec::new();
    if m.valid < 1 {
        diagnostics.push("metric validity below degree 1".to_string());
    }
    let g0 = m.g.at_origin();
    if !g0.is_identity() {
        diagnostics.push("g(0) is not the identity".to_string());
    }
    for i in 0..m.dim {
        for j in 0..m.dim {
            for (index, c) in m.g.get(i, j).homogeneous_part(1).terms() {
                diagnostics.push(format!(
                    "g[{}][{}] has first-order coefficient {} at {:?}|{:?}",
                    i + 1,
                    j + 1,
                    fmt_rational(&c),
                    index.hol(),
                    index.anti()
                ));
            }
        }
    }
    NormalCheck { ok: diagnostics.is_empty(), diagnostics }
}

/// Pulls `potential` back along the quadratic change
/// `z_j = w_j + 1/2 A^j_{kl} w_k w_l`, `A^j_{kl} = -d_k g_{l jbar}(0)`,
/// which kills the first derivatives of the metric at the origin.
pub fn to_normal_coordinates(potential: &Jet) -> Result<Jet> {
    let (n, order) = (potential.dim(), potential.order());
    if potential.valid_degree() < 3 {
        return Err(Error::InsufficientOrder { needed: 3 });
    }
    if let Some(index) = potential.first_unreal_term() {
        return Err(Error::NotReal { monomial: format!("{:?}|{:?}", index.hol(), index.anti()) });
    }
    let g = JetMatrix::from_fn(n, |i, j| potential.diff_mixed(i, j))?;
    if !g.at_origin().is_identity() {
        return Err(Error::IrrationalNormalization);
    }
    let mut images = Vec::with_capacity(n);
    for j in 0..n {
        let mut lin_hol = vec![0; n];
        lin_hol[j] = 1;
        let mut terms = vec![(BiIndex::new(lin_hol, vec![0; n])?, Rational::from_integer(1.into()))];
        for k in 0..n {
            for l in 0..n {
                let mut unit = vec![0; n];
                unit[k] += 1;
                let d_k_g = g.get(l, j).coeff(&BiIndex::new(unit, vec![0; n])?);
                if d_k_g.is_zero() {
                    continue;
                }
                let mut quad = vec![0; n];
                quad[k] += 1;
                quad[l] += 1;
                // 1/2 A^j_{kl} with A = -d_k g_{l jbar}(0)
                let c = -d_k_g / Rational::from_integer(2.into());
                terms.push((BiIndex::new(quad, vec![0; n])?, c));
            }
        }
        images.push(Jet::poly(n, order, terms)?);
    }
    pullback(potential, &images)
}

/// `S^{ij} = sum_h d_h dbar_h g^{i jbar}(0)` compared against `lambda I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumDer2 {
    pub matrix: RatMatrix,
    pub lambda: Option<Rational>,
    pub pass: bool,
}

pub fn sumder2_check(m: &MetricJet) -> Result<SumDer2> {
    if m.valid < 2 {
        return Err(Error::InsufficientOrder { needed: 4 });
    }
    let n = m.dim;
    let mut s = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let entry = m.g_inv.get(i, j);
            let mut acc = Rational::zero();
            for h in 0..n {
                let mut hol = vec![0; n];
                let mut anti = vec![0; n];
                hol[h] = 1;
                anti[h] = 1;
                acc += entry.coeff(&BiIndex::new(hol, anti)?);
            }
            s[(i, j)] = acc;
        }
    }
    let einstein = m.einstein()?;
    let lambda = einstein.lambda().cloned();
    let pass = match &lambda {
        Some(l) => s == RatMatrix::scaled_identity(n, l),
        None => false,
    };
    Ok(SumDer2 { matrix: s, lambda, pass })
}

/// Substitutes a holomorphic polynomial map (one component per target
/// variable, no constant terms) into a potential.
pub fn pullback(potential: &Jet, embedding: &[Jet]) -> Result<Jet> {
    potential.compose(embedding)
}
