//! Truncated multivariate power series ("jets") in `n` holomorphic and `n`
//! antiholomorphic variables with exact rational coefficients.
//!
//! A [`Jet`] lives in a fixed space `(dim, order)`: every stored monomial has
//! total degree at most `order`. Independently of the storage bound, each jet
//! carries a *validity degree* `V`: coefficients of degree `<= V` are exact,
//! anything above is unreliable and is never relied upon. Derivatives lower
//! the validity by one, products take the minimum of their inputs, and series
//! operations (`log1`, `inv1`, `exp`, substitution) preserve it. A validity of
//! `-1` means the jet carries no information at all.
//!
//! Variable indices are 0-based throughout the API.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Shorthand constructor for small rationals.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Integer as a rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Lossless `p/q` rendering (the denominator is always printed).
pub fn fmt_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => text.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Exponent pair `(alpha, beta)` of the monomial `z^alpha zbar^beta`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiIndex {
    hol: Vec<u32>,
    anti: Vec<u32>,
}

impl BiIndex {
    pub fn new(hol: Vec<u32>, anti: Vec<u32>) -> Result<Self> {
        if hol.len() != anti.len() {
            return Err(Error::BadExponentLength { got: anti.len(), expected: hol.len() });
        }
        Ok(BiIndex { hol, anti })
    }

    pub fn zero(dim: usize) -> Self {
        BiIndex { hol: vec![0; dim], anti: vec![0; dim] }
    }

    pub fn hol(&self) -> &[u32] {
        &self.hol
    }

    pub fn anti(&self) -> &[u32] {
        &self.anti
    }

    pub fn dim(&self) -> usize {
        self.hol.len()
    }

    pub fn hol_degree(&self) -> u32 {
        self.hol.iter().sum()
    }

    pub fn anti_degree(&self) -> u32 {
        self.anti.iter().sum()
    }

    pub fn degree(&self) -> u32 {
        self.hol_degree() + self.anti_degree()
    }

    pub fn bidegree(&self) -> (u32, u32) {
        (self.hol_degree(), self.anti_degree())
    }

    /// Same holomorphic and antiholomorphic degree.
    pub fn is_balanced(&self) -> bool {
        self.hol_degree() == self.anti_degree()
    }

    /// Variables with a nonzero exponent on either side.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.hol[i] > 0 || self.anti[i] > 0).collect()
    }

    /// `(beta, alpha)`: the exponent of the conjugate monomial.
    pub fn conjugate(&self) -> Self {
        BiIndex { hol: self.anti.clone(), anti: self.hol.clone() }
    }

    /// `z1^2 zb1^2`-style rendering with 1-based variable names.
    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.hol.iter().enumerate() {
            push_power(&mut parts, &names[i], e);
        }
        for (i, &e) in self.anti.iter().enumerate() {
            push_power(&mut parts, &format!("conj({})", names[i]), e);
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

fn push_power(parts: &mut Vec<String>, name: &str, e: u32) {
    match e {
        0 => {}
        1 => parts.push(name.to_string()),
        _ => parts.push(format!("{name}^{e}")),
    }
}

/// Default variable names `z1, …, zn`.
pub fn default_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("z{i}")).collect()
}

type Key = u128;

/// Bit-packed monomial layout: slot `s < dim` holds the holomorphic exponent
/// of variable `s`, slot `dim + s` the antiholomorphic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Packing {
    dim: usize,
    bits: u32,
}

impl Packing {
    fn new(dim: usize, order: u32) -> Result<Self> {
        let bits = (32 - order.leading_zeros()).max(1);
        if (2 * dim) as u64 * bits as u64 > 128 {
            return Err(Error::SpaceTooLarge { dim, order });
        }
        Ok(Packing { dim, bits })
    }

    fn mask(&self) -> Key {
        (1u128 << self.bits) - 1
    }

    fn unit(&self, slot: usize) -> Key {
        1u128 << (slot as u32 * self.bits)
    }

    fn exp(&self, key: Key, slot: usize) -> u32 {
        ((key >> (slot as u32 * self.bits)) & self.mask()) as u32
    }

    fn pack(&self, index: &BiIndex) -> Key {
        let mut key = 0;
        for (slot, &e) in index.hol.iter().chain(index.anti.iter()).enumerate() {
            key |= (e as Key) << (slot as u32 * self.bits);
        }
        key
    }

    fn unpack(&self, key: Key) -> BiIndex {
        BiIndex {
            hol: (0..self.dim).map(|s| self.exp(key, s)).collect(),
            anti: (0..self.dim).map(|s| self.exp(key, self.dim + s)).collect(),
        }
    }

    fn anti_degree(&self, key: Key) -> u32 {
        (self.dim..2 * self.dim).map(|s| self.exp(key, s)).sum()
    }

    fn swap_sides(&self, key: Key) -> Key {
        let half = self.dim as u32 * self.bits;
        if half == 0 {
            return key;
        }
        let low = key & ((1u128 << half) - 1);
        (key >> half) | (low << half)
    }
}

/// Truncated power series in `z_1..z_n, zbar_1..zbar_n` over the rationals.
#[derive(Clone, Debug)]
pub struct Jet {
    dim: usize,
    order: u32,
    valid: i32,
    exact: bool,
    pack: Packing,
    /// `terms[d]` holds the homogeneous part of total degree `d`.
    terms: Vec<BTreeMap<Key, Rational>>,
}

/// Two jets agree when their coefficients coincide up to the smaller of the
/// two validity degrees.
impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.agrees_with(other)
    }
}

impl Jet {
    /// The zero jet (exact).
    pub fn zero(dim: usize, order: u32) -> Result<Self> {
        let pack = Packing::new(dim, order)?;
        Ok(Jet {
            dim,
            order,
            valid: order as i32,
            exact: true,
            pack,
            terms: vec![BTreeMap::new(); order as usize + 1],
        })
    }

    pub fn constant(dim: usize, order: u32, value: Rational) -> Result<Self> {
        let mut jet = Jet::zero(dim, order)?;
        if !value.is_zero() {
            jet.terms[0].insert(0, value);
        }
        Ok(jet)
    }

    pub fn one(dim: usize, order: u32) -> Result<Self> {
        Jet::constant(dim, order, Rational::one())
    }

    /// Exact polynomial jet from explicit terms; repeated indices accumulate.
    pub fn poly<I>(dim: usize, order: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BiIndex, Rational)>,
    {
        let mut jet = Jet::zero(dim, order)?;
        for (index, coeff) in terms {
            if index.dim() != dim {
                return Err(Error::BadExponentLength { got: index.dim(), expected: dim });
            }
            let degree = index.degree();
            if degree > order {
                return Err(Error::DegreeOverflow { degree, order });
            }
            let key = jet.pack.pack(&index);
            *jet.terms[degree as usize].entry(key).or_insert_with(Rational::zero) += coeff;
        }
        jet.prune();
        Ok(jet)
    }

    pub fn monomial(dim: usize, order: u32, index: BiIndex, coeff: Rational) -> Result<Self> {
        Jet::poly(dim, order, [(index, coeff)])
    }

    /// The coordinate function `z_i`.
    pub fn hol_var(dim: usize, order: u32, i: usize) -> Result<Self> {
        check_index(i, dim)?;
        let mut index = BiIndex::zero(dim);
        index.hol[i] = 1;
        Jet::monomial(dim, order, index, Rational::one())
    }

    /// The coordinate function `zbar_i`.
    pub fn anti_var(dim: usize, order: u32, i: usize) -> Result<Self> {
        check_index(i, dim)?;
        let mut index = BiIndex::zero(dim);
        index.anti[i] = 1;
        Jet::monomial(dim, order, index, Rational::one())
    }

    /// `|z_i|^2`.
    pub fn abs_sq(dim: usize, order: u32, i: usize) -> Result<Self> {
        check_index(i, dim)?;
        let mut index = BiIndex::zero(dim);
        index.hol[i] = 1;
        index.anti[i] = 1;
        Jet::monomial(dim, order, index, Rational::one())
    }

    /// `|z|^2 = sum_i |z_i|^2`.
    pub fn norm_sq(dim: usize, order: u32) -> Result<Self> {
        let terms = (0..dim).map(|i| {
            let mut index = BiIndex::zero(dim);
            index.hol[i] = 1;
            index.anti[i] = 1;
            (index, Rational::one())
        });
        Jet::poly(dim, order, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Highest total degree whose coefficients are exact (`-1` when exhausted).
    pub fn valid_degree(&self) -> i32 {
        self.valid
    }

    /// Whether the jet is a polynomial known exactly (no truncation loss).
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn coeff(&self, index: &BiIndex) -> Rational {
        if index.dim() != self.dim {
            return Rational::zero();
        }
        let degree = index.degree();
        if degree > self.order {
            return Rational::zero();
        }
        self.terms[degree as usize]
            .get(&self.pack.pack(index))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms[0].get(&0).cloned().unwrap_or_else(Rational::zero)
    }

    /// All stored nonzero terms sorted by `(degree, index)`.
    pub fn terms(&self) -> Vec<(BiIndex, Rational)> {
        let mut out: Vec<(BiIndex, Rational)> = self
            .terms
            .iter()
            .flat_map(|bucket| bucket.iter().map(|(&k, c)| (self.pack.unpack(k), c.clone())))
            .collect();
        out.sort_by(|a, b| (a.0.degree(), &a.0).cmp(&(b.0.degree(), &b.0)));
        out
    }

    /// Nonzero terms within the validity degree.
    pub fn valid_terms(&self) -> Vec<(BiIndex, Rational)> {
        let valid = self.valid;
        self.terms().into_iter().filter(|(i, _)| (i.degree() as i32) <= valid).collect()
    }

    pub fn term_count(&self) -> usize {
        self.terms.iter().map(BTreeMap::len).sum()
    }

    /// Highest degree carrying a stored nonzero coefficient.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.iter().rposition(|b| !b.is_empty()).map(|d| d as u32)
    }

    /// True when every coefficient up to the validity degree vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .take((self.valid + 1).max(0) as usize)
            .all(BTreeMap::is_empty)
    }

    /// Coefficient-wise equality up to the smaller validity degree.
    pub fn agrees_with(&self, other: &Jet) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let upto = self.valid.min(other.valid).min(self.order as i32).min(other.order as i32);
        (0..=upto).all(|d| self.terms[d as usize] == other.terms[d as usize])
    }

    fn check_same_space(&self, other: &Jet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    fn prune(&mut self) {
        for bucket in &mut self.terms {
            bucket.retain(|_, c| !c.is_zero());
        }
    }

    fn empty_like(&self, valid: i32, exact: bool) -> Jet {
        Jet {
            dim: self.dim,
            order: self.order,
            valid,
            exact,
            pack: self.pack,
            terms: vec![BTreeMap::new(); self.order as usize + 1],
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        out.valid = self.valid.min(other.valid);
        out.exact = self.exact && other.exact;
        for (d, bucket) in other.terms.iter().enumerate() {
            for (&k, c) in bucket {
                *out.terms[d].entry(k).or_insert_with(Rational::zero) += c;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for bucket in &mut out.terms {
            for c in bucket.values_mut() {
                *c = -c.clone();
            }
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> Jet {
        if factor.is_zero() {
            return self.empty_like(self.valid, self.exact);
        }
        let mut out = self.clone();
        for bucket in &mut out.terms {
            for c in bucket.values_mut() {
                *c *= factor;
            }
        }
        out
    }

    /// Truncated product. Only degrees up to the result's validity are formed.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_same_space(other)?;
        let valid = self.valid.min(other.valid);
        let exact = self.exact
            && other.exact
            && match (self.max_degree(), other.max_degree()) {
                (Some(a), Some(b)) => a + b <= self.order,
                _ => true,
            };
        Ok(self.mul_upto(other, valid, exact))
    }

    /// Product restricted to degrees `<= limit`, tagged with the given validity.
    fn mul_upto(&self, other: &Jet, limit: i32, exact: bool) -> Jet {
        let mut out = self.empty_like(limit, exact);
        if limit < 0 {
            return out;
        }
        let limit = (limit as usize).min(self.order as usize);
        for (da, ba) in self.terms.iter().enumerate().take(limit + 1) {
            if ba.is_empty() {
                continue;
            }
            for (db, bb) in other.terms.iter().enumerate().take(limit - da + 1) {
                if bb.is_empty() {
                    continue;
                }
                let target = &mut out.terms[da + db];
                for (&ka, ca) in ba {
                    for (&kb, cb) in bb {
                        let prod = ca * cb;
                        match target.get_mut(&(ka + kb)) {
                            Some(acc) => *acc += prod,
                            None => {
                                target.insert(ka + kb, prod);
                            }
                        }
                    }
                }
            }
        }
        out.prune();
        out
    }

    /// Drops every term above degree `d` and caps the validity at `d`.
    pub fn truncate(&self, d: i32) -> Jet {
        if d >= self.valid {
            return self.clone();
        }
        let mut out = self.clone();
        out.valid = d;
        out.exact = false;
        for (deg, bucket) in out.terms.iter_mut().enumerate() {
            if deg as i32 > d {
                bucket.clear();
            }
        }
        out
    }

    /// Overrides the validity degree (internal: used by iterations whose
    /// accuracy is tracked outside the generic bookkeeping).
    pub(crate) fn with_valid(mut self, valid: i32) -> Jet {
        self.valid = valid.min(self.order as i32);
        self.exact = false;
        self
    }

    /// Product of degrees up to `limit`, ignoring the inputs' validity.
    pub(crate) fn mul_raw(&self, other: &Jet, limit: i32) -> Result<Jet> {
        self.check_same_space(other)?;
        Ok(self.mul_upto(other, limit, false))
    }

    fn diff_slot(&self, slot: usize) -> Jet {
        let valid = if self.exact { self.valid } else { self.valid - 1 };
        let mut out = self.empty_like(valid, self.exact);
        let unit = self.pack.unit(slot);
        for (d, bucket) in self.terms.iter().enumerate().skip(1) {
            for (&k, c) in bucket {
                let e = self.pack.exp(k, slot);
                if e > 0 {
                    out.terms[d - 1].insert(k - unit, c * Rational::from_integer(BigInt::from(e)));
                }
            }
        }
        out
    }

    /// `d/dz_i`.
    pub fn diff_hol(&self, i: usize) -> Result<Jet> {
        check_index(i, self.dim)?;
        Ok(self.diff_slot(i))
    }

    /// `d/dzbar_i`.
    pub fn diff_anti(&self, i: usize) -> Result<Jet> {
        check_index(i, self.dim)?;
        Ok(self.diff_slot(self.dim + i))
    }

    /// Mixed derivative `d^2/dz_i dzbar_j`.
    pub fn diff_mixed(&self, i: usize, j: usize) -> Result<Jet> {
        self.diff_hol(i)?.diff_anti(j)
    }

    /// Value at the origin.
    pub fn eval0(&self) -> Result<Rational> {
        if self.valid < 0 {
            return Err(Error::InsufficientOrder { needed: self.order + 1 });
        }
        Ok(self.constant_term())
    }

    fn require_valid(&self) -> Result<()> {
        if self.valid < 0 {
            Err(Error::InsufficientOrder { needed: self.order + 1 })
        } else {
            Ok(())
        }
    }

    /// Evaluates `sum_m coeffs[m] u^m` by Horner's rule, `u` without constant term.
    fn horner(u: &Jet, coeffs: &[Rational], valid: i32) -> Jet {
        let mut acc = Jet::constant(u.dim, u.order, Rational::zero()).expect("same space");
        for c in coeffs.iter().rev() {
            acc = acc.mul_upto(u, valid, false);
            if !c.is_zero() {
                *acc.terms[0].entry(0).or_insert_with(Rational::zero) += c;
                acc.terms[0].retain(|_, c| !c.is_zero());
            }
        }
        acc.valid = valid;
        acc.exact = false;
        acc
    }

    /// `log(a)` for `a` with constant term 1.
    pub fn log1(&self) -> Result<Jet> {
        self.require_valid()?;
        let c0 = self.constant_term();
        if !c0.is_one() {
            return Err(Error::ConstantTermNotOne { found: fmt_rational(&c0) });
        }
        let mut u = self.clone();
        u.terms[0].clear();
        if u.is_zero() && self.exact {
            return Jet::zero(self.dim, self.order);
        }
        let valid = self.valid;
        let n = valid.max(0) as i64;
        let mut coeffs = vec![Rational::zero()];
        for m in 1..=n {
            let sign = if m % 2 == 1 { 1 } else { -1 };
            coeffs.push(rat(sign, m));
        }
        Ok(Jet::horner(&u, &coeffs, valid))
    }

    /// `exp(a)` for `a` with zero constant term.
    pub fn exp(&self) -> Result<Jet> {
        self.require_valid()?;
        let c0 = self.constant_term();
        if !c0.is_zero() {
            return Err(Error::NonzeroConstantTerm { found: fmt_rational(&c0) });
        }
        let n = self.valid.max(0) as usize;
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut fact = Rational::one();
        for m in 0..=n {
            if m > 0 {
                fact *= int(m as i64);
            }
            coeffs.push(fact.recip());
        }
        Ok(Jet::horner(self, &coeffs, self.valid))
    }

    /// Multiplicative inverse for `a` with nonzero constant term.
    pub fn inv1(&self) -> Result<Jet> {
        self.require_valid()?;
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let c0_inv = c0.recip();
        let mut u = self.scale(&c0_inv);
        u.terms[0].clear();
        if u.term_count() == 0 && self.exact {
            return Jet::constant(self.dim, self.order, c0_inv);
        }
        let n = self.valid.max(0) as i64;
        let coeffs: Vec<Rational> =
            (0..=n).map(|m| if m % 2 == 0 { int(1) } else { int(-1) }).collect();
        Ok(Jet::horner(&u, &coeffs, self.valid).scale(&c0_inv))
    }

    /// Sets every variable outside `keep` to zero and re-indexes the rest in
    /// the order given by `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Result<Jet> {
        for &i in keep {
            check_index(i, self.dim)?;
        }
        let mut out = Jet::zero(keep.len(), self.order)?;
        out.valid = self.valid;
        out.exact = self.exact;
        for (d, bucket) in self.terms.iter().enumerate() {
            for (&k, c) in bucket {
                let index = self.pack.unpack(k);
                let dropped = (0..self.dim)
                    .filter(|i| !keep.contains(i))
                    .any(|i| index.hol[i] > 0 || index.anti[i] > 0);
                if dropped {
                    continue;
                }
                let sub = BiIndex {
                    hol: keep.iter().map(|&i| index.hol[i]).collect(),
                    anti: keep.iter().map(|&i| index.anti[i]).collect(),
                };
                out.terms[d].insert(out.pack.pack(&sub), c.clone());
            }
        }
        Ok(out)
    }

    /// Embeds the jet into `new_dim` variables, variable `i` becoming `i + offset`.
    pub fn extend(&self, new_dim: usize, offset: usize) -> Result<Jet> {
        if offset + self.dim > new_dim {
            return Err(Error::IndexOutOfRange { index: offset + self.dim - 1, dim: new_dim });
        }
        let mut out = Jet::zero(new_dim, self.order)?;
        out.valid = self.valid;
        out.exact = self.exact;
        for (d, bucket) in self.terms.iter().enumerate() {
            for (&k, c) in bucket {
                let index = self.pack.unpack(k);
                let mut big = BiIndex::zero(new_dim);
                big.hol[offset..offset + self.dim].copy_from_slice(&index.hol);
                big.anti[offset..offset + self.dim].copy_from_slice(&index.anti);
                out.terms[d].insert(out.pack.pack(&big), c.clone());
            }
        }
        Ok(out)
    }

    /// The substitution `zbar -> -zbar`: coefficient of `(alpha, beta)` times `(-1)^|beta|`.
    pub fn flip_anti_sign(&self) -> Jet {
        let mut out = self.clone();
        for bucket in &mut out.terms {
            for (&k, c) in bucket.iter_mut() {
                if self.pack.anti_degree(k) % 2 == 1 {
                    *c = -c.clone();
                }
            }
        }
        out
    }

    /// Complex conjugate for real-rational coefficients: swaps `z` and `zbar`.
    pub fn conjugate(&self) -> Jet {
        let mut out = self.empty_like(self.valid, self.exact);
        for (d, bucket) in self.terms.iter().enumerate() {
            for (&k, c) in bucket {
                out.terms[d].insert(self.pack.swap_sides(k), c.clone());
            }
        }
        out
    }

    /// True when the jet is a real-valued function: `c(alpha, beta) = c(beta, alpha)`.
    pub fn is_real(&self) -> bool {
        self.first_unreal_term().is_none()
    }

    pub(crate) fn first_unreal_term(&self) -> Option<BiIndex> {
        let upto = self.valid.max(-1);
        for (d, bucket) in self.terms.iter().enumerate() {
            if d as i32 > upto {
                break;
            }
            for (&k, c) in bucket {
                let partner = bucket.get(&self.pack.swap_sides(k));
                if partner != Some(c) {
                    return Some(self.pack.unpack(k));
                }
            }
        }
        None
    }

    /// True when only holomorphic exponents occur.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.iter().all(|b| b.keys().all(|&k| self.pack.anti_degree(k) == 0))
    }

    /// Composition `self(P(w), conj P(w))` with a holomorphic polynomial map
    /// `z_i = P_i(w)` (one jet per target variable, all in the source space,
    /// none with a constant term).
    pub fn compose(&self, images: &[Jet]) -> Result<Jet> {
        if images.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: images.len() });
        }
        let first = images.first().ok_or_else(|| Error::InvalidArgument("empty map".into()))?;
        let (src_dim, src_order) = (first.dim, first.order);
        for p in images {
            if p.dim != src_dim || p.order != src_order {
                return Err(Error::DimensionMismatch { left: src_dim, right: p.dim });
            }
            if !p.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm { found: fmt_rational(&p.constant_term()) });
            }
            if !p.is_holomorphic() {
                return Err(Error::InvalidArgument("map components must be holomorphic".into()));
            }
        }
        let limit = images
            .iter()
            .map(|p| p.valid)
            .fold(self.valid.min(src_order as i32), i32::min);
        let mut out = Jet::zero(src_dim, src_order)?;
        out.valid = limit;
        out.exact = false;
        if limit < 0 {
            return Ok(out);
        }
        let one = Jet::one(src_dim, src_order)?;
        let conj: Vec<Jet> = images.iter().map(Jet::conjugate).collect();
        // powers[slot][e]
        let max_e = limit as usize;
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(2 * self.dim);
        for p in images.iter().chain(conj.iter()) {
            let mut row = vec![one.clone()];
            for e in 1..=max_e {
                let next = row[e - 1].mul_upto(p, limit, false);
                row.push(next);
            }
            powers.push(row);
        }
        for (d, bucket) in self.terms.iter().enumerate() {
            if d as i32 > limit {
                break;
            }
            for (&k, c) in bucket {
                let mut term = one.scale(c);
                for (slot, row) in powers.iter().enumerate() {
                    let e = self.pack.exp(k, slot) as usize;
                    if e > 0 {
                        term = term.mul_upto(&row[e], limit, false);
                    }
                }
                for (dd, tb) in term.terms.iter().enumerate() {
                    for (&kk, cc) in tb {
                        *out.terms[dd].entry(kk).or_insert_with(Rational::zero) += cc;
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Jet {
        let mut out = self.empty_like(self.valid, self.exact);
        if d <= self.order {
            out.terms[d as usize] = self.terms[d as usize].clone();
        }
        out
    }

    /// Canonical text form: one line `c  a_1 .. a_n|b_1 .. b_n` per term.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        for (index, c) in self.terms() {
            let hol: Vec<String> = index.hol.iter().map(u32::to_string).collect();
            let anti: Vec<String> = index.anti.iter().map(u32::to_string).collect();
            out.push_str(&format!("{}  {}|{}\n", fmt_rational(&c), hol.join(" "), anti.join(" ")));
        }
        out
    }

    /// Parses the canonical text form into an exact jet.
    pub fn from_canonical(dim: usize, order: u32, text: &str) -> Result<Jet> {
        let mut terms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::JetParse { line: n + 1, reason: reason.to_string() };
            let (c, rest) = line.split_once(char::is_whitespace).ok_or_else(|| bad("missing exponents"))?;
            let c = parse_rational(c).ok_or_else(|| bad("bad coefficient"))?;
            let (a, b) = rest.split_once('|').ok_or_else(|| bad("missing `|`"))?;
            let parse_vec = |s: &str| -> Result<Vec<u32>> {
                s.split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|_| bad("bad exponent")))
                    .collect()
            };
            let index = BiIndex::new(parse_vec(a)?, parse_vec(b)?)?;
            terms.push((index, c));
        }
        Jet::poly(dim, order, terms)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

fn check_index(i: usize, dim: usize) -> Result<()> {
    if i >= dim {
        Err(Error::IndexOutOfRange { index: i, dim })
    } else {
        Ok(())
    }
}

/// Univariate truncated series `f(t) = sum_m c_m t^m`, used for radial profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct UniSeries {
    order: u32,
    exact: bool,
    coeffs: Vec<Rational>,
}

impl UniSeries {
    /// Series known through degree `order`; coefficients beyond are dropped.
    pub fn new(order: u32, mut coeffs: Vec<Rational>) -> Self {
        coeffs.truncate(order as usize + 1);
        UniSeries { order, exact: false, coeffs }
    }

    /// Polynomial profile, exact at every order.
    pub fn polynomial(coeffs: Vec<Rational>) -> Self {
        let order = coeffs.len().saturating_sub(1) as u32;
        UniSeries { order, exact: true, coeffs }
    }

    /// `-log(1 - t) = sum_{m>=1} t^m / m`.
    pub fn neg_log_one_minus(order: u32) -> Self {
        let coeffs = (0..=order as i64).map(|m| if m == 0 { int(0) } else { rat(1, m) }).collect();
        UniSeries::new(order, coeffs)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_polynomial(&self) -> bool {
        self.exact
    }

    pub fn coeff(&self, m: usize) -> Rational {
        self.coeffs.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Composition `f(arg)` for `arg` without constant term.
    pub fn substitute(&self, arg: &Jet) -> Result<Jet> {
        arg.require_valid()?;
        let c0 = arg.constant_term();
        if !c0.is_zero() {
            return Err(Error::NonzeroConstantTerm { found: fmt_rational(&c0) });
        }
        let valid = if self.exact { arg.valid } else { arg.valid.min(self.order as i32) };
        let upto = valid.max(0) as usize;
        let coeffs = &self.coeffs[..self.coeffs.len().min(upto + 1)];
        if coeffs.is_empty() {
            return Ok(Jet::zero(arg.dim, arg.order)?.with_valid(valid));
        }
        Ok(Jet::horner(arg, coeffs, valid))
    }
}

/// `f(arg)`; see [`UniSeries::substitute`].
pub fn substitute(f: &UniSeries, arg: &Jet) -> Result<Jet> {
    f.substitute(arg)
}

/// Sign helper used when rendering.
pub fn is_negative(value: &Rational) -> bool {
    value.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(hol: &[u32], anti: &[u32]) -> BiIndex {
        BiIndex::new(hol.to_vec(), anti.to_vec()).unwrap()
    }

    fn t1(order: u32) -> Jet {
        Jet::abs_sq(1, order, 0).unwrap()
    }

    #[test]
    fn poly_builds_and_rejects_overflow() {
        let z4 = Jet::poly(1, 4, [(bi(&[2], &[2]), int(1))]).unwrap();
        assert_eq!(z4.coeff(&bi(&[2], &[2])), int(1));
        assert!(z4.is_exact());
        let err = Jet::poly(1, 2, [(bi(&[3], &[0]), int(1))]).unwrap_err();
        assert_eq!(err, Error::DegreeOverflow { degree: 3, order: 2 });
    }

    #[test]
    fn difference_of_squares() {
        let t = t1(4);
        let one = Jet::one(1, 4).unwrap();
        let p = one.add(&t).unwrap().mul(&one.sub(&t).unwrap()).unwrap();
        let expected = Jet::poly(1, 4, [(bi(&[0], &[0]), int(1)), (bi(&[2], &[2]), int(-1))]).unwrap();
        assert_eq!(p, expected);
        assert!(p.is_exact());
    }

    #[test]
    fn scale_and_validity_of_add() {
        let t = t1(6);
        assert_eq!(t.scale(&rat(3, 2)).coeff(&bi(&[1], &[1])), rat(3, 2));
        let a = t.truncate(6);
        let b = t.truncate(4);
        assert_eq!(a.add(&b).unwrap().valid_degree(), 4);
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = Jet::one(1, 4).unwrap();
        let b = Jet::one(2, 4).unwrap();
        let c = Jet::one(1, 5).unwrap();
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.mul(&c), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn derivatives() {
        let z4 = Jet::poly(1, 4, [(bi(&[2], &[2]), int(1))]).unwrap();
        let d = z4.diff_hol(0).unwrap();
        assert_eq!(d.terms(), vec![(bi(&[1], &[2]), int(2))]);
        let dd = d.diff_anti(0).unwrap();
        assert_eq!(dd.terms(), vec![(bi(&[1], &[1]), int(4))]);
        let inexact = Jet::one(1, 4).unwrap().sub(&t1(4)).unwrap().log1().unwrap();
        assert_eq!(inexact.valid_degree(), 4);
        assert_eq!(inexact.diff_hol(0).unwrap().valid_degree(), 3);
        assert!(matches!(z4.diff_hol(1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn log_series() {
        let one = Jet::one(1, 4).unwrap();
        let t = t1(4);
        let l = one.sub(&t).unwrap().log1().unwrap();
        let expected = Jet::poly(1, 4, [(bi(&[1], &[1]), int(-1)), (bi(&[2], &[2]), rat(-1, 2))]).unwrap();
        assert_eq!(l, expected);
        let l = one.add(&t).unwrap().log1().unwrap();
        let expected = Jet::poly(1, 4, [(bi(&[1], &[1]), int(1)), (bi(&[2], &[2]), rat(-1, 2))]).unwrap();
        assert_eq!(l, expected);
        let two = Jet::constant(1, 4, int(2)).unwrap().add(&t).unwrap();
        assert!(matches!(two.log1(), Err(Error::ConstantTermNotOne { .. })));
    }

    #[test]
    fn inverse_series() {
        let one = Jet::one(1, 6).unwrap();
        let t = t1(6);
        let a = one.sub(&t).unwrap();
        let a2 = a.mul(&a).unwrap();
        let inv = a2.inv1().unwrap();
        for m in 0..=3u32 {
            assert_eq!(inv.coeff(&bi(&[m], &[m])), int(m as i64 + 1));
        }
        assert_eq!(one.inv1().unwrap(), one);
        assert!(one.inv1().unwrap().is_exact());
        assert!(matches!(t.inv1(), Err(Error::ZeroConstantTerm)));
    }

    #[test]
    fn substitution() {
        let s = Jet::norm_sq(2, 4).unwrap();
        let id = UniSeries::polynomial(vec![int(0), int(1)]);
        assert_eq!(id.substitute(&s).unwrap(), s);
        let t = t1(6);
        let f = UniSeries::neg_log_one_minus(6);
        let one = Jet::one(1, 6).unwrap();
        let direct = one.sub(&t).unwrap().log1().unwrap().neg();
        assert_eq!(f.substitute(&t).unwrap(), direct);
        assert!(matches!(f.substitute(&one), Err(Error::NonzeroConstantTerm { .. })));
    }

    #[test]
    fn restriction() {
        let s = Jet::norm_sq(2, 4).unwrap();
        let r = s.restrict(&[0]).unwrap();
        assert_eq!(r, Jet::norm_sq(1, 4).unwrap());
        assert_eq!(s.restrict(&[0, 1]).unwrap(), s);
        assert!(s.restrict(&[2]).is_err());
    }

    #[test]
    fn flip_anti() {
        let t = t1(4);
        assert_eq!(t.flip_anti_sign(), t.neg());
        let z4 = Jet::poly(1, 4, [(bi(&[2], &[2]), int(1))]).unwrap();
        assert_eq!(z4.flip_anti_sign(), z4);
        let mixed = Jet::poly(2, 4, [(bi(&[1, 0], &[0, 1]), int(3)), (bi(&[2, 1], &[0, 1]), int(-1))]).unwrap();
        assert_eq!(mixed.flip_anti_sign().flip_anti_sign(), mixed);
    }

    #[test]
    fn eval0_contract() {
        let one = Jet::one(1, 4).unwrap();
        let t = t1(4);
        let p = one.sub(&t).unwrap().mul(&one.sub(&t).unwrap()).unwrap();
        assert_eq!(p.eval0().unwrap(), int(1));
        let z4 = Jet::poly(1, 4, [(bi(&[2], &[2]), int(1))]).unwrap();
        assert_eq!(z4.eval0().unwrap(), int(0));
        let mut j = one.sub(&t).unwrap().log1().unwrap();
        for _ in 0..5 {
            j = j.diff_hol(0).unwrap();
        }
        assert!(matches!(j.eval0(), Err(Error::InsufficientOrder { .. })));
    }

    #[test]
    fn canonical_text_round_trip() {
        let j = Jet::poly(2, 4, [(bi(&[1, 0], &[1, 0]), rat(1, 2)), (bi(&[1, 1], &[1, 1]), int(-3))]).unwrap();
        let text = j.to_canonical_string();
        assert_eq!(text, "1/2  1 0|1 0\n-3/1  1 1|1 1\n");
        assert_eq!(Jet::from_canonical(2, 4, &text).unwrap(), j);
    }

    #[test]
    fn compose_identity_and_projection() {
        let s = Jet::norm_sq(2, 4).unwrap();
        let id: Vec<Jet> = (0..2).map(|i| Jet::hol_var(2, 4, i).unwrap()).collect();
        assert_eq!(s.compose(&id).unwrap(), s);
        let proj = vec![Jet::hol_var(1, 4, 0).unwrap(), Jet::zero(1, 4).unwrap()];
        assert_eq!(s.compose(&proj).unwrap(), Jet::norm_sq(1, 4).unwrap());
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(fmt_rational(&int(4)), "4/1");
        assert_eq!(fmt_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(parse_rational("-3/2"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
