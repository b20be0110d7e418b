//! Potential jets for the catalog metrics: space forms, polydiscs, the
//! classical type-I and type-IV domains and their compact duals, radial
//! metrics, products, and user-supplied potentials.
//!
//! Every catalog potential is normalized so that `g(0) = I` and has no
//! constant term. Specs have a canonical string form (`hyp:2`, `type1:2,3`,
//! `product(flat:1,hyp:1)`, …) that round-trips through [`PotentialSpec::from_str`].

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::delta::dual_potential;
use crate::error::{Error, Result};
use crate::geometry::{assert_normal_coordinates, metric_from_potential};
use crate::linalg::JetMatrix;
use crate::ratjet::{fmt_rational, int, parse_rational, rat, BiIndex, Jet, Rational, UniSeries};

/// A catalog metric, described by its Kähler potential.
#[derive(Clone, Debug)]
pub enum PotentialSpec {
    Flat(usize),
    FubiniStudy(usize),
    Hyperbolic(usize),
    Polydisc(usize),
    /// `p x q` complex matrices, `-log det(I - Z Z*)`.
    TypeI(usize, usize),
    /// Compact dual of `TypeI`: `log det(I + Z Z*)`.
    TypeIDual(usize, usize),
    /// Lie ball, rescaled by 1/2 so that `g(0) = I`. Optional entry, gated.
    TypeIV(usize),
    /// `f(|z|^2)` in `n` variables.
    Radial(UniSeries, usize),
    Product(Box<PotentialSpec>, Box<PotentialSpec>),
    DualOf(Box<PotentialSpec>),
    Custom(Jet),
}

impl PartialEq for PotentialSpec {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl PotentialSpec {
    /// Complex dimension.
    pub fn dim(&self) -> usize {
        use PotentialSpec::*;
        match self {
            Flat(n) | FubiniStudy(n) | Hyperbolic(n) | Polydisc(n) | TypeIV(n) | Radial(_, n) => *n,
            TypeI(p, q) | TypeIDual(p, q) => p * q,
            Product(l, r) => l.dim() + r.dim(),
            DualOf(s) => s.dim(),
            Custom(j) => j.dim(),
        }
    }

    /// Entries that are gated behind the Einstein self-check.
    pub fn is_optional(&self) -> bool {
        match self {
            PotentialSpec::TypeIV(_) => true,
            PotentialSpec::Product(l, r) => l.is_optional() || r.is_optional(),
            PotentialSpec::DualOf(s) => s.is_optional(),
            _ => false,
        }
    }

    /// Rank of the symmetric space (number of frame directions), when known.
    pub fn rank(&self) -> Option<usize> {
        use PotentialSpec::*;
        match self {
            Flat(_) | Radial(..) | Custom(_) => None,
            FubiniStudy(_) | Hyperbolic(_) => Some(1),
            Polydisc(r) => Some(*r),
            TypeI(p, q) | TypeIDual(p, q) => Some(*p.min(q)),
            TypeIV(n) => Some(if *n >= 2 { 2 } else { 1 }),
            Product(l, r) => Some(l.rank().unwrap_or(l.dim()) + r.rank().unwrap_or(r.dim())),
            DualOf(s) => s.rank(),
        }
    }

    /// Frame directions in variable order: the coordinates along which the
    /// polydisc of the frame sits (diagonal matrix entries for type I).
    pub fn frame(&self) -> Vec<usize> {
        use PotentialSpec::*;
        match self {
            TypeI(p, q) | TypeIDual(p, q) => (0..*p.min(q)).map(|j| j * q + j).collect(),
            Product(l, r) => {
                let offset = l.dim();
                l.frame().into_iter().chain(r.frame().into_iter().map(|i| i + offset)).collect()
            }
            DualOf(s) => s.frame(),
            _ => (0..self.dim()).collect(),
        }
    }

    /// Frame directions first, then the remaining variables in order.
    pub fn variable_priority(&self) -> Vec<usize> {
        let mut order = self.frame();
        for i in 0..self.dim() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        order
    }

    /// Display names of the coordinates (1-based).
    pub fn variable_names(&self) -> Vec<String> {
        match self {
            PotentialSpec::TypeI(p, q) | PotentialSpec::TypeIDual(p, q) => {
                let sep = if *p > 9 || *q > 9 { "_" } else { "" };
                (0..p * q).map(|k| format!("z{}{}{}", k / q + 1, sep, k % q + 1)).collect()
            }
            PotentialSpec::DualOf(s) => s.variable_names(),
            _ => crate::ratjet::default_names(self.dim()),
        }
    }

    /// Potential jet truncated at total degree `order`.
    pub fn potential(&self, order: u32) -> Result<Jet> {
        if order < 2 {
            return Err(Error::InsufficientOrder { needed: 2 });
        }
        use PotentialSpec::*;
        let jet = match self {
            Flat(n) => Jet::norm_sq(*n, order)?,
            FubiniStudy(n) => Jet::one(*n, order)?.add(&Jet::norm_sq(*n, order)?)?.log1()?,
            Hyperbolic(n) => Jet::one(*n, order)?.sub(&Jet::norm_sq(*n, order)?)?.log1()?.neg(),
            Polydisc(r) => {
                let mut acc = Jet::zero(*r, order)?;
                let one = Jet::one(*r, order)?;
                for j in 0..*r {
                    let term = one.sub(&Jet::abs_sq(*r, order, j)?)?.log1()?.neg();
                    acc = acc.add(&term)?;
                }
                acc
            }
            TypeI(p, q) => trace_log_series(*p, *q, order, false)?,
            TypeIDual(p, q) => trace_log_series(*p, *q, order, true)?,
            TypeIV(n) => {
                let jet = lie_ball_potential(*n, order)?;
                einstein_gate(self, &jet)?;
                jet
            }
            Radial(f, n) => f.substitute(&Jet::norm_sq(*n, order)?)?,
            Product(l, r) => {
                let n = l.dim() + r.dim();
                let left = l.potential(order)?.extend(n, 0)?;
                let right = r.potential(order)?.extend(n, l.dim())?;
                left.add(&right)?
            }
            DualOf(s) => dual_potential(&s.potential(order)?)?,
            Custom(jet) => {
                validate_custom(jet)?;
                jet.clone()
            }
        };
        Ok(jet)
    }
}

fn validate_custom(jet: &Jet) -> Result<()> {
    if !jet.constant_term().is_zero() {
        return Err(Error::NonzeroConstantTerm { found: fmt_rational(&jet.constant_term()) });
    }
    if let Some(index) = jet.first_unreal_term() {
        return Err(Error::NotReal { monomial: format!("{:?}|{:?}", index.hol(), index.anti()) });
    }
    let m = metric_from_potential(jet)?;
    let check = assert_normal_coordinates(&m);
    if !check.ok {
        return Err(Error::NotNormal(check.diagnostics.join("; ")));
    }
    Ok(())
}

fn einstein_gate(spec: &PotentialSpec, jet: &Jet) -> Result<()> {
    let probe = jet.truncate(6);
    let m = metric_from_potential(&probe)?;
    let e = m.einstein()?;
    if !e.is_einstein {
        return Err(Error::RejectedBySelfCheck(format!("{spec} is not Einstein through degree {}", e.checked_degree)));
    }
    if !assert_normal_coordinates(&m).ok {
        return Err(Error::RejectedBySelfCheck(format!("{spec} is not in normal coordinates")));
    }
    Ok(())
}

/// `Z Z*` for the `p x q` matrix of coordinates (row-major).
fn zz_star(p: usize, q: usize, order: u32) -> Result<JetMatrix> {
    let n = p * q;
    JetMatrix::from_fn(p, |i, k| {
        let terms = (0..q).map(|j| {
            let mut hol = vec![0; n];
            let mut anti = vec![0; n];
            hol[i * q + j] = 1;
            anti[k * q + j] = 1;
            (BiIndex::new(hol, anti).expect("same length"), Rational::one())
        });
        Jet::poly(n, order, terms)
    })
}

/// `sum_m s_m tr((Z Z*)^m) / m` with `s_m = 1` (type I) or `(-1)^{m+1}` (dual).
fn trace_log_series(p: usize, q: usize, order: u32, alternating: bool) -> Result<Jet> {
    let w = zz_star(p, q, order)?;
    let mut power = w.clone();
    let mut acc = Jet::zero(p * q, order)?;
    let max_m = order / 2;
    for m in 1..=max_m {
        if m > 1 {
            power = power.mul(&w)?;
        }
        let mut trace = Jet::zero(p * q, order)?;
        for i in 0..p {
            trace = trace.add(power.get(i, i))?;
        }
        let sign = if alternating && m % 2 == 0 { -1 } else { 1 };
        acc = acc.add(&trace.scale(&rat(sign, m as i64)))?;
    }
    // truncated series: correct through `order`, but not a polynomial
    Ok(acc.with_valid(order as i32))
}

/// `-1/2 log(1 - 2|z|^2 + |sum z_i^2|^2)`.
fn lie_ball_potential(n: usize, order: u32) -> Result<Jet> {
    let norm = Jet::norm_sq(n, order)?;
    let sq_terms = (0..n).map(|i| {
        let mut hol = vec![0; n];
        hol[i] = 2;
        (BiIndex::new(hol, vec![0; n]).expect("same length"), Rational::one())
    });
    let q = Jet::poly(n, order, sq_terms)?;
    let q_abs = q.mul(&q.conjugate())?;
    let inner = Jet::one(n, order)?.sub(&norm.scale(&int(2)))?.add(&q_abs)?;
    Ok(inner.log1()?.scale(&rat(-1, 2)))
}

/// Linear coordinate embedding `w -> z` given by polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingSpec {
    pub source_dim: usize,
    pub target_dim: usize,
    /// For each target variable, the source variable it equals (or zero).
    pub slots: Vec<Option<usize>>,
}

impl EmbeddingSpec {
    /// Component jets `z_i = P_i(w)` in the source space.
    pub fn components(&self, order: u32) -> Result<Vec<Jet>> {
        self.slots
            .iter()
            .map(|slot| match slot {
                Some(a) => Jet::hol_var(self.source_dim, order, *a),
                None => Jet::zero(self.source_dim, order),
            })
            .collect()
    }
}

/// `(z_1, …, z_r) -> diag(z_1, …, z_r)` inside the `p x q` matrices.
pub fn diagonal_embedding(p: usize, q: usize) -> EmbeddingSpec {
    let r = p.min(q);
    let mut slots = vec![None; p * q];
    for j in 0..r {
        slots[j * q + j] = Some(j);
    }
    EmbeddingSpec { source_dim: r, target_dim: p * q, slots }
}

/// Outcome of [`lemma_restriction_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionCheck {
    pub p: usize,
    pub q: usize,
    pub order: u32,
    pub potential_match: bool,
    pub metric_match: bool,
}

impl RestrictionCheck {
    pub fn pass(&self) -> bool {
        self.potential_match && self.metric_match
    }
}

/// Pulls the type-I potential back along the diagonal embedding and compares
/// it, and the pulled-back metric tensor, with the polydisc of rank `min(p, q)`.
pub fn lemma_restriction_check(p: usize, q: usize, order: u32) -> Result<RestrictionCheck> {
    let r = p.min(q);
    let embedding = diagonal_embedding(p, q);
    let images = embedding.components(order)?;
    let big = PotentialSpec::TypeI(p, q).potential(order)?;
    let pulled = big.compose(&images)?;
    let polydisc = PotentialSpec::Polydisc(r).potential(order)?;
    let potential_match = pulled == polydisc && pulled.valid_degree() >= polydisc.valid_degree().min(order as i32);

    // metric tensor pulled back directly: g~_{a bbar} = g_{s(a) s(b)bar} o P
    let big_metric = metric_from_potential(&big)?;
    let poly_metric = metric_from_potential(&polydisc)?;
    let mut metric_match = true;
    for a in 0..r {
        for b in 0..r {
            let sa = a * q + a;
            let sb = b * q + b;
            let pulled_entry = big_metric.g().get(sa, sb).compose(&images)?;
            if pulled_entry != *poly_metric.g().get(a, b) {
                metric_match = false;
            }
        }
    }
    Ok(RestrictionCheck { p, q, order, potential_match, metric_match })
}

/// Specs listed by the `catalog` command.
pub fn catalog_entries() -> Vec<PotentialSpec> {
    use PotentialSpec::*;
    vec![
        Flat(1),
        Flat(2),
        FubiniStudy(1),
        FubiniStudy(2),
        FubiniStudy(3),
        Hyperbolic(1),
        Hyperbolic(2),
        Hyperbolic(3),
        Polydisc(2),
        Polydisc(3),
        TypeI(2, 2),
        TypeI(2, 3),
        TypeIDual(2, 2),
        TypeIV(3),
    ]
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PotentialSpec::*;
        match self {
            Flat(n) => write!(f, "flat:{n}"),
            FubiniStudy(n) => write!(f, "fs:{n}"),
            Hyperbolic(n) => write!(f, "hyp:{n}"),
            Polydisc(r) => write!(f, "polydisc:{r}"),
            TypeI(p, q) => write!(f, "type1:{p},{q}"),
            TypeIDual(p, q) => write!(f, "type1dual:{p},{q}"),
            TypeIV(n) => write!(f, "type4:{n}"),
            Radial(s, n) => {
                let coeffs: Vec<String> = s.coeffs().iter().skip(1).map(fmt_rational).collect();
                write!(f, "radial:{}:{n}", coeffs.join(","))
            }
            Product(l, r) => write!(f, "product({l},{r})"),
            DualOf(s) => write!(f, "dual({s})"),
            Custom(j) => write!(f, "custom:{}x{}", j.dim(), j.order()),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let text: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        parse_spec(&text).map_err(|reason| Error::SpecParse { input: input.to_string(), reason })
    }
}

fn parse_spec(text: &str) -> std::result::Result<PotentialSpec, String> {
    use PotentialSpec::*;
    if let Some(inner) = strip_call(text, "product") {
        let (l, r) = split_top_level_comma(inner).ok_or("product needs two comma-separated specs")?;
        return Ok(Product(Box::new(parse_spec(l)?), Box::new(parse_spec(r)?)));
    }
    if let Some(inner) = strip_call(text, "dual") {
        return Ok(DualOf(Box::new(parse_spec(inner)?)));
    }
    let (head, rest) = text.split_once(':').ok_or("expected `<kind>:<args>`")?;
    let positive = |s: &str| -> std::result::Result<usize, String> {
        match s.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(format!("`{s}` is not a positive integer")),
        }
    };
    let pair = |s: &str| -> std::result::Result<(usize, usize), String> {
        let (p, q) = s.split_once(',').ok_or("expected `p,q`")?;
        Ok((positive(p)?, positive(q)?))
    };
    match head {
        "flat" => Ok(Flat(positive(rest)?)),
        "fs" => Ok(FubiniStudy(positive(rest)?)),
        "hyp" => Ok(Hyperbolic(positive(rest)?)),
        "polydisc" => Ok(Polydisc(positive(rest)?)),
        "type1" => pair(rest).map(|(p, q)| TypeI(p, q)),
        "type1dual" => pair(rest).map(|(p, q)| TypeIDual(p, q)),
        "type4" => Ok(TypeIV(positive(rest)?)),
        "radial" => {
            let (list, n) = rest.rsplit_once(':').ok_or("expected `radial:<coeffs>:<n>`")?;
            let mut coeffs = vec![Rational::zero()];
            for c in list.split(',') {
                coeffs.push(parse_rational(c).ok_or_else(|| format!("bad coefficient `{c}`"))?);
            }
            if coeffs[1] != Rational::one() {
                return Err("radial profile must have f'(0) = 1".into());
            }
            Ok(Radial(UniSeries::polynomial(coeffs), positive(n)?))
        }
        other => Err(format!("unknown kind `{other}`")),
    }
}

fn strip_call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

fn split_top_level_comma(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    // a comma splits the pair only at depth 0 and when followed by a new spec head
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                let (l, r) = (&text[..i], &text[i + 1..]);
                if parse_spec(l).is_ok() && parse_spec(r).is_ok() {
                    return Some((l, r));
                }
            }
            _ => {}
        }
    }
    None
}
