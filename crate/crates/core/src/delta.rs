//! Decides `Delta^k phi(0) = p_k(Delta_c) phi(0)` for `k <= K` over a finite
//! family of test functions: infers the monic `p_k` by exact linear algebra or
//! refutes it with a minimal inconsistent set of rows.
//!
//! "Consistent" only means no refutation was found over the family and the
//! seeded random polynomials; a refutation is a proof.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::PotentialSpec;
use crate::error::{Error, Result};
use crate::geometry::{assert_normal_coordinates, metric_from_potential, EinsteinData, MetricJet};
use crate::laplace::{euclidean_moment, power_at_origin, LaplacianBudget, Operator, PowerFunctional};
use crate::linalg::{solve, Solution};
use crate::ratjet::{fmt_rational, int, rat, BiIndex, Jet, Rational};

/// Monic `p_k(X) = X^k + a_{k-1} X^{k-1} + ... + a_1 X` (no constant term).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaPolynomial {
    k: u32,
    /// `a_1 .. a_{k-1}`.
    lower: Vec<Rational>,
}

impl DeltaPolynomial {
    pub fn new(k: u32, lower: Vec<Rational>) -> Result<Self> {
        if k == 0 || lower.len() != k as usize - 1 {
            return Err(Error::InvalidArgument(format!("p_{k} needs {} lower coefficients", k.max(1) - 1)));
        }
        Ok(DeltaPolynomial { k, lower })
    }

    /// `X^k`.
    pub fn monomial(k: u32) -> Self {
        DeltaPolynomial { k, lower: vec![Rational::zero(); k as usize - 1] }
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Coefficient of `X^j`, `0 <= j <= k`.
    pub fn coeff(&self, j: u32) -> Rational {
        match j {
            0 => Rational::zero(),
            j if j == self.k => Rational::one(),
            j if j < self.k => self.lower[j as usize - 1].clone(),
            _ => Rational::zero(),
        }
    }

    /// Coefficients of `X^0 .. X^k`.
    pub fn coefficients(&self) -> Vec<Rational> {
        (0..=self.k).map(|j| self.coeff(j)).collect()
    }

    /// `p_k(Delta_c) phi (0)` from the moments `Delta_c^j phi(0)`, `j = 1..k`.
    pub fn apply(&self, moments: &[Rational]) -> Rational {
        (1..=self.k).map(|j| self.coeff(j) * &moments[j as usize - 1]).sum()
    }
}

impl fmt::Display for DeltaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for j in (1..=self.k).rev() {
            let c = self.coeff(j);
            if c.is_zero() {
                continue;
            }
            let power = if j == 1 { "X".to_string() } else { format!("X^{j}") };
            let sign = if c.is_negative() { "-" } else { "+" };
            let magnitude = c.abs();
            let factor = if magnitude.is_one() {
                String::new()
            } else if magnitude.is_integer() {
                magnitude.to_string()
            } else {
                format!("({magnitude})")
            };
            if first {
                let lead = if c.is_negative() { "-" } else { "" };
                write!(f, "{lead}{factor}{power}")?;
                first = false;
            } else {
                write!(f, " {sign} {factor}{power}")?;
            }
        }
        Ok(())
    }
}

/// Finite linear combination of monomials `z^alpha zbar^beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFunction {
    pub terms: Vec<(BiIndex, Rational)>,
}

impl TestFunction {
    pub fn monomial(index: BiIndex) -> Self {
        TestFunction { terms: vec![(index, Rational::one())] }
    }

    /// The monomial, when the function is a single monomial with coefficient 1.
    pub fn as_monomial(&self) -> Option<&BiIndex> {
        match self.terms.as_slice() {
            [(index, c)] if c.is_one() => Some(index),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(i, _)| i.degree()).max().unwrap_or(0)
    }

    pub fn to_jet(&self, dim: usize, order: u32) -> Result<Jet> {
        Jet::poly(dim, order, self.terms.iter().cloned())
    }

    /// `Delta_c^j` at the origin for `j = 1..k`.
    pub fn moments(&self, k: u32) -> Vec<Rational> {
        (1..=k)
            .map(|j| self.terms.iter().map(|(i, c)| c * euclidean_moment(i.hol(), i.anti(), j)).sum())
            .collect()
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (n, (index, c)) in self.terms.iter().enumerate() {
            let body = if index.degree() == 0 { "1".to_string() } else { index.render(names) };
            let negative = c.is_negative();
            let magnitude = c.abs();
            if n > 0 {
                out.push_str(if negative { " - " } else { " + " });
            } else if negative {
                out.push('-');
            }
            if magnitude.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("({}) {body}", fmt_rational(&magnitude)));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// One test function with its Euclidean moments `Delta_c^j phi(0)`, `j = 1..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyRow {
    pub function: TestFunction,
    pub moments: Vec<Rational>,
}

/// Test functions used to pin down `p_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFamily {
    pub dim: usize,
    pub k: u32,
    pub rows: Vec<FamilyRow>,
}

/// All monomials `z^alpha zbar^beta` with `|alpha|, |beta| <= k` supported on
/// at most `min(n, 3)` variables, excluding the constant.
pub fn build_test_family(n: usize, k: u32) -> TestFamily {
    build_test_family_with_priority(n, k, &(0..n).collect::<Vec<_>>())
}

/// As [`build_test_family`], ordered by: balanced rows by `|alpha|`
/// ascending, within each degree the `alpha = beta` rows first and then the
/// other balanced rows, each in descending lexicographic order of the
/// exponents read in `priority` order; unbalanced rows come last.
pub fn build_test_family_with_priority(n: usize, k: u32, priority: &[usize]) -> TestFamily {
    let max_support = n.min(3);
    let exps = exponents_up_to(n, k);
    let permuted = |e: &[u32]| -> Vec<u32> { priority.iter().map(|&i| e[i]).collect() };
    let mut keyed = Vec::new();
    for a in &exps {
        for b in &exps {
            let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
            if da + db == 0 {
                continue;
            }
            let support = (0..n).filter(|&i| a[i] > 0 || b[i] > 0).count();
            if support > max_support {
                continue;
            }
            let class = if da != db {
                2
            } else if a == b {
                0
            } else {
                1
            };
            let group = if class == 2 { (1, da + db) } else { (0, da) };
            let (pa, pb) = (permuted(a), permuted(b));
            keyed.push(((group, class, std::cmp::Reverse((pa, pb))), (a.clone(), b.clone())));
        }
    }
    keyed.sort();
    let rows = keyed
        .into_iter()
        .map(|(_, (a, b))| {
            let function = TestFunction::monomial(BiIndex::new(a, b).expect("same length"));
            let moments = function.moments(k);
            FamilyRow { function, moments }
        })
        .collect();
    TestFamily { dim: n, k, rows }
}

/// Exponent vectors of length `n` with total degree `<= k`.
fn exponents_up_to(n: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for x in 0..=(k - used) {
                let mut v = e.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// A test function with both sides of the row equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluatedRow {
    pub function: TestFunction,
    /// `Delta^k phi(0)`.
    pub kahler: Rational,
    /// `Delta_c^j phi(0)` for `j = 1..k`.
    pub moments: Vec<Rational>,
}

impl EvaluatedRow {
    /// Coefficients of `a_1 .. a_{k-1}`.
    fn lhs(&self) -> Vec<Rational> {
        self.moments[..self.moments.len() - 1].to_vec()
    }

    /// `Delta^k phi(0) - Delta_c^k phi(0)`.
    fn rhs(&self) -> Rational {
        &self.kahler - self.moments.last().expect("k >= 1")
    }

    /// The value `a_j` this row alone forces, when it involves a single unknown.
    pub fn forced(&self) -> Option<(u32, Rational)> {
        let lhs = self.lhs();
        let nonzero: Vec<usize> = (0..lhs.len()).filter(|&j| !lhs[j].is_zero()).collect();
        match nonzero.as_slice() {
            [j] => Some((*j as u32 + 1, self.rhs() / &lhs[*j])),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerdictStatus {
    Consistent(DeltaPolynomial),
    /// Rows admitting no common `p_k`; minimal (dropping any row restores consistency).
    Refuted(Vec<EvaluatedRow>),
    /// Indices `j` of the unconstrained `a_j`.
    Underdetermined(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaVerdict {
    pub k: u32,
    pub status: VerdictStatus,
}

impl DeltaVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self.status, VerdictStatus::Consistent(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self.status, VerdictStatus::Refuted(_))
    }
}

fn system(rows: &[&EvaluatedRow], k: u32) -> Solution {
    let lhs: Vec<Vec<Rational>> = rows.iter().map(|r| r.lhs()).collect();
    let rhs: Vec<Rational> = rows.iter().map(|r| r.rhs()).collect();
    solve(&lhs, &rhs, k as usize - 1)
}

fn consistent(rows: &[&EvaluatedRow], k: u32) -> bool {
    !matches!(system(rows, k), Solution::Inconsistent)
}

/// Solver-independent test that `rows` admit no common solution: a single
/// row `0 = c != 0`, or two rows with proportional coefficients and
/// non-proportional right-hand sides. Larger sets fall back to elimination.
pub fn witness_is_sound(rows: &[EvaluatedRow]) -> bool {
    match rows {
        [] => false,
        [r] => r.lhs().iter().all(Zero::is_zero) && !r.rhs().is_zero(),
        [r, s] => {
            let (a, b) = (r.lhs(), s.lhs());
            let (x, y) = (r.rhs(), s.rhs());
            let rank_one = (0..a.len()).all(|i| (0..a.len()).all(|j| &a[i] * &b[j] == &a[j] * &b[i]));
            let augmented_rank_two = (0..a.len()).any(|i| &a[i] * &y != &x * &b[i])
                || (a.iter().all(Zero::is_zero) && b.iter().all(Zero::is_zero) && !(x.is_zero() && y.is_zero()));
            rank_one && augmented_rank_two
        }
        _ => {
            let k = rows[0].moments.len() as u32;
            let refs: Vec<&EvaluatedRow> = rows.iter().collect();
            !consistent(&refs, k)
        }
    }
}

/// Evaluates every family row against `Delta^k` at the origin.
pub fn evaluate_family(functional: &mut PowerFunctional, family: &TestFamily, order: u32) -> Result<Vec<EvaluatedRow>> {
    let mut rows = Vec::with_capacity(family.rows.len());
    let mut cache: HashMap<&BiIndex, Rational> = HashMap::new();
    for row in &family.rows {
        let kahler = match row.function.as_monomial() {
            Some(index) if cache.contains_key(index) => cache[index].clone(),
            _ => {
                let jet = row.function.to_jet(family.dim, order)?;
                let v = functional.value(&jet, family.k)?;
                if let Some(index) = row.function.as_monomial() {
                    cache.insert(index, v.clone());
                }
                v
            }
        };
        rows.push(EvaluatedRow { function: row.function.clone(), kahler, moments: row.moments.clone() });
    }
    Ok(rows)
}

/// Solves the row equations `Delta^k phi(0) - Delta_c^k phi(0) = sum_{j<k} a_j Delta_c^j phi(0)`.
pub fn infer(m: &MetricJet, k: u32, family: &TestFamily) -> Result<DeltaVerdict> {
    let mut functional = PowerFunctional::new(m, k)?;
    let rows = evaluate_family(&mut functional, family, m.order())?;
    infer_rows(k, &rows)
}

/// [`infer`] on already evaluated rows.
pub fn infer_rows(k: u32, rows: &[EvaluatedRow]) -> Result<DeltaVerdict> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let refs: Vec<&EvaluatedRow> = rows.iter().collect();
    let status = match system(&refs, k) {
        Solution::Unique(a) => VerdictStatus::Consistent(DeltaPolynomial::new(k, a)?),
        Solution::Underdetermined { free, .. } => {
            VerdictStatus::Underdetermined(free.into_iter().map(|j| j as u32 + 1).collect())
        }
        Solution::Inconsistent => {
            let witness = find_witness(rows, k);
            if !witness_is_sound(&witness) {
                return Err(Error::InvalidArgument("refutation witness failed its re-check".into()));
            }
            VerdictStatus::Refuted(witness)
        }
    };
    Ok(DeltaVerdict { k, status })
}

/// Deterministic witness for an inconsistent system: the first row that is
/// inconsistent on its own; else the lexicographically first inconsistent
/// pair in family order; else a minimal subset of the first inconsistent
/// prefix.
fn find_witness(rows: &[EvaluatedRow], k: u32) -> Vec<EvaluatedRow> {
    if let Some(r) = rows.iter().find(|r| !consistent(&[*r], k)) {
        return vec![r.clone()];
    }
    // identical rows never form a lexicographically earlier pair, so only
    // first occurrences need to be paired
    let mut seen = Vec::new();
    let mut distinct: Vec<&EvaluatedRow> = Vec::new();
    for r in rows {
        let key = (r.lhs(), r.rhs());
        if !seen.contains(&key) {
            seen.push(key);
            distinct.push(r);
        }
    }
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            if !consistent(&[*a, *b], k) {
                return vec![(*a).clone(), (*b).clone()];
            }
        }
    }
    let mut prefix = Vec::new();
    for r in &distinct {
        prefix.push(*r);
        if !consistent(&prefix, k) {
            break;
        }
    }
    minimize(prefix, k).into_iter().cloned().collect()
}

/// Greedily drops rows while the set stays inconsistent.
fn minimize(mut rows: Vec<&EvaluatedRow>, k: u32) -> Vec<&EvaluatedRow> {
    let mut i = 0;
    while i < rows.len() {
        let mut trial = rows.clone();
        trial.remove(i);
        if !consistent(&trial, k) {
            rows = trial;
        } else {
            i += 1;
        }
    }
    rows
}

/// Options for [`verify_property`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_k: u32,
    /// Defaults to `2 max_k + 2`.
    pub order: Option<u32>,
    pub seed: u64,
    /// Random polynomials per `k` in the re-verification pass.
    pub random_checks: usize,
}

impl VerifyConfig {
    pub fn new(max_k: u32) -> Self {
        VerifyConfig { max_k, order: None, seed: 0, random_checks: 8 }
    }

    pub fn effective_order(&self) -> u32 {
        self.order.unwrap_or_else(|| LaplacianBudget::required_order(self.max_k))
    }
}

/// Verdicts for `k = 1..K` plus the metric's Einstein data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    pub spec: String,
    pub dim: usize,
    pub order: u32,
    pub variable_names: Vec<String>,
    pub einstein: EinsteinData,
    pub verdicts: Vec<DeltaVerdict>,
    pub reproduction: Option<Reproduction>,
}

impl DeltaReport {
    /// First `k` with a refutation.
    pub fn refuted_at(&self) -> Option<u32> {
        self.verdicts.iter().find(|v| v.is_refuted()).map(|v| v.k)
    }

    pub fn all_consistent(&self) -> bool {
        self.verdicts.iter().all(DeltaVerdict::is_consistent)
    }
}

/// Builds the metric at the budgeted order and runs [`infer`] for
/// `k = 1..K`, stopping at the first refutation. Consistent verdicts are
/// re-checked on seeded random polynomials.
pub fn verify_property(spec: &PotentialSpec, config: &VerifyConfig) -> Result<DeltaReport> {
    if config.max_k == 0 {
        return Err(Error::InvalidArgument("max_k must be at least 1".into()));
    }
    let order = config.effective_order();
    LaplacianBudget::new(config.max_k, order)?;
    let potential = spec.potential(order)?;
    let m = metric_from_potential(&potential)?;
    let normal = assert_normal_coordinates(&m);
    if !normal.ok {
        return Err(Error::NotNormal(normal.diagnostics.join("; ")));
    }
    let einstein = m.einstein()?;
    let n = m.dim();
    let priority = spec.variable_priority();
    let mut functional = PowerFunctional::new(&m, config.max_k)?;
    let mut verdicts = Vec::new();
    for k in 1..=config.max_k {
        let family = build_test_family_with_priority(n, k, &priority);
        let rows = evaluate_family(&mut functional, &family, order)?;
        let mut verdict = infer_rows(k, &rows)?;
        if let VerdictStatus::Consistent(p) = &verdict.status {
            if let Some(witness) = random_recheck(&mut functional, p, &rows, n, order, config, k)? {
                verdict.status = VerdictStatus::Refuted(witness);
            }
        }
        let stop = verdict.is_refuted();
        verdicts.push(verdict);
        if stop {
            break;
        }
    }
    let reproduction = match (einstein.is_einstein, order >= LaplacianBudget::required_order(3)) {
        (false, _) => None,
        (true, true) => Some(reproduction_from_metric(spec, &m)?),
        (true, false) => Some(reproduction_values(spec)?),
    };
    Ok(DeltaReport {
        spec: spec.to_string(),
        dim: n,
        order,
        variable_names: spec.variable_names(),
        einstein,
        verdicts,
        reproduction,
    })
}

/// Random polynomial with `|alpha|, |beta| <= k` over all variables.
pub fn random_test_function(rng: &mut ChaCha8Rng, n: usize, k: u32, terms: usize) -> TestFunction {
    let mut acc: Vec<(BiIndex, Rational)> = Vec::new();
    for _ in 0..terms {
        let mut exps = [vec![0u32; n], vec![0u32; n]];
        for side in &mut exps {
            let degree = rng.gen_range(0..=k);
            for _ in 0..degree {
                side[rng.gen_range(0..n)] += 1;
            }
        }
        let [hol, anti] = exps;
        let index = BiIndex::new(hol, anti).expect("same length");
        if index.degree() == 0 {
            continue;
        }
        let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=6));
        match acc.iter_mut().find(|(i, _)| *i == index) {
            Some((_, existing)) => *existing += c,
            None => acc.push((index, c)),
        }
    }
    acc.retain(|(_, c)| !c.is_zero());
    acc.sort();
    TestFunction { terms: acc }
}

fn random_recheck(
    functional: &mut PowerFunctional,
    p: &DeltaPolynomial,
    rows: &[EvaluatedRow],
    n: usize,
    order: u32,
    config: &VerifyConfig,
    k: u32,
) -> Result<Option<Vec<EvaluatedRow>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (u64::from(k) << 32));
    for _ in 0..config.random_checks {
        let function = random_test_function(&mut rng, n, k, 6);
        let jet = function.to_jet(n, order)?;
        let kahler = functional.value(&jet, k)?;
        let moments = function.moments(k);
        if kahler != p.apply(&moments) {
            let extra = EvaluatedRow { function, kahler, moments };
            // rows pinning p_k, then the offending polynomial
            let mut basis: Vec<&EvaluatedRow> = Vec::new();
            for r in rows {
                let mut trial = basis.clone();
                trial.push(r);
                if rank(&trial) > rank(&basis) {
                    basis = trial;
                }
            }
            basis.push(&extra);
            let witness: Vec<EvaluatedRow> = minimize(basis, k).into_iter().cloned().collect();
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

fn rank(rows: &[&EvaluatedRow]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let unknowns = first.moments.len() - 1;
    let lhs: Vec<Vec<Rational>> = rows.iter().map(|r| r.lhs()).collect();
    let zero = vec![Rational::zero(); rows.len()];
    match solve(&lhs, &zero, unknowns) {
        Solution::Unique(_) => unknowns,
        Solution::Underdetermined { free, .. } => unknowns - free.len(),
        Solution::Inconsistent => unreachable!("homogeneous systems are consistent"),
    }
}

/// `Phi(z, zbar) = -Phi*(z, -zbar)`: exchanges a noncompact potential with
/// its compact dual.
pub fn dual_potential(potential: &Jet) -> Result<Jet> {
    let c = potential.constant_term();
    if !c.is_zero() {
        return Err(Error::NonzeroConstantTerm { found: fmt_rational(&c) });
    }
    Ok(potential.flip_anti_sign().neg())
}

/// `Delta^3(|z_i z_j|^2)(0)` on a metric and on its dual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityCheck {
    pub spec: String,
    pub dual: String,
    pub i: usize,
    pub j: usize,
    pub value: Rational,
    pub dual_value: Rational,
}

impl DualityCheck {
    pub fn pass(&self) -> bool {
        self.value == -self.dual_value.clone()
    }
}

/// `|z_i z_j|^2` (0-based indices; `i = j` gives `|z_i|^4`).
pub fn abs_sq_product(dim: usize, order: u32, i: usize, j: usize) -> Result<Jet> {
    if i >= dim || j >= dim {
        return Err(Error::IndexOutOfRange { index: i.max(j), dim });
    }
    let mut e = vec![0; dim];
    e[i] += 1;
    e[j] += 1;
    Jet::monomial(dim, order, BiIndex::new(e.clone(), e)?, Rational::one())
}

pub fn duality_negation_check(spec: &PotentialSpec, i: usize, j: usize) -> Result<DualityCheck> {
    let dual = match spec {
        PotentialSpec::DualOf(inner) => (**inner).clone(),
        other => PotentialSpec::DualOf(Box::new(other.clone())),
    };
    let order = LaplacianBudget::required_order(3);
    let value_on = |s: &PotentialSpec| -> Result<Rational> {
        let m = metric_from_potential(&s.potential(order)?)?;
        let phi = abs_sq_product(m.dim(), order, i, j)?;
        power_at_origin(Operator::Kahler(&m), &phi, 3)
    };
    Ok(DualityCheck {
        spec: spec.to_string(),
        dual: dual.to_string(),
        i,
        j,
        value: value_on(spec)?,
        dual_value: value_on(&dual)?,
    })
}

/// `Delta^3` of the two frame witnesses, the Einstein constant, and the four
/// second derivatives of the inverse metric that enter `Delta^3(|w_1 w_2|^2)(0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reproduction {
    pub lambda: Rational,
    /// Frame variables `w_1, w_2` (0-based).
    pub frame: Vec<usize>,
    /// `Delta^3(|w_1|^4)(0)`.
    pub d3_z1_4: Rational,
    /// `Delta^3(|w_1|^4)(0) - 12 lambda`.
    pub comp1_offset: Rational,
    /// `Delta^3(|w_1 w_2|^2)(0)`.
    pub d3_z1z2_sq: Option<Rational>,
    /// `[d_1 dbar_1 g^{2 2bar}, d_2 dbar_2 g^{1 1bar}, d_2 dbar_1 g^{1 2bar}, d_1 dbar_2 g^{2 1bar}]` at 0.
    pub cross_terms: Option<[Rational; 4]>,
    /// `Delta^3(|w_1|^4)(0) = 2 Delta^3(|w_1 w_2|^2)(0)`.
    pub relation_holds: Option<bool>,
}

impl Reproduction {
    /// `+1` when `Delta^3(|w_1|^4)(0) = 12 lambda + 16`, `-1` for `12 lambda - 16`.
    pub fn comp1_sign(&self) -> Option<i32> {
        if self.comp1_offset == int(16) {
            Some(1)
        } else if self.comp1_offset == int(-16) {
            Some(-1)
        } else {
            None
        }
    }

    /// `Delta^3(|w_1 w_2|^2)(0) = 6 lambda`.
    pub fn comp2_holds(&self) -> Option<bool> {
        self.d3_z1z2_sq.as_ref().map(|v| *v == int(6) * &self.lambda)
    }
}

pub fn reproduction_values(spec: &PotentialSpec) -> Result<Reproduction> {
    let order = LaplacianBudget::required_order(3);
    let m = metric_from_potential(&spec.potential(order)?)?;
    reproduction_from_metric(spec, &m)
}

fn reproduction_from_metric(spec: &PotentialSpec, m: &MetricJet) -> Result<Reproduction> {
    let e = m.einstein()?;
    if !e.is_einstein {
        return Err(Error::NotEinstein);
    }
    let m = &m.truncated(4)?;
    let lambda = e.ratio;
    let n = m.dim();
    let order = m.order();
    let priority = spec.variable_priority();
    let w1 = priority[0];
    let d3 = |phi: &Jet| power_at_origin(Operator::Kahler(m), phi, 3);
    let d3_z1_4 = d3(&abs_sq_product(n, order, w1, w1)?)?;
    let comp1_offset = &d3_z1_4 - int(12) * &lambda;
    let (mut frame, mut d3_z1z2_sq, mut cross_terms, mut relation_holds) = (vec![w1], None, None, None);
    if n >= 2 {
        let w2 = priority[1];
        frame.push(w2);
        let value = d3(&abs_sq_product(n, order, w1, w2)?)?;
        relation_holds = Some(d3_z1_4 == int(2) * &value);
        d3_z1z2_sq = Some(value);
        let second = |a: usize, b: usize, l: usize, h: usize| -> Result<Rational> {
            m.g_inv().get(a, b).diff_hol(l)?.diff_anti(h)?.eval0()
        };
        cross_terms = Some([
            second(w2, w2, w1, w1)?,
            second(w1, w1, w2, w2)?,
            second(w1, w2, w2, w1)?,
            second(w2, w1, w1, w2)?,
        ]);
    }
    Ok(Reproduction { lambda, frame, d3_z1_4, comp1_offset, d3_z1z2_sq, cross_terms, relation_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> PotentialSpec {
        s.parse().unwrap()
    }

    fn bi(hol: &[u32], anti: &[u32]) -> BiIndex {
        BiIndex::new(hol.to_vec(), anti.to_vec()).unwrap()
    }

    #[test]
    fn polynomial_display() {
        let p = DeltaPolynomial::new(3, vec![int(8), int(-10)]).unwrap();
        assert_eq!(p.to_string(), "X^3 - 10X^2 + 8X");
        assert_eq!(DeltaPolynomial::monomial(1).to_string(), "X");
        let q = DeltaPolynomial::new(2, vec![rat(-1, 2)]).unwrap();
        assert_eq!(q.to_string(), "X^2 - (1/2)X");
        assert_eq!(p.coefficients(), vec![int(0), int(8), int(-10), int(1)]);
    }

    #[test]
    fn family_contents() {
        let f = build_test_family(1, 3);
        let has = |f: &TestFamily, i: &BiIndex| f.rows.iter().any(|r| r.function.as_monomial() == Some(i));
        for m in 1..=3 {
            assert!(has(&f, &bi(&[m], &[m])));
        }
        assert!(has(&f, &bi(&[2], &[1])));
        let f2 = build_test_family(2, 3);
        assert!(has(&f2, &bi(&[2, 0], &[2, 0])));
        assert!(has(&f2, &bi(&[1, 1], &[1, 1])));
        let f4 = build_test_family(4, 3);
        assert!(f4.rows.iter().all(|r| r.function.terms[0].0.support().len() <= 3));
        assert!(!has(&f4, &bi(&[1, 1, 1, 0], &[0, 0, 0, 1])));
        assert!(has(&f4, &bi(&[1, 1, 1, 0], &[0, 0, 0, 0])));
    }

    #[test]
    fn family_order_puts_frame_first() {
        let f = build_test_family_with_priority(4, 2, &[0, 3, 1, 2]);
        let firsts: Vec<&BiIndex> = f.rows.iter().take(2).map(|r| &r.function.terms[0].0).collect();
        assert_eq!(firsts, vec![&bi(&[1, 0, 0, 0], &[1, 0, 0, 0]), &bi(&[0, 0, 0, 1], &[0, 0, 0, 1])]);
        let last = &f.rows.last().unwrap().function.terms[0].0;
        assert!(!last.is_balanced());
    }

    #[test]
    fn disc_infers_cubic() {
        let report = verify_property(&spec("hyp:1"), &VerifyConfig::new(3)).unwrap();
        let p3 = match &report.verdicts[2].status {
            VerdictStatus::Consistent(p) => p.clone(),
            other => panic!("{other:?}"),
        };
        assert_eq!(p3.to_string(), "X^3 - 10X^2 + 8X");
    }

    #[test]
    fn polydisc_refuted_with_frame_witness() {
        let report = verify_property(&spec("polydisc:2"), &VerifyConfig::new(3)).unwrap();
        assert_eq!(report.refuted_at(), Some(3));
        let VerdictStatus::Refuted(rows) = &report.verdicts[2].status else { panic!() };
        let found: Vec<&BiIndex> = rows.iter().map(|r| r.function.as_monomial().unwrap()).collect();
        assert_eq!(found, vec![&bi(&[2, 0], &[2, 0]), &bi(&[1, 1], &[1, 1])]);
        assert_eq!(rows[0].forced(), Some((2, int(-10))));
        assert_eq!(rows[1].forced(), Some((2, int(-6))));
    }

    #[test]
    fn product_refuted_at_two() {
        let report = verify_property(&spec("product(flat:1,hyp:1)"), &VerifyConfig::new(2)).unwrap();
        assert_eq!(report.refuted_at(), Some(2));
        let VerdictStatus::Refuted(rows) = &report.verdicts[1].status else { panic!() };
        assert_eq!(rows[0].forced(), Some((1, int(0))));
        assert_eq!(rows[1].forced(), Some((1, int(-2))));
        assert!(report.reproduction.is_none());
    }

    #[test]
    fn witness_soundness_check_is_strict() {
        let row = |kahler: i64, m: &[i64]| EvaluatedRow {
            function: TestFunction::monomial(bi(&[1], &[1])),
            kahler: int(kahler),
            moments: m.iter().map(|&x| int(x)).collect(),
        };
        assert!(witness_is_sound(&[row(1, &[0, 0, 0])]));
        assert!(!witness_is_sound(&[row(0, &[0, 0, 0])]));
        assert!(!witness_is_sound(&[row(1, &[0, 1, 0])]));
        assert!(witness_is_sound(&[row(3, &[1, 0, 0]), row(5, &[2, 0, 0])]));
        assert!(!witness_is_sound(&[row(3, &[1, 0, 0]), row(6, &[2, 0, 0])]));
        assert!(!witness_is_sound(&[row(3, &[1, 0, 0]), row(6, &[0, 1, 0])]));
    }

    #[test]
    fn dual_potential_examples() {
        let hyp = spec("hyp:2").potential(8).unwrap();
        assert_eq!(dual_potential(&hyp).unwrap(), spec("fs:2").potential(8).unwrap());
        let t = spec("type1:2,2").potential(6).unwrap();
        assert_eq!(dual_potential(&t).unwrap(), spec("type1dual:2,2").potential(6).unwrap());
        assert_eq!(dual_potential(&dual_potential(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn duality_on_the_disc() {
        let c = duality_negation_check(&spec("hyp:1"), 0, 0).unwrap();
        assert_eq!((c.value.clone(), c.dual_value.clone()), (int(-40), int(40)));
        assert!(c.pass());
        assert!(duality_negation_check(&spec("flat:1"), 0, 0).unwrap().pass());
    }

    #[test]
    fn polydisc_reproduction() {
        let r = reproduction_values(&spec("polydisc:2")).unwrap();
        assert_eq!(r.lambda, int(-2));
        assert_eq!(r.d3_z1_4, int(-40));
        assert_eq!(r.d3_z1z2_sq, Some(int(-12)));
        assert_eq!(r.relation_holds, Some(false));
        assert_eq!(r.comp1_sign(), Some(-1));
        assert_eq!(r.comp2_holds(), Some(true));
    }

    #[test]
    fn random_functions_are_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(random_test_function(&mut a, 3, 3, 6), random_test_function(&mut b, 3, 3, 6));
    }
}
