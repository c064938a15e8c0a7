//! The dual Steenrod algebra in the Milnor basis at p = 2 and odd primes:
//! products, coproduct, conjugation by two independent algorithms, and the
//! Dyer-Lashof generator formulas with Cartan expansion and instability rules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraPresentation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SteenrodError {
    #[error("tau generators do not exist at p = 2")]
    TauAtPrimeTwo,
    #[error("elements over different primes")]
    MixedPrimes,
    #[error("no generator formula, Cartan expansion, or instability rule applies: {0}")]
    UnknownAction(String),
    #[error("Cartan expansion needs an unknown operation value: {0}")]
    IncompleteActionData(String),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// Monomial xi_1^{e_1} xi_2^{e_2} ... tau_{j_1} tau_{j_2} ... in the Milnor
/// basis. `xi[k]` is the exponent of xi_{k+1} (no trailing zeros); `tau` is a
/// strictly increasing list of tau indices, empty at p = 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MilnorMonomial {
    pub xi: Vec<u32>,
    pub tau: Vec<u32>,
}

impl MilnorMonomial {
    pub fn unit() -> Self {
        MilnorMonomial { xi: Vec::new(), tau: Vec::new() }
    }

    pub fn xi_power(i: u32, e: u32) -> Self {
        assert!(i >= 1, "xi indices start at 1");
        if e == 0 {
            return MilnorMonomial::unit();
        }
        let mut xi = vec![0; i as usize];
        xi[i as usize - 1] = e;
        MilnorMonomial { xi, tau: Vec::new() }
    }

    pub fn tau_single(j: u32) -> Self {
        MilnorMonomial { xi: Vec::new(), tau: vec![j] }
    }

    fn normalize(mut self) -> Self {
        while self.xi.last() == Some(&0) {
            self.xi.pop();
        }
        self
    }

    pub fn is_unit(&self) -> bool {
        self.xi.iter().all(|&e| e == 0) && self.tau.is_empty()
    }

    /// Number of generator letters; the monomial is decomposable iff >= 2.
    pub fn letter_count(&self) -> u32 {
        self.xi.iter().sum::<u32>() + self.tau.len() as u32
    }

    pub fn degree(&self, p: u32) -> u64 {
        let mut d: u64 = 0;
        for (k, &e) in self.xi.iter().enumerate() {
            let i = (k + 1) as u32;
            let gen = if p == 2 {
                (1u64 << i) - 1
            } else {
                2 * ((p as u64).pow(i) - 1)
            };
            d += e as u64 * gen;
        }
        for &j in &self.tau {
            d += 2 * (p as u64).pow(j) - 1;
        }
        d
    }

    pub fn display(&self) -> String {
        let mut parts = Vec::new();
        for &j in &self.tau {
            parts.push(format!("tau{j}"));
        }
        for (k, &e) in self.xi.iter().enumerate() {
            if e == 1 {
                parts.push(format!("xi{}", k + 1));
            } else if e > 1 {
                parts.push(format!("xi{}^{}", k + 1, e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Inversions between two sorted lists: pairs (x in a, y in b) with y < x.
fn merge_inversions(a: &[u32], b: &[u32]) -> u64 {
    let mut inv = 0u64;
    for &x in a {
        inv += b.iter().filter(|&&y| y < x).count() as u64;
    }
    inv
}

/// F_p-linear combination of Milnor monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSteenrodElement {
    p: u32,
    terms: BTreeMap<MilnorMonomial, u32>,
}

impl DualSteenrodElement {
    pub fn zero(p: u32) -> Self {
        DualSteenrodElement { p, terms: BTreeMap::new() }
    }

    pub fn one(p: u32) -> Self {
        Self::monomial(p, MilnorMonomial::unit(), 1)
    }

    pub fn monomial(p: u32, m: MilnorMonomial, c: i64) -> Self {
        let c = c.rem_euclid(p as i64) as u32;
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(m.normalize(), c);
        }
        DualSteenrodElement { p, terms }
    }

    pub fn xi(p: u32, i: u32) -> Self {
        Self::monomial(p, MilnorMonomial::xi_power(i, 1), 1)
    }

    pub fn tau(p: u32, j: u32) -> Result<Self, SteenrodError> {
        if p == 2 {
            return Err(SteenrodError::TauAtPrimeTwo);
        }
        Ok(Self::monomial(p, MilnorMonomial::tau_single(j), 1))
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn terms(&self) -> &BTreeMap<MilnorMonomial, u32> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self, SteenrodError> {
        if self.p != other.p {
            return Err(SteenrodError::MixedPrimes);
        }
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert(0);
            *e = (*e + c) % self.p;
            if *e == 0 {
                terms.remove(m);
            }
        }
        Ok(DualSteenrodElement { p: self.p, terms })
    }

    pub fn scale(&self, c: i64) -> Self {
        let c = c.rem_euclid(self.p as i64) as u32;
        let terms = self
            .terms
            .iter()
            .map(|(m, &v)| (m.clone(), v * c % self.p))
            .filter(|&(_, v)| v != 0)
            .collect();
        DualSteenrodElement { p: self.p, terms }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, SteenrodError> {
        if self.p != other.p {
            return Err(SteenrodError::MixedPrimes);
        }
        let p = self.p;
        let mut out = DualSteenrodElement::zero(p);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                // tau letters square to zero
                if ma.tau.iter().any(|j| mb.tau.contains(j)) {
                    continue;
                }
                let sign = if merge_inversions(&ma.tau, &mb.tau) % 2 == 0 { 1i64 } else { -1 };
                let mut xi = vec![0u32; ma.xi.len().max(mb.xi.len())];
                for (k, &e) in ma.xi.iter().enumerate() {
                    xi[k] += e;
                }
                for (k, &e) in mb.xi.iter().enumerate() {
                    xi[k] += e;
                }
                let mut tau: Vec<u32> = ma.tau.iter().chain(&mb.tau).copied().collect();
                tau.sort_unstable();
                let m = MilnorMonomial { xi, tau }.normalize();
                let c = (ca as i64 * cb as i64 * sign).rem_euclid(p as i64) as u32;
                out = out.add(&DualSteenrodElement::monomial(p, m, c as i64))?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, SteenrodError> {
        let mut acc = DualSteenrodElement::one(self.p);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn homogeneous_degree(&self) -> Option<u64> {
        let mut it = self.terms.keys().map(|m| m.degree(self.p));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, &c)| {
                if m.is_unit() {
                    format!("{c}")
                } else if c == 1 {
                    m.display()
                } else {
                    format!("{c}*{}", m.display())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Element of A_* (x) A_*; the product carries the Koszul sign
/// (a (x) b)(c (x) d) = (-1)^{|b||c|} ac (x) bd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElement {
    p: u32,
    terms: BTreeMap<(MilnorMonomial, MilnorMonomial), u32>,
}

impl TensorElement {
    pub fn zero(p: u32) -> Self {
        TensorElement { p, terms: BTreeMap::new() }
    }

    pub fn one(p: u32) -> Self {
        Self::pure(p, MilnorMonomial::unit(), MilnorMonomial::unit(), 1)
    }

    pub fn pure(p: u32, left: MilnorMonomial, right: MilnorMonomial, c: i64) -> Self {
        let c = c.rem_euclid(p as i64) as u32;
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert((left.normalize(), right.normalize()), c);
        }
        TensorElement { p, terms }
    }

    pub fn terms(&self) -> &BTreeMap<(MilnorMonomial, MilnorMonomial), u32> {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Result<Self, SteenrodError> {
        if self.p != other.p {
            return Err(SteenrodError::MixedPrimes);
        }
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert(0);
            *e = (*e + c) % self.p;
            if *e == 0 {
                terms.remove(m);
            }
        }
        Ok(TensorElement { p: self.p, terms })
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, SteenrodError> {
        if self.p != other.p {
            return Err(SteenrodError::MixedPrimes);
        }
        let p = self.p;
        let mut out = TensorElement::zero(p);
        for ((a, b), &cab) in &self.terms {
            for ((c, d), &ccd) in &other.terms {
                let swap = (b.degree(p) % 2) * (c.degree(p) % 2);
                let ac = DualSteenrodElement::monomial(p, a.clone(), 1)
                    .multiply(&DualSteenrodElement::monomial(p, c.clone(), 1))?;
                let bd = DualSteenrodElement::monomial(p, b.clone(), 1)
                    .multiply(&DualSteenrodElement::monomial(p, d.clone(), 1))?;
                for (ml, &cl) in ac.terms() {
                    for (mr, &cr) in bd.terms() {
                        let sign = if swap % 2 == 0 { 1i64 } else { -1 };
                        let coeff =
                            (cab as i64 * ccd as i64 * cl as i64 * cr as i64 * sign).rem_euclid(p as i64);
                        out = out.add(&TensorElement::pure(p, ml.clone(), mr.clone(), coeff))?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, SteenrodError> {
        let mut acc = TensorElement::one(self.p);
        for _ in 0..e {
            acc = acc.multiply(self)?;
        }
        Ok(acc)
    }
}

/// psi(xi_n) = sum_{i=0}^{n} xi_{n-i}^{p^i} (x) xi_i.
fn coproduct_xi(p: u32, n: u32) -> Result<TensorElement, SteenrodError> {
    let mut out = TensorElement::zero(p);
    for i in 0..=n {
        let left = if i == n {
            MilnorMonomial::unit()
        } else {
            MilnorMonomial::xi_power(n - i, p.pow(i))
        };
        let right = if i == 0 { MilnorMonomial::unit() } else { MilnorMonomial::xi_power(i, 1) };
        out = out.add(&TensorElement::pure(p, left, right, 1))?;
    }
    Ok(out)
}

/// psi(tau_n) = tau_n (x) 1 + sum_{i=0}^{n} xi_{n-i}^{p^i} (x) tau_i.
fn coproduct_tau(p: u32, n: u32) -> Result<TensorElement, SteenrodError> {
    if p == 2 {
        return Err(SteenrodError::TauAtPrimeTwo);
    }
    let mut out = TensorElement::pure(p, MilnorMonomial::tau_single(n), MilnorMonomial::unit(), 1);
    for i in 0..=n {
        let left = if i == n {
            MilnorMonomial::unit()
        } else {
            MilnorMonomial::xi_power(n - i, p.pow(i))
        };
        out = out.add(&TensorElement::pure(p, left, MilnorMonomial::tau_single(i), 1))?;
    }
    Ok(out)
}

/// The coproduct, extended multiplicatively over monomials.
pub fn coproduct(x: &DualSteenrodElement) -> Result<TensorElement, SteenrodError> {
    let p = x.prime();
    let mut out = TensorElement::zero(p);
    for (m, &c) in x.terms() {
        let mut acc = TensorElement::one(p);
        for (k, &e) in m.xi.iter().enumerate() {
            if e > 0 {
                acc = acc.multiply(&coproduct_xi(p, (k + 1) as u32)?.pow(e)?)?;
            }
        }
        for &j in &m.tau {
            acc = acc.multiply(&coproduct_tau(p, j)?)?;
        }
        // scale by c
        let scaled = TensorElement {
            p,
            terms: acc
                .terms
                .iter()
                .map(|(k, &v)| (k.clone(), v * c % p))
                .filter(|&(_, v)| v != 0)
                .collect(),
        };
        out = out.add(&scaled)?;
    }
    Ok(out)
}

/// chi(xi_n) by the antipode recursion
/// chi(xi_n) = - sum_{i=0}^{n-1} xi_{n-i}^{p^i} chi(xi_i), chi(xi_0) = 1.
pub fn conjugate_xi(p: u32, n: u32) -> Result<DualSteenrodElement, SteenrodError> {
    let mut chi: Vec<DualSteenrodElement> = vec![DualSteenrodElement::one(p)];
    for m in 1..=n {
        let mut acc = DualSteenrodElement::zero(p);
        for i in 0..m {
            let factor =
                DualSteenrodElement::monomial(p, MilnorMonomial::xi_power(m - i, p.pow(i)), 1);
            acc = acc.add(&factor.multiply(&chi[i as usize])?)?;
        }
        chi.push(acc.scale(-1));
    }
    Ok(chi.swap_remove(n as usize))
}

/// chi(tau_n) = -tau_n - sum_{i=0}^{n-1} xi_{n-i}^{p^i} chi(tau_i).
pub fn conjugate_tau(p: u32, n: u32) -> Result<DualSteenrodElement, SteenrodError> {
    if p == 2 {
        return Err(SteenrodError::TauAtPrimeTwo);
    }
    let mut chi: Vec<DualSteenrodElement> = Vec::new();
    for m in 0..=n {
        let mut acc = DualSteenrodElement::monomial(p, MilnorMonomial::tau_single(m), 1);
        for i in 0..m {
            let factor =
                DualSteenrodElement::monomial(p, MilnorMonomial::xi_power(m - i, p.pow(i)), 1);
            acc = acc.add(&factor.multiply(&chi[i as usize])?)?;
        }
        chi.push(acc.scale(-1));
    }
    Ok(chi.swap_remove(n as usize))
}

/// The conjugation, extended as an algebra map (the algebra is commutative).
pub fn conjugate(x: &DualSteenrodElement) -> Result<DualSteenrodElement, SteenrodError> {
    let p = x.prime();
    let mut out = DualSteenrodElement::zero(p);
    for (m, &c) in x.terms() {
        let mut acc = DualSteenrodElement::one(p);
        for (k, &e) in m.xi.iter().enumerate() {
            if e > 0 {
                acc = acc.multiply(&conjugate_xi(p, (k + 1) as u32)?.pow(e)?)?;
            }
        }
        for &j in &m.tau {
            acc = acc.multiply(&conjugate_tau(p, j)?)?;
        }
        out = out.add(&acc.scale(c as i64))?;
    }
    Ok(out)
}

/// chi(xi_i) as a sum over compositions alpha of i of
/// (-1)^{l(alpha)} prod_n xi_{alpha(n)}^{p^{sigma_n}},
/// where sigma_n is the sum of the parts before position n. Signs vanish at
/// p = 2. Independent of the antipode recursion; the two must agree.
pub fn conjugate_compositions(p: u32, i: u32) -> Result<DualSteenrodElement, SteenrodError> {
    fn rec(
        p: u32,
        remaining: u32,
        sigma: u32,
        current: &DualSteenrodElement,
        length: u32,
        out: &mut DualSteenrodElement,
    ) -> Result<(), SteenrodError> {
        if remaining == 0 {
            let sign = if length % 2 == 0 { 1 } else { -1 };
            *out = out.add(&current.scale(sign))?;
            return Ok(());
        }
        for part in 1..=remaining {
            let factor = DualSteenrodElement::monomial(
                p,
                MilnorMonomial::xi_power(part, p.pow(sigma)),
                1,
            );
            let next = current.multiply(&factor)?;
            rec(p, remaining - part, sigma + part, &next, length + 1, out)?;
        }
        Ok(())
    }
    let mut out = DualSteenrodElement::zero(p);
    rec(p, i, 0, &DualSteenrodElement::one(p), 0, &mut out)?;
    Ok(out)
}

/// True iff chi(xi_i) agrees with a unit multiple of xi_i modulo decomposables
/// (sums of products of positive-degree elements).
pub fn is_decomposable_difference(p: u32, i: u32) -> Result<bool, SteenrodError> {
    let chi = conjugate_xi(p, i)?;
    let gen = MilnorMonomial::xi_power(i, 1);
    let mut saw_unit_multiple = false;
    for (m, &c) in chi.terms() {
        if *m == gen {
            saw_unit_multiple = c % p != 0;
        } else if m.letter_count() < 2 {
            return Ok(false);
        }
    }
    Ok(saw_unit_multiple || i == 0)
}

/// Named generators of the dual Steenrod algebra and their conjugates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family", content = "index", rename_all = "kebab-case")]
pub enum ASClass {
    Xi(u32),
    XiBar(u32),
    Tau(u32),
    TauBar(u32),
}

impl ASClass {
    pub fn degree(&self, p: u32) -> u64 {
        match *self {
            ASClass::Xi(i) | ASClass::XiBar(i) => {
                if p == 2 {
                    (1u64 << i) - 1
                } else {
                    2 * ((p as u64).pow(i) - 1)
                }
            }
            ASClass::Tau(j) | ASClass::TauBar(j) => 2 * (p as u64).pow(j) - 1,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ASClass::Xi(i) => format!("xi{i}"),
            ASClass::XiBar(i) => format!("xi{i}b"),
            ASClass::Tau(j) => format!("tau{j}"),
            ASClass::TauBar(j) => format!("tau{j}b"),
        }
    }

    /// The class as an explicit element.
    pub fn element(&self, p: u32) -> Result<DualSteenrodElement, SteenrodError> {
        match *self {
            ASClass::Xi(i) => Ok(DualSteenrodElement::xi(p, i)),
            ASClass::XiBar(i) => conjugate_xi(p, i),
            ASClass::Tau(j) => DualSteenrodElement::tau(p, j),
            ASClass::TauBar(j) => conjugate_tau(p, j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OpKind {
    Q,
    BetaQ,
}

/// A Dyer-Lashof operation Q^s or the composite betaQ^s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DLOperation {
    pub kind: OpKind,
    pub superscript: u32,
}

impl DLOperation {
    pub fn q(s: u32) -> Self {
        DLOperation { kind: OpKind::Q, superscript: s }
    }

    pub fn beta_q(s: u32) -> Self {
        DLOperation { kind: OpKind::BetaQ, superscript: s }
    }

    pub fn display(&self) -> String {
        match self.kind {
            OpKind::Q => format!("Q^{}", self.superscript),
            OpKind::BetaQ => format!("betaQ^{}", self.superscript),
        }
    }

    /// Internal-degree shift of the operation.
    pub fn degree_shift(&self, p: u32) -> i64 {
        let base = if p == 2 {
            self.superscript as i64
        } else {
            2 * self.superscript as i64 * (p as i64 - 1)
        };
        match self.kind {
            OpKind::Q => base,
            OpKind::BetaQ => base - 1,
        }
    }
}

/// Value of a generator formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SteinbergerValue {
    Zero,
    Class { class: ASClass },
    /// Top-operation case Q^{|x|} x = x^2 (p = 2) or Q^{|x|/2} x = x^p.
    PthPower { class: ASClass },
}

/// A generator-formula output; when `sign_known` is false the class is
/// defined only up to a unit and `sign` is the nominal value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedResult {
    pub value: SteinbergerValue,
    pub sign: i8,
    pub sign_known: bool,
}

impl SignedResult {
    fn known(value: SteinbergerValue) -> Self {
        SignedResult { value, sign: 1, sign_known: true }
    }

    fn unsigned(value: SteinbergerValue, sign: i8) -> Self {
        SignedResult { value, sign, sign_known: false }
    }
}

/// rho(i) = (p^i - 1)/(p - 1), the odd-prime generator superscript.
pub fn rho(p: u32, i: u32) -> u32 {
    (p.pow(i) - 1) / (p - 1)
}

/// The generator formulas for the Dyer-Lashof action on the dual Steenrod
/// algebra, with instability fall-through. At p = 2 signs are determined; at
/// odd primes results carry sign_known = false.
pub fn steinberger(p: u32, op: DLOperation, target: ASClass) -> Result<SignedResult, SteenrodError> {
    let s = op.superscript;
    let deg = target.degree(p);
    if p == 2 {
        if op.kind == OpKind::BetaQ {
            return Err(SteenrodError::UnknownAction("betaQ at p = 2".into()));
        }
        // instability: Q^s z = 0 for s < |z|, the square for s = |z|
        if (s as u64) < deg {
            return Ok(SignedResult::known(SteinbergerValue::Zero));
        }
        if s as u64 == deg {
            return Ok(SignedResult::known(SteinbergerValue::PthPower { class: target }));
        }
        match target {
            // Q^{2^i - 2}(xi_1) = xibar_i (xi_1 = xibar_1)
            ASClass::Xi(1) | ASClass::XiBar(1) => {
                for i in 2..=40u32 {
                    let sup = (1u64 << i) - 2;
                    if sup == s as u64 {
                        return Ok(SignedResult::known(SteinbergerValue::Class {
                            class: ASClass::XiBar(i),
                        }));
                    }
                    if sup > s as u64 {
                        break;
                    }
                }
                // Q^{2^1}(xibar_1) = xibar_2 is the i = 2 case above (2^2-2 = 2^1)
                Err(SteenrodError::UnknownAction(format!("{} on xi1", op.display())))
            }
            // Q^{2^i}(xibar_i) = xibar_{i+1}
            ASClass::XiBar(i) if s as u64 == 1u64 << i => Ok(SignedResult::known(
                SteinbergerValue::Class { class: ASClass::XiBar(i + 1) },
            )),
            _ => Err(SteenrodError::UnknownAction(format!(
                "{} on {}",
                op.display(),
                target.label()
            ))),
        }
    } else {
        if matches!(target, ASClass::Tau(_) | ASClass::TauBar(_)) && p == 2 {
            return Err(SteenrodError::TauAtPrimeTwo);
        }
        // instability for Q: Q^s z = 0 when 2s < |z|; top operation when 2s = |z|
        if op.kind == OpKind::Q {
            if (2 * s as u64) < deg {
                return Ok(SignedResult::known(SteinbergerValue::Zero));
            }
            if 2 * s as u64 == deg {
                return Ok(SignedResult::known(SteinbergerValue::PthPower { class: target }));
            }
        }
        match (op.kind, target) {
            // Q^{rho(i)} tau_0 = (-1)^i taubar_i
            (OpKind::Q, ASClass::Tau(0) | ASClass::TauBar(0)) if is_rho(p, s).is_some() => {
                let i = is_rho(p, s).unwrap();
                let sign = if i % 2 == 0 { 1 } else { -1 };
                Ok(SignedResult::unsigned(
                    SteinbergerValue::Class { class: ASClass::TauBar(i) },
                    sign,
                ))
            }
            // betaQ^{rho(i)} tau_0 = (-1)^i xibar_i
            (OpKind::BetaQ, ASClass::Tau(0) | ASClass::TauBar(0)) if is_rho(p, s).is_some() => {
                let i = is_rho(p, s).unwrap();
                let sign = if i % 2 == 0 { 1 } else { -1 };
                Ok(SignedResult::unsigned(
                    SteinbergerValue::Class { class: ASClass::XiBar(i) },
                    sign,
                ))
            }
            // Q^{p^j}(taubar_j) = taubar_{j+1}
            (OpKind::Q, ASClass::TauBar(j)) if s as u64 == (p as u64).pow(j) => Ok(
                SignedResult::unsigned(SteinbergerValue::Class { class: ASClass::TauBar(j + 1) }, 1),
            ),
            // betaQ^{p^i} xibar_i = xibar_{i+1}
            (OpKind::BetaQ, ASClass::XiBar(i)) if i > 0 && s as u64 == (p as u64).pow(i) => Ok(
                SignedResult::unsigned(SteinbergerValue::Class { class: ASClass::XiBar(i + 1) }, 1),
            ),
            _ => Err(SteenrodError::UnknownAction(format!(
                "{} on {}",
                op.display(),
                target.label()
            ))),
        }
    }
}

/// If s = rho(p, i) for some i >= 1, return i.
fn is_rho(p: u32, s: u32) -> Option<u32> {
    let mut acc: u64 = 0;
    let mut power: u64 = 1;
    for i in 1..=40u32 {
        acc += power;
        power *= p as u64;
        if acc == s as u64 {
            return Some(i);
        }
        if acc > s as u64 {
            return None;
        }
    }
    None
}

/// Known or unknown value of a Dyer-Lashof operation on a ring element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QValue {
    Known(AlgebraElement),
    Unknown,
}

/// Cartan expansion of Q^n on an element of a graded-commutative algebra.
///
/// `lookup(s, gen_index)` supplies Q^s on each generator beyond the
/// instability range; instability zeros and the top p-th power are filled in
/// automatically. A term whose other factor is known to vanish never needs
/// its unknown partner; if a genuinely needed value is unknown the expansion
/// fails with `IncompleteActionData`.
pub fn cartan_expand(
    pres: &AlgebraPresentation,
    n: u32,
    x: &AlgebraElement,
    lookup: &dyn Fn(u32, usize) -> QValue,
) -> Result<AlgebraElement, SteenrodError> {
    let mut out = pres.zero();
    for (mono, &c) in x.terms() {
        let mut letters = Vec::new();
        for (idx, &e) in mono.exps.iter().enumerate() {
            for _ in 0..e {
                letters.push(idx);
            }
        }
        match q_letters(pres, n, &letters, lookup)? {
            QValue::Known(v) => out = out.add(&v.scale(c))?,
            QValue::Unknown => {
                return Err(SteenrodError::IncompleteActionData(format!(
                    "Q^{n} on {}",
                    mono.display(pres)
                )))
            }
        }
    }
    Ok(out)
}

fn q_letters(
    pres: &AlgebraPresentation,
    n: u32,
    letters: &[usize],
    lookup: &dyn Fn(u32, usize) -> QValue,
) -> Result<QValue, SteenrodError> {
    if letters.is_empty() {
        // Q^0(1) = 1, higher operations vanish on the unit
        return Ok(QValue::Known(if n == 0 { pres.one() } else { pres.zero() }));
    }
    if letters.len() == 1 {
        return Ok(q_generator(pres, n, letters[0], lookup));
    }
    let head = letters[0];
    let rest = &letters[1..];
    let mut acc = pres.zero();
    let mut unknown = false;
    for i in 0..=n {
        let qx = q_generator(pres, i, head, lookup);
        let qy = q_letters(pres, n - i, rest, lookup)?;
        match (qx, qy) {
            (QValue::Known(a), QValue::Known(b)) => {
                acc = acc.add(&a.multiply(&b)?)?;
            }
            (QValue::Known(a), QValue::Unknown) if a.is_zero() => {}
            (QValue::Unknown, QValue::Known(b)) if b.is_zero() => {}
            _ => unknown = true,
        }
    }
    if unknown {
        Ok(QValue::Unknown)
    } else {
        Ok(QValue::Known(acc))
    }
}

fn q_generator(
    pres: &AlgebraPresentation,
    s: u32,
    idx: usize,
    lookup: &dyn Fn(u32, usize) -> QValue,
) -> QValue {
    let p = pres.prime();
    let d = pres.generators()[idx].internal_degree;
    let g = || {
        let mut exps = vec![0u32; pres.generators().len()];
        exps[idx] = 1;
        AlgebraElement::from_terms(pres, vec![(crate::algebra::Monomial { exps }, 1)])
    };
    if p == 2 {
        if s < d {
            return QValue::Known(pres.zero());
        }
        if s == d {
            return QValue::Known(g().pow(2).unwrap_or_else(|_| pres.zero()));
        }
    } else {
        if 2 * s < d {
            return QValue::Known(pres.zero());
        }
        if 2 * s == d {
            return QValue::Known(g().pow(p).unwrap_or_else(|_| pres.zero()));
        }
    }
    lookup(s, idx)
}
