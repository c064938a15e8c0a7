//! Koszul complexes of regular sequences, tensoring with a module, and
//! bigraded Tor tables with named basis classes.
//!
//! Only sequences whose entries are `p` or distinct polynomial generators are
//! accepted; regularity is then automatic and never has to be certified at
//! run time.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraPresentation, ModulePresentation, Monomial};
use crate::fp::{self, FpMatrix, SubquotientBasis};

#[derive(Debug, Error)]
pub enum KoszulError {
    #[error("unsupported sequence entry `{0}`: only p and distinct polynomial generators are allowed")]
    UnsupportedEntry(String),
    #[error("module is over a different ring than the sequence")]
    IncompatibleModule,
    #[error("sequences differ, cannot induce a map of Tor tables")]
    IncompatibleSequence,
    #[error("requested internal degree {0} exceeds the ring truncation {1}")]
    TruncationExceeded(u32, u32),
    #[error("operation requires the trivial module")]
    NontrivialModule,
    #[error("koszul differential does not square to zero (internal invariant)")]
    DifferentialNotSquareZero,
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error(transparent)]
    Linear(#[from] crate::fp::FpError),
}

/// One entry of a regular sequence: the prime itself, or a ring generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceEntry {
    P,
    Gen(String),
}

impl SequenceEntry {
    pub fn internal_degree(&self, ring: &AlgebraPresentation) -> u32 {
        match self {
            SequenceEntry::P => 0,
            SequenceEntry::Gen(name) => {
                let idx = ring.generator_index(name).expect("validated generator");
                ring.generators()[idx].internal_degree
            }
        }
    }

    /// Name of the ring element (`2`, `v`, `x3`, ...).
    pub fn element_name(&self, prime: u32) -> String {
        match self {
            SequenceEntry::P => prime.to_string(),
            SequenceEntry::Gen(name) => name.clone(),
        }
    }

    /// ASCII-safe label of the associated Tor_1 class (`2b`, `vb`, `x3b`, ...).
    pub fn bar_label(&self, prime: u32) -> String {
        format!("{}b", self.element_name(prime))
    }

    pub fn as_element(&self, ring: &AlgebraPresentation) -> AlgebraElement {
        match self {
            SequenceEntry::P => AlgebraElement::constant(ring, ring.prime() as i64),
            SequenceEntry::Gen(name) => ring.generator_element(name).expect("validated generator"),
        }
    }
}

/// A regular sequence in the supported regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularSequence {
    ring: AlgebraPresentation,
    entries: Vec<SequenceEntry>,
}

impl RegularSequence {
    pub fn new(ring: AlgebraPresentation, entries: Vec<SequenceEntry>) -> Result<Self, KoszulError> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            match e {
                SequenceEntry::P => {
                    if !seen.insert("<p>".to_string()) {
                        return Err(KoszulError::UnsupportedEntry("p repeated".into()));
                    }
                }
                SequenceEntry::Gen(name) => {
                    let idx = ring
                        .generator_index(name)
                        .ok_or_else(|| KoszulError::UnsupportedEntry(name.clone()))?;
                    if ring.generators()[idx].exterior {
                        return Err(KoszulError::UnsupportedEntry(name.clone()));
                    }
                    if !seen.insert(name.clone()) {
                        return Err(KoszulError::UnsupportedEntry(format!("{name} repeated")));
                    }
                }
            }
        }
        Ok(RegularSequence { ring, entries })
    }

    pub fn ring(&self) -> &AlgebraPresentation {
        &self.ring
    }

    pub fn entries(&self) -> &[SequenceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The exterior complex on one class per sequence entry, with d(e_i) = s_i
/// extended as a derivation (acting from the right, matching the sign of the
/// displayed rank-2 differential `(v, -2)`).
#[derive(Debug, Clone)]
pub struct KoszulComplex {
    sequence: RegularSequence,
}

/// Build the Koszul complex and verify d^2 = 0 symbolically over the ring.
pub fn build_koszul(sequence: RegularSequence) -> Result<KoszulComplex, KoszulError> {
    let kc = KoszulComplex { sequence };
    if !kc.d_squared_is_zero()? {
        return Err(KoszulError::DifferentialNotSquareZero);
    }
    Ok(kc)
}

impl KoszulComplex {
    pub fn sequence(&self) -> &RegularSequence {
        &self.sequence
    }

    pub fn ring(&self) -> &AlgebraPresentation {
        self.sequence.ring()
    }

    /// All s-element subsets of the entry indices, lexicographic.
    pub fn subsets(&self, s: usize) -> Vec<Vec<usize>> {
        let n = self.sequence.len();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                if n - i < left {
                    break;
                }
                cur.push(i);
                rec(i + 1, left - 1, n, cur, out);
                cur.pop();
            }
        }
        rec(0, s, n, &mut cur, &mut out);
        out
    }

    pub fn subset_degree(&self, subset: &[usize]) -> u32 {
        subset
            .iter()
            .map(|&i| self.sequence.entries()[i].internal_degree(self.sequence.ring()))
            .sum()
    }

    /// Symbolic differential Lambda^s -> Lambda^{s-1} as an element-matrix
    /// over the ring; rows indexed by (s-1)-subsets, columns by s-subsets.
    pub fn differential_elements(&self, s: usize) -> Vec<Vec<AlgebraElement>> {
        let ring = self.sequence.ring();
        let rows = self.subsets(s.saturating_sub(1));
        let cols = self.subsets(s);
        if s == 0 {
            return vec![Vec::new(); rows.len()];
        }
        let row_index: std::collections::HashMap<&[usize], usize> =
            rows.iter().enumerate().map(|(i, r)| (r.as_slice(), i)).collect();
        let mut mat = vec![vec![ring.zero(); cols.len()]; rows.len()];
        for (c, subset) in cols.iter().enumerate() {
            for (j, &i) in subset.iter().enumerate() {
                let mut rest = subset.clone();
                rest.remove(j);
                let r = row_index[rest.as_slice()];
                // right-derivation sign: (-1)^{s-1-j}
                let sign = if (subset.len() - 1 - j) % 2 == 0 { 1i64 } else { -1i64 };
                let term = self.sequence.entries()[i].as_element(ring).scale(sign);
                mat[r][c] = mat[r][c].add(&term).expect("same ring");
            }
        }
        mat
    }

    /// Check d . d = 0 by symbolic expansion on every exterior monomial.
    pub fn d_squared_is_zero(&self) -> Result<bool, KoszulError> {
        let n = self.sequence.len();
        for s in 2..=n {
            let d_s = self.differential_elements(s);
            let d_s1 = self.differential_elements(s - 1);
            let cols = self.subsets(s).len();
            let mids = self.subsets(s - 1).len();
            let rows = self.subsets(s - 2).len();
            for c in 0..cols {
                for r in 0..rows {
                    let mut acc = self.sequence.ring().zero();
                    for m in 0..mids {
                        let prod = d_s1[r][m].multiply(&d_s[m][c])?;
                        acc = acc.add(&prod)?;
                    }
                    if !acc.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Basis element of the tensored complex: a carrier monomial paired with an
/// exterior subset of sequence indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorBasisElt {
    pub carrier: Monomial,
    pub subset: Vec<usize>,
}

/// The bigraded F_p complex obtained by tensoring a Koszul complex with a
/// module, internal degree <= t_max.
#[derive(Debug, Clone)]
pub struct TensoredComplex {
    pub p: u32,
    pub t_max: u32,
    pub n: usize,
    /// Basis of C_{s,t}; absent key means the zero space.
    pub bases: BTreeMap<(usize, u32), Vec<TensorBasisElt>>,
    /// d_{s,t}: C_{s,t} -> C_{s-1,t}.
    pub diffs: BTreeMap<(usize, u32), FpMatrix>,
}

impl TensoredComplex {
    pub fn dim(&self, s: usize, t: u32) -> usize {
        self.bases.get(&(s, t)).map_or(0, |b| b.len())
    }

    pub fn diff(&self, s: usize, t: u32) -> FpMatrix {
        match self.diffs.get(&(s, t)) {
            Some(m) => m.clone(),
            None => FpMatrix::zero(self.p, self.dim(s.wrapping_sub(1), t), self.dim(s, t)),
        }
    }
}

/// Tensor the Koszul complex with `module` up to internal degree `t_max`.
pub fn tensor_with_module(
    kc: &KoszulComplex,
    module: &ModulePresentation,
    t_max: u32,
) -> Result<TensoredComplex, KoszulError> {
    let ring = kc.ring();
    if module.base != *ring {
        return Err(KoszulError::IncompatibleModule);
    }
    if t_max > ring.truncation_degree() || t_max > module.carrier.truncation_degree() {
        return Err(KoszulError::TruncationExceeded(
            t_max,
            ring.truncation_degree().min(module.carrier.truncation_degree()),
        ));
    }
    let p = ring.prime();
    let n = kc.sequence().len();
    let mut bases: BTreeMap<(usize, u32), Vec<TensorBasisElt>> = BTreeMap::new();
    for s in 0..=n {
        for subset in kc.subsets(s) {
            let ds = kc.subset_degree(&subset);
            if ds > t_max {
                continue;
            }
            for mt in 0..=(t_max - ds) {
                let monos = module.carrier.basis_in_degree(mt)?;
                if monos.is_empty() {
                    continue;
                }
                let t = ds + mt;
                let slot = bases.entry((s, t)).or_default();
                for m in monos {
                    slot.push(TensorBasisElt { carrier: m, subset: subset.clone() });
                }
            }
        }
    }
    // deterministic basis order: subset lex, then carrier monomial order
    for b in bases.values_mut() {
        b.sort();
    }
    let mut index: BTreeMap<(usize, u32), std::collections::HashMap<TensorBasisElt, usize>> = BTreeMap::new();
    for (&key, b) in &bases {
        index.insert(key, b.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect());
    }
    let mut diffs = BTreeMap::new();
    for (&(s, t), basis) in &bases {
        if s == 0 {
            continue;
        }
        let target_dim = bases.get(&(s - 1, t)).map_or(0, |b| b.len());
        let mut entries = Vec::new();
        for (col, elt) in basis.iter().enumerate() {
            let slen = elt.subset.len();
            for (j, &i) in elt.subset.iter().enumerate() {
                let entry = &kc.sequence().entries()[i];
                let image = match entry {
                    SequenceEntry::P => module.carrier.zero(), // p acts as 0 on an F_p carrier
                    SequenceEntry::Gen(name) => {
                        let x = AlgebraElement::from_terms(
                            &module.carrier,
                            vec![(elt.carrier.clone(), 1)],
                        );
                        module.act(name, &x)?
                    }
                };
                if image.is_zero() {
                    continue;
                }
                let sign = if (slen - 1 - j) % 2 == 0 { 1i64 } else { -1i64 };
                let mut rest = elt.subset.clone();
                rest.remove(j);
                let idx = index.get(&(s - 1, t)).expect("target space exists");
                for (mono, &coeff) in image.terms() {
                    let target = TensorBasisElt { carrier: mono.clone(), subset: rest.clone() };
                    let row = *idx.get(&target).expect("degree-preserving differential");
                    let val = (((sign * coeff) % p as i64) + p as i64) as u32 % p;
                    if val != 0 {
                        entries.push((row, col, val));
                    }
                }
            }
        }
        // merge duplicate (row, col) pairs
        let mut acc = std::collections::BTreeMap::<(usize, usize), u64>::new();
        for (r, c, v) in entries {
            *acc.entry((r, c)).or_insert(0) += v as u64;
        }
        let merged: Vec<_> = acc
            .into_iter()
            .map(|((r, c), v)| (r, c, (v % p as u64) as u32))
            .filter(|&(_, _, v)| v != 0)
            .collect();
        diffs.insert((s, t), FpMatrix { p, rows: target_dim, cols: basis.len(), entries: merged });
    }
    Ok(TensoredComplex { p, t_max, n, bases, diffs })
}

/// One named basis class of a Tor table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorClass {
    pub label: String,
    pub s: usize,
    pub t: u32,
    /// Total degree s + t, duplicated for the JSON output.
    pub total: u32,
    /// Exterior subset when the representative is a single basis element with
    /// unit carrier part (the surviving-monomial case).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subset: Option<Vec<usize>>,
}

impl TorClass {
    pub fn total_degree(&self) -> u32 {
        self.s as u32 + self.t
    }
}

/// Bigraded Tor dimensions plus named basis classes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorTable {
    pub prime: u32,
    pub ring: String,
    pub sequence: Vec<String>,
    pub t_max: u32,
    /// Nonzero dimensions only, serialized as (s, t, dim) triples.
    #[serde(with = "dims_serde")]
    pub dims: BTreeMap<(usize, u32), usize>,
    pub classes: Vec<TorClass>,
    /// Set when every class is a product of 1-line classes (the collapse
    /// hypothesis: the table is multiplicatively generated on the 1-line).
    pub one_line_generated: bool,
}

mod dims_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        dims: &BTreeMap<(usize, u32), usize>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let v: Vec<(usize, u32, usize)> = dims.iter().map(|(&(a, b), &d)| (a, b, d)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, u32), usize>, D::Error> {
        let v: Vec<(usize, u32, usize)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(a, b, c)| ((a, b), c)).collect())
    }
}

impl TorTable {
    pub fn dim(&self, s: usize, t: u32) -> usize {
        self.dims.get(&(s, t)).copied().unwrap_or(0)
    }

    pub fn classes_at_total_degree(&self, total: u32) -> Vec<&TorClass> {
        self.classes.iter().filter(|c| c.total_degree() == total).collect()
    }

    pub fn one_line(&self) -> Vec<&TorClass> {
        self.classes.iter().filter(|c| c.s == 1).collect()
    }
}

/// The full computation: table plus the per-bidegree homology data needed to
/// push maps forward.
#[derive(Debug, Clone)]
pub struct TorComputation {
    pub table: TorTable,
    pub complex: TensoredComplex,
    pub homology: BTreeMap<(usize, u32), SubquotientBasis>,
}

/// Compute the bigraded Tor of the regular quotient against `module`.
pub fn compute_tor(
    kc: &KoszulComplex,
    module: &ModulePresentation,
    t_max: u32,
    ring_name: &str,
) -> Result<TorComputation, KoszulError> {
    let complex = tensor_with_module(kc, module, t_max)?;
    let p = complex.p;
    let mut dims = BTreeMap::new();
    let mut classes = Vec::new();
    let mut homology = BTreeMap::new();
    let keys: Vec<(usize, u32)> = complex.bases.keys().copied().collect();
    for (s, t) in keys {
        let d_out = complex.diff(s, t);
        let d_in = complex.diff(s + 1, t);
        let sub = fp::homology(&d_in, &d_out)?;
        if !sub.homology_reps.is_empty() {
            dims.insert((s, t), sub.homology_reps.len());
            let basis = &complex.bases[&(s, t)];
            for (k, rep) in sub.homology_reps.iter().enumerate() {
                let support: Vec<usize> = rep
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| v != 0)
                    .map(|(i, _)| i)
                    .collect();
                let (label, subset) = if support.len() == 1 && rep[support[0]] == 1 {
                    let elt = &basis[support[0]];
                    let mut parts = Vec::new();
                    if !elt.carrier.is_unit() {
                        parts.push(elt.carrier.display(&module.carrier));
                    }
                    for &i in &elt.subset {
                        parts.push(kc.sequence().entries()[i].bar_label(p));
                    }
                    let label = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
                    let subset = if elt.carrier.is_unit() { Some(elt.subset.clone()) } else { None };
                    (label, subset)
                } else {
                    (format!("h{s}_{t}_{k}"), None)
                };
                classes.push(TorClass { label, s, t, total: s as u32 + t, subset });
            }
        }
        homology.insert((s, t), sub);
    }
    classes.sort_by_key(|c| (c.s, c.t, c.label.clone()));
    let one_line_generated = check_one_line_generation(&dims, &classes, t_max);
    let table = TorTable {
        prime: p,
        ring: ring_name.to_string(),
        sequence: kc.sequence().entries().iter().map(|e| e.element_name(p)).collect(),
        t_max,
        dims,
        classes,
        one_line_generated,
    };
    Ok(TorComputation { table, complex, homology })
}

/// The table is multiplicatively generated on the 1-line iff every bigraded
/// dimension matches the exterior-algebra count on the 1-line classes (all
/// classes square to zero here: homological degree 1 is odd).
fn check_one_line_generation(
    dims: &BTreeMap<(usize, u32), usize>,
    classes: &[TorClass],
    t_max: u32,
) -> bool {
    let one_line: Vec<u32> = classes.iter().filter(|c| c.s == 1).map(|c| c.t).collect();
    // expected[s][t] = number of s-element subsets of one-line degrees summing to t
    let mut expected: BTreeMap<(usize, u32), u64> = BTreeMap::new();
    expected.insert((0, 0), 1);
    for &d in &one_line {
        let snapshot: Vec<((usize, u32), u64)> = expected.iter().map(|(&k, &v)| (k, v)).collect();
        for ((s, t), v) in snapshot {
            if t + d <= t_max {
                *expected.entry((s + 1, t + d)).or_insert(0) += v;
            }
        }
    }
    let expected: BTreeMap<(usize, u32), usize> = expected
        .into_iter()
        .filter(|&(_, v)| v != 0)
        .map(|(k, v)| (k, v as usize))
        .collect();
    expected == *dims
}

/// Carrier-level module maps supported by the induced-map machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierMap {
    Identity,
    Zero,
    /// Quotient by the augmentation ideal: 1 -> 1, positive degree -> 0.
    Reduction,
    /// Unit inclusion of the trivial carrier: 1 -> 1.
    UnitInclusion,
}

impl CarrierMap {
    fn apply(
        &self,
        mono: &Monomial,
        src: &AlgebraPresentation,
        tgt: &AlgebraPresentation,
    ) -> AlgebraElement {
        match self {
            CarrierMap::Identity => AlgebraElement::from_terms(tgt, vec![(mono.clone(), 1)]),
            CarrierMap::Zero => tgt.zero(),
            CarrierMap::Reduction | CarrierMap::UnitInclusion => {
                if mono.degree(src) == 0 {
                    tgt.one()
                } else {
                    tgt.zero()
                }
            }
        }
    }
}

/// A bidegree-wise map of Tor tables.
#[derive(Debug, Clone)]
pub struct TorMap {
    /// Block (s,t): matrix from source homology reps to target homology reps.
    pub blocks: BTreeMap<(usize, u32), FpMatrix>,
}

impl TorMap {
    pub fn block(&self, p: u32, src: &TorComputation, tgt: &TorComputation, s: usize, t: u32) -> FpMatrix {
        match self.blocks.get(&(s, t)) {
            Some(m) => m.clone(),
            None => FpMatrix::zero(
                p,
                tgt.table.dim(s, t),
                src.table.dim(s, t),
            ),
        }
    }

    pub fn compose(&self, inner: &TorMap) -> TorMap {
        let mut blocks = BTreeMap::new();
        for (&key, outer) in &self.blocks {
            if let Some(first) = inner.blocks.get(&key) {
                if outer.cols == first.rows {
                    let m = outer.mul(first).expect("compatible blocks");
                    if !m.is_zero() {
                        blocks.insert(key, m);
                    }
                }
            }
        }
        TorMap { blocks }
    }
}

/// Push a map of modules (sharing the Koszul complex) to a map of Tor tables.
pub fn induced_tor_map(
    src: &TorComputation,
    src_module: &ModulePresentation,
    tgt: &TorComputation,
    tgt_module: &ModulePresentation,
    map: CarrierMap,
) -> Result<TorMap, KoszulError> {
    if src.complex.n != tgt.complex.n {
        return Err(KoszulError::IncompatibleSequence);
    }
    let p = src.complex.p;
    let mut blocks = BTreeMap::new();
    for (&(s, t), src_basis) in &src.complex.bases {
        let Some(src_sub) = src.homology.get(&(s, t)) else { continue };
        if src_sub.homology_reps.is_empty() {
            continue;
        }
        let tgt_basis = tgt.complex.bases.get(&(s, t)).cloned().unwrap_or_default();
        let tgt_index: std::collections::HashMap<&TensorBasisElt, usize> =
            tgt_basis.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let tgt_sub = tgt.homology.get(&(s, t));
        let tgt_rank = tgt_sub.map_or(0, |h| h.homology_reps.len());
        let mut cols = Vec::new();
        for rep in &src_sub.homology_reps {
            // image of the representative under the chain map f (x) id
            let mut image = vec![0u64; tgt_basis.len()];
            for (i, &coeff) in rep.iter().enumerate() {
                if coeff == 0 {
                    continue;
                }
                let elt = &src_basis[i];
                let mapped = map.apply(&elt.carrier, &src_module.carrier, &tgt_module.carrier);
                for (mono, &c) in mapped.terms() {
                    let target = TensorBasisElt { carrier: mono.clone(), subset: elt.subset.clone() };
                    if let Some(&row) = tgt_index.get(&target) {
                        image[row] =
                            (image[row] + coeff as u64 * (((c % p as i64) + p as i64) as u64 % p as u64)) % p as u64;
                    }
                }
            }
            let image: Vec<u32> = image.into_iter().map(|x| x as u32).collect();
            let coords = match tgt_sub {
                None => vec![0; 0],
                Some(h) => fp::homology_coordinates(p, h, &image)
                    .ok_or(KoszulError::DifferentialNotSquareZero)?,
            };
            cols.push(coords);
        }
        let m = FpMatrix::from_columns(p, tgt_rank, &cols);
        if !m.is_zero() || tgt_rank > 0 {
            blocks.insert((s, t), m);
        }
    }
    Ok(TorMap { blocks })
}

/// The 1-line of the trivial-module Tor, paired with the sequence entries:
/// the correspondence I/I^2 <-> Tor_1.
pub fn tor1_as_ideal_quotient(
    kc: &KoszulComplex,
    module: &ModulePresentation,
    comp: &TorComputation,
) -> Result<Vec<(String, TorClass)>, KoszulError> {
    if !module.is_trivial() {
        return Err(KoszulError::NontrivialModule);
    }
    let p = kc.ring().prime();
    let mut out = Vec::new();
    for (i, entry) in kc.sequence().entries().iter().enumerate() {
        let class = comp
            .table
            .classes
            .iter()
            .find(|c| c.s == 1 && c.subset.as_deref() == Some(&[i]))
            .cloned();
        if let Some(class) = class {
            out.push((entry.element_name(p), class));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CoefficientMode, GeneratorSpec};

    fn ku_star(trunc: u32) -> AlgebraPresentation {
        AlgebraPresentation::new(
            2,
            CoefficientMode::IntegersLocalizedAtP,
            vec![GeneratorSpec::polynomial("v", 2)],
            trunc,
        )
        .unwrap()
    }

    fn ku_sequence(trunc: u32) -> RegularSequence {
        RegularSequence::new(ku_star(trunc), vec![SequenceEntry::P, SequenceEntry::Gen("v".into())]).unwrap()
    }

    #[test]
    fn ku_koszul_matrices_match_displayed_ones() {
        let kc = build_koszul(ku_sequence(8)).unwrap();
        // degree-1 part: d = column (2, v)
        let d1 = kc.differential_elements(1);
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[0][0].display(), "2");
        assert_eq!(d1[0][1].display(), "v");
        // degree-2 part: d = (v, -2)
        let d2 = kc.differential_elements(2);
        assert_eq!(d2[0][0].display(), "v");
        assert_eq!(d2[1][0].display(), "-2");
    }

    #[test]
    fn empty_sequence_concentrated_in_degree_zero() {
        let seq = RegularSequence::new(ku_star(8), vec![]).unwrap();
        let kc = build_koszul(seq).unwrap();
        assert_eq!(kc.subsets(0), vec![Vec::<usize>::new()]);
        let module = ModulePresentation::trivial(ku_star(8));
        let comp = compute_tor(&kc, &module, 8, "ku").unwrap();
        assert_eq!(comp.table.classes.len(), 1);
        assert_eq!(comp.table.classes[0].label, "1");
    }

    #[test]
    fn d_squared_zero_for_three_entries() {
        let ring = AlgebraPresentation::new(
            2,
            CoefficientMode::IntegersLocalizedAtP,
            vec![GeneratorSpec::polynomial("x1", 2), GeneratorSpec::polynomial("x2", 4)],
            16,
        )
        .unwrap();
        let seq = RegularSequence::new(
            ring,
            vec![SequenceEntry::P, SequenceEntry::Gen("x1".into()), SequenceEntry::Gen("x2".into())],
        )
        .unwrap();
        let kc = build_koszul(seq).unwrap();
        assert!(kc.d_squared_is_zero().unwrap());
    }

    #[test]
    fn rejects_unsupported_entries() {
        let ring = ku_star(8);
        assert!(matches!(
            RegularSequence::new(ring.clone(), vec![SequenceEntry::Gen("nope".into())]),
            Err(KoszulError::UnsupportedEntry(_))
        ));
        assert!(matches!(
            RegularSequence::new(
                ring,
                vec![SequenceEntry::Gen("v".into()), SequenceEntry::Gen("v".into())]
            ),
            Err(KoszulError::UnsupportedEntry(_))
        ));
    }

    #[test]
    fn ku_trivial_module_all_differentials_vanish() {
        let kc = build_koszul(ku_sequence(8)).unwrap();
        let module = ModulePresentation::trivial(ku_star(8));
        let complex = tensor_with_module(&kc, &module, 8).unwrap();
        for d in complex.diffs.values() {
            assert!(d.is_zero());
        }
    }

    #[test]
    fn ku_tor_table_is_exterior_on_2b_vb() {
        let kc = build_koszul(ku_sequence(8)).unwrap();
        let module = ModulePresentation::trivial(ku_star(8));
        let comp = compute_tor(&kc, &module, 8, "ku").unwrap();
        let labels: Vec<(String, usize, u32)> = comp
            .table
            .classes
            .iter()
            .map(|c| (c.label.clone(), c.s, c.t))
            .collect();
        assert_eq!(
            labels,
            vec![
                ("1".to_string(), 0, 0),
                ("2b".to_string(), 1, 0),
                ("vb".to_string(), 1, 2),
                ("2b*vb".to_string(), 2, 2),
            ]
        );
        assert!(comp.table.one_line_generated);
    }

    #[test]
    fn euler_characteristic_per_internal_degree() {
        let kc = build_koszul(ku_sequence(8)).unwrap();
        let module = ModulePresentation::trivial(ku_star(8));
        let comp = compute_tor(&kc, &module, 8, "ku").unwrap();
        for t in 0..=8u32 {
            let mut chain: i64 = 0;
            let mut hom: i64 = 0;
            for s in 0..=comp.complex.n {
                let sign = if s % 2 == 0 { 1 } else { -1 };
                chain += sign * comp.complex.dim(s, t) as i64;
                hom += sign * comp.table.dim(s, t) as i64;
            }
            assert_eq!(chain, hom, "euler characteristic at t={t}");
        }
    }

    #[test]
    fn tor1_correspondence_for_ku() {
        let kc = build_koszul(ku_sequence(8)).unwrap();
        let module = ModulePresentation::trivial(ku_star(8));
        let comp = compute_tor(&kc, &module, 8, "ku").unwrap();
        let corr = tor1_as_ideal_quotient(&kc, &module, &comp).unwrap();
        assert_eq!(corr.len(), 2);
        assert_eq!(corr[0].0, "2");
        assert_eq!(corr[0].1.label, "2b");
        assert_eq!(corr[1].0, "v");
        assert_eq!(corr[1].1.label, "vb");
    }

    #[test]
    fn tor1_rejects_nontrivial_module() {
        let ring = ku_star(8);
        let kc = build_koszul(ku_sequence(8)).unwrap();
        let carrier = AlgebraPresentation::new(
            2,
            CoefficientMode::Fp,
            vec![GeneratorSpec::polynomial("c", 2)],
            8,
        )
        .unwrap();
        let module = ModulePresentation::new(ring, carrier, Default::default()).unwrap();
        let trivial = ModulePresentation::trivial(ku_star(8));
        let comp = compute_tor(&kc, &trivial, 8, "ku").unwrap();
        assert!(matches!(
            tor1_as_ideal_quotient(&kc, &module, &comp),
            Err(KoszulError::NontrivialModule)
        ));
    }

    #[test]
    fn trivial_module_dims_are_subset_counts() {
        // exterior-algebra count: dim Tor_{s,t} = #{s-subsets with degree sum t}
        let ring = AlgebraPresentation::new(
            2,
            CoefficientMode::IntegersLocalizedAtP,
            vec![GeneratorSpec::polynomial("v1", 2), GeneratorSpec::polynomial("v2", 6)],
            16,
        )
        .unwrap();
        let seq = RegularSequence::new(
            ring.clone(),
            vec![SequenceEntry::P, SequenceEntry::Gen("v1".into()), SequenceEntry::Gen("v2".into())],
        )
        .unwrap();
        let kc = build_koszul(seq).unwrap();
        let module = ModulePresentation::trivial(ring);
        let comp = compute_tor(&kc, &module, 12, "BP2").unwrap();
        let degrees = [0u32, 2, 6];
        for s in 0..=3usize {
            for t in 0..=12u32 {
                let mut count = 0usize;
                for mask in 0u32..8 {
                    if mask.count_ones() as usize == s {
                        let sum: u32 = (0..3).filter(|&i| mask >> i & 1 == 1).map(|i| degrees[i]).sum();
                        if sum == t {
                            count += 1;
                        }
                    }
                }
                assert_eq!(comp.table.dim(s, t), count, "dim at ({s},{t})");
            }
        }
    }
}
