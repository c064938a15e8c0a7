//! Ring spectrum descriptors.
//!
//! A descriptor packages everything the pipeline needs about a base ring
//! spectrum R: the coefficient presentation, the augmentation regular
//! sequence, the homology module used in the comparison spectral sequence,
//! and the detection data pairing 1-line Tor classes with Milnor classes.
//! Builtin descriptors (ku, ell, BP2, MU) ship as TOML data files and are
//! embedded in the binary; user descriptors load from TOML or JSON.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    AlgebraError, AlgebraPresentation, CoefficientMode, GeneratorSpec, ModulePresentation, Parity,
};
use crate::koszul::{KoszulError, RegularSequence, SequenceEntry};
use crate::parse::{parse_element, ParseError};
use crate::steenrod::ASClass;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("descriptor TOML error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("descriptor JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown builtin ring `{0}`")]
    UnknownBuiltin(String),
    #[error("ring `{name}` does not support the prime {prime}")]
    UnsupportedPrime { name: String, prime: u32 },
    #[error("bad degree expression `{expr}`: {reason}")]
    DegreeExpr { expr: String, reason: String },
    #[error("invalid descriptor: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

// ---------------------------------------------------------------------------
// Raw (on-disk) schema
// ---------------------------------------------------------------------------

/// Which primes a descriptor admits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrimeFilter {
    Named(String),
    List(Vec<u32>),
}

impl PrimeFilter {
    fn allows(&self, p: u32) -> Result<bool, DescriptorError> {
        match self {
            PrimeFilter::Named(s) => match s.as_str() {
                "all" => Ok(true),
                "odd" => Ok(p % 2 == 1),
                other => Err(DescriptorError::Invalid(format!(
                    "primes must be \"all\", \"odd\", or a list; got `{other}`"
                ))),
            },
            PrimeFilter::List(list) => Ok(list.contains(&p)),
        }
    }
}

fn default_primes() -> PrimeFilter {
    PrimeFilter::Named("all".into())
}

/// A degree given either as a plain number or as an expression in the prime
/// `p` (and the family index `i`), e.g. `"2*(p^2-1)"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Literal(u32),
    Expr(String),
}

impl DegreeSpec {
    pub fn eval(&self, p: u32, i: u32) -> Result<u32, DescriptorError> {
        match self {
            DegreeSpec::Literal(n) => Ok(*n),
            DegreeSpec::Expr(src) => eval_degree_expr(src, p, i),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawGenerator {
    pub name: String,
    pub degree: DegreeSpec,
    /// Index k pairing the bar class with xibar_k (p = 2) / taubar_{k-1}
    /// (odd p). Dropped at instantiation when degrees do not line up.
    #[serde(default)]
    pub detection_index: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawFamily {
    pub prefix: String,
    /// Degree expression in the index variable `i` (and `p`).
    pub degree: DegreeSpec,
    pub count: u32,
    /// `"prime-power-family"`: the generator with index p^{k-1} - 1 gets
    /// detection index k.
    #[serde(default)]
    pub detection: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceGenerators {
    All(String),
    List(Vec<String>),
}

fn default_include_p() -> bool {
    true
}

fn default_sequence_generators() -> SequenceGenerators {
    SequenceGenerators::All("all".into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawSequence {
    #[serde(default = "default_include_p")]
    pub include_p: bool,
    #[serde(default)]
    pub p_detection_index: Option<u32>,
    #[serde(default = "default_sequence_generators")]
    pub generators: SequenceGenerators,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawModule {
    pub kind: String,
}

impl Default for RawModule {
    fn default() -> Self {
        RawModule { kind: "trivial".into() }
    }
}

/// On-disk form of a ring spectrum descriptor (TOML or JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawDescriptor {
    pub name: String,
    #[serde(default = "default_primes")]
    pub primes: PrimeFilter,
    /// Caveat recorded as a table note whenever the prime is odd.
    #[serde(default)]
    pub odd_prime_note: Option<String>,
    #[serde(default)]
    pub default_truncation: Option<u32>,
    #[serde(default)]
    pub generators: Vec<RawGenerator>,
    #[serde(default)]
    pub generator_family: Option<RawFamily>,
    pub sequence: RawSequence,
    #[serde(default)]
    pub module: RawModule,
}

// ---------------------------------------------------------------------------
// Degree expressions
// ---------------------------------------------------------------------------

/// Evaluates a degree expression over `+ - * ^ ( )` with the variables `p`
/// and `i`. Exponentiation binds tightest; all arithmetic is checked.
pub fn eval_degree_expr(src: &str, p: u32, i: u32) -> Result<u32, DescriptorError> {
    let err = |reason: &str| DescriptorError::DegreeExpr {
        expr: src.to_string(),
        reason: reason.to_string(),
    };
    let tokens: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pos = 0usize;
    let value = parse_sum(&tokens, &mut pos, p as i64, i as i64)
        .map_err(|reason| err(&reason))?;
    if pos != tokens.len() {
        return Err(err(&format!("trailing input at offset {pos}")));
    }
    u32::try_from(value).map_err(|_| err("result is negative or too large"))
}

fn parse_sum(t: &[char], pos: &mut usize, p: i64, i: i64) -> Result<i64, String> {
    let mut acc = parse_product(t, pos, p, i)?;
    while let Some(&c) = t.get(*pos) {
        if c != '+' && c != '-' {
            break;
        }
        *pos += 1;
        let rhs = parse_product(t, pos, p, i)?;
        acc = if c == '+' {
            acc.checked_add(rhs).ok_or("overflow")?
        } else {
            acc.checked_sub(rhs).ok_or("overflow")?
        };
    }
    Ok(acc)
}

fn parse_product(t: &[char], pos: &mut usize, p: i64, i: i64) -> Result<i64, String> {
    let mut acc = parse_power(t, pos, p, i)?;
    while t.get(*pos) == Some(&'*') {
        *pos += 1;
        let rhs = parse_power(t, pos, p, i)?;
        acc = acc.checked_mul(rhs).ok_or("overflow")?;
    }
    Ok(acc)
}

fn parse_power(t: &[char], pos: &mut usize, p: i64, i: i64) -> Result<i64, String> {
    let base = parse_atom(t, pos, p, i)?;
    if t.get(*pos) == Some(&'^') {
        *pos += 1;
        let exp = parse_atom(t, pos, p, i)?;
        let exp = u32::try_from(exp).map_err(|_| "negative exponent".to_string())?;
        return base.checked_pow(exp).ok_or_else(|| "overflow".to_string());
    }
    Ok(base)
}

fn parse_atom(t: &[char], pos: &mut usize, p: i64, i: i64) -> Result<i64, String> {
    match t.get(*pos) {
        Some('(') => {
            *pos += 1;
            let v = parse_sum(t, pos, p, i)?;
            if t.get(*pos) != Some(&')') {
                return Err("expected `)`".into());
            }
            *pos += 1;
            Ok(v)
        }
        Some('p') => {
            *pos += 1;
            Ok(p)
        }
        Some('i') => {
            *pos += 1;
            Ok(i)
        }
        Some(c) if c.is_ascii_digit() => {
            let mut v: i64 = 0;
            while let Some(&d) = t.get(*pos) {
                if !d.is_ascii_digit() {
                    break;
                }
                v = v
                    .checked_mul(10)
                    .and_then(|v| v.checked_add((d as u8 - b'0') as i64))
                    .ok_or("number too large")?;
                *pos += 1;
            }
            Ok(v)
        }
        Some(&c) => Err(format!("unexpected character `{c}`")),
        None => Err("unexpected end of expression".into()),
    }
}

// ---------------------------------------------------------------------------
// Instantiated descriptors
// ---------------------------------------------------------------------------

/// A descriptor instantiated at a concrete prime and truncation.
#[derive(Debug, Clone)]
pub struct RingSpectrumDescriptor {
    pub name: String,
    pub prime: u32,
    pub ring: AlgebraPresentation,
    pub sequence: RegularSequence,
    /// Module used for `tor` and the pipeline; the trivial module unless the
    /// descriptor (or caller) asks for the Hurewicz module.
    pub module: ModulePresentation,
    /// Detection target per sequence entry (aligned with `sequence`): which
    /// Milnor class the corresponding bar class detects, when one matches in
    /// degree.
    pub detection: Vec<Option<ASClass>>,
    /// Caveats to surface alongside any computed table.
    pub notes: Vec<String>,
    /// Indices of the generator family (`x_i` for MU), when present.
    pub family: Option<FamilyInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyInfo {
    pub prefix: String,
    pub indices: Vec<u32>,
}

impl RingSpectrumDescriptor {
    /// Swaps every detection target with its conjugate (xi <-> xibar,
    /// tau <-> taubar). The emitted tables must be unchanged: the difference
    /// is decomposable and dies under the reduction pushforward.
    pub fn with_detection_swapped(&self) -> Self {
        let mut out = self.clone();
        out.detection = out
            .detection
            .iter()
            .map(|d| {
                d.map(|c| match c {
                    ASClass::Xi(i) => ASClass::XiBar(i),
                    ASClass::XiBar(i) => ASClass::Xi(i),
                    ASClass::Tau(j) => ASClass::TauBar(j),
                    ASClass::TauBar(j) => ASClass::Tau(j),
                })
            })
            .collect();
        out
    }

    /// The Hurewicz-image module H_*(R; F_p) for a family descriptor: one
    /// carrier generator b_i per ring generator x_i, with x_i acting as
    /// multiplication by b_i except that x_{p^k - 1} (whose Hurewicz image
    /// has no indecomposable component) and the prime act as zero.
    pub fn hurewicz_module(&self) -> Result<ModulePresentation, DescriptorError> {
        let family = self.family.as_ref().ok_or_else(|| {
            DescriptorError::Invalid(format!(
                "ring `{}` has no generator family; Hurewicz module undefined",
                self.name
            ))
        })?;
        let p = self.prime;
        let mut carrier_gens = Vec::new();
        for &i in &family.indices {
            let x = format!("{}{}", family.prefix, i);
            let idx = self
                .ring
                .generator_index(&x)
                .ok_or_else(|| DescriptorError::Invalid(format!("missing generator `{x}`")))?;
            let deg = self.ring.generators()[idx].internal_degree;
            carrier_gens.push(GeneratorSpec::polynomial(&format!("b{i}"), deg));
        }
        let carrier = AlgebraPresentation::new(
            p,
            CoefficientMode::Fp,
            carrier_gens,
            self.ring.truncation_degree(),
        )?;
        let mut action = BTreeMap::new();
        for &i in &family.indices {
            if !is_prime_power_minus_one(p, i) {
                let b = carrier.generator_element(&format!("b{i}"))?;
                action.insert(format!("{}{}", family.prefix, i), b);
            }
        }
        Ok(ModulePresentation::new(self.ring.clone(), carrier, action)?)
    }
}

/// i = p^k - 1 for some k >= 1?
fn is_prime_power_minus_one(p: u32, i: u32) -> bool {
    let mut power = p as u64;
    let target = i as u64 + 1;
    while power <= target {
        if power == target {
            return true;
        }
        power *= p as u64;
    }
    false
}

/// Instantiates a raw descriptor at a prime, with an optional truncation
/// override (default: the descriptor's own, else 24).
pub fn instantiate(
    raw: &RawDescriptor,
    prime: u32,
    truncation: Option<u32>,
) -> Result<RingSpectrumDescriptor, DescriptorError> {
    if !raw.primes.allows(prime)? {
        return Err(DescriptorError::UnsupportedPrime { name: raw.name.clone(), prime });
    }
    let truncation = truncation.or(raw.default_truncation).unwrap_or(24);

    let mut notes = Vec::new();
    if prime % 2 == 1 {
        if let Some(note) = &raw.odd_prime_note {
            notes.push(note.clone());
            if prime != 3 {
                notes.push(format!(
                    "running at p = {prime} anyway; the algebra is prime-uniform"
                ));
            }
        }
    }

    // Generators: explicit list, then the family.
    let mut gens = Vec::new();
    let mut detection_index: BTreeMap<String, u32> = BTreeMap::new();
    for g in &raw.generators {
        let deg = g.degree.eval(prime, 0)?;
        gens.push(GeneratorSpec::polynomial(&g.name, deg));
        if let Some(k) = g.detection_index {
            detection_index.insert(g.name.clone(), k);
        }
    }
    let mut family = None;
    if let Some(fam) = &raw.generator_family {
        let mut indices = Vec::new();
        for i in 1..=fam.count {
            let name = format!("{}{}", fam.prefix, i);
            let deg = fam.degree.eval(prime, i)?;
            gens.push(GeneratorSpec::polynomial(&name, deg));
            indices.push(i);
            if fam.detection.as_deref() == Some("prime-power-family") {
                // x_{p^{k-1} - 1} detects the k-th Milnor class.
                if let Some(k) = prime_power_index(prime, i) {
                    detection_index.insert(name, k + 1);
                }
            }
        }
        match fam.detection.as_deref() {
            None | Some("prime-power-family") => {}
            Some(other) => {
                return Err(DescriptorError::Invalid(format!(
                    "unknown family detection rule `{other}`"
                )))
            }
        }
        family = Some(FamilyInfo { prefix: fam.prefix.clone(), indices });
    }
    let ring =
        AlgebraPresentation::new(prime, CoefficientMode::IntegersLocalizedAtP, gens, truncation)?;

    // Augmentation sequence.
    let mut entries = Vec::new();
    if raw.sequence.include_p {
        entries.push(SequenceEntry::P);
    }
    match &raw.sequence.generators {
        SequenceGenerators::All(word) => {
            if word != "all" {
                return Err(DescriptorError::Invalid(format!(
                    "sequence generators must be \"all\" or a list; got `{word}`"
                )));
            }
            for g in ring.generators() {
                entries.push(SequenceEntry::Gen(g.name.clone()));
            }
        }
        SequenceGenerators::List(names) => {
            for n in names {
                entries.push(SequenceEntry::Gen(n.clone()));
            }
        }
    }
    let sequence = RegularSequence::new(ring.clone(), entries)?;

    // Detection, with the degree sanity check: the bar class of entry s has
    // total degree |s| + 1, and only a Milnor class of that exact degree can
    // be detected. Mismatches drop to None (e.g. v-bar in ku at odd primes).
    let mut detection = Vec::new();
    for entry in sequence.entries() {
        let k = match entry {
            SequenceEntry::P => raw.sequence.p_detection_index,
            SequenceEntry::Gen(name) => detection_index.get(name).copied(),
        };
        let class = k.and_then(|k| {
            let c = if prime == 2 { ASClass::XiBar(k) } else { ASClass::TauBar(k - 1) };
            let bar_total = entry.internal_degree(&ring) as u64 + 1;
            (c.degree(prime) == bar_total).then_some(c)
        });
        detection.push(class);
    }

    let module = match raw.module.kind.as_str() {
        "trivial" => ModulePresentation::trivial(ring.clone()),
        other => {
            return Err(DescriptorError::Invalid(format!(
                "unknown module kind `{other}` (expected \"trivial\"; use hurewicz_module() for the Hurewicz module)"
            )))
        }
    };

    Ok(RingSpectrumDescriptor {
        name: raw.name.clone(),
        prime,
        ring,
        sequence,
        module,
        detection,
        notes,
        family,
    })
}

/// If i = p^{k-1} - 1 for some k >= 1, return k - 1 (so the detected Milnor
/// index is k = returned + 1). Only i >= 1 counts.
fn prime_power_index(p: u32, i: u32) -> Option<u32> {
    if i == 0 {
        return None;
    }
    let target = i as u64 + 1;
    let mut power = 1u64;
    for k in 0..=40u32 {
        if power == target {
            return Some(k);
        }
        if power > target {
            return None;
        }
        power *= p as u64;
    }
    None
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

pub fn raw_from_toml_str(src: &str) -> Result<RawDescriptor, DescriptorError> {
    Ok(toml::from_str(src)?)
}

pub fn raw_from_json_str(src: &str) -> Result<RawDescriptor, DescriptorError> {
    Ok(serde_json::from_str(src)?)
}

/// Loads a descriptor file, dispatching on the `.json` extension (anything
/// else parses as TOML).
pub fn load_path(
    path: &Path,
    prime: u32,
    truncation: Option<u32>,
) -> Result<RingSpectrumDescriptor, DescriptorError> {
    let src = std::fs::read_to_string(path)?;
    let raw = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        raw_from_json_str(&src)?
    } else {
        raw_from_toml_str(&src)?
    };
    instantiate(&raw, prime, truncation)
}

pub const BUILTIN_NAMES: [&str; 4] = ["ku", "ell", "BP2", "MU"];

fn builtin_source(name: &str) -> Option<&'static str> {
    match name.to_ascii_lowercase().as_str() {
        "ku" => Some(include_str!("../descriptors/ku.toml")),
        "ell" | "l" => Some(include_str!("../descriptors/ell.toml")),
        "bp2" => Some(include_str!("../descriptors/bp2.toml")),
        "mu" => Some(include_str!("../descriptors/mu.toml")),
        _ => None,
    }
}

/// Resolves a builtin ring name (case-insensitive) at the given prime.
pub fn builtin(
    name: &str,
    prime: u32,
    truncation: Option<u32>,
) -> Result<RingSpectrumDescriptor, DescriptorError> {
    let src = builtin_source(name)
        .ok_or_else(|| DescriptorError::UnknownBuiltin(name.to_string()))?;
    let raw = raw_from_toml_str(src)?;
    instantiate(&raw, prime, truncation)
}

// ---------------------------------------------------------------------------
// Plain presentation descriptors
// ---------------------------------------------------------------------------

/// The generic presentation + module schema:
/// `{ prime, truncation, generators: [{name, degree, parity, exterior}],
///    module: { carrier: [...], action: {gen: element-string} } }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PresentationDescriptor {
    pub prime: u32,
    pub truncation: u32,
    pub generators: Vec<PresGenerator>,
    #[serde(default)]
    pub coefficients: Option<CoefficientMode>,
    #[serde(default)]
    pub module: Option<PresModule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PresGenerator {
    pub name: String,
    pub degree: u32,
    #[serde(default = "default_parity")]
    pub parity: Parity,
    #[serde(default)]
    pub exterior: bool,
}

fn default_parity() -> Parity {
    Parity::Even
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PresModule {
    pub carrier: Vec<PresGenerator>,
    #[serde(default)]
    pub action: BTreeMap<String, String>,
}

/// A loaded presentation with its module (trivial when none is given).
#[derive(Debug, Clone)]
pub struct LoadedPresentation {
    pub ring: AlgebraPresentation,
    pub module: ModulePresentation,
}

fn build_presentation(
    prime: u32,
    truncation: u32,
    mode: CoefficientMode,
    gens: &[PresGenerator],
) -> Result<AlgebraPresentation, DescriptorError> {
    let specs = gens
        .iter()
        .map(|g| GeneratorSpec {
            name: g.name.clone(),
            internal_degree: g.degree,
            parity: g.parity,
            exterior: g.exterior,
        })
        .collect();
    Ok(AlgebraPresentation::new(prime, mode, specs, truncation)?)
}

pub fn presentation_from_descriptor(
    desc: &PresentationDescriptor,
) -> Result<LoadedPresentation, DescriptorError> {
    if desc.prime < 2 {
        return Err(DescriptorError::Invalid(format!("{} is not a prime", desc.prime)));
    }
    let mode = desc.coefficients.unwrap_or(CoefficientMode::Fp);
    let ring = build_presentation(desc.prime, desc.truncation, mode, &desc.generators)?;
    let module = match &desc.module {
        None => ModulePresentation::trivial(ring.clone()),
        Some(m) => {
            let carrier =
                build_presentation(desc.prime, desc.truncation, CoefficientMode::Fp, &m.carrier)?;
            let mut action = BTreeMap::new();
            for (gen, src) in &m.action {
                action.insert(gen.clone(), parse_element(src, &carrier)?);
            }
            ModulePresentation::new(ring.clone(), carrier, action)?
        }
    };
    Ok(LoadedPresentation { ring, module })
}

pub fn presentation_from_toml_str(src: &str) -> Result<LoadedPresentation, DescriptorError> {
    let desc: PresentationDescriptor = toml::from_str(src)?;
    presentation_from_descriptor(&desc)
}

pub fn presentation_from_json_str(src: &str) -> Result<LoadedPresentation, DescriptorError> {
    let desc: PresentationDescriptor = serde_json::from_str(src)?;
    presentation_from_descriptor(&desc)
}
