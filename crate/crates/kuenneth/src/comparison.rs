//! The chain-level comparison theorem: lift a module map through free
//! resolutions to a chain map and certify that any two lifts are
//! chain-homotopic, by exact linear solves over F_p.
//!
//! Resolutions live at two levels. `FpResolution` is one internal-degree
//! slice: an exact complex of F_p vector spaces augmented over a module.
//! `RingResolution` is the graded object (free modules over an F_p-mode ring
//! with element-matrix differentials); `slice(t)` produces the degree-t
//! `FpResolution`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraPresentation, ModulePresentation};
use crate::fp::{self, FpMatrix};

#[derive(Debug, Error)]
pub enum ComparisonError {
    #[error("complex is not exact at level {level} (internal degree {degree}): a required solve failed")]
    NotExact { level: usize, degree: u32 },
    #[error("incompatible shapes: {0}")]
    ShapeMismatch(String),
    #[error("requested internal degree {0} exceeds the ring truncation {1}")]
    TruncationExceeded(u32, u32),
    #[error("resolution slicing needs prime-field coefficients: {0}")]
    UnsupportedRing(String),
    #[error("differential entry at level {0}, ({1}, {2}) is not homogeneous of the required degree")]
    InhomogeneousEntry(usize, usize, usize),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error(transparent)]
    Linear(#[from] crate::fp::FpError),
}

/// One internal-degree slice of a free resolution: F_p vector spaces
/// `F_0, ..., F_L` with differentials `diffs[i]: F_{i+1} -> F_i` and an
/// augmentation `aug: F_0 -> M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpResolution {
    pub p: u32,
    pub dims: Vec<usize>,
    pub diffs: Vec<FpMatrix>,
    pub aug: FpMatrix,
}

impl FpResolution {
    pub fn levels(&self) -> usize {
        self.dims.len()
    }

    pub fn diff(&self, i: usize) -> FpMatrix {
        if i + 1 < self.dims.len() {
            self.diffs[i].clone()
        } else {
            FpMatrix::zero(self.p, self.dims.get(i).copied().unwrap_or(0), 0)
        }
    }

    /// Check shapes, d^2 = 0, aug . d_0 = 0, and exactness at every level
    /// above zero together with ker(aug) = im(d_0).
    pub fn validate(&self) -> Result<(), ComparisonError> {
        if self.diffs.len() + 1 != self.dims.len() && !(self.dims.is_empty() && self.diffs.is_empty()) {
            return Err(ComparisonError::ShapeMismatch(format!(
                "{} levels with {} differentials",
                self.dims.len(),
                self.diffs.len()
            )));
        }
        if self.dims.is_empty() {
            return Ok(());
        }
        if self.aug.cols != self.dims[0] {
            return Err(ComparisonError::ShapeMismatch("augmentation domain".into()));
        }
        for (i, d) in self.diffs.iter().enumerate() {
            if d.rows != self.dims[i] || d.cols != self.dims[i + 1] {
                return Err(ComparisonError::ShapeMismatch(format!("differential {i}")));
            }
        }
        if let Some(d0) = self.diffs.first() {
            if !self.aug.mul(d0)?.is_zero() {
                return Err(ComparisonError::NotExact { level: 0, degree: 0 });
            }
        }
        for i in 1..self.diffs.len() {
            if !self.diffs[i - 1].mul(&self.diffs[i])?.is_zero() {
                return Err(ComparisonError::NotExact { level: i, degree: 0 });
            }
        }
        // exactness at level i >= 1: rank d_{i-1} + rank d_i = dim F_i
        for i in 1..self.dims.len() {
            let out_rank = fp::rank(&self.diffs[i - 1]);
            let in_rank = if i < self.diffs.len() { fp::rank(&self.diffs[i]) } else { 0 };
            if out_rank + in_rank != self.dims[i] {
                return Err(ComparisonError::NotExact { level: i, degree: 0 });
            }
        }
        // level 0: ker(aug) = im(d_0)
        let aug_rank = fp::rank(&self.aug);
        let d0_rank = if !self.diffs.is_empty() { fp::rank(&self.diffs[0]) } else { 0 };
        if aug_rank + d0_rank != self.dims[0] {
            return Err(ComparisonError::NotExact { level: 0, degree: 0 });
        }
        Ok(())
    }
}

/// Per-level matrices f_i: F_i -> G_i commuting with the differentials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainMapLift {
    pub maps: Vec<FpMatrix>,
    pub certified: bool,
}

/// Per-level matrices H_i: F_i -> G_{i+1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainHomotopy {
    pub maps: Vec<FpMatrix>,
}

/// Lift a module map phi: M -> N through resolutions F of M and G of N.
///
/// Level-by-level: f_0 solves aug_G f_0 = phi aug_F; at level i+1, f_{i+1}
/// solves d_G f_{i+1} = f_i d_F. Solvability is exactly exactness of G, so a
/// failed solve is reported as `NotExact`. Deterministic (leftmost pivot,
/// free variables zero).
pub fn lift_map(
    phi: &FpMatrix,
    f: &FpResolution,
    g: &FpResolution,
) -> Result<ChainMapLift, ComparisonError> {
    if f.p != g.p {
        return Err(ComparisonError::ShapeMismatch("different primes".into()));
    }
    if phi.cols != f.aug.rows || phi.rows != g.aug.rows {
        return Err(ComparisonError::ShapeMismatch("module map shape".into()));
    }
    let levels = f.levels().max(g.levels());
    let mut maps = Vec::with_capacity(levels);
    for i in 0..levels {
        let fdim = f.dims.get(i).copied().unwrap_or(0);
        let gdim = g.dims.get(i).copied().unwrap_or(0);
        let rhs = if i == 0 {
            phi.mul(&f.aug)?
        } else {
            let prev: &FpMatrix = &maps[i - 1];
            let df = if i <= f.diffs.len() && i - 1 < f.diffs.len() {
                f.diffs[i - 1].clone()
            } else {
                FpMatrix::zero(f.p, f.dims.get(i - 1).copied().unwrap_or(0), fdim)
            };
            prev.mul(&df)?
        };
        let lhs = if i == 0 {
            g.aug.clone()
        } else if i - 1 < g.diffs.len() {
            g.diffs[i - 1].clone()
        } else {
            FpMatrix::zero(g.p, g.dims.get(i - 1).copied().unwrap_or(0), gdim)
        };
        let fi = fp::solve_many(&lhs, &rhs)
            .ok_or(ComparisonError::NotExact { level: i, degree: 0 })?;
        debug_assert_eq!(fi.rows, gdim);
        debug_assert_eq!(fi.cols, fdim);
        maps.push(fi);
    }
    Ok(ChainMapLift { maps, certified: true })
}

/// Check every commutation square and the augmentation square; on failure
/// report the first failing level (0 means the augmentation square).
pub fn verify_chain_map(
    lift: &ChainMapLift,
    phi: &FpMatrix,
    f: &FpResolution,
    g: &FpResolution,
) -> Result<(bool, Option<usize>), ComparisonError> {
    if lift.maps.is_empty() {
        return Ok((true, None));
    }
    let aug_square = g.aug.mul(&lift.maps[0])?.sub(&phi.mul(&f.aug)?)?;
    if !aug_square.is_zero() {
        return Ok((false, Some(0)));
    }
    for i in 1..lift.maps.len() {
        let df = if i - 1 < f.diffs.len() {
            f.diffs[i - 1].clone()
        } else {
            FpMatrix::zero(f.p, lift.maps[i - 1].cols, lift.maps[i].cols)
        };
        let dg = if i - 1 < g.diffs.len() {
            g.diffs[i - 1].clone()
        } else {
            FpMatrix::zero(g.p, lift.maps[i - 1].rows, lift.maps[i].rows)
        };
        let square = dg.mul(&lift.maps[i])?.sub(&lift.maps[i - 1].mul(&df)?)?;
        if !square.is_zero() {
            return Ok((false, Some(i)));
        }
    }
    Ok((true, None))
}

/// Produce H with d_G H_i + H_{i-1} d_F = f_i - f'_i (H_{-1} = 0) for two
/// lifts of the same module map. Equal lifts short-circuit to H = 0.
pub fn homotopy_between(
    f1: &ChainMapLift,
    f2: &ChainMapLift,
    f: &FpResolution,
    g: &FpResolution,
) -> Result<ChainHomotopy, ComparisonError> {
    if f1.maps.len() != f2.maps.len() {
        return Err(ComparisonError::ShapeMismatch("lifts of different lengths".into()));
    }
    let levels = f1.maps.len();
    let mut maps: Vec<FpMatrix> = Vec::with_capacity(levels);
    if f1 == f2 {
        for i in 0..levels {
            let gdim = g.dims.get(i + 1).copied().unwrap_or(0);
            maps.push(FpMatrix::zero(f.p, gdim, f.dims.get(i).copied().unwrap_or(0)));
        }
        return Ok(ChainHomotopy { maps });
    }
    for i in 0..levels {
        let diff_i = f1.maps[i].sub(&f2.maps[i])?;
        let mut rhs = diff_i;
        if i > 0 {
            let df = if i - 1 < f.diffs.len() {
                f.diffs[i - 1].clone()
            } else {
                FpMatrix::zero(f.p, f.dims.get(i - 1).copied().unwrap_or(0), f.dims.get(i).copied().unwrap_or(0))
            };
            rhs = rhs.sub(&maps[i - 1].mul(&df)?)?;
        }
        let dg = if i < g.diffs.len() {
            g.diffs[i].clone()
        } else {
            FpMatrix::zero(g.p, g.dims.get(i).copied().unwrap_or(0), g.dims.get(i + 1).copied().unwrap_or(0))
        };
        let hi = fp::solve_many(&dg, &rhs)
            .ok_or(ComparisonError::NotExact { level: i, degree: 0 })?;
        maps.push(hi);
    }
    Ok(ChainHomotopy { maps })
}

/// Check d_G H_i + H_{i-1} d_F = f_i - f'_i at every level.
pub fn verify_homotopy(
    h: &ChainHomotopy,
    f1: &ChainMapLift,
    f2: &ChainMapLift,
    f: &FpResolution,
    g: &FpResolution,
) -> Result<bool, ComparisonError> {
    for i in 0..h.maps.len() {
        let dg = if i < g.diffs.len() {
            g.diffs[i].clone()
        } else {
            FpMatrix::zero(g.p, f1.maps[i].rows, h.maps[i].rows)
        };
        let mut lhs = dg.mul(&h.maps[i])?;
        if i > 0 {
            let df = if i - 1 < f.diffs.len() {
                f.diffs[i - 1].clone()
            } else {
                FpMatrix::zero(f.p, h.maps[i - 1].cols, h.maps[i].cols)
            };
            lhs = lhs.add(&h.maps[i - 1].mul(&df)?)?;
        }
        let rhs = f1.maps[i].sub(&f2.maps[i])?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Invert a square matrix, or None if singular.
pub fn invert(m: &FpMatrix) -> Option<FpMatrix> {
    if m.rows != m.cols {
        return None;
    }
    fp::solve_many(m, &FpMatrix::identity(m.p, m.rows))
}

/// A random exact augmented complex: stacked elementary complexes
/// F_i = A_i (+) A_{i+1} with identity-and-zero differentials, conjugated by
/// random invertible base changes. `rng` supplies raw bits.
pub fn random_exact_resolution(
    p: u32,
    levels: usize,
    max_rank: usize,
    rng: &mut dyn FnMut() -> u32,
) -> FpResolution {
    assert!(levels >= 1);
    // ranks a_0..a_{levels}: F_i = A_i (+) A_{i+1}, M = A_0; the top extra
    // summand is empty so the finite complex is exact at every level
    let mut ranks: Vec<usize> = (0..=levels).map(|_| 1 + (rng() as usize) % max_rank).collect();
    ranks[levels] = 0;
    let dims: Vec<usize> = (0..levels)
        .map(|i| ranks[i] + if i + 1 <= levels { ranks[i + 1] } else { 0 })
        .collect();
    let random_invertible = |n: usize, rng: &mut dyn FnMut() -> u32| -> FpMatrix {
        loop {
            let data: Vec<Vec<u32>> = (0..n).map(|_| (0..n).map(|_| rng() % p).collect()).collect();
            let m = FpMatrix::from_dense(p, &data);
            if n == 0 || fp::rank(&m) == n {
                return m;
            }
        }
    };
    let changes: Vec<FpMatrix> = dims.iter().map(|&d| random_invertible(d, rng)).collect();
    let inverses: Vec<FpMatrix> = changes.iter().map(|c| invert(c).expect("invertible")).collect();
    // elementary differential d_i: A_{i+1} (+) A_{i+2} -> A_i (+) A_{i+1},
    // identity on A_{i+1} into the second block, zero on A_{i+2}
    let mut diffs = Vec::new();
    for i in 0..levels - 1 {
        let rows = dims[i];
        let cols = dims[i + 1];
        let entries: Vec<(usize, usize, u32)> =
            (0..ranks[i + 1]).map(|k| (ranks[i] + k, k, 1)).collect();
        let elementary = FpMatrix { p, rows, cols, entries };
        let d = changes[i].mul(&elementary).unwrap().mul(&inverses[i + 1]).unwrap();
        diffs.push(d);
    }
    // augmentation: projection F_0 = A_0 (+) A_1 -> A_0
    let aug_entries: Vec<(usize, usize, u32)> = (0..ranks[0]).map(|k| (k, k, 1)).collect();
    let aug = FpMatrix { p, rows: ranks[0], cols: dims[0], entries: aug_entries }
        .mul(&inverses[0])
        .unwrap();
    FpResolution { p, dims, diffs, aug }
}

/// A generator of one free level, with a label and internal degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeGenerator {
    pub name: String,
    pub degree: u32,
}

/// A graded free resolution over an F_p-mode ring, augmented over a module
/// presentation; `slice(t)` reduces it to one internal-degree `FpResolution`.
#[derive(Debug, Clone)]
pub struct RingResolution {
    pub module: ModulePresentation,
    pub terms: Vec<Vec<FreeGenerator>>,
    /// diffs[i][r][c]: coefficient of generator r of F_i in d(generator c of F_{i+1}).
    pub diffs: Vec<Vec<Vec<AlgebraElement>>>,
    /// aug[k] = image of generator k of F_0 in the module carrier.
    pub aug: Vec<AlgebraElement>,
}

impl RingResolution {
    pub fn ring(&self) -> &AlgebraPresentation {
        &self.module.base
    }

    /// Shape, homogeneity, and symbolic d^2 = 0 checks.
    pub fn validate_symbolic(&self) -> Result<(), ComparisonError> {
        use crate::algebra::CoefficientMode;
        if self.ring().coefficient_mode() != CoefficientMode::Fp {
            return Err(ComparisonError::UnsupportedRing(
                "ring must be presented over F_p".into(),
            ));
        }
        if self.diffs.len() + 1 != self.terms.len() && !self.terms.is_empty() {
            return Err(ComparisonError::ShapeMismatch("terms vs differentials".into()));
        }
        if self.aug.len() != self.terms.first().map_or(0, |t| t.len()) {
            return Err(ComparisonError::ShapeMismatch("augmentation length".into()));
        }
        for (i, d) in self.diffs.iter().enumerate() {
            let rows = self.terms[i].len();
            let cols = self.terms[i + 1].len();
            if d.len() != rows || d.iter().any(|r| r.len() != cols) {
                return Err(ComparisonError::ShapeMismatch(format!("differential {i}")));
            }
            for (r, row) in d.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    let want = self.terms[i + 1][c].degree.checked_sub(self.terms[i][r].degree);
                    if want.is_none() || e.homogeneous_degree() != want {
                        return Err(ComparisonError::InhomogeneousEntry(i, r, c));
                    }
                }
            }
        }
        // d^2 = 0 symbolically
        for i in 1..self.diffs.len() {
            let a = &self.diffs[i - 1];
            let b = &self.diffs[i];
            for r in 0..self.terms[i - 1].len() {
                for c in 0..self.terms[i + 1].len() {
                    let mut acc = self.ring().zero();
                    for m in 0..self.terms[i].len() {
                        acc = acc.add(&a[r][m].multiply(&b[m][c])?)?;
                    }
                    if !acc.is_zero() {
                        return Err(ComparisonError::NotExact { level: i, degree: 0 });
                    }
                }
            }
        }
        Ok(())
    }

    /// Basis of level i in internal degree t: (generator index, ring monomial).
    fn level_basis(
        &self,
        i: usize,
        t: u32,
    ) -> Result<Vec<(usize, crate::algebra::Monomial)>, ComparisonError> {
        let ring = self.ring();
        let mut out = Vec::new();
        for (k, g) in self.terms[i].iter().enumerate() {
            if g.degree > t {
                continue;
            }
            for m in ring.basis_in_degree(t - g.degree)? {
                out.push((k, m));
            }
        }
        Ok(out)
    }

    /// The internal-degree-t slice as an F_p complex augmented over the
    /// degree-t piece of the module carrier.
    pub fn slice(&self, t: u32) -> Result<FpResolution, ComparisonError> {
        let ring = self.ring();
        if t > ring.truncation_degree() {
            return Err(ComparisonError::TruncationExceeded(t, ring.truncation_degree()));
        }
        let p = ring.prime();
        let bases: Vec<Vec<(usize, crate::algebra::Monomial)>> = (0..self.terms.len())
            .map(|i| self.level_basis(i, t))
            .collect::<Result<_, _>>()?;
        let dims: Vec<usize> = bases.iter().map(|b| b.len()).collect();
        let mut diffs = Vec::new();
        for (i, d) in self.diffs.iter().enumerate() {
            let row_index: std::collections::HashMap<_, _> = bases[i]
                .iter()
                .enumerate()
                .map(|(r, key)| (key.clone(), r))
                .collect();
            let mut entries = Vec::new();
            for (c, (gen_c, mono)) in bases[i + 1].iter().enumerate() {
                let x = AlgebraElement::from_terms(ring, vec![(mono.clone(), 1)]);
                for (r_gen, row) in d.iter().enumerate() {
                    let image = row[*gen_c].multiply(&x)?;
                    for (m, &coeff) in image.terms() {
                        if let Some(&r) = row_index.get(&(r_gen, m.clone())) {
                            let v = coeff.rem_euclid(p as i64) as u32;
                            if v != 0 {
                                entries.push((r, c, v));
                            }
                        }
                    }
                }
            }
            diffs.push(FpMatrix::new(p, dims[i], dims[i + 1], entries)?);
        }
        // augmentation into the module carrier's degree-t basis
        let carrier_basis = self.module.carrier.basis_in_degree(t)?;
        let carrier_index: std::collections::HashMap<_, _> =
            carrier_basis.iter().enumerate().map(|(r, m)| (m.clone(), r)).collect();
        let mut aug_entries = Vec::new();
        for (c, (gen, mono)) in bases[0].iter().enumerate() {
            let image = self.module.act_monomial(mono, &self.aug[*gen])?;
            for (m, &coeff) in image.terms() {
                if let Some(&r) = carrier_index.get(m) {
                    let v = coeff.rem_euclid(p as i64) as u32;
                    if v != 0 {
                        aug_entries.push((r, c, v));
                    }
                }
            }
        }
        let aug = FpMatrix::new(p, carrier_basis.len(), dims[0], aug_entries)?;
        Ok(FpResolution { p, dims, diffs, aug })
    }
}

/// An algebra map between two module carriers, given by generator images;
/// extended multiplicatively. Used as the phi of a graded lift.
#[derive(Debug, Clone)]
pub struct CarrierAlgebraMap {
    pub source: AlgebraPresentation,
    pub target: AlgebraPresentation,
    /// images[k] = image of source generator k.
    pub images: Vec<AlgebraElement>,
}

impl CarrierAlgebraMap {
    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement, ComparisonError> {
        let mut out = self.target.zero();
        for (mono, &c) in x.terms() {
            let mut acc = self.target.one();
            for (idx, &e) in mono.exps.iter().enumerate() {
                if e > 0 {
                    acc = acc.multiply(&self.images[idx].pow(e)?)?;
                }
            }
            out = out.add(&acc.scale(c))?;
        }
        Ok(out)
    }

    /// The degree-t matrix from source carrier basis to target carrier basis.
    pub fn matrix(&self, t: u32) -> Result<FpMatrix, ComparisonError> {
        let p = self.target.prime();
        let src = self.source.basis_in_degree(t)?;
        let tgt = self.target.basis_in_degree(t)?;
        let tgt_index: std::collections::HashMap<_, _> =
            tgt.iter().enumerate().map(|(r, m)| (m.clone(), r)).collect();
        let mut entries = Vec::new();
        for (c, mono) in src.iter().enumerate() {
            let x = AlgebraElement::from_terms(&self.source, vec![(mono.clone(), 1)]);
            let image = self.apply(&x)?;
            for (m, &coeff) in image.terms() {
                if let Some(&r) = tgt_index.get(m) {
                    let v = coeff.rem_euclid(p as i64) as u32;
                    if v != 0 {
                        entries.push((r, c, v));
                    }
                }
            }
        }
        Ok(FpMatrix::new(p, tgt.len(), src.len(), entries)?)
    }
}

/// One lifted slice of a graded chain-map lift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradedLiftSlice {
    pub degree: u32,
    pub lift: ChainMapLift,
}

/// Lift a carrier map through two graded resolutions, one internal degree at
/// a time, up to `t_max`.
pub fn lift_ring_map(
    phi: &CarrierAlgebraMap,
    f: &RingResolution,
    g: &RingResolution,
    t_max: u32,
) -> Result<Vec<GradedLiftSlice>, ComparisonError> {
    let mut out = Vec::new();
    for t in 0..=t_max {
        let fs = f.slice(t)?;
        let gs = g.slice(t)?;
        let phi_t = phi.matrix(t)?;
        let lift = lift_map(&phi_t, &fs, &gs).map_err(|e| match e {
            ComparisonError::NotExact { level, .. } => ComparisonError::NotExact { level, degree: t },
            other => other,
        })?;
        out.push(GradedLiftSlice { degree: t, lift });
    }
    Ok(out)
}
