//! JSON loading of graded free resolutions and carrier maps, the inputs of
//! the `lift` subcommand.
//!
//! Format:
//! ```json
//! {
//!   "ring-ref": { "prime": 2, "truncation": 8, "generators": [...] },
//!   "terms": [[{"gen": "e", "degree": 0}], ...],
//!   "differentials": [[["element-string", ...], ...], ...],
//!   "augmentation": ["element-string", ...]
//! }
//! ```
//! `ring-ref` is either an inline presentation descriptor (with an optional
//! module section) or a path to one; `differentials[i][r][c]` is the
//! coefficient of row generator r in the image of column generator c.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::{CarrierAlgebraMap, ComparisonError, FreeGenerator, RingResolution};
use crate::descriptor::{
    presentation_from_json_str, presentation_from_toml_str, DescriptorError, LoadedPresentation,
    PresentationDescriptor,
};
use crate::parse::{parse_element, ParseError};

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("resolution JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad resolution: {0}")]
    Invalid(String),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Comparison(#[from] ComparisonError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RingRef {
    Path(String),
    Inline(PresentationDescriptor),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawResolutionGenerator {
    pub gen: String,
    pub degree: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawResolution {
    pub ring_ref: RingRef,
    pub terms: Vec<Vec<RawResolutionGenerator>>,
    pub differentials: Vec<Vec<Vec<String>>>,
    pub augmentation: Vec<String>,
}

fn resolve_ring(
    r: &RingRef,
    base_dir: Option<&Path>,
) -> Result<LoadedPresentation, ResolutionError> {
    match r {
        RingRef::Inline(desc) => {
            Ok(crate::descriptor::presentation_from_descriptor(desc)?)
        }
        RingRef::Path(p) => {
            let path = match base_dir {
                Some(dir) => dir.join(p),
                None => Path::new(p).to_path_buf(),
            };
            let src = std::fs::read_to_string(&path)?;
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                Ok(presentation_from_json_str(&src)?)
            } else {
                Ok(presentation_from_toml_str(&src)?)
            }
        }
    }
}

/// Build and symbolically validate a `RingResolution` from its raw form.
pub fn resolution_from_raw(
    raw: &RawResolution,
    base_dir: Option<&Path>,
) -> Result<RingResolution, ResolutionError> {
    let loaded = resolve_ring(&raw.ring_ref, base_dir)?;
    let ring = loaded.ring.clone();
    let terms: Vec<Vec<FreeGenerator>> = raw
        .terms
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|g| FreeGenerator { name: g.gen.clone(), degree: g.degree })
                .collect()
        })
        .collect();
    let mut diffs = Vec::new();
    for (i, level) in raw.differentials.iter().enumerate() {
        let rows = terms.get(i).map_or(0, |t| t.len());
        let cols = terms.get(i + 1).map_or(0, |t| t.len());
        if level.len() != rows || level.iter().any(|r| r.len() != cols) {
            return Err(ResolutionError::Invalid(format!(
                "differential {i} is not {rows} x {cols}"
            )));
        }
        let mut matrix = Vec::new();
        for row in level {
            let mut out_row = Vec::new();
            for src in row {
                out_row.push(parse_element(src, &ring)?);
            }
            matrix.push(out_row);
        }
        diffs.push(matrix);
    }
    if raw.augmentation.len() != terms.first().map_or(0, |t| t.len()) {
        return Err(ResolutionError::Invalid(
            "augmentation length does not match level 0".into(),
        ));
    }
    let mut aug = Vec::new();
    for src in &raw.augmentation {
        aug.push(parse_element(src, &loaded.module.carrier)?);
    }
    let res = RingResolution { module: loaded.module, terms, diffs, aug };
    res.validate_symbolic()?;
    Ok(res)
}

pub fn resolution_from_json_str(
    src: &str,
    base_dir: Option<&Path>,
) -> Result<RingResolution, ResolutionError> {
    let raw: RawResolution = serde_json::from_str(src)?;
    resolution_from_raw(&raw, base_dir)
}

pub fn resolution_from_path(path: &Path) -> Result<RingResolution, ResolutionError> {
    let src = std::fs::read_to_string(path)?;
    resolution_from_json_str(&src, path.parent())
}

/// Map file: carrier generator images by name, e.g. `{"images": {"b": "c^2"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RawCarrierMap {
    pub images: std::collections::BTreeMap<String, String>,
}

/// Build the carrier map between the module carriers of two resolutions.
pub fn carrier_map_from_raw(
    raw: &RawCarrierMap,
    source: &RingResolution,
    target: &RingResolution,
) -> Result<CarrierAlgebraMap, ResolutionError> {
    let src_pres = source.module.carrier.clone();
    let tgt_pres = target.module.carrier.clone();
    let mut images = Vec::new();
    for g in src_pres.generators() {
        let expr = raw.images.get(&g.name).ok_or_else(|| {
            ResolutionError::Invalid(format!("no image given for carrier generator `{}`", g.name))
        })?;
        images.push(parse_element(expr, &tgt_pres)?);
    }
    Ok(CarrierAlgebraMap { source: src_pres, target: tgt_pres, images })
}

pub fn carrier_map_from_json_str(
    src: &str,
    source: &RingResolution,
    target: &RingResolution,
) -> Result<CarrierAlgebraMap, ResolutionError> {
    let raw: RawCarrierMap = serde_json::from_str(src)?;
    carrier_map_from_raw(&raw, source, target)
}
