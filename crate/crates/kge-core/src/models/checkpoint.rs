//! Checkpoint directory layout: a JSON `manifest` describing shapes, seed and
//! dictionary checksums, next to `entities.vec` / `relations.vec` (and
//! `convkb.vec` when present) holding little-endian IEEE-754 f64 values in
//! row-major order. Loading reproduces scores bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::matrix::Matrix;
use crate::models::{ConvKbFilter, ConvKbParams, ModelKind, ModelParameters, Norm};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub model_kind: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub transe_norm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub num_filters: Option<usize>,
    pub num_entities: usize,
    pub num_relations: usize,
    pub seed: u64,
    pub entities_checksum: String,
    pub relations_checksum: String,
}

fn write_f64s(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(Error::Checkpoint {
            path: path.to_path_buf(),
            message: format!(
                "expected {} f64 values ({} bytes), found {} bytes",
                expected,
                expected * 8,
                bytes.len()
            ),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Persist parameters into `dir`, recording the training seed and the
/// dictionary checksums of the graph they were trained on.
pub fn save_checkpoint(
    params: &ModelParameters,
    kg: &KnowledgeGraph,
    seed: u64,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        model_kind: params.kind.to_string(),
        k: params.k,
        transe_norm: (params.kind == ModelKind::TransE).then(|| params.transe_norm.to_string()),
        num_filters: params.num_filters(),
        num_entities: params.num_entities(),
        num_relations: params.num_relations(),
        seed,
        entities_checksum: kg.entities().checksum(),
        relations_checksum: kg.relations().checksum(),
    };
    let manifest_path = dir.join("manifest");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

    write_f64s(&dir.join("entities.vec"), params.entities.data())?;
    write_f64s(&dir.join("relations.vec"), params.relations.data())?;
    if let Some(conv) = &params.convkb {
        let mut values = Vec::with_capacity(conv.filters.len() * 4 + conv.dense.len());
        for f in &conv.filters {
            values.extend_from_slice(&f.weights);
            values.push(f.bias);
        }
        values.extend_from_slice(&conv.dense);
        write_f64s(&dir.join("convkb.vec"), &values)?;
    }
    Ok(())
}

/// Load a checkpoint directory written by [`save_checkpoint`].
pub fn load_checkpoint(dir: &Path) -> Result<(ModelParameters, Manifest)> {
    let manifest_path = dir.join("manifest");
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: manifest_path.clone(),
        source: e,
    })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Checkpoint {
            path: manifest_path.clone(),
            message: format!(
                "unsupported format version {} (supported: {FORMAT_VERSION})",
                manifest.format_version
            ),
        });
    }
    let kind: ModelKind = manifest.model_kind.parse()?;
    let transe_norm = match &manifest.transe_norm {
        Some(s) => s.parse()?,
        None => Norm::L1,
    };
    let width = ModelParameters::width_for(kind, manifest.k);

    let entities = Matrix::from_vec(
        manifest.num_entities,
        width,
        read_f64s(&dir.join("entities.vec"), manifest.num_entities * width)?,
    );
    let relations = Matrix::from_vec(
        manifest.num_relations,
        width,
        read_f64s(&dir.join("relations.vec"), manifest.num_relations * width)?,
    );

    let convkb = if kind == ModelKind::ConvKb {
        let tau = manifest.num_filters.ok_or_else(|| Error::Checkpoint {
            path: manifest_path.clone(),
            message: "convkb checkpoint missing num_filters".to_string(),
        })?;
        let values = read_f64s(&dir.join("convkb.vec"), tau * 4 + tau * manifest.k)?;
        let filters = values[..tau * 4]
            .chunks_exact(4)
            .map(|c| ConvKbFilter {
                weights: [c[0], c[1], c[2]],
                bias: c[3],
            })
            .collect();
        Some(ConvKbParams {
            filters,
            dense: values[tau * 4..].to_vec(),
        })
    } else {
        None
    };

    Ok((
        ModelParameters {
            kind,
            k: manifest.k,
            transe_norm,
            entities,
            relations,
            convkb,
        },
        manifest,
    ))
}

/// Check that a checkpoint belongs to this graph's dictionaries.
pub fn verify_dictionaries(manifest: &Manifest, kg: &KnowledgeGraph) -> Result<()> {
    if manifest.entities_checksum != kg.entities().checksum()
        || manifest.relations_checksum != kg.relations().checksum()
    {
        return Err(Error::invalid(
            "checkpoint dictionaries do not match this store (checksum mismatch)",
        ));
    }
    if manifest.num_entities != kg.entities().len()
        || manifest.num_relations != kg.relations().len()
    {
        return Err(Error::invalid(
            "checkpoint entity/relation counts do not match this store",
        ));
    }
    Ok(())
}
