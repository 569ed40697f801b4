//! On-disk formats: corpus manifests, mask PNGs, instruction JSONL,
//! prediction JSONL.
//!
//! Serialization is canonical (fixed key order, compact JSON, `\n` line
//! ends) so dataset builds are byte-reproducible and `read . write` is the
//! identity on valid files.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::builder::{InstructionRecord, PairRecord};
use crate::error::{Error, Result};
use crate::mask::LabelMask;

/// Version tag carried by the manifest and report formats; the JSONL line
/// formats are fixed at this version as well.
pub const SCHEMA_VERSION: u32 = 1;

/// One manifest row describing a bi-temporal pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub pair_id: String,
    pub image_before: String,
    pub image_after: String,
    pub mask: String,
    pub changed: bool,
    pub captions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<String>,
}

/// A validated corpus manifest plus the directory its relative paths
/// resolve against.
#[derive(Debug, Clone)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Resolve a manifest-relative path.
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

/// Load and validate a manifest. The canonical form is a versioned object
/// `{"schema_version": 1, "entries": [...]}`; a bare top-level array is
/// accepted as the same version. Every referenced file must exist.
pub fn load_manifest(path: &Path) -> Result<CorpusManifest> {
    let text = read_file(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let entries_value = match &value {
        serde_json::Value::Array(_) => value.clone(),
        serde_json::Value::Object(map) => {
            match map.get("schema_version").and_then(|v| v.as_u64()) {
                Some(v) if v as u32 == SCHEMA_VERSION => {}
                Some(v) => {
                    return Err(Error::ManifestEntry {
                        path: path.to_path_buf(),
                        index: 0,
                        message: format!("unsupported schema_version {v}"),
                    })
                }
                None => {
                    return Err(Error::ManifestEntry {
                        path: path.to_path_buf(),
                        index: 0,
                        message: "missing schema_version".into(),
                    })
                }
            }
            map.get("entries")
                .cloned()
                .ok_or_else(|| Error::ManifestEntry {
                    path: path.to_path_buf(),
                    index: 0,
                    message: "missing entries array".into(),
                })?
        }
        _ => {
            return Err(Error::ManifestEntry {
                path: path.to_path_buf(),
                index: 0,
                message: "manifest must be an array or a versioned object".into(),
            })
        }
    };

    let raw_entries = entries_value.as_array().ok_or_else(|| Error::ManifestEntry {
        path: path.to_path_buf(),
        index: 0,
        message: "entries must be an array".into(),
    })?;

    let mut entries = Vec::with_capacity(raw_entries.len());
    let mut seen_ids = BTreeSet::new();
    let base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let mut checked_paths: BTreeSet<PathBuf> = BTreeSet::new();

    for (index, raw) in raw_entries.iter().enumerate() {
        let entry: ManifestEntry =
            serde_json::from_value(raw.clone()).map_err(|e| Error::ManifestEntry {
                path: path.to_path_buf(),
                index,
                message: e.to_string(),
            })?;
        if !seen_ids.insert(entry.pair_id.clone()) {
            return Err(Error::ManifestEntry {
                path: path.to_path_buf(),
                index,
                message: format!("duplicate pair_id '{}'", entry.pair_id),
            });
        }
        if entry.changed && entry.captions.len() != 5 {
            return Err(Error::ManifestEntry {
                path: path.to_path_buf(),
                index,
                message: format!(
                    "caption count mismatch: expected 5 captions, found {}",
                    entry.captions.len()
                ),
            });
        }
        for referenced in [&entry.image_before, &entry.image_after, &entry.mask] {
            let resolved = {
                let p = Path::new(referenced);
                if p.is_absolute() {
                    p.to_path_buf()
                } else {
                    base_dir.join(p)
                }
            };
            if checked_paths.insert(resolved.clone()) && !resolved.exists() {
                return Err(Error::MissingFile(resolved));
            }
        }
        entries.push(entry);
    }

    Ok(CorpusManifest { entries, base_dir })
}

/// Serialize a manifest in its canonical versioned form.
pub fn save_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Versioned<'a> {
        schema_version: u32,
        entries: &'a [ManifestEntry],
    }
    let body = serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        entries,
    })
    .expect("manifest serialization cannot fail");
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Decode manifest entries into in-memory pair records; masks referenced by
/// several entries are decoded once.
pub fn load_pair_records(manifest: &CorpusManifest) -> Result<Vec<PairRecord>> {
    let mut mask_cache: HashMap<&str, LabelMask> = HashMap::new();
    let mut pairs = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let mask = match mask_cache.get(entry.mask.as_str()) {
            Some(mask) => mask.clone(),
            None => {
                let mask = load_mask(&manifest.resolve(&entry.mask))?;
                mask_cache.insert(&entry.mask, mask.clone());
                mask
            }
        };
        let pair = PairRecord {
            pair_id: entry.pair_id.clone(),
            image_before: entry.image_before.clone(),
            image_after: entry.image_after.clone(),
            captions: entry.captions.clone(),
            changed: entry.changed,
            mask,
            split: entry.split.clone(),
        };
        pair.validate()?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Decode an 8-bit single-channel PNG whose pixel values are the literal
/// label codes 0/1/2. Paletted PNGs are accepted when the palette resolves
/// every index to a gray value equal to the code.
pub fn load_mask(path: &Path) -> Result<LabelMask> {
    let dynamic = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) if source.kind() == std::io::ErrorKind::NotFound => {
            Error::MissingFile(path.to_path_buf())
        }
        other => Error::UnsupportedMask(format!("{}: {other}", path.display())),
    })?;

    let (width, height, values): (u32, u32, Vec<u8>) = match dynamic {
        image::DynamicImage::ImageLuma8(img) => (img.width(), img.height(), img.into_raw()),
        image::DynamicImage::ImageRgb8(img) => {
            let (w, h) = (img.width(), img.height());
            let mut values = Vec::with_capacity((w * h) as usize);
            for pixel in img.pixels() {
                let [r, g, b] = pixel.0;
                if r != g || g != b {
                    return Err(Error::UnsupportedMask(format!(
                        "{}: non-gray pixel ({r},{g},{b})",
                        path.display()
                    )));
                }
                values.push(r);
            }
            (w, h, values)
        }
        other => {
            return Err(Error::UnsupportedMask(format!(
                "{}: expected an 8-bit single-channel image, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };

    LabelMask::from_labels(width, height, values)
}

/// Write a mask as an 8-bit grayscale PNG with literal label codes.
pub fn save_mask(mask: &LabelMask, path: &Path) -> Result<()> {
    let img = image::GrayImage::from_raw(mask.width(), mask.height(), mask.labels().to_vec())
        .expect("label buffer matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::UnsupportedMask(format!("{}: {e}", path.display())))
}

/// Canonical JSONL bytes of a record list: one compact JSON object per
/// line, fixed key order, `\n` terminators.
pub fn jsonl_bytes(records: &[InstructionRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, record).expect("record serialization cannot fail");
        out.push(b'\n');
    }
    out
}

pub fn write_jsonl(records: &[InstructionRecord], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(&jsonl_bytes(records)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_jsonl(path: &Path) -> Result<Vec<InstructionRecord>> {
    let file = std::fs::File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let record: InstructionRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedJson {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

/// Model predictions keyed by record id.
#[derive(Debug, Clone, Default)]
pub struct PredictionFile {
    predictions: BTreeMap<String, String>,
}

impl PredictionFile {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, String)>) -> PredictionFile {
        PredictionFile {
            predictions: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, record_id: &str) -> Option<&str> {
        self.predictions.get(record_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

/// Read a prediction JSONL (`{"id": ..., "prediction": ...}` per line).
pub fn load_predictions(path: &Path) -> Result<PredictionFile> {
    #[derive(Deserialize)]
    struct Line {
        id: String,
        prediction: String,
    }

    let text = read_file(path)?;
    let mut predictions = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(line).map_err(|e| Error::MalformedJson {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if predictions.insert(parsed.id.clone(), parsed.prediction).is_some() {
            return Err(Error::DuplicateRecordId {
                path: path.to_path_buf(),
                line: lineno + 1,
                id: parsed.id,
            });
        }
    }
    Ok(PredictionFile { predictions })
}
