//! Versioned record files: a `MAGIC major.minor.patch` line, one JSON
//! header line, then one JSON item per line.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::behavior::{feature_names, SvmModel};
use crate::emd::{RiskTrainingSet, TrainItem};
use crate::error::{Error, Result};
use crate::risk::{Criterion, RiskDescriptor};

pub const DESCRIPTOR_MAGIC: &str = "BRDS";
pub const TRAINSET_MAGIC: &str = "BRTS";
pub const MODEL_MAGIC: &str = "BRSV";
pub const FORMAT_VERSION: &str = "1.0.0";
const MAJOR: u32 = 1;

/// Sub-region order written into headers.
pub const NUMBERING: &str = "region-major, bottom row first";

pub fn format_records<H: Serialize, T: Serialize>(magic: &str, header: &H, items: &[T]) -> String {
    let mut out = format!("{magic} {FORMAT_VERSION}\n");
    out.push_str(&serde_json::to_string(header).expect("header serializes"));
    out.push('\n');
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_records<H: DeserializeOwned, T: DeserializeOwned>(
    text: &str,
    magic: &str,
    name: &str,
) -> Result<(H, Vec<T>)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| Error::parse(name, 1, "empty record file"))?;
    let (m, version) = first
        .split_once(' ')
        .ok_or_else(|| Error::parse(name, 1, "expected `MAGIC version`"))?;
    if m != magic {
        return Err(Error::parse(name, 1, format!("expected magic {magic}, found {m:?}")));
    }
    let parts: Vec<u32> = version.split('.').map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| {
        Error::parse(name, 1, format!("bad version {version:?}"))
    })?;
    if parts.len() != 3 {
        return Err(Error::parse(name, 1, format!("bad version {version:?}")));
    }
    if parts[0] != MAJOR {
        return Err(Error::parse(name, 1, format!("unsupported major version {}", parts[0])));
    }
    let (_, head) = lines.next().ok_or_else(|| Error::parse(name, 2, "missing header line"))?;
    let header: H = serde_json::from_str(head).map_err(|e| Error::parse(name, 2, e.to_string()))?;
    let mut items = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        items.push(serde_json::from_str(line).map_err(|e| Error::parse(name, n + 1, e.to_string()))?);
    }
    Ok((header, items))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorHeader {
    pub criterion: Criterion,
    pub numbering: String,
}

/// A per-frame descriptor, optionally carrying a risk level (a ground-truth
/// label for training input, or the classifier output in reports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRecord {
    #[serde(flatten)]
    pub descriptor: RiskDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
}

pub fn format_descriptors(criterion: Criterion, records: &[DescriptorRecord]) -> Result<String> {
    if let Some(r) = records.iter().find(|r| r.descriptor.criterion != criterion) {
        return Err(Error::InvalidInput(format!(
            "frame {} has criterion {}, file is {criterion}",
            r.descriptor.frame, r.descriptor.criterion
        )));
    }
    let header = DescriptorHeader {
        criterion,
        numbering: NUMBERING.into(),
    };
    Ok(format_records(DESCRIPTOR_MAGIC, &header, records))
}

pub fn parse_descriptors(text: &str, name: &str) -> Result<(Criterion, Vec<DescriptorRecord>)> {
    let (h, items): (DescriptorHeader, Vec<DescriptorRecord>) = parse_records(text, DESCRIPTOR_MAGIC, name)?;
    for (i, r) in items.iter().enumerate() {
        if r.descriptor.criterion != h.criterion {
            return Err(Error::parse(name, i + 3, "record criterion differs from header"));
        }
        if r.descriptor.d.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::parse(name, i + 3, "descriptor values must be finite and nonnegative"));
        }
        if r.level.is_some_and(|l| !(1..=3).contains(&l)) {
            return Err(Error::parse(name, i + 3, "level must be 1, 2 or 3"));
        }
    }
    Ok((h.criterion, items))
}

pub fn read_descriptors(path: &Path) -> Result<(Criterion, Vec<DescriptorRecord>)> {
    parse_descriptors(&read_text(path)?, &path.display().to_string())
}

pub fn write_descriptors(path: &Path, criterion: Criterion, records: &[DescriptorRecord]) -> Result<()> {
    write_text(path, &format_descriptors(criterion, records)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainsetHeader {
    pub criterion: Criterion,
    pub cross_region_factor: f64,
    pub numbering: String,
}

pub fn format_trainset(set: &RiskTrainingSet, cross_region_factor: f64) -> String {
    let header = TrainsetHeader {
        criterion: set.criterion,
        cross_region_factor,
        numbering: NUMBERING.into(),
    };
    format_records(TRAINSET_MAGIC, &header, &set.items)
}

/// Returns the set and the cross-region factor it was built for.
pub fn parse_trainset(text: &str, name: &str) -> Result<(RiskTrainingSet, f64)> {
    let (h, items): (TrainsetHeader, Vec<TrainItem>) = parse_records(text, TRAINSET_MAGIC, name)?;
    let set = RiskTrainingSet {
        criterion: h.criterion,
        items,
    };
    set.validate().map_err(|e| Error::parse(name, 2, e.to_string()))?;
    Ok((set, h.cross_region_factor))
}

pub fn read_trainset(path: &Path) -> Result<(RiskTrainingSet, f64)> {
    parse_trainset(&read_text(path)?, &path.display().to_string())
}

pub fn write_trainset(path: &Path, set: &RiskTrainingSet, cross_region_factor: f64) -> Result<()> {
    write_text(path, &format_trainset(set, cross_region_factor))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelHeader {
    pub features: Vec<String>,
}

pub fn format_model(model: &SvmModel) -> String {
    let header = ModelHeader {
        features: feature_names(),
    };
    format_records(MODEL_MAGIC, &header, std::slice::from_ref(model))
}

pub fn parse_model(text: &str, name: &str) -> Result<SvmModel> {
    let (h, mut items): (ModelHeader, Vec<SvmModel>) = parse_records(text, MODEL_MAGIC, name)?;
    if h.features != feature_names() {
        return Err(Error::parse(name, 2, "feature schema differs from this build"));
    }
    if items.len() != 1 {
        return Err(Error::parse(name, 3, format!("expected one model record, found {}", items.len())));
    }
    Ok(items.remove(0))
}

pub fn read_model(path: &Path) -> Result<SvmModel> {
    parse_model(&read_text(path)?, &path.display().to_string())
}

pub fn write_model(path: &Path, model: &SvmModel) -> Result<()> {
    write_text(path, &format_model(model))
}
