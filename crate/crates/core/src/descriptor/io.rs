//! Descriptor CSV files.
//!
//! ```text
//! # <provenance lines, each prefixed with '#'>
//! # descriptor-meta: {"t":0.08,...}
//! patch_id,label,method,n,stain_mode,bin_count,b0,b1,...
//! 10253_idx5_x1001_y801_class1,1,FELP,9,HE,64,0.0123,...
//! ```
//!
//! Bins are written in shortest round-trip decimal form, so reading a file
//! back yields bit-identical values.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Descriptor, DescriptorMeta, Method, StainMode};

const META_PREFIX: &str = "# descriptor-meta: ";

/// One labeled descriptor row.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRecord {
    pub patch_id: String,
    pub label: u8,
    pub descriptor: Descriptor,
}

/// Renders a descriptor file. All records must share one configuration.
pub fn render_descriptors(provenance: &[String], records: &[DescriptorRecord]) -> Result<String> {
    let Some(first) = records.first() else {
        return Err(Error::EmptyDescriptor);
    };
    let reference = &first.descriptor;
    let mut out = String::new();
    for line in provenance {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(META_PREFIX);
    out.push_str(&serde_json::to_string(&reference.meta).expect("meta serializes"));
    out.push('\n');
    out.push_str("patch_id,label,method,n,stain_mode,bin_count");
    for i in 0..reference.len() {
        out.push_str(&format!(",b{i}"));
    }
    out.push('\n');
    for r in records {
        let d = &r.descriptor;
        if !d.is_compatible(reference) || d.meta != reference.meta {
            return Err(Error::invalid(format!(
                "record {} does not match the file configuration",
                r.patch_id
            )));
        }
        if r.patch_id.contains([',', '"', '\n']) {
            return Err(Error::invalid(format!("patch id '{}' needs quoting", r.patch_id)));
        }
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.patch_id,
            r.label,
            d.method,
            d.n,
            d.stain_mode,
            d.len()
        ));
        for b in &d.bins {
            out.push_str(&format!(",{b}"));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_descriptors(path: &Path, provenance: &[String], records: &[DescriptorRecord]) -> Result<()> {
    let text = render_descriptors(provenance, records)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn parse_descriptors(path: &Path, text: &str) -> Result<Vec<DescriptorRecord>> {
    let meta_line = text
        .lines()
        .find_map(|l| l.strip_prefix(META_PREFIX))
        .ok_or_else(|| parse_err(path, "missing descriptor-meta header"))?;
    let meta: DescriptorMeta =
        serde_json::from_str(meta_line).map_err(|e| parse_err(path, e.to_string()))?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let rec = result.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| parse_err(path, format!("row {row}: missing column {i}")))
        };
        let label: u8 = field(1)?
            .parse()
            .ok()
            .filter(|l| *l <= 1)
            .ok_or_else(|| parse_err(path, format!("row {row}: label must be 0 or 1")))?;
        let method: Method = field(2)?.parse()?;
        let n: usize = field(3)?
            .parse()
            .map_err(|_| parse_err(path, format!("row {row}: bad window size")))?;
        let stain_mode: StainMode = field(4)?.parse()?;
        let count: usize = field(5)?
            .parse()
            .map_err(|_| parse_err(path, format!("row {row}: bad bin count")))?;
        if rec.len() != 6 + count {
            return Err(parse_err(
                path,
                format!("row {row}: expected {count} bins, found {}", rec.len() - 6),
            ));
        }
        let bins = (6..rec.len())
            .map(|i| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, format!("row {row}: bad bin value '{}'", &rec[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(DescriptorRecord {
            patch_id: field(0)?.to_string(),
            label,
            descriptor: Descriptor {
                bins,
                method,
                n,
                stain_mode,
                meta: meta.clone(),
            },
        });
    }
    Ok(records)
}

pub fn read_descriptors(path: &Path) -> Result<Vec<DescriptorRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_descriptors(path, &text)
}
