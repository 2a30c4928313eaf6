use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ontocheck_core::corpus::Provenance;
use ontocheck_core::manchester::{parse, serialize};
use ontocheck_core::Ontology;
use serde::Serialize;
use serde_json::Value;

/// A bad combination of arguments that clap could not catch; exits with 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn stamp<T: Serialize>(v: &T, p: &Provenance) -> Result<Value> {
    let mut v = serde_json::to_value(v)?;
    if let Value::Object(m) = &mut v {
        m.insert("provenance".into(), serde_json::to_value(p)?);
    }
    Ok(v)
}

/// Pretty JSON to `out`, or to stdout when there is none.
pub fn emit(v: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match out {
        Some(p) => write_file(p, format!("{text}\n").as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Manchester text behind a `#` provenance header.
pub fn write_omn(path: &Path, o: &Ontology, p: &Provenance) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "# ontocheck {} seed={} config_hash={}", p.tool_version, p.seed, p.config_hash)?;
    buf.extend_from_slice(serialize(o).as_bytes());
    write_file(path, &buf)
}

pub fn read_omn(path: &Path) -> Result<Ontology> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

/// File stem safe for any filesystem, taken from the end of an ontology id.
pub fn file_stem(id: &str) -> String {
    let tail = id.trim_end_matches(['/', '#']).rsplit(['/', '#']).next().unwrap_or(id);
    let s: String = tail.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    if s.is_empty() {
        "ontology".into()
    } else {
        s
    }
}

/// Expands directories into their `.omn` files, sorted by name.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "omn"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}
