//! Client for a BioPortal-style REST repository.
//!
//! `GET {endpoint}/ontologies` lists the ontologies by `acronym`;
//! `GET {endpoint}/ontologies/{acronym}/download` returns one file. The
//! key travels in an `Authorization: apikey token=...` header. Files land in
//! the output directory next to `manifest.json`, which is rewritten after
//! every download so an interrupted run can resume; files whose checksum
//! already matches the manifest are not downloaded again.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::thread::sleep;
use std::time::Duration;

use anyhow::{Context, Result};
use ontocheck_core::corpus::Provenance;
use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::output::{emit, file_stem, stamp};
use crate::FetchArgs;

pub const API_KEY_VAR: &str = "BIOPORTAL_API_KEY";
pub const MANIFEST_SCHEMA: &str = "ontocheck.fetch/1";

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("{url}: {reason} after {attempts} attempt(s)")]
    Http { url: String, reason: String, attempts: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema: String,
    endpoint: String,
    provenance: Provenance,
    ontologies: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct Listed {
    acronym: String,
}

struct Fetcher<'a> {
    client: Client,
    key: String,
    args: &'a FetchArgs,
    retries: u32,
}

impl Fetcher<'_> {
    /// One GET with retries on throttling, server errors and transport
    /// failures. Authentication failures are never retried.
    fn get(&mut self, url: &str) -> Result<Vec<u8>, FetchError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            sleep(Duration::from_millis(self.args.delay_ms));
            let sent = self
                .client
                .get(url)
                .header("Authorization", format!("apikey token={}", self.key))
                .header("Accept", "application/json")
                .send();
            let (reason, wait) = match sent {
                Ok(r) if r.status().is_success() => {
                    return r.bytes().map(|b| b.to_vec()).map_err(|e| FetchError::Http {
                        url: url.into(),
                        reason: e.to_string(),
                        attempts: attempt,
                    })
                }
                Ok(r) if matches!(r.status(), StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN) => {
                    return Err(FetchError::Auth(format!("{url} answered {}", r.status())));
                }
                Ok(r) if r.status() == StatusCode::TOO_MANY_REQUESTS || r.status().is_server_error() => {
                    (format!("status {}", r.status()), retry_after(&r))
                }
                Ok(r) => return Err(FetchError::Http { url: url.into(), reason: format!("status {}", r.status()), attempts: attempt }),
                Err(e) => (e.to_string(), None),
            };
            if attempt > self.args.retries {
                return Err(FetchError::Http { url: url.into(), reason, attempts: attempt });
            }
            self.retries += 1;
            let backoff = Duration::from_millis(self.args.backoff_ms.saturating_mul(1 << (attempt - 1).min(16)));
            let pause = wait.map_or(backoff, |w| w.max(backoff));
            log::warn!("{url}: {reason}; retrying in {pause:?}");
            sleep(pause);
        }
    }
}

fn retry_after(r: &Response) -> Option<Duration> {
    let secs: u64 = r.headers().get("Retry-After")?.to_str().ok()?.trim().parse().ok()?;
    Some(Duration::from_secs(secs.min(300)))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn save(path: &Path, m: &Manifest) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(m)? + "\n")?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

pub fn run(a: &FetchArgs) -> Result<()> {
    let key = std::env::var(API_KEY_VAR).ok().filter(|k| !k.trim().is_empty());
    let Some(key) = key else {
        return Err(FetchError::Auth(format!("{API_KEY_VAR} is not set")).into());
    };
    let p = Provenance::new(0, a);
    let client = Client::builder().timeout(Duration::from_secs(a.timeout_secs)).build()?;
    let mut f = Fetcher { client, key, args: a, retries: 0 };
    let base = a.endpoint.trim_end_matches('/');

    let listing = f.get(&format!("{base}/ontologies"))?;
    let listed: Vec<Listed> = serde_json::from_slice(&listing).context("reading the ontology listing")?;
    let ids: Vec<String> = listed.into_iter().map(|l| l.acronym).take(a.limit.unwrap_or(usize::MAX)).collect();

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let manifest_path = a.out.join("manifest.json");
    let known: BTreeMap<String, ManifestEntry> = match fs::read_to_string(&manifest_path) {
        Ok(text) => {
            let m: Manifest = serde_json::from_str(&text).with_context(|| format!("reading {}", manifest_path.display()))?;
            m.ontologies.into_iter().map(|e| (e.id.clone(), e)).collect()
        }
        Err(_) => BTreeMap::new(),
    };
    let mut manifest =
        Manifest { schema: MANIFEST_SCHEMA.into(), endpoint: base.into(), provenance: p.clone(), ontologies: Vec::new() };
    let (mut fetched, mut skipped, mut failed) = (Vec::new(), Vec::new(), Vec::new());

    for id in &ids {
        let file = format!("{}.owl", file_stem(id));
        let path = a.out.join(&file);
        if let (Some(e), Ok(bytes)) = (known.get(id), fs::read(&path)) {
            if e.sha256 == sha256_hex(&bytes) {
                manifest.ontologies.push(e.clone());
                skipped.push(id.clone());
                continue;
            }
        }
        match f.get(&format!("{base}/ontologies/{id}/download")) {
            Ok(bytes) => {
                fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
                manifest.ontologies.push(ManifestEntry { id: id.clone(), file, bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) });
                save(&manifest_path, &manifest)?;
                fetched.push(id.clone());
            }
            Err(e @ FetchError::Auth(_)) => return Err(e.into()),
            Err(e) => failed.push(json!({ "id": id, "error": e.to_string() })),
        }
    }
    save(&manifest_path, &manifest)?;
    let report = json!({
        "schema": "ontocheck.fetch-report/1",
        "listed": ids.len(),
        "fetched": fetched,
        "skipped": skipped,
        "failed": failed,
        "retries": f.retries,
        "manifest": manifest_path,
    });
    emit(&stamp(&report, &p)?, None)?;
    if !failed.is_empty() {
        anyhow::bail!("{} download(s) failed", failed.len());
    }
    Ok(())
}
