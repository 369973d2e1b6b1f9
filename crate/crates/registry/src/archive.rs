//! Component payloads: gzip-compressed tar archives with a `manifest.json`
//! at the root.
//!
//! Packing is deterministic (sorted entries, zeroed timestamps and owners),
//! so the same directory always yields the same bytes and the same hash.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use causalbench_core::canonical;
use causalbench_core::model::{check_relative_path, ComponentKind, DatasetFile, Descriptor};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{RegistryError, Result};

pub const MANIFEST: &str = "manifest.json";

/// Upper bound on the unpacked size of one archive.
pub const MAX_UNPACKED_BYTES: u64 = 2 << 30;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestMetadata {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub license: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: ComponentKind,
    pub descriptor: Descriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entrypoint: Option<String>,
    #[serde(default)]
    pub metadata: ManifestMetadata,
}

impl Manifest {
    pub fn new(descriptor: Descriptor, metadata: ManifestMetadata) -> Self {
        Manifest {
            kind: descriptor.kind(),
            entrypoint: descriptor.entrypoint().map(str::to_string),
            descriptor,
            metadata,
        }
    }
}

/// An unpacked payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub manifest: Manifest,
    /// Relative path -> contents, excluding the manifest.
    pub files: BTreeMap<String, Vec<u8>>,
}

fn corrupt(msg: impl Into<String>) -> RegistryError {
    RegistryError::CorruptArchive(msg.into())
}

/// Packs a manifest and files into archive bytes.
pub fn pack(manifest: &Manifest, files: &BTreeMap<String, Vec<u8>>) -> Result<Vec<u8>> {
    let mut entries: BTreeMap<&str, Vec<u8>> = files.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    entries.insert(MANIFEST, canonical::to_vec(manifest).map_err(|e| corrupt(e.to_string()))?);

    let gz = GzEncoder::new(Vec::new(), Compression::default());
    let mut tar = tar::Builder::new(gz);
    tar.mode(tar::HeaderMode::Deterministic);
    for (path, data) in entries {
        check_relative_path(path).map_err(|e| corrupt(e.to_string()))?;
        let mut header = tar::Header::new_gnu();
        header.set_size(data.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_entry_type(tar::EntryType::Regular);
        tar.append_data(&mut header, path, data.as_slice())?;
    }
    let gz = tar.into_inner()?;
    Ok(gz.finish()?)
}

/// Reads and checks an archive: the manifest parses and is consistent with
/// its descriptor, the descriptor validates, the entrypoint exists, and
/// every declared dataset file is present with its recorded hash and size.
pub fn unpack(bytes: &[u8]) -> Result<Archive> {
    let mut tar = tar::Archive::new(GzDecoder::new(bytes));
    let mut files = BTreeMap::new();
    let mut manifest_bytes = None;
    let mut total = 0u64;
    for entry in tar.entries().map_err(|e| corrupt(e.to_string()))? {
        let mut entry = entry.map_err(|e| corrupt(e.to_string()))?;
        let kind = entry.header().entry_type();
        if kind.is_dir() {
            continue;
        }
        if !kind.is_file() {
            return Err(corrupt("archive may only contain regular files and directories"));
        }
        let path = entry.path().map_err(|e| corrupt(e.to_string()))?.to_string_lossy().into_owned();
        let path = path.trim_start_matches("./").to_string();
        check_relative_path(&path).map_err(|e| corrupt(e.to_string()))?;
        total += entry.header().size().map_err(|e| corrupt(e.to_string()))?;
        if total > MAX_UNPACKED_BYTES {
            return Err(corrupt("archive is too large"));
        }
        let mut data = Vec::new();
        entry.read_to_end(&mut data).map_err(|e| corrupt(e.to_string()))?;
        if path == MANIFEST {
            manifest_bytes = Some(data);
        } else if files.insert(path.clone(), data).is_some() {
            return Err(corrupt(format!("duplicate entry `{path}`")));
        }
    }
    let manifest_bytes = manifest_bytes.ok_or_else(|| corrupt("missing manifest.json"))?;
    let manifest: Manifest =
        serde_json::from_slice(&manifest_bytes).map_err(|e| corrupt(format!("manifest.json: {e}")))?;
    let archive = Archive { manifest, files };
    archive.check()?;
    Ok(archive)
}

impl Archive {
    fn check(&self) -> Result<()> {
        let m = &self.manifest;
        if m.kind != m.descriptor.kind() {
            return Err(corrupt(format!(
                "manifest kind `{}` disagrees with descriptor kind `{}`",
                m.kind.as_str(),
                m.descriptor.kind().as_str()
            )));
        }
        if m.entrypoint.is_some() && m.entrypoint.as_deref() != m.descriptor.entrypoint() {
            return Err(corrupt("manifest entrypoint disagrees with descriptor"));
        }
        m.descriptor.validate().map_err(|e| RegistryError::SchemaViolation(e.to_string()))?;
        if let Some(ep) = m.descriptor.entrypoint() {
            if !self.files.contains_key(ep) {
                return Err(corrupt(format!("entrypoint `{ep}` is not in the archive")));
            }
        }
        if let Some(d) = m.descriptor.as_dataset() {
            for f in &d.files {
                let data = self.files.get(&f.name).ok_or_else(|| corrupt(format!("dataset file `{}` is missing", f.name)))?;
                if data.len() as u64 != f.byte_size || canonical::sha256_hex(data) != f.content_hash {
                    return Err(corrupt(format!("dataset file `{}` does not match its recorded hash", f.name)));
                }
            }
        }
        Ok(())
    }

    /// Writes the files (and the manifest) under `dir`.
    pub fn extract_to(&self, dir: &Path) -> Result<()> {
        let manifest = canonical::to_vec(&self.manifest).map_err(|e| corrupt(e.to_string()))?;
        let all = self
            .files
            .iter()
            .map(|(p, d)| (p.as_str(), d.as_slice()))
            .chain(std::iter::once((MANIFEST, manifest.as_slice())));
        for (path, data) in all {
            let target = dir.join(path);
            if let Some(parent) = target.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::File::create(&target)?.write_all(data)?;
        }
        Ok(())
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        let ft = entry.file_type()?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') || name == "__pycache__" {
            continue;
        }
        if ft.is_dir() {
            collect_files(root, &path, out)?;
        } else if ft.is_file() {
            let rel = path.strip_prefix(root).expect("under root").to_string_lossy().replace('\\', "/");
            if rel != MANIFEST {
                out.insert(rel, std::fs::read(&path)?);
            }
        }
    }
    Ok(())
}

/// Packs a component directory that holds a `manifest.json`.
///
/// For datasets the file list in the descriptor is filled in from the
/// directory when empty, and every listed file's hash and size are
/// recomputed, so authors never write hashes by hand.
pub fn pack_dir(dir: &Path) -> Result<(Manifest, Vec<u8>)> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))
        .map_err(|e| corrupt(format!("{}: {e}", dir.join(MANIFEST).display())))?;
    let mut manifest: Manifest = serde_json::from_str(&text).map_err(|e| corrupt(format!("manifest.json: {e}")))?;
    let mut files = BTreeMap::new();
    collect_files(dir, dir, &mut files)?;
    if let Descriptor::Dataset(d) = &mut manifest.descriptor {
        if d.files.is_empty() {
            d.files = files.keys().map(|name| DatasetFile { name: name.clone(), content_hash: String::new(), byte_size: 0 }).collect();
        }
        for f in &mut d.files {
            let data = files.get(&f.name).ok_or_else(|| corrupt(format!("dataset file `{}` is missing", f.name)))?;
            f.content_hash = canonical::sha256_hex(data);
            f.byte_size = data.len() as u64;
        }
    }
    let bytes = pack(&manifest, &files)?;
    let archive = unpack(&bytes)?;
    Ok((archive.manifest, bytes))
}
