//! On-disk layout: `<root>/blobs/<sha256>` for payloads and `<root>/meta.db`
//! for everything else.
//!
//! Mutations go through a single writer connection, one immediate
//! transaction at a time. Reads use a pool of separate connections; with
//! the database in WAL mode each read sees a consistent snapshot and never
//! blocks on the writer.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use causalbench_core::canonical;
use rand::Rng;
use rusqlite::{Connection, Transaction, TransactionBehavior};

use crate::error::{RegistryError, Result};

const SCHEMA: &str = r#"
CREATE TABLE IF NOT EXISTS names (
    name TEXT PRIMARY KEY,
    owner TEXT NOT NULL,
    next_version INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS components (
    name TEXT NOT NULL,
    version INTEGER NOT NULL,
    kind TEXT NOT NULL,
    task TEXT,
    owner TEXT NOT NULL,
    descriptor TEXT NOT NULL,
    payload_hash TEXT NOT NULL,
    payload_size INTEGER NOT NULL,
    title TEXT NOT NULL,
    description TEXT NOT NULL,
    license TEXT NOT NULL,
    created_at TEXT NOT NULL,
    visibility TEXT NOT NULL,
    permanent INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (name, version)
);
CREATE TABLE IF NOT EXISTS contexts (
    context_id TEXT PRIMARY KEY,
    owner TEXT NOT NULL,
    body TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS runs (
    run_id TEXT PRIMARY KEY,
    context_id TEXT NOT NULL,
    executed_by TEXT NOT NULL,
    visibility TEXT NOT NULL,
    body TEXT NOT NULL,
    uploaded_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS run_components (
    run_id TEXT NOT NULL,
    name TEXT NOT NULL,
    version INTEGER NOT NULL,
    PRIMARY KEY (run_id, name, version)
);
CREATE INDEX IF NOT EXISTS run_components_by_component ON run_components (name, version);
CREATE TABLE IF NOT EXISTS publications (
    subject TEXT PRIMARY KEY,
    identifier TEXT NOT NULL UNIQUE,
    registrar TEXT NOT NULL,
    minted_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS principals (
    user_name TEXT PRIMARY KEY,
    api_key_hash TEXT NOT NULL UNIQUE,
    active INTEGER NOT NULL,
    created_at TEXT NOT NULL
);
"#;

fn open_connection(path: &Path) -> Result<Connection> {
    let conn = Connection::open(path)?;
    conn.busy_timeout(std::time::Duration::from_secs(10))?;
    conn.pragma_update(None, "journal_mode", "WAL")?;
    conn.pragma_update(None, "synchronous", "NORMAL")?;
    Ok(conn)
}

pub struct Store {
    root: PathBuf,
    db_path: PathBuf,
    writer: Mutex<Connection>,
    readers: Mutex<Vec<Connection>>,
}

impl Store {
    pub fn open(root: impl AsRef<Path>) -> Result<Store> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(root.join("blobs"))?;
        let db_path = root.join("meta.db");
        let writer = open_connection(&db_path)?;
        writer.execute_batch(SCHEMA)?;
        Ok(Store { root, db_path, writer: Mutex::new(writer), readers: Mutex::new(Vec::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Runs `f` inside one immediate write transaction, committing on `Ok`.
    pub fn write<R>(&self, f: impl FnOnce(&Transaction<'_>) -> Result<R>) -> Result<R> {
        let mut conn = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let out = f(&tx)?;
        tx.commit()?;
        Ok(out)
    }

    /// Runs `f` on a pooled read connection inside a read transaction.
    pub fn read<R>(&self, f: impl FnOnce(&Connection) -> Result<R>) -> Result<R> {
        let pooled = self.readers.lock().unwrap_or_else(|p| p.into_inner()).pop();
        let conn = match pooled {
            Some(c) => c,
            None => open_connection(&self.db_path)?,
        };
        conn.execute_batch("BEGIN DEFERRED")?;
        let out = f(&conn);
        let _ = conn.execute_batch("COMMIT");
        self.readers.lock().unwrap_or_else(|p| p.into_inner()).push(conn);
        out
    }

    fn blob_path(&self, hash: &str) -> PathBuf {
        self.root.join("blobs").join(hash)
    }

    /// Stores `bytes` under their hash. Existing blobs are left untouched.
    pub fn put_blob(&self, bytes: &[u8]) -> Result<String> {
        let hash = canonical::sha256_hex(bytes);
        let path = self.blob_path(&hash);
        if !path.exists() {
            self.write_blob_file(&path, bytes)?;
        }
        Ok(hash)
    }

    /// Rewrites a blob whose on-disk bytes were damaged. The caller has
    /// already checked that `bytes` hash to `hash`.
    pub(crate) fn restore_blob(&self, hash: &str, bytes: &[u8]) -> Result<()> {
        debug_assert_eq!(canonical::sha256_hex(bytes), hash);
        self.write_blob_file(&self.blob_path(hash), bytes)
    }

    fn write_blob_file(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        let tmp = self.root.join("blobs").join(format!(".tmp-{:016x}", rand::rng().random::<u64>()));
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads a blob and checks it still hashes to its name.
    pub fn get_blob(&self, hash: &str) -> Result<Vec<u8>> {
        let bytes = std::fs::read(self.blob_path(hash))
            .map_err(|_| RegistryError::IntegrityFailure(format!("blob {hash} is missing")))?;
        if canonical::sha256_hex(&bytes) != hash {
            return Err(RegistryError::IntegrityFailure(format!("blob {hash}")));
        }
        Ok(bytes)
    }

    pub fn has_blob(&self, hash: &str) -> bool {
        self.blob_path(hash).exists()
    }

    pub(crate) fn remove_blob(&self, hash: &str) -> Result<()> {
        match std::fs::remove_file(self.blob_path(hash)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
            _ => Ok(()),
        }
    }

    /// Path of a blob, for tests that tamper with the store.
    pub fn blob_file(&self, hash: &str) -> PathBuf {
        self.blob_path(hash)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_content_addressed_and_verified() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let h = store.put_blob(b"hello").unwrap();
        assert_eq!(h, canonical::sha256_hex(b"hello"));
        assert_eq!(store.get_blob(&h).unwrap(), b"hello");
        std::fs::write(store.blob_file(&h), b"hellO").unwrap();
        assert!(matches!(store.get_blob(&h), Err(RegistryError::IntegrityFailure(_))));
        store.restore_blob(&h, b"hello").unwrap();
        assert_eq!(store.get_blob(&h).unwrap(), b"hello");
    }

    #[test]
    fn reads_see_committed_writes() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store
            .write(|tx| {
                tx.execute("INSERT INTO names (name, owner, next_version) VALUES ('a/b', 'a', 2)", [])?;
                Ok(())
            })
            .unwrap();
        let n: i64 = store.read(|c| Ok(c.query_row("SELECT COUNT(*) FROM names", [], |r| r.get(0))?)).unwrap();
        assert_eq!(n, 1);
    }
}
