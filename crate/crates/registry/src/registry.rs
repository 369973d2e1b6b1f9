use std::collections::BTreeSet;
use std::path::Path;

use causalbench_core::canonical;
use causalbench_core::model::{
    validate_run, BenchmarkContext, BenchmarkRun, ComponentId, ComponentKind, DatasetDescriptor, Descriptor,
    TaskKind, Visibility,
};
use chrono::{DateTime, SecondsFormat, Utc};
use rand::Rng;
use rusqlite::{params, Connection, OptionalExtension, Row};
use subtle::ConstantTimeEq;

use crate::archive;
use crate::error::{RegistryError, Result};
use crate::records::*;
use crate::registrar::{MintRequest, Registrar, RegistrarKind};
use crate::store::Store;

/// The component, context and run registry.
pub struct Registry {
    store: Store,
    registrar: Box<dyn Registrar>,
}

fn now() -> DateTime<Utc> {
    Utc::now()
}

fn ts(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn parse_ts(s: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| RegistryError::Storage(format!("bad timestamp `{s}`: {e}")))
}

fn parse_visibility(s: &str) -> Visibility {
    if s == "public" {
        Visibility::Public
    } else {
        Visibility::Private
    }
}

const COMPONENT_COLS: &str = "name, version, kind, owner, descriptor, payload_hash, payload_size, title, description, license, created_at, visibility, permanent";

type ComponentRow = (String, i64, String, String, String, String, i64, String, String, String, String, String, bool);

fn component_from_row(row: &Row<'_>) -> rusqlite::Result<ComponentRow> {
    Ok((
        row.get(0)?,
        row.get(1)?,
        row.get(2)?,
        row.get(3)?,
        row.get(4)?,
        row.get(5)?,
        row.get(6)?,
        row.get(7)?,
        row.get(8)?,
        row.get(9)?,
        row.get(10)?,
        row.get(11)?,
        row.get(12)?,
    ))
}

type RawComponent = (String, i64, String, String, String, String, i64, String, String, String, String, String, bool);

fn build_record(raw: RawComponent) -> Result<ComponentRecord> {
    let (name, version, kind, owner, descriptor, payload_hash, payload_size, title, description, license, created_at, visibility, permanent) = raw;
    let id = ComponentId::new(name, version as u32).map_err(|e| RegistryError::Storage(e.to_string()))?;
    Ok(ComponentRecord {
        id,
        kind: kind.parse().map_err(|_| RegistryError::Storage(format!("bad kind `{kind}`")))?,
        descriptor: canonical::from_str(&descriptor)?,
        payload_hash,
        payload_size: payload_size as u64,
        metadata: ComponentMetadata { title, description, license, created_at: parse_ts(&created_at)?, owner },
        visibility: parse_visibility(&visibility),
        permanent,
    })
}

fn load_component(conn: &Connection, id: &ComponentId) -> Result<Option<ComponentRecord>> {
    let sql = format!("SELECT {COMPONENT_COLS} FROM components WHERE name = ?1 AND version = ?2");
    let raw = conn.query_row(&sql, params![id.name(), id.version()], component_from_row).optional()?;
    raw.map(build_record).transpose()
}

fn load_run(conn: &Connection, run_id: &str) -> Result<Option<BenchmarkRun>> {
    let body: Option<String> =
        conn.query_row("SELECT body FROM runs WHERE run_id = ?1", params![run_id], |r| r.get(0)).optional()?;
    body.map(|b| canonical::from_str(&b).map_err(RegistryError::from)).transpose()
}

fn load_context(conn: &Connection, id: &str) -> Result<Option<BenchmarkContext>> {
    let body: Option<String> =
        conn.query_row("SELECT body FROM contexts WHERE context_id = ?1", params![id], |r| r.get(0)).optional()?;
    body.map(|b| canonical::from_str(&b).map_err(RegistryError::from)).transpose()
}

fn load_publication(conn: &Connection, subject: &Subject) -> Result<Option<PublicationRecord>> {
    let row: Option<(String, String, String)> = conn
        .query_row(
            "SELECT identifier, registrar, minted_at FROM publications WHERE subject = ?1",
            params![subject.key()],
            |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?)),
        )
        .optional()?;
    row.map(|(identifier, registrar, minted_at)| {
        Ok(PublicationRecord {
            subject: subject.clone(),
            identifier,
            registrar: RegistrarKind::parse(&registrar)
                .ok_or_else(|| RegistryError::Storage(format!("bad registrar `{registrar}`")))?,
            minted_at: parse_ts(&minted_at)?,
        })
    })
    .transpose()
}

fn can_view(visibility: Visibility, owner: &str, principal: Option<&str>) -> bool {
    visibility == Visibility::Public || principal == Some(owner)
}

fn check_page(page: usize, page_size: usize) -> Result<()> {
    if page == 0 || page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(RegistryError::SchemaViolation(format!(
            "page must be >= 1 and page_size in 1..={MAX_PAGE_SIZE}"
        )));
    }
    Ok(())
}

fn paginate<T>(items: Vec<T>, page: usize, page_size: usize) -> Page<T> {
    let total = items.len();
    let items = items.into_iter().skip((page - 1) * page_size).take(page_size).collect();
    Page { items, total, page, page_size }
}

fn in_scope(scope: Scope, visibility: Visibility, owner: &str, principal: Option<&str>) -> bool {
    match scope {
        Scope::All => can_view(visibility, owner, principal),
        Scope::Mine => principal == Some(owner),
        Scope::Public => visibility == Visibility::Public,
    }
}

fn new_api_key() -> String {
    let bytes: [u8; 32] = rand::rng().random();
    let mut key = String::from("cbk_");
    for b in bytes {
        key.push_str(&format!("{b:02x}"));
    }
    key
}

impl Registry {
    pub fn open(root: impl AsRef<Path>, registrar: Box<dyn Registrar>) -> Result<Registry> {
        Ok(Registry { store: Store::open(root)?, registrar })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn registrar_kind(&self) -> RegistrarKind {
        self.registrar.kind()
    }

    // ---- principals ----

    /// Issues a fresh key for `user_name`, creating the principal if needed
    /// and reactivating it otherwise. Any previous key stops working.
    pub fn issue_key(&self, user_name: &str) -> Result<String> {
        if !causalbench_core::model::is_valid_name(&format!("{user_name}/x")) {
            return Err(RegistryError::SchemaViolation(format!("invalid user name `{user_name}`")));
        }
        let key = new_api_key();
        let hash = canonical::sha256_hex(key.as_bytes());
        self.store.write(|tx| {
            tx.execute(
                "INSERT INTO principals (user_name, api_key_hash, active, created_at) VALUES (?1, ?2, 1, ?3)
                 ON CONFLICT(user_name) DO UPDATE SET api_key_hash = excluded.api_key_hash, active = 1",
                params![user_name, hash, ts(&now())],
            )?;
            Ok(())
        })?;
        Ok(key)
    }

    pub fn set_active(&self, user_name: &str, active: bool) -> Result<()> {
        let n = self.store.write(|tx| {
            Ok(tx.execute("UPDATE principals SET active = ?2 WHERE user_name = ?1", params![user_name, active])?)
        })?;
        if n == 0 {
            return Err(RegistryError::Conflict(format!("no principal named `{user_name}`")));
        }
        Ok(())
    }

    /// Finds the active principal holding `key`. Every stored hash is
    /// compared in constant time, so timing does not reveal which one
    /// matched or how much of it.
    pub fn authenticate(&self, key: &str) -> Result<Principal> {
        let presented = canonical::sha256_hex(key.as_bytes());
        let all: Vec<Principal> = self.store.read(|c| {
            let mut stmt = c.prepare("SELECT user_name, api_key_hash, active FROM principals")?;
            let rows = stmt.query_map([], |r| {
                Ok(Principal { user_name: r.get(0)?, api_key_hash: r.get(1)?, active: r.get(2)? })
            })?;
            Ok(rows.collect::<rusqlite::Result<Vec<_>>>()?)
        })?;
        let mut found = None;
        for p in all {
            if bool::from(p.api_key_hash.as_bytes().ct_eq(presented.as_bytes())) {
                found = Some(p);
            }
        }
        match found {
            Some(p) if p.active => Ok(p),
            _ => Err(RegistryError::Unauthenticated),
        }
    }

    // ---- components ----

    fn insert_component(
        &self,
        tx: &Connection,
        id: &ComponentId,
        descriptor: &Descriptor,
        payload: &[u8],
        metadata: &archive::ManifestMetadata,
        owner: &str,
    ) -> Result<ComponentRecord> {
        let payload_hash = self.store.put_blob(payload)?;
        let created_at = now();
        tx.execute(
            &format!("INSERT INTO components ({COMPONENT_COLS}, task) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, 'private', 0, ?12)"),
            params![
                id.name(),
                id.version(),
                descriptor.kind().as_str(),
                owner,
                canonical::to_string(descriptor)?,
                payload_hash,
                payload.len() as i64,
                metadata.title,
                metadata.description,
                metadata.license,
                ts(&created_at),
                descriptor.task().map(TaskKind::as_str),
            ],
        )?;
        load_component(tx, id)?.ok_or_else(|| RegistryError::Storage("inserted row vanished".into()))
    }

    fn prepare_payload(payload: &[u8], principal: &str) -> Result<archive::Archive> {
        let archive = archive::unpack(payload)?;
        let id = archive.manifest.descriptor.id();
        if id.owner() != principal {
            return Err(RegistryError::NotOwner(id.name().to_string()));
        }
        Ok(archive)
    }

    /// Registers a new component name at version 1. The payload archive's
    /// manifest supplies the descriptor; its version number is ignored.
    pub fn register(&self, payload: &[u8], principal: &str) -> Result<ComponentRecord> {
        let archive = Self::prepare_payload(payload, principal)?;
        let mut descriptor = archive.manifest.descriptor.clone();
        let name = descriptor.id().name().to_string();
        let id = ComponentId::new(name.clone(), 1).map_err(|e| RegistryError::SchemaViolation(e.to_string()))?;
        descriptor.set_id(id.clone());
        self.store.write(|tx| {
            let taken: Option<String> =
                tx.query_row("SELECT owner FROM names WHERE name = ?1", params![name], |r| r.get(0)).optional()?;
            if taken.is_some() {
                return Err(RegistryError::NameTaken(name.clone()));
            }
            tx.execute("INSERT INTO names (name, owner, next_version) VALUES (?1, ?2, 2)", params![name, principal])?;
            self.insert_component(tx, &id, &descriptor, payload, &archive.manifest.metadata, principal)
        })
    }

    /// Adds the next version of an existing name. Version numbers are never
    /// reused, even after a version is deleted.
    pub fn new_version(&self, name: &str, payload: &[u8], principal: &str) -> Result<ComponentRecord> {
        let archive = archive::unpack(payload)?;
        let mut descriptor = archive.manifest.descriptor.clone();
        if descriptor.id().name() != name {
            return Err(RegistryError::SchemaViolation(format!(
                "payload describes `{}`, not `{name}`",
                descriptor.id().name()
            )));
        }
        self.store.write(|tx| {
            let row: Option<(String, i64)> = tx
                .query_row("SELECT owner, next_version FROM names WHERE name = ?1", params![name], |r| {
                    Ok((r.get(0)?, r.get(1)?))
                })
                .optional()?;
            let (owner, next) = row.ok_or_else(|| RegistryError::UnknownComponent(name.to_string()))?;
            if owner != principal {
                return Err(RegistryError::NotOwner(name.to_string()));
            }
            let id = ComponentId::new(name, next as u32).map_err(|e| RegistryError::SchemaViolation(e.to_string()))?;
            descriptor.set_id(id.clone());
            tx.execute("UPDATE names SET next_version = ?2 WHERE name = ?1", params![name, next + 1])?;
            self.insert_component(tx, &id, &descriptor, payload, &archive.manifest.metadata, principal)
        })
    }

    /// The record for `id`, if the principal may see it.
    pub fn record(&self, id: &ComponentId, principal: Option<&str>) -> Result<ComponentRecord> {
        let rec = self
            .store
            .read(|c| load_component(c, id))?
            .ok_or_else(|| RegistryError::UnknownComponent(id.to_string()))?;
        if !can_view(rec.visibility, &rec.metadata.owner, principal) {
            return Err(RegistryError::Forbidden(id.to_string()));
        }
        Ok(rec)
    }

    /// The record and payload bytes, verified against the recorded hash.
    pub fn fetch(&self, id: &ComponentId, principal: Option<&str>) -> Result<(ComponentRecord, Vec<u8>)> {
        let rec = self.record(id, principal)?;
        let bytes = self
            .store
            .get_blob(&rec.payload_hash)
            .map_err(|_| RegistryError::IntegrityFailure(id.to_string()))?;
        Ok((rec, bytes))
    }

    /// Re-uploads the payload of an existing version. Only bytes with the
    /// recorded hash are accepted, so this can repair a damaged blob but
    /// never change a version's contents.
    pub fn repair_payload(&self, id: &ComponentId, bytes: &[u8], principal: &str) -> Result<()> {
        let rec = self.record(id, Some(principal))?;
        if rec.metadata.owner != principal {
            return Err(RegistryError::NotOwner(id.to_string()));
        }
        if canonical::sha256_hex(bytes) != rec.payload_hash {
            return Err(RegistryError::Conflict(format!("payload of {id} is immutable; the bytes differ from the stored version")));
        }
        self.store.write(|_| self.store.restore_blob(&rec.payload_hash, bytes))
    }

    /// Lists visible components, ordered by name then newest version first.
    pub fn query(&self, q: &ComponentQuery, principal: Option<&str>) -> Result<Page<ComponentRecord>> {
        check_page(q.page, q.page_size)?;
        let raws: Vec<RawComponent> = self.store.read(|c| {
            let mut sql = format!("SELECT {COMPONENT_COLS} FROM components WHERE 1 = 1");
            let mut args: Vec<String> = Vec::new();
            if let Some(k) = q.kind {
                args.push(k.as_str().to_string());
                sql.push_str(&format!(" AND kind = ?{}", args.len()));
            }
            if let Some(t) = q.task {
                args.push(t.as_str().to_string());
                sql.push_str(&format!(" AND task = ?{}", args.len()));
            }
            sql.push_str(" ORDER BY name ASC, version DESC");
            let mut stmt = c.prepare(&sql)?;
            let rows = stmt.query_map(rusqlite::params_from_iter(args.iter()), component_from_row)?;
            Ok(rows.collect::<rusqlite::Result<Vec<_>>>()?)
        })?;
        let needle = q.text.as_ref().map(|t| t.to_lowercase());
        let mut items = Vec::new();
        for raw in raws {
            let rec = build_record(raw)?;
            if !in_scope(q.scope, rec.visibility, &rec.metadata.owner, principal) {
                continue;
            }
            if let Some(n) = &needle {
                let hay = [rec.id.name(), &rec.metadata.title, &rec.metadata.description];
                if !hay.iter().any(|h| h.to_lowercase().contains(n.as_str())) {
                    continue;
                }
            }
            items.push(rec);
        }
        Ok(paginate(items, q.page, q.page_size))
    }

    /// Descriptors of every visible dataset version.
    pub fn dataset_descriptors(&self, principal: Option<&str>) -> Result<Vec<DatasetDescriptor>> {
        let mut out = Vec::new();
        let mut page = 1;
        loop {
            let q = ComponentQuery { kind: Some(ComponentKind::Dataset), page, page_size: MAX_PAGE_SIZE, ..Default::default() };
            let p = self.query(&q, principal)?;
            let done = p.items.len() < MAX_PAGE_SIZE;
            out.extend(p.items.into_iter().filter_map(|r| r.descriptor.as_dataset().cloned()));
            if done {
                return Ok(out);
            }
            page += 1;
        }
    }

    fn mint(&self, subject: &Subject, title: String, creators: Vec<String>) -> Result<String> {
        let request = MintRequest {
            subject: subject.key(),
            title,
            description: format!("causalbench {}", subject.key()),
            creators,
        };
        self.registrar.mint(&request).map_err(|e| RegistryError::RegistrarUnavailable(e.0))
    }

    fn record_publication(&self, conn: &Connection, subject: &Subject, identifier: &str) -> Result<PublicationRecord> {
        if let Some(existing) = load_publication(conn, subject)? {
            return Ok(existing);
        }
        conn.execute(
            "INSERT INTO publications (subject, identifier, registrar, minted_at) VALUES (?1, ?2, ?3, ?4)",
            params![subject.key(), identifier, self.registrar.kind().as_str(), ts(&now())],
        )
        .map_err(|e| match e {
            rusqlite::Error::SqliteFailure(f, _) if f.code == rusqlite::ErrorCode::ConstraintViolation => {
                RegistryError::Conflict(format!("identifier {identifier} is already in use"))
            }
            other => other.into(),
        })?;
        load_publication(conn, subject)?.ok_or_else(|| RegistryError::Storage("publication vanished".into()))
    }

    /// Makes a component version public and mints an identifier for it.
    /// Publishing does not make it permanent; inclusion in a public run
    /// does. Re-publishing returns the existing record.
    pub fn publish_component(&self, id: &ComponentId, principal: &str) -> Result<PublicationRecord> {
        let rec = self.record(id, Some(principal))?;
        if rec.metadata.owner != principal {
            return Err(RegistryError::NotOwner(id.to_string()));
        }
        let subject = Subject::Component(id.clone());
        let existing = self.store.read(|c| load_publication(c, &subject))?;
        let identifier = match &existing {
            Some(p) => p.identifier.clone(),
            None => self.mint(&subject, rec.metadata.title.clone(), vec![principal.to_string()])?,
        };
        self.store.write(|tx| {
            if load_component(tx, id)?.is_none() {
                return Err(RegistryError::UnknownComponent(id.to_string()));
            }
            let p = self.record_publication(tx, &subject, &identifier)?;
            tx.execute(
                "UPDATE components SET visibility = 'public' WHERE name = ?1 AND version = ?2",
                params![id.name(), id.version()],
            )?;
            Ok(p)
        })
    }

    /// Removes a component version unless it is permanent. The payload blob
    /// goes too when no other version shares it.
    pub fn delete_component(&self, id: &ComponentId, principal: &str) -> Result<()> {
        self.store.write(|tx| {
            let rec = load_component(tx, id)?.ok_or_else(|| RegistryError::UnknownComponent(id.to_string()))?;
            if rec.metadata.owner != principal {
                return Err(RegistryError::NotOwner(id.to_string()));
            }
            if rec.permanent {
                return Err(RegistryError::PermanentEntity(id.to_string()));
            }
            tx.execute("DELETE FROM components WHERE name = ?1 AND version = ?2", params![id.name(), id.version()])?;
            let shared: i64 = tx.query_row(
                "SELECT COUNT(*) FROM components WHERE payload_hash = ?1",
                params![rec.payload_hash],
                |r| r.get(0),
            )?;
            if shared == 0 {
                self.store.remove_blob(&rec.payload_hash)?;
            }
            Ok(())
        })
    }

    // ---- contexts ----

    /// Stores a context. Every referenced component must exist, be visible
    /// to the principal and be of the right kind. Storing an identical
    /// context again is a no-op.
    pub fn put_context(&self, context: &BenchmarkContext, principal: &str) -> Result<()> {
        context.validate().map_err(|e| RegistryError::SchemaViolation(e.to_string()))?;
        if context.context_id.trim().is_empty() {
            return Err(RegistryError::SchemaViolation("context_id is empty".into()));
        }
        let groups = [
            (ComponentKind::Dataset, &context.datasets),
            (ComponentKind::Model, &context.models),
            (ComponentKind::Metric, &context.metrics),
        ];
        for (kind, ids) in groups {
            for id in ids {
                let rec = self.record(id, Some(principal))?;
                if rec.kind != kind {
                    return Err(RegistryError::SchemaViolation(format!("{id} is a {}, not a {}", rec.kind.as_str(), kind.as_str())));
                }
            }
        }
        let body = canonical::to_string(context)?;
        self.store.write(|tx| {
            let existing: Option<String> = tx
                .query_row("SELECT body FROM contexts WHERE context_id = ?1", params![context.context_id], |r| r.get(0))
                .optional()?;
            match existing {
                Some(b) if b == body => Ok(()),
                Some(_) => Err(RegistryError::Conflict(format!("context `{}` already exists with different contents", context.context_id))),
                None => {
                    tx.execute(
                        "INSERT INTO contexts (context_id, owner, body, created_at) VALUES (?1, ?2, ?3, ?4)",
                        params![context.context_id, principal, body, ts(&now())],
                    )?;
                    Ok(())
                }
            }
        })
    }

    pub fn context(&self, context_id: &str) -> Result<BenchmarkContext> {
        self.store
            .read(|c| load_context(c, context_id))?
            .ok_or_else(|| RegistryError::UnknownContext(context_id.to_string()))
    }

    // ---- runs ----

    /// Stores an uploaded run. It must be private, executed by the
    /// principal, and validate cleanly against its stored context.
    pub fn put_run(&self, run: &BenchmarkRun, principal: &str) -> Result<()> {
        if run.executed_by != principal {
            return Err(RegistryError::NotOwner(run.run_id.clone()));
        }
        if run.visibility != Visibility::Private || run.minted_identifier.is_some() {
            return Err(RegistryError::SchemaViolation("runs are uploaded private; publish them afterwards".into()));
        }
        let context = self.context(&run.context_id)?;
        let report = validate_run(run, &context);
        if !report.is_clean() {
            return Err(RegistryError::InvalidRun(report.violations));
        }
        let components = run.referenced_components();
        for id in &components {
            self.record(id, Some(principal))?;
        }
        let body = canonical::to_string(run)?;
        self.store.write(|tx| {
            let existing: Option<String> =
                tx.query_row("SELECT body FROM runs WHERE run_id = ?1", params![run.run_id], |r| r.get(0)).optional()?;
            match existing {
                Some(b) if b == body => return Ok(()),
                Some(_) => return Err(RegistryError::Conflict(format!("run `{}` already exists", run.run_id))),
                None => {}
            }
            tx.execute(
                "INSERT INTO runs (run_id, context_id, executed_by, visibility, body, uploaded_at) VALUES (?1, ?2, ?3, 'private', ?4, ?5)",
                params![run.run_id, run.context_id, run.executed_by, body, ts(&now())],
            )?;
            for id in &components {
                tx.execute(
                    "INSERT OR IGNORE INTO run_components (run_id, name, version) VALUES (?1, ?2, ?3)",
                    params![run.run_id, id.name(), id.version()],
                )?;
            }
            Ok(())
        })
    }

    pub fn run(&self, run_id: &str, principal: Option<&str>) -> Result<BenchmarkRun> {
        let run = self.store.read(|c| load_run(c, run_id))?.ok_or_else(|| RegistryError::UnknownRun(run_id.to_string()))?;
        if !can_view(run.visibility, &run.executed_by, principal) {
            return Err(RegistryError::Forbidden(run_id.to_string()));
        }
        Ok(run)
    }

    pub fn query_runs(&self, q: &RunQuery, principal: Option<&str>) -> Result<Page<BenchmarkRun>> {
        check_page(q.page, q.page_size)?;
        let all = self.all_runs()?;
        let items = all
            .into_iter()
            .filter(|r| in_scope(q.scope, r.visibility, &r.executed_by, principal))
            .filter(|r| q.context_id.as_ref().is_none_or(|c| *c == r.context_id))
            .filter(|r| q.executed_by.as_ref().is_none_or(|u| *u == r.executed_by))
            .collect();
        Ok(paginate(items, q.page, q.page_size))
    }

    fn all_runs(&self) -> Result<Vec<BenchmarkRun>> {
        self.store.read(|c| {
            let mut stmt = c.prepare("SELECT body FROM runs ORDER BY run_id")?;
            let bodies = stmt.query_map([], |r| r.get::<_, String>(0))?.collect::<rusqlite::Result<Vec<_>>>()?;
            bodies.iter().map(|b| canonical::from_str(b).map_err(RegistryError::from)).collect()
        })
    }

    /// Every run the principal may read: public runs and their own.
    pub fn accessible_runs(&self, principal: Option<&str>) -> Result<Vec<BenchmarkRun>> {
        Ok(self.all_runs()?.into_iter().filter(|r| can_view(r.visibility, &r.executed_by, principal)).collect())
    }

    /// Publishes a run: mints an identifier first, then in one transaction
    /// records it, makes the run public, and makes every component version
    /// it references public and permanent. If minting fails nothing
    /// changes. Re-publishing returns the existing record.
    pub fn publish_run(&self, run_id: &str, principal: &str) -> Result<PublicationRecord> {
        let run = self.store.read(|c| load_run(c, run_id))?.ok_or_else(|| RegistryError::UnknownRun(run_id.to_string()))?;
        if run.executed_by != principal {
            return Err(RegistryError::NotOwner(run_id.to_string()));
        }
        let subject = Subject::Run(run_id.to_string());
        let existing = self.store.read(|c| load_publication(c, &subject))?;
        let identifier = match existing {
            Some(p) => p.identifier,
            None => {
                let context = self.context(&run.context_id)?;
                let report = validate_run(&run, &context);
                if !report.is_clean() {
                    return Err(RegistryError::InvalidRun(report.violations));
                }
                self.mint(&subject, format!("Benchmark run {run_id}"), vec![principal.to_string()])?
            }
        };
        let components = run.referenced_components();
        self.store.write(|tx| {
            for id in &components {
                if load_component(tx, id)?.is_none() {
                    return Err(RegistryError::UnknownComponent(id.to_string()));
                }
            }
            let p = self.record_publication(tx, &subject, &identifier)?;
            let mut public = load_run(tx, run_id)?.ok_or_else(|| RegistryError::UnknownRun(run_id.to_string()))?;
            public.visibility = Visibility::Public;
            public.minted_identifier = Some(p.identifier.clone());
            tx.execute(
                "UPDATE runs SET visibility = 'public', body = ?2 WHERE run_id = ?1",
                params![run_id, canonical::to_string(&public)?],
            )?;
            for id in &components {
                tx.execute(
                    "UPDATE components SET permanent = 1, visibility = 'public' WHERE name = ?1 AND version = ?2",
                    params![id.name(), id.version()],
                )?;
            }
            Ok(p)
        })
    }

    /// Removes a private run. Public runs are permanent.
    pub fn delete_run(&self, run_id: &str, principal: &str) -> Result<()> {
        self.store.write(|tx| {
            let run = load_run(tx, run_id)?.ok_or_else(|| RegistryError::UnknownRun(run_id.to_string()))?;
            if run.executed_by != principal {
                return Err(RegistryError::NotOwner(run_id.to_string()));
            }
            if run.visibility == Visibility::Public {
                return Err(RegistryError::PermanentEntity(run_id.to_string()));
            }
            tx.execute("DELETE FROM runs WHERE run_id = ?1", params![run_id])?;
            tx.execute("DELETE FROM run_components WHERE run_id = ?1", params![run_id])?;
            Ok(())
        })
    }

    pub fn publication(&self, subject: &Subject) -> Result<Option<PublicationRecord>> {
        self.store.read(|c| load_publication(c, subject))
    }

    // ---- maintenance ----

    /// Re-hashes every payload referenced by a component record.
    pub fn audit(&self) -> Result<AuditReport> {
        let hashes: BTreeSet<String> = self.store.read(|c| {
            let mut stmt = c.prepare("SELECT DISTINCT payload_hash FROM components")?;
            let rows = stmt.query_map([], |r| r.get::<_, String>(0))?;
            Ok(rows.collect::<rusqlite::Result<BTreeSet<_>>>()?)
        })?;
        let mut report = AuditReport { checked: hashes.len(), ..Default::default() };
        for h in hashes {
            if !self.store.has_blob(&h) {
                report.missing.push(h);
            } else if self.store.get_blob(&h).is_err() {
                report.corrupt.push(h);
            }
        }
        Ok(report)
    }

    /// A timestamp-free view of the whole store, for comparing two stores
    /// driven by the same operations.
    pub fn snapshot(&self) -> Result<serde_json::Value> {
        let mut v = self.store.read(|c| {
            let rows = |sql: &str, n: usize| -> Result<Vec<Vec<serde_json::Value>>> {
                let mut stmt = c.prepare(sql)?;
                let out = stmt
                    .query_map([], |r| {
                        (0..n)
                            .map(|i| {
                                Ok(match r.get_ref(i)? {
                                    rusqlite::types::ValueRef::Null => serde_json::Value::Null,
                                    rusqlite::types::ValueRef::Integer(x) => x.into(),
                                    rusqlite::types::ValueRef::Real(x) => x.into(),
                                    rusqlite::types::ValueRef::Text(t) => String::from_utf8_lossy(t).into_owned().into(),
                                    rusqlite::types::ValueRef::Blob(b) => format!("{b:?}").into(),
                                })
                            })
                            .collect()
                    })?
                    .collect::<rusqlite::Result<Vec<_>>>()?;
                Ok(out)
            };
            Ok(serde_json::json!({
                "names": rows("SELECT name, owner, next_version FROM names ORDER BY name", 3)?,
                "components": rows("SELECT name, version, kind, owner, descriptor, payload_hash, payload_size, visibility, permanent FROM components ORDER BY name, version", 9)?,
                "contexts": rows("SELECT context_id, owner, body FROM contexts ORDER BY context_id", 3)?,
                "runs": rows("SELECT run_id, visibility, body FROM runs ORDER BY run_id", 3)?,
                "run_components": rows("SELECT run_id, name, version FROM run_components ORDER BY run_id, name, version", 3)?,
                "publications": rows("SELECT subject, identifier, registrar FROM publications ORDER BY subject", 3)?,
                "principals": rows("SELECT user_name, active FROM principals ORDER BY user_name", 2)?,
            }))
        })?;
        let mut blobs: Vec<String> = std::fs::read_dir(self.store.root().join("blobs"))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| !n.starts_with('.'))
            .collect();
        blobs.sort();
        v["blobs"] = blobs.into();
        Ok(v)
    }
}
