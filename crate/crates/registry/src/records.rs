use chrono::{DateTime, Utc};
use causalbench_core::model::{ComponentId, ComponentKind, Descriptor, TaskKind, Visibility};
use serde::{Deserialize, Serialize};

use crate::registrar::RegistrarKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMetadata {
    pub title: String,
    pub description: String,
    pub license: String,
    pub created_at: DateTime<Utc>,
    pub owner: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub id: ComponentId,
    pub kind: ComponentKind,
    pub descriptor: Descriptor,
    pub payload_hash: String,
    pub payload_size: u64,
    pub metadata: ComponentMetadata,
    pub visibility: Visibility,
    pub permanent: bool,
}

/// What a publication is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum Subject {
    Run(String),
    Component(ComponentId),
}

impl Subject {
    /// Store-wide key, also handed to the registrar.
    pub fn key(&self) -> String {
        match self {
            Subject::Run(id) => format!("run:{id}"),
            Subject::Component(id) => format!("component:{id}"),
        }
    }

    pub fn from_key(key: &str) -> Option<Subject> {
        if let Some(id) = key.strip_prefix("run:") {
            return Some(Subject::Run(id.to_string()));
        }
        key.strip_prefix("component:").and_then(|id| id.parse().ok()).map(Subject::Component)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub subject: Subject,
    pub identifier: String,
    pub registrar: RegistrarKind,
    pub minted_at: DateTime<Utc>,
}

/// An API user. The key hash is never serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Principal {
    pub user_name: String,
    #[serde(skip_serializing)]
    pub api_key_hash: String,
    pub active: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Public entities plus the caller's own.
    #[default]
    All,
    Mine,
    Public,
}

impl Scope {
    pub fn parse(s: &str) -> Option<Scope> {
        match s {
            "all" => Some(Scope::All),
            "mine" => Some(Scope::Mine),
            "public" => Some(Scope::Public),
            _ => None,
        }
    }
}

pub const MAX_PAGE_SIZE: usize = 100;
pub const DEFAULT_PAGE_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ComponentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
    /// Case-insensitive substring of the name, title or description.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default)]
    pub scope: Scope,
    /// 1-based.
    #[serde(default = "first_page")]
    pub page: usize,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn first_page() -> usize {
    1
}

fn default_page_size() -> usize {
    DEFAULT_PAGE_SIZE
}

impl Default for ComponentQuery {
    fn default() -> Self {
        ComponentQuery { kind: None, task: None, text: None, scope: Scope::All, page: 1, page_size: DEFAULT_PAGE_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executed_by: Option<String>,
    #[serde(default)]
    pub scope: Scope,
    #[serde(default = "first_page")]
    pub page: usize,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

impl Default for RunQuery {
    fn default() -> Self {
        RunQuery { context_id: None, executed_by: None, scope: Scope::All, page: 1, page_size: DEFAULT_PAGE_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checked: usize,
    pub missing: Vec<String>,
    pub corrupt: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.corrupt.is_empty()
    }
}
