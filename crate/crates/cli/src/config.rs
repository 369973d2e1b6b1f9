//! The `key = value` configuration file.
//!
//! ```text
//! # ~/.causalbench/config
//! server_url = http://127.0.0.1:8080
//! api_key = cbk_0123...
//! store_cache_dir = /home/me/.causalbench/cache
//! timeout_s = 600
//! max_output_bytes = 16384
//! ```
//!
//! Only `server_url` is required. `CB_API_KEY` in the environment overrides
//! the file's key.

use std::path::{Path, PathBuf};

use causalbench_harness::ExecutionLimits;
use thiserror::Error;

pub const API_KEY_ENV: &str = "CB_API_KEY";
pub const CONFIG_ENV: &str = "CB_CONFIG";
pub const CACHE_DIR_NAME: &str = "cache";
pub const WORK_DIR_NAME: &str = "work";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no config file at {0}; create one with `cb init-config`")]
    Missing(PathBuf),
    #[error("{path}:{line}: field `{field}`: {detail}")]
    Malformed { path: PathBuf, line: usize, field: String, detail: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub server_url: url::Url,
    /// Empty when no key is configured; only anonymous reads work then.
    pub api_key: String,
    pub store_cache_dir: PathBuf,
    pub default_limits: ExecutionLimits,
}

impl CliConfig {
    pub fn new(server_url: url::Url, api_key: impl Into<String>, store_cache_dir: impl Into<PathBuf>) -> Self {
        let store_cache_dir = store_cache_dir.into();
        let default_limits = ExecutionLimits::new(store_cache_dir.join(WORK_DIR_NAME));
        CliConfig { server_url, api_key: api_key.into(), store_cache_dir, default_limits }
    }

    /// The file form, readable by [`load_config`].
    pub fn to_file_text(&self) -> String {
        format!(
            "server_url = {}\napi_key = {}\nstore_cache_dir = {}\ntimeout_s = {}\nmax_output_bytes = {}\n",
            self.server_url,
            self.api_key,
            self.store_cache_dir.display(),
            self.default_limits.timeout_s,
            self.default_limits.max_output_bytes,
        )
    }
}

/// `~/.causalbench/config`, or `CB_CONFIG` when set.
pub fn default_config_path() -> PathBuf {
    if let Some(p) = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    let home = std::env::var_os("HOME").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    home.join(".causalbench").join("config")
}

pub fn parse_server_url(text: &str) -> Result<url::Url, String> {
    let url = url::Url::parse(text).map_err(|e| format!("`{text}` is not a URL: {e}"))?;
    if !matches!(url.scheme(), "http" | "https") || url.host().is_none() {
        return Err(format!("`{text}` is not an http(s) URL"));
    }
    Ok(url)
}

pub fn load_config(path: &Path) -> Result<CliConfig, ConfigError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ConfigError::Missing(path.to_path_buf())),
        Err(source) => return Err(ConfigError::Io { path: path.to_path_buf(), source }),
    };
    let env_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
    parse_config(&text, path, env_key)
}

/// Parses file text; `env_key`, when given, replaces the file's key.
pub fn parse_config(text: &str, path: &Path, env_key: Option<String>) -> Result<CliConfig, ConfigError> {
    let malformed = |line: usize, field: &str, detail: String| ConfigError::Malformed {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        detail,
    };
    let mut server_url = None;
    let mut api_key = String::new();
    let mut cache = None;
    let mut timeout_s = None;
    let mut max_output_bytes = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(malformed(line, trimmed, "expected `key = value`".into()));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "server_url" => server_url = Some(parse_server_url(value).map_err(|d| malformed(line, key, d))?),
            "api_key" => api_key = value.to_string(),
            "store_cache_dir" => {
                if value.is_empty() {
                    return Err(malformed(line, key, "must not be empty".into()));
                }
                cache = Some(PathBuf::from(value));
            }
            "timeout_s" => {
                let t: f64 = value.parse().map_err(|_| malformed(line, key, format!("`{value}` is not a number")))?;
                if !(t.is_finite() && t > 0.0) {
                    return Err(malformed(line, key, "must be a positive number of seconds".into()));
                }
                timeout_s = Some(t);
            }
            "max_output_bytes" => {
                let n: usize =
                    value.parse().ok().filter(|n| *n > 0).ok_or_else(|| malformed(line, key, format!("`{value}` is not a positive integer")))?;
                max_output_bytes = Some(n);
            }
            _ => return Err(malformed(line, key, "unknown field".into())),
        }
    }
    let server_url = server_url.ok_or_else(|| malformed(0, "server_url", "is required".into()))?;
    let cache = cache.unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).join(CACHE_DIR_NAME));
    let mut config = CliConfig::new(server_url, env_key.unwrap_or(api_key), cache);
    if let Some(t) = timeout_s {
        config.default_limits.timeout_s = t;
    }
    if let Some(n) = max_output_bytes {
        config.default_limits.max_output_bytes = n;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, env: Option<&str>) -> Result<CliConfig, ConfigError> {
        parse_config(text, Path::new("/home/u/.causalbench/config"), env.map(str::to_string))
    }

    #[test]
    fn minimal_file_gets_default_limits() {
        let c = parse("server_url = http://localhost:8080\napi_key = cbk_1\n", None).unwrap();
        assert_eq!(c.api_key, "cbk_1");
        assert_eq!(c.store_cache_dir, Path::new("/home/u/.causalbench/cache"));
        assert_eq!(c.default_limits, ExecutionLimits::new("/home/u/.causalbench/cache/work"));
    }

    #[test]
    fn environment_key_wins() {
        let c = parse("server_url = http://localhost:8080\napi_key = cbk_file\n", Some("cbk_env")).unwrap();
        assert_eq!(c.api_key, "cbk_env");
    }

    #[test]
    fn malformed_files_name_the_field() {
        let e = parse("server_url = http://localhost:8080\ntimeout_s = soon\n", None).unwrap_err();
        assert!(matches!(&e, ConfigError::Malformed { line: 2, field, .. } if field == "timeout_s"), "{e}");
        let e = parse("server_url = not a url\n", None).unwrap_err();
        assert!(matches!(&e, ConfigError::Malformed { line: 1, field, .. } if field == "server_url"), "{e}");
        let e = parse("api_key = k\n", None).unwrap_err();
        assert!(matches!(&e, ConfigError::Malformed { field, .. } if field == "server_url"), "{e}");
        let e = parse("server_url = http://h\ncolour = blue\n", None).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
    }

    #[test]
    fn file_text_round_trips() {
        let mut c = CliConfig::new(parse_server_url("https://cb.example.org/").unwrap(), "cbk_x", "/tmp/cache");
        c.default_limits.timeout_s = 12.5;
        let back = parse(&c.to_file_text(), None).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_config(&dir.path().join("config")), Err(ConfigError::Missing(_))));
    }
}
