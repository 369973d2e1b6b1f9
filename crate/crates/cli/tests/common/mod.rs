#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use causalbench_registry::{LocalSim, Registry};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn component_fixture(name: &str) -> PathBuf {
    fixtures().join("components").join(name)
}

/// A fresh registry served over TCP on a loopback port.
pub struct Server {
    pub dir: tempfile::TempDir,
    pub registry: Arc<Registry>,
    pub sim: Arc<LocalSim>,
    pub addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl Server {
    pub fn start() -> Server {
        let dir = tempfile::tempdir().unwrap();
        let sim = Arc::new(LocalSim::new());
        let registry = Arc::new(Registry::open(dir.path().join("store"), Box::new(sim.clone())).unwrap());
        let app = causalbench_server::router(registry.clone());
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let addr = listener.local_addr().unwrap();
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await
                    .unwrap();
            });
        });
        Server { dir, registry, sim, addr, stop: Some(stop), thread: Some(thread) }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn key(&self, user: &str) -> String {
        self.registry.issue_key(user).unwrap()
    }

    /// A `cb` environment for `user`, with its own config and cache.
    pub fn user(&self, user: &str) -> Cb {
        Cb::new(&self.url(), &self.key(user))
    }

    pub fn anonymous(&self) -> Cb {
        Cb::new(&self.url(), "")
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }

    pub fn line(&self) -> &str {
        self.stdout.trim()
    }

    #[track_caller]
    pub fn ok(self) -> Output {
        assert_eq!(self.code, 0, "stdout: {}\nstderr: {}", self.stdout, self.stderr);
        self
    }
}

/// One user's `cb` setup: a config file under a private directory.
pub struct Cb {
    pub home: tempfile::TempDir,
}

impl Cb {
    pub fn new(url: &str, key: &str) -> Cb {
        let home = tempfile::tempdir().unwrap();
        let cb = Cb { home };
        let mut args = vec!["init-config", "--server-url", url];
        if !key.is_empty() {
            args.extend(["--api-key", key]);
        }
        cb.run(&args).ok();
        cb
    }

    pub fn config_path(&self) -> PathBuf {
        self.home.path().join("config")
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.home.path().join(name)
    }

    pub fn run(&self, args: &[&str]) -> Output {
        let config = self.config_path();
        let mut argv = vec!["cb".to_string(), "--config".to_string(), config.display().to_string()];
        argv.extend(args.iter().map(|a| a.to_string()));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = causalbench_cli::dispatch_to(argv, &mut out, &mut err);
        Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
    }
}
