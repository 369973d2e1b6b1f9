use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use causalbench_registry::Registry;
use causalbench_server::{registrar_for, router, BIND_ADDR_ENV, DEFAULT_BIND_ADDR, REGISTRAR_ENV, STORE_DIR_ENV};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cb-server", version, about = "Serve the causalbench /v1 API over a local store")]
struct Cli {
    /// Store directory.
    #[arg(long, env = STORE_DIR_ENV, default_value = "cb-store", global = true)]
    store: PathBuf,
    /// Identifier registrar: `sim` or `zenodo-sandbox`.
    #[arg(long, env = REGISTRAR_ENV, default_value = "sim", global = true)]
    registrar: String,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Serve HTTP (the default).
    Serve {
        #[arg(long, env = BIND_ADDR_ENV, default_value = DEFAULT_BIND_ADDR)]
        bind: String,
    },
    /// Create a user or rotate their key; prints the new key once.
    IssueKey { user: String },
    /// Disable a user's key.
    Deactivate { user: String },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cb-server: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let registrar = registrar_for(&cli.registrar)?;
    let registry = Registry::open(&cli.store, registrar).map_err(|e| e.to_string())?;
    match cli.command {
        Some(Command::IssueKey { user }) => {
            println!("{}", registry.issue_key(&user).map_err(|e| e.to_string())?);
            Ok(())
        }
        Some(Command::Deactivate { user }) => registry.set_active(&user, false).map_err(|e| e.to_string()),
        Some(Command::Serve { bind }) => serve(registry, &bind),
        None => serve(registry, &std::env::var(BIND_ADDR_ENV).unwrap_or_else(|_| DEFAULT_BIND_ADDR.into())),
    }
}

fn serve(registry: Registry, bind: &str) -> Result<(), String> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind).await.map_err(|e| format!("bind {bind}: {e}"))?;
        tracing::info!(addr = %listener.local_addr().map_err(|e| e.to_string())?, "listening");
        axum::serve(listener, router(Arc::new(registry)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| e.to_string())
    })
}
