use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use kanbanx_server::{router, AppState, ServiceConfig};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "kanbanx-server", version, about = "Serve kanbanx workspaces over HTTP")]
struct Args {
    #[arg(long, env = "KANBANX_LISTEN", default_value = "127.0.0.1:7878")]
    listen: SocketAddr,
    /// Without a data directory workspaces live in memory only.
    #[arg(long, env = "KANBANX_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Log filter, e.g. `info` or `kanbanx_server=debug`.
    #[arg(long, env = "KANBANX_LOG", default_value = "info")]
    log: String,
    #[arg(long, default_value_t = 100)]
    snapshot_every: u64,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&args.log).context("invalid --log filter")?)
        .init();

    let state = AppState::load(ServiceConfig {
        data_dir: args.data_dir,
        snapshot_every: args.snapshot_every,
    })
    .map_err(|e| anyhow::anyhow!("{}: {}", e.body.rule, e.body.message))?;
    let listener = tokio::net::TcpListener::bind(args.listen)
        .await
        .with_context(|| format!("binding {}", args.listen))?;
    tracing::info!(addr = %args.listen, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
