use std::path::PathBuf;

use axum::http::HeaderValue;
use clap::Parser;

#[derive(Debug, Parser)]
#[command(
    name = "helios-api",
    version,
    about = "HTTP service for the helios studio"
)]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory holding scene revisions and job results.
    #[arg(long, default_value = "helios-data")]
    data_dir: PathBuf,
    /// Origin allowed by CORS (default: any).
    #[arg(long)]
    cors_origin: Option<HeaderValue>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::init();
    let args = Args::parse();
    let state = helios_api::AppState::open(&args.data_dir)?;
    let app = helios_api::router(state, args.cors_origin);
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
