use std::process::ExitCode;

use rwseg_service::{router, AppState, Config};

#[tokio::main]
async fn main() -> ExitCode {
    let config = match Config::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let state = match AppState::new(&config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: session directory: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(config.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", config.bind);
            return ExitCode::from(2);
        }
    };
    eprintln!(
        "rwseg-service listening on {} ({} recovered sessions, max {} pixels)",
        config.bind,
        state.session_count(),
        config.max_pixels
    );
    match axum::serve(listener, router(state)).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
