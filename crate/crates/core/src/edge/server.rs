use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::thread::JoinHandle;

use serde::de::DeserializeOwned;
use serde_json::Value;
use tokio::io::{AsyncBufRead, AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::oneshot;

use super::{EdgeError, ErrorCode, Method, SolveParams, WireResponse, MAX_FRAME_BYTES};
use crate::pipeline::{CognizeParams, DecisionAgent, RuleBasedAgent};
use crate::solvers::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerConfig {
    pub max_frame_bytes: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { max_frame_bytes: MAX_FRAME_BYTES }
    }
}

/// Answers one request line. Never fails: every problem becomes an error
/// response.
pub fn handle_line(line: &[u8]) -> WireResponse {
    let Ok(text) = std::str::from_utf8(line) else {
        return WireResponse::error("", ErrorCode::Parse, "frame is not valid UTF-8");
    };
    let text = text.strip_suffix('\r').unwrap_or(text);
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return WireResponse::error("", ErrorCode::Parse, format!("malformed JSON: {e}")),
    };
    let Value::Object(mut obj) = value else {
        return WireResponse::error("", ErrorCode::Schema, "request must be a JSON object");
    };
    let id = match obj.remove("id") {
        Some(Value::String(s)) if !s.is_empty() => s,
        Some(Value::String(_)) => return WireResponse::error("", ErrorCode::Schema, "`id` must be non-empty"),
        Some(_) => return WireResponse::error("", ErrorCode::Schema, "`id` must be a string"),
        None => return WireResponse::error("", ErrorCode::Schema, "missing field `id`"),
    };
    let method = match obj.remove("method") {
        Some(Value::String(m)) => match Method::parse(&m) {
            Some(m) => m,
            None => return WireResponse::error(id, ErrorCode::UnknownMethod, format!("unknown method `{m}`")),
        },
        Some(_) => return WireResponse::error(id, ErrorCode::Schema, "`method` must be a string"),
        None => return WireResponse::error(id, ErrorCode::Schema, "missing field `method`"),
    };
    let params = obj.remove("params").unwrap_or(Value::Null);
    if let Some(extra) = obj.keys().next() {
        return WireResponse::error(id, ErrorCode::Schema, format!("unknown field `{extra}`"));
    }
    log::debug!("request {id}: {}", method.as_str());

    match method {
        Method::Health => WireResponse::ok(id, Value::String("ok".into())),
        Method::Solve => {
            let p: SolveParams = match params_of(params) {
                Ok(p) => p,
                Err(msg) => return WireResponse::error(id, ErrorCode::Schema, msg),
            };
            match solve(&p.instance, &p.demands, &p.models, &p.config) {
                Ok(result) => WireResponse::ok(id, serde_json::to_value(result).expect("results serialize")),
                Err(e) => WireResponse::error(id, ErrorCode::Solver, e.to_string()),
            }
        }
        Method::Cognize => {
            let p: CognizeParams = match params_of(params) {
                Ok(p) => p,
                Err(msg) => return WireResponse::error(id, ErrorCode::Schema, msg),
            };
            match RuleBasedAgent.plan(&p.demands, p.scene.as_ref(), &p.context) {
                Ok(task) => WireResponse::ok(id, serde_json::to_value(task).expect("task specs serialize")),
                Err(e) => WireResponse::error(id, ErrorCode::Solver, e.to_string()),
            }
        }
    }
}

fn params_of<T: DeserializeOwned>(params: Value) -> Result<T, String> {
    serde_path_to_error::deserialize(params).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            format!("params: {}", e.inner())
        } else {
            format!("params.{path}: {}", e.inner())
        }
    })
}

enum Frame {
    Line,
    TooLong,
    Eof,
}

/// Reads one `\n`-terminated frame into `buf`. Oversized frames are drained
/// up to their terminator and reported as `TooLong`.
async fn read_frame<R: AsyncBufRead + Unpin>(r: &mut R, max: usize, buf: &mut Vec<u8>) -> io::Result<Frame> {
    buf.clear();
    let mut overflow = false;
    loop {
        let available = r.fill_buf().await?;
        if available.is_empty() {
            return Ok(match (overflow, buf.is_empty()) {
                (true, _) => Frame::TooLong,
                (false, true) => Frame::Eof,
                (false, false) => Frame::Line,
            });
        }
        match available.iter().position(|&b| b == b'\n') {
            Some(i) => {
                if !overflow {
                    buf.extend_from_slice(&available[..i]);
                }
                r.consume(i + 1);
                return Ok(if overflow || buf.len() > max { Frame::TooLong } else { Frame::Line });
            }
            None => {
                let n = available.len();
                if !overflow {
                    buf.extend_from_slice(available);
                    if buf.len() > max {
                        overflow = true;
                        buf.clear();
                    }
                }
                r.consume(n);
            }
        }
    }
}

async fn handle_connection(stream: TcpStream, config: ServerConfig) -> io::Result<()> {
    let (read_half, mut write_half) = stream.into_split();
    let mut reader = BufReader::new(read_half);
    let mut buf = Vec::new();
    loop {
        let response = match read_frame(&mut reader, config.max_frame_bytes, &mut buf).await? {
            Frame::Eof => return Ok(()),
            Frame::TooLong => WireResponse::error(
                "",
                ErrorCode::Parse,
                format!("frame exceeds {} bytes", config.max_frame_bytes),
            ),
            Frame::Line => {
                let line = std::mem::take(&mut buf);
                tokio::task::spawn_blocking(move || handle_line(&line))
                    .await
                    .unwrap_or_else(|e| WireResponse::error("", ErrorCode::Solver, format!("request handler crashed: {e}")))
            }
        };
        let mut out = response.to_line().into_bytes();
        out.push(b'\n');
        write_half.write_all(&out).await?;
        write_half.flush().await?;
    }
}

/// Accepts connections on `listener` until `shutdown` resolves. Each
/// connection is served on its own task; requests on one connection are
/// answered sequentially.
pub async fn serve_listener(listener: TcpListener, config: ServerConfig, shutdown: impl Future<Output = ()>) {
    tokio::pin!(shutdown);
    loop {
        tokio::select! {
            _ = &mut shutdown => {
                log::info!("edge server shutting down");
                return;
            }
            accepted = listener.accept() => match accepted {
                Ok((stream, peer)) => {
                    log::debug!("connection from {peer}");
                    tokio::spawn(async move {
                        if let Err(e) = handle_connection(stream, config).await {
                            log::debug!("connection {peer} closed: {e}");
                        }
                    });
                }
                Err(e) => log::error!("accept failed: {e}"),
            }
        }
    }
}

/// Binds `bind` and serves until Ctrl-C.
pub async fn serve(bind: &str, config: ServerConfig) -> Result<(), EdgeError> {
    serve_notify(bind, config, |addr| log::info!("edge server listening on {addr}")).await
}

async fn serve_notify(bind: &str, config: ServerConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), EdgeError> {
    let bind_err = |source| EdgeError::Bind { addr: bind.to_string(), source };
    let listener = TcpListener::bind(bind).await.map_err(bind_err)?;
    on_ready(listener.local_addr().map_err(bind_err)?);
    serve_listener(listener, config, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await;
    Ok(())
}

/// Blocking form of [`serve`] with its own runtime. `on_ready` receives the
/// bound address once the listener is up.
pub fn serve_blocking(bind: &str, config: ServerConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), EdgeError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| EdgeError::Bind { addr: bind.to_string(), source })?;
    runtime.block_on(serve_notify(bind, config, on_ready))
}

/// A server running on a background thread with its own runtime.
pub struct ServerHandle {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    /// Stops accepting connections and waits for the server thread.
    pub fn stop(mut self) {
        self.shutdown_now();
    }

    fn shutdown_now(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown_now();
    }
}

/// Binds `bind` (use port 0 for an ephemeral port) and serves on a
/// background thread until the handle is stopped or dropped.
pub fn spawn_server(bind: &str, config: ServerConfig) -> Result<ServerHandle, EdgeError> {
    let bind_err = |source| EdgeError::Bind { addr: bind.to_string(), source };
    let std_listener = std::net::TcpListener::bind(bind).map_err(bind_err)?;
    std_listener.set_nonblocking(true).map_err(bind_err)?;
    let addr = std_listener.local_addr().map_err(bind_err)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(bind_err)?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::Builder::new()
        .name("edge-server".into())
        .spawn(move || {
            runtime.block_on(async move {
                match TcpListener::from_std(std_listener) {
                    Ok(listener) => {
                        serve_listener(listener, config, async {
                            let _ = rx.await;
                        })
                        .await
                    }
                    Err(e) => log::error!("cannot register listener: {e}"),
                }
            });
            runtime.shutdown_background();
        })
        .map_err(bind_err)?;
    Ok(ServerHandle { addr, shutdown: Some(tx), thread: Some(thread) })
}
