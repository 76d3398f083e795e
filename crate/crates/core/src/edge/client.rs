use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::Value;

use super::{EdgeError, Method, SolveParams, WireRequest, WireResponse, MAX_FRAME_BYTES};
use crate::constraints::Models;
use crate::instance::{DeliveryInstance, Isc3Demands};
use crate::solvers::{SolverConfig, SolverResult};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn next_id(method: Method) -> String {
    format!("{}-{}", method.as_str(), NEXT_ID.fetch_add(1, Ordering::Relaxed))
}

/// Blocking client for the edge wire protocol. Every call opens a fresh
/// connection.
#[derive(Debug, Clone)]
pub struct EdgeClient {
    address: String,
    timeout: Duration,
}

impl EdgeClient {
    pub fn new(address: impl Into<String>) -> Self {
        EdgeClient { address: address.into(), timeout: DEFAULT_TIMEOUT }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn address(&self) -> &str {
        &self.address
    }

    fn transport(&self, message: impl Into<String>) -> EdgeError {
        EdgeError::Transport { addr: self.address.clone(), message: message.into() }
    }

    fn io_error(&self, e: std::io::Error) -> EdgeError {
        match e.kind() {
            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => {
                self.transport(format!("timed out after {:?}", self.timeout))
            }
            _ => self.transport(e.to_string()),
        }
    }

    fn connect(&self) -> Result<TcpStream, EdgeError> {
        let addrs: Vec<_> = self
            .address
            .to_socket_addrs()
            .map_err(|e| self.transport(format!("cannot resolve: {e}")))?
            .collect();
        let mut last = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, self.timeout) {
                Ok(s) => {
                    s.set_read_timeout(Some(self.timeout)).map_err(|e| self.io_error(e))?;
                    s.set_write_timeout(Some(self.timeout)).map_err(|e| self.io_error(e))?;
                    let _ = s.set_nodelay(true);
                    return Ok(s);
                }
                Err(e) => last = Some(e),
            }
        }
        Err(match last {
            Some(e) => self.io_error(e),
            None => self.transport("address resolved to nothing"),
        })
    }

    /// Sends all `requests` on one connection and returns the responses in
    /// request order, matched by id. Ids must be distinct.
    pub fn call_many(&self, requests: &[WireRequest]) -> Result<Vec<WireResponse>, EdgeError> {
        let mut index = HashMap::with_capacity(requests.len());
        for (i, r) in requests.iter().enumerate() {
            if r.id.is_empty() || index.insert(r.id.as_str(), i).is_some() {
                return Err(EdgeError::Protocol(format!("request ids must be distinct and non-empty (`{}`)", r.id)));
            }
        }
        let mut payload = Vec::new();
        for r in requests {
            serde_json::to_writer(&mut payload, r).map_err(|e| EdgeError::Protocol(e.to_string()))?;
            payload.push(b'\n');
        }

        let stream = self.connect()?;
        let mut writer = stream.try_clone().map_err(|e| self.io_error(e))?;
        let mut reader = BufReader::new(stream);
        let mut slots: Vec<Option<WireResponse>> = vec![None; requests.len()];

        // Write on a second thread so a large batch cannot deadlock against
        // the server's replies filling the socket buffers.
        std::thread::scope(|scope| -> Result<(), EdgeError> {
            let sender = scope.spawn(move || writer.write_all(&payload).and_then(|_| writer.flush()));
            let mut line = Vec::new();
            for _ in 0..requests.len() {
                line.clear();
                let n = (&mut reader)
                    .take(MAX_FRAME_BYTES as u64 + 2)
                    .read_until(b'\n', &mut line)
                    .map_err(|e| self.io_error(e))?;
                if n == 0 {
                    return Err(self.transport("connection closed before all responses arrived"));
                }
                if line.last() != Some(&b'\n') {
                    return Err(EdgeError::Protocol("response frame too long or truncated".into()));
                }
                let resp: WireResponse = serde_json::from_slice(&line[..line.len() - 1])
                    .map_err(|e| EdgeError::Protocol(format!("bad response line: {e}")))?;
                let slot = index
                    .get(resp.id.as_str())
                    .copied()
                    .ok_or_else(|| EdgeError::Protocol(format!("response for unknown id `{}`", resp.id)))?;
                if slots[slot].replace(resp).is_some() {
                    return Err(EdgeError::Protocol(format!("duplicate response for `{}`", requests[slot].id)));
                }
            }
            sender
                .join()
                .map_err(|_| self.transport("writer thread panicked"))?
                .map_err(|e| self.io_error(e))
        })?;
        Ok(slots.into_iter().map(|s| s.expect("every slot filled exactly once")).collect())
    }

    /// Round-trips a single request and unwraps its result.
    pub fn call(&self, method: Method, params: Value) -> Result<Value, EdgeError> {
        let req = WireRequest::new(next_id(method), method, params);
        let resp = self.call_many(std::slice::from_ref(&req))?.pop().expect("one response per request");
        resp.outcome.map_err(|e| EdgeError::Remote { code: e.code, message: e.message })
    }

    pub fn health(&self) -> Result<(), EdgeError> {
        match self.call(Method::Health, Value::Null)? {
            Value::String(s) if s == "ok" => Ok(()),
            other => Err(EdgeError::Protocol(format!("unexpected health result {other}"))),
        }
    }

    pub fn solve_remote(
        &self,
        instance: &DeliveryInstance,
        demands: &Isc3Demands,
        models: &Models,
        config: &SolverConfig,
    ) -> Result<SolverResult, EdgeError> {
        let params = SolveParams {
            instance: instance.clone(),
            demands: *demands,
            models: *models,
            config: config.clone(),
        };
        let params = serde_json::to_value(params).map_err(|e| EdgeError::Protocol(e.to_string()))?;
        let result = self.call(Method::Solve, params)?;
        serde_json::from_value(result).map_err(|e| EdgeError::Protocol(format!("malformed solve result: {e}")))
    }
}

/// One-shot remote solve with the default 30 s timeout.
pub fn solve_remote(
    address: &str,
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
    config: &SolverConfig,
) -> Result<SolverResult, EdgeError> {
    EdgeClient::new(address).solve_remote(instance, demands, models, config)
}
