//! Remote solve service: newline-delimited JSON over TCP.
//!
//! Each request is one line holding a [`WireRequest`]; the server answers
//! every line with exactly one [`WireResponse`] line, in request order.
//!
//! ```text
//! -> {"id":"a","method":"health"}
//! <- {"id":"a","result":"ok"}
//! ```

mod client;
mod server;

pub use client::{solve_remote, EdgeClient, DEFAULT_TIMEOUT};
pub use server::{handle_line, serve, serve_blocking, serve_listener, spawn_server, ServerConfig, ServerHandle};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::Models;
use crate::instance::{DeliveryInstance, Isc3Demands};
use crate::solvers::SolverConfig;

/// Largest accepted request or response line, terminator excluded.
pub const MAX_FRAME_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Solve,
    Cognize,
    Health,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Solve => "solve",
            Method::Cognize => "cognize",
            Method::Health => "health",
        }
    }

    fn parse(s: &str) -> Option<Method> {
        [Method::Solve, Method::Cognize, Method::Health]
            .into_iter()
            .find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

impl WireRequest {
    pub fn new(id: impl Into<String>, method: Method, params: serde_json::Value) -> Self {
        WireRequest { id: id.into(), method, params }
    }
}

/// Parameters of a `solve` request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    pub instance: DeliveryInstance,
    #[serde(default)]
    pub demands: Isc3Demands,
    #[serde(default)]
    pub models: Models,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Parse = 1,
    Schema = 2,
    UnknownMethod = 3,
    Solver = 4,
}

impl From<ErrorCode> for u8 {
    fn from(c: ErrorCode) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for ErrorCode {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(ErrorCode::Parse),
            2 => Ok(ErrorCode::Schema),
            3 => Ok(ErrorCode::UnknownMethod),
            4 => Ok(ErrorCode::Solver),
            other => Err(format!("unknown error code {other}")),
        }
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*self as u8)
    }
}

impl<'de> Deserialize<'de> for ErrorCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ErrorCode::try_from(u8::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ErrorCode::Parse => "parse",
            ErrorCode::Schema => "schema",
            ErrorCode::UnknownMethod => "unknown method",
            ErrorCode::Solver => "solver",
        };
        write!(f, "{} ({name})", *self as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireError {
    pub code: ErrorCode,
    pub message: String,
}

/// A response line: the request id plus exactly one of `result` or `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawResponse", into = "RawResponse")]
pub struct WireResponse {
    pub id: String,
    pub outcome: Result<serde_json::Value, WireError>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResponse {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    result: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<WireError>,
}

impl TryFrom<RawResponse> for WireResponse {
    type Error = String;

    fn try_from(raw: RawResponse) -> Result<Self, Self::Error> {
        let outcome = match (raw.result, raw.error) {
            (Some(r), None) => Ok(r),
            (None, Some(e)) => Err(e),
            _ => return Err("response must carry exactly one of `result` and `error`".into()),
        };
        Ok(WireResponse { id: raw.id, outcome })
    }
}

impl From<WireResponse> for RawResponse {
    fn from(r: WireResponse) -> Self {
        match r.outcome {
            Ok(v) => RawResponse { id: r.id, result: Some(v), error: None },
            Err(e) => RawResponse { id: r.id, result: None, error: Some(e) },
        }
    }
}

impl WireResponse {
    pub fn ok(id: impl Into<String>, result: serde_json::Value) -> Self {
        WireResponse { id: id.into(), outcome: Ok(result) }
    }

    pub fn error(id: impl Into<String>, code: ErrorCode, message: impl Into<String>) -> Self {
        WireResponse { id: id.into(), outcome: Err(WireError { code, message: message.into() }) }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("responses always serialize")
    }
}

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("transport error talking to {addr}: {message}")]
    Transport { addr: String, message: String },
    #[error("edge server error {code}: {message}")]
    Remote { code: ErrorCode, message: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
}
