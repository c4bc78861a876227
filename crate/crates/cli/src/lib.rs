//! JSON front end for `posmap-core`.
//!
//! A request is a command name, a JSON input document and options. The
//! response is a JSON object with a `status` (`ok`, `refused`,
//! `invalid_input` or `no_convergence`), the result or error, and a
//! `certificate` that `verify` re-checks offline. Exit codes: 0 when the
//! command reached a verdict, 2 for invalid input, 3 when an iteration budget
//! ran out or a result could not be verified.

#![allow(clippy::result_large_err)]

pub mod commands;
pub mod error;
pub mod format;
pub mod schema;

use rayon::prelude::*;
use serde_json::{json, Value};

pub use error::{CliError, EXIT_INVALID, EXIT_NO_CONVERGENCE, EXIT_OK};
pub use schema::{Command, Options};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A response document and the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub exit_code: i32,
    pub body: Value,
}

impl Response {
    pub fn to_json_string(&self) -> String {
        format::to_string(&self.body)
    }
}

fn error_response(command: Option<Command>, error: &CliError, certificate: Value) -> Response {
    Response {
        exit_code: error.exit_code,
        body: json!({
            "version": VERSION,
            "command": command.map(Command::name),
            "status": error.status,
            "error": error.to_json(),
            "certificate": certificate,
        }),
    }
}

/// Runs one request. `opts` are validated before dispatch.
pub fn run_request(command: Command, input: &Value, opts: &Options) -> Response {
    if let Err(e) = opts.validate() {
        return error_response(Some(command), &e, Value::Null);
    }
    match commands::dispatch(command, input, opts) {
        Ok(out) => Response {
            exit_code: EXIT_OK,
            body: json!({
                "version": VERSION,
                "command": command.name(),
                "status": "ok",
                "result": out.result,
                "certificate": out.certificate,
            }),
        },
        Err(f) => error_response(Some(command), &f.error, f.certificate),
    }
}

/// Runs a batch: a JSON array of `{command, input, options?}`. Items run in
/// parallel and the output array keeps the input order; `base` supplies
/// options the items leave unset. A malformed item yields an error entry
/// without aborting the rest. Only a document that is not an array fails as
/// a whole.
pub fn run_batch(document: &Value, base: &Options) -> Response {
    let Some(items) = document.as_array() else {
        let e = CliError::invalid("batch", "expected a JSON array of requests");
        return error_response(None, &e, Value::Null);
    };
    let responses: Vec<Value> = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let response = match commands::parse::<schema::BatchItem>(item) {
                Ok(req) => run_request(req.command, &req.input, &req.options.over(base)),
                Err(mut e) => {
                    e.path = e
                        .path
                        .map(|p| p.replacen("input", &format!("batch[{i}]"), 1));
                    error_response(None, &e, Value::Null)
                }
            };
            json!({ "exit_code": response.exit_code, "response": response.body })
        })
        .collect();
    Response {
        exit_code: EXIT_OK,
        body: Value::Array(responses),
    }
}
