//! Bridge to an external engine speaking newline-delimited JSON on its
//! stdin/stdout. The wire format is described in `docs/bridge-protocol.md`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{Receiver, RecvTimeoutError};
use serde::Deserialize;
use serde_json::{json, Value as Json};

use super::{Adapter, Capabilities, DatasetSource, QueryOutcome, QueryRequest};
use crate::model::{render_sql, BinKey, BinValue, ResultTable};
use crate::schema::Schema;
use crate::{Error, Result};

/// How long a non-query message may wait for its acknowledgement.
const ACK_TIMEOUT: Duration = Duration::from_secs(60);

struct Channel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    next_id: u64,
}

/// Runs `sh -c <command>` and exchanges one JSON line per message. Calls are
/// serialized: one request is in flight at a time.
pub struct SubprocessAdapter {
    command: String,
    name: String,
    channel: Mutex<Option<Channel>>,
    schema: Mutex<Option<Schema>>,
}

#[derive(Deserialize)]
struct WireBin {
    key: BinKey,
    estimate: f64,
    #[serde(default)]
    margin: Option<f64>,
}

#[derive(Deserialize)]
struct WireResult {
    bins: Vec<WireBin>,
    #[serde(default = "one")]
    progress: f64,
}

fn one() -> f64 {
    1.0
}

enum Reply {
    Line(Json),
    Malformed(String),
    Closed,
    Expired,
}

impl SubprocessAdapter {
    pub fn new(command: impl Into<String>) -> Self {
        let command = command.into();
        SubprocessAdapter {
            name: format!("subprocess:{command}"),
            command,
            channel: Mutex::new(None),
            schema: Mutex::new(None),
        }
    }

    fn spawn(&self) -> Result<Channel> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Adapter(format!("cannot start `{}`: {e}", self.command)))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        let (tx, lines) = crossbeam_channel::unbounded();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Channel {
            child,
            stdin,
            lines,
            next_id: 0,
        })
    }

    /// Sends `message` with a fresh id and waits for the reply carrying that
    /// id. Replies to earlier, abandoned requests are skipped. A line that is
    /// not a JSON object is attributed to the current request.
    fn exchange(&self, mut message: Json, deadline: Instant) -> Result<Reply> {
        let mut guard = self.channel.lock().unwrap_or_else(|e| e.into_inner());
        let ch = guard
            .as_mut()
            .ok_or_else(|| Error::Adapter("subprocess adapter used before setup".into()))?;
        let id = ch.next_id;
        ch.next_id += 1;
        message["id"] = json!(id);
        let mut line = message.to_string();
        line.push('\n');
        if ch.stdin.write_all(line.as_bytes()).and_then(|_| ch.stdin.flush()).is_err() {
            return Ok(Reply::Closed);
        }
        loop {
            let now = Instant::now();
            let wait = deadline.saturating_duration_since(now);
            let line = match ch.lines.recv_timeout(wait) {
                Ok(l) => l,
                Err(RecvTimeoutError::Timeout) => return Ok(Reply::Expired),
                Err(RecvTimeoutError::Disconnected) => return Ok(Reply::Closed),
            };
            let value: Json = match serde_json::from_str(&line) {
                Ok(v @ Json::Object(_)) => v,
                _ => return Ok(Reply::Malformed(format!("unreadable response: {}", clip(&line)))),
            };
            match value.get("id").and_then(Json::as_u64) {
                Some(got) if got < id => continue,
                _ => return Ok(Reply::Line(value)),
            }
        }
    }

    fn notify(&self, message: Json) -> Result<()> {
        let op = message["op"].as_str().unwrap_or("?").to_string();
        match self.exchange(message, Instant::now() + ACK_TIMEOUT)? {
            Reply::Line(v) if v.get("ok").and_then(Json::as_bool) == Some(true) => Ok(()),
            Reply::Line(v) => Err(Error::Adapter(match v.get("error") {
                Some(e) => format!("`{op}` failed: {}", e.as_str().unwrap_or(&e.to_string())),
                None => format!("`{op}` was not acknowledged: {}", clip(&v.to_string())),
            })),
            Reply::Malformed(m) => Err(Error::Adapter(format!("`{op}`: {m}"))),
            Reply::Closed => Err(Error::Adapter(format!("engine exited during `{op}`"))),
            Reply::Expired => Err(Error::Adapter(format!("no acknowledgement for `{op}`"))),
        }
    }
}

fn clip(s: &str) -> String {
    if s.chars().count() > 200 {
        format!("{}...", s.chars().take(200).collect::<String>())
    } else {
        s.to_string()
    }
}

/// Parses a query reply into a result table or an error message.
fn parse_result(value: Json) -> std::result::Result<ResultTable, String> {
    if let Some(e) = value.get("error") {
        return Err(e.as_str().map(str::to_string).unwrap_or_else(|| e.to_string()));
    }
    let wire: WireResult =
        serde_json::from_value(value).map_err(|e| format!("malformed result: {e}"))?;
    if !(0.0..=1.0).contains(&wire.progress) {
        return Err(format!("progress {} outside [0, 1]", wire.progress));
    }
    let mut bins = std::collections::BTreeMap::new();
    for b in wire.bins {
        if b.margin.is_some_and(|m| m < 0.0 || m.is_nan()) || b.estimate.is_nan() {
            return Err(format!("invalid value in bin {:?}", b.key));
        }
        let v = BinValue {
            estimate: b.estimate,
            margin: b.margin,
        };
        if bins.insert(b.key.clone(), v).is_some() {
            return Err(format!("duplicate bin {:?}", b.key));
        }
    }
    Ok(ResultTable::new(bins, wire.progress))
}

impl Adapter for SubprocessAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_margins: true,
            ..Capabilities::default()
        }
    }

    fn setup(&mut self, dataset: &DatasetSource, schema: &Schema) -> Result<Duration> {
        if let Some(path) = dataset.path() {
            if !path.exists() {
                return Err(Error::file(path, std::io::ErrorKind::NotFound.into()));
            }
        }
        let start = Instant::now();
        if let Some(mut old) = self.channel.get_mut().unwrap_or_else(|e| e.into_inner()).take() {
            let _ = old.child.kill();
            let _ = old.child.wait();
        }
        *self.channel.get_mut().unwrap_or_else(|e| e.into_inner()) = Some(self.spawn()?);
        *self.schema.get_mut().unwrap_or_else(|e| e.into_inner()) = Some(schema.clone());
        self.notify(json!({
            "op": "setup",
            "dataset": dataset.path().map(|p| p.display().to_string()),
            "table": schema.table,
            "schema": schema,
        }))?;
        Ok(start.elapsed())
    }

    fn process_request(&self, req: &QueryRequest) -> Result<QueryOutcome> {
        let sql = {
            let schema = self.schema.lock().unwrap_or_else(|e| e.into_inner());
            match schema.as_ref() {
                Some(s) => render_sql(&req.viz, &req.filter, &req.table, s).ok(),
                None => None,
            }
        };
        let budget = req.deadline.saturating_duration_since(Instant::now());
        let message = json!({
            "op": "query",
            "viz": req.viz,
            "filter": req.filter,
            "table": req.table,
            "sql": sql,
            "time_requirement_ms": budget.as_millis() as u64,
            "confidence": req.confidence,
        });
        Ok(match self.exchange(message, req.deadline)? {
            Reply::Line(v) => match parse_result(v) {
                Ok(r) => QueryOutcome::Completed(r),
                Err(m) => QueryOutcome::Failed(m),
            },
            Reply::Malformed(m) => QueryOutcome::Failed(m),
            Reply::Expired => QueryOutcome::TimedOut,
            Reply::Closed => return Err(Error::Adapter("engine process exited".into())),
        })
    }

    fn link_vizs(&self, source: &str, target: &str) -> Result<()> {
        self.notify(json!({"op": "link", "source": source, "target": target}))
    }

    fn delete_vizs(&self, vizs: &[String]) -> Result<()> {
        self.notify(json!({"op": "delete", "vizs": vizs}))
    }

    fn workflow_start(&self) -> Result<()> {
        self.notify(json!({"op": "start"}))
    }

    fn workflow_end(&self) -> Result<()> {
        self.notify(json!({"op": "end"}))
    }
}

impl Drop for SubprocessAdapter {
    fn drop(&mut self) {
        if let Some(mut ch) = self.channel.get_mut().unwrap_or_else(|e| e.into_inner()).take() {
            drop(ch.stdin);
            let _ = ch.child.kill();
            let _ = ch.child.wait();
        }
    }
}
