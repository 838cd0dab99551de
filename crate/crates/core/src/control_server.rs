//! TCP control protocol for driving a simulation from an external script.
//!
//! Every frame is a 4-byte big-endian payload length followed by a UTF-8
//! JSON object `{"id": <int>, "cmd": <string>, "args": <object>}`. Each
//! request gets exactly one response echoing its `id`, carrying either
//! `result` or `error: {code, message}`. Only an oversized length prefix
//! ends the connection (after its error response).

use std::io::{self, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::engine::{load_scenario, SimulationConfig, World};
use crate::net_model::Route;
use crate::scenario_io::{StopSpec, VehicleSpec, DEFAULT_DWELL_S};

/// Largest accepted payload, bytes.
pub const MAX_FRAME_LEN: u32 = 16 * 1024 * 1024;
/// Upper bound on `step {n}` in a single request.
pub const MAX_STEPS_PER_REQUEST: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    NoWorldLoaded,
    UnknownDetector,
    BadArgs,
    UnknownCommand,
    /// Payload is not a JSON request object.
    BadFrame,
    /// Length prefix above [`MAX_FRAME_LEN`]; the connection is dropped.
    FrameTooLarge,
    /// `load` failed to read or validate its files.
    LoadFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandError {
    pub code: ErrorCode,
    pub message: String,
}

impl CommandError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CommandError {
            code,
            message: message.into(),
        }
    }

    fn bad_args(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadArgs, message)
    }
}

/// The four files a scenario is loaded from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioPaths {
    pub net: PathBuf,
    pub routes: PathBuf,
    pub additional: PathBuf,
    pub emissions: PathBuf,
}

impl ScenarioPaths {
    pub fn load(&self) -> Result<World, String> {
        let read = |p: &Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
        load_scenario(
            &read(&self.net)?,
            &read(&self.routes)?,
            &read(&self.additional)?,
            &read(&self.emissions)?,
        )
        .map_err(|e| e.to_string())
    }
}

/// State of one client session.
#[derive(Debug, Clone, Default)]
pub struct Session {
    pub world: Option<World>,
    pub terminated: bool,
}

impl Session {
    pub fn new(world: Option<World>) -> Self {
        Session {
            world,
            terminated: false,
        }
    }

    fn world(&mut self) -> Result<&mut World, CommandError> {
        self.world
            .as_mut()
            .ok_or_else(|| CommandError::new(ErrorCode::NoWorldLoaded, "no scenario loaded"))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadArgs {
    net: PathBuf,
    routes: PathBuf,
    additional: PathBuf,
    emissions: PathBuf,
    dt: Option<f64>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepArgs {
    n: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdArgs {
    id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddArgs {
    spec: AddSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddSpec {
    id: String,
    #[serde(rename = "type")]
    vtype: String,
    route: Option<String>,
    edges: Option<Vec<String>>,
    #[serde(default)]
    depart: f64,
    #[serde(default)]
    stops: Vec<AddStop>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddStop {
    #[serde(rename = "containerStop")]
    container_stop: String,
    dwell: Option<f64>,
}

fn args<T: for<'de> Deserialize<'de>>(args: &Value) -> Result<T, CommandError> {
    serde_json::from_value(args.clone()).map_err(|e| CommandError::bad_args(e.to_string()))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

/// Execute one decoded command against `session`.
pub fn handle_command(session: &mut Session, cmd: &str, raw_args: &Value) -> Result<Value, CommandError> {
    match cmd {
        "load" => {
            let a: LoadArgs = args(raw_args)?;
            let dt = a.dt.unwrap_or(1.0);
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CommandError::bad_args("dt must be a positive number"));
            }
            let paths = ScenarioPaths {
                net: a.net,
                routes: a.routes,
                additional: a.additional,
                emissions: a.emissions,
            };
            let mut world = paths
                .load()
                .map_err(|e| CommandError::new(ErrorCode::LoadFailed, e))?;
            world.configure(SimulationConfig {
                dt,
                seed: a.seed.unwrap_or(0),
                ..SimulationConfig::default()
            });
            session.world = Some(world);
            Ok(json!("ok"))
        }
        "step" => {
            let a: StepArgs = args(raw_args)?;
            let n = a.n.unwrap_or(1);
            if n > MAX_STEPS_PER_REQUEST {
                return Err(CommandError::bad_args(format!("n must be at most {MAX_STEPS_PER_REQUEST}")));
            }
            let world = session.world()?;
            for _ in 0..n {
                world.step();
            }
            Ok(json!(world.time()))
        }
        "getTime" => {
            no_args(raw_args)?;
            Ok(json!(session.world()?.time()))
        }
        "getMinExpectedNumber" => {
            no_args(raw_args)?;
            Ok(json!(session.world()?.min_expected_number()))
        }
        "inductionloop.getIDList" => {
            no_args(raw_args)?;
            Ok(json!(session.world()?.detector_ids()))
        }
        "inductionloop.getIntervals" => {
            let a: IdArgs = args(raw_args)?;
            let world = session.world()?;
            let intervals = world.detector_intervals(&a.id).ok_or_else(|| {
                CommandError::new(ErrorCode::UnknownDetector, format!("no detector `{}`", a.id))
            })?;
            Ok(to_value(&intervals))
        }
        "vehicle.add" => {
            let a: AddArgs = args(raw_args)?;
            let world = session.world()?;
            add_vehicle(world, a.spec)?;
            Ok(json!("ok"))
        }
        "getAccounts" => {
            no_args(raw_args)?;
            Ok(to_value(&session.world()?.vehicle_reports()))
        }
        "close" => {
            no_args(raw_args)?;
            session.terminated = true;
            Ok(json!("ok"))
        }
        other => Err(CommandError::new(
            ErrorCode::UnknownCommand,
            format!("unknown command `{other}`"),
        )),
    }
}

fn no_args(raw: &Value) -> Result<(), CommandError> {
    match raw.as_object() {
        Some(m) if m.is_empty() => Ok(()),
        _ => Err(CommandError::bad_args("command takes no arguments")),
    }
}

fn add_vehicle(world: &mut World, spec: AddSpec) -> Result<(), CommandError> {
    let route = match (spec.route, spec.edges) {
        (Some(r), None) => r,
        (None, Some(edges)) => {
            let id = format!("{}_route", spec.id);
            world
                .add_route(Route { id: id.clone(), edges })
                .map_err(|e| CommandError::bad_args(e.to_string()))?;
            id
        }
        _ => return Err(CommandError::bad_args("give exactly one of `route` or `edges`")),
    };
    let stops = spec
        .stops
        .into_iter()
        .map(|s| StopSpec {
            container_stop: s.container_stop,
            dwell: s.dwell.unwrap_or(DEFAULT_DWELL_S),
        })
        .collect();
    world
        .add_vehicle(VehicleSpec {
            id: spec.id,
            vtype: spec.vtype,
            route,
            depart: spec.depart,
            stops,
        })
        .map_err(|e| CommandError::bad_args(e.to_string()))
}

fn response(id: Value, outcome: Result<Value, CommandError>) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), id);
    match outcome {
        Ok(result) => {
            m.insert("result".into(), result);
        }
        Err(e) => {
            m.insert("error".into(), json!({ "code": e.code, "message": e.message }));
        }
    }
    Value::Object(m)
}

/// Decode one payload, run it, and build the response object.
pub fn handle_payload(session: &mut Session, payload: &[u8]) -> Value {
    let bad = |msg: String| response(Value::Null, Err(CommandError::new(ErrorCode::BadFrame, msg)));
    let value: Value = match serde_json::from_slice(payload) {
        Ok(v) => v,
        Err(e) => return bad(format!("invalid JSON: {e}")),
    };
    let Value::Object(mut obj) = value else {
        return bad("request must be a JSON object".into());
    };
    let id = match obj.remove("id") {
        Some(Value::Number(n)) if n.is_i64() || n.is_u64() => Value::Number(n),
        _ => return bad("`id` must be an integer".into()),
    };
    let Some(Value::String(cmd)) = obj.remove("cmd") else {
        return response(id, Err(CommandError::new(ErrorCode::BadFrame, "`cmd` must be a string")));
    };
    let args = match obj.remove("args") {
        None | Some(Value::Null) => Value::Object(Map::new()),
        Some(a @ Value::Object(_)) => a,
        Some(_) => return response(id, Err(CommandError::bad_args("`args` must be an object"))),
    };
    if let Some(extra) = obj.keys().next() {
        return response(id, Err(CommandError::new(ErrorCode::BadFrame, format!("unknown field `{extra}`"))));
    }
    response(id, handle_command(session, &cmd, &args))
}

pub fn write_frame(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&l| l <= MAX_FRAME_LEN)
        .ok_or_else(|| io::Error::new(ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

#[derive(Debug, PartialEq, Eq)]
pub enum Frame {
    Payload(Vec<u8>),
    /// Clean end of stream before a new frame.
    Eof,
    /// Length prefix above the limit; the payload was not read.
    TooLarge(u32),
}

pub fn read_frame(r: &mut impl Read) -> io::Result<Frame> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(Frame::Eof),
            Ok(0) => return Err(ErrorKind::UnexpectedEof.into()),
            Ok(k) => got += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME_LEN {
        return Ok(Frame::TooLarge(len));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok(Frame::Payload(payload))
}

/// How a session ended.
#[derive(Debug, PartialEq, Eq)]
pub enum SessionEnd {
    Closed,
    Disconnected,
    FrameTooLarge,
}

/// Serve frames from `stream` until `close`, disconnect or an oversized frame.
pub fn run_session<S: Read + Write>(stream: &mut S, session: &mut Session) -> io::Result<SessionEnd> {
    loop {
        let payload = match read_frame(stream) {
            Ok(Frame::Payload(p)) => p,
            Ok(Frame::Eof) => return Ok(SessionEnd::Disconnected),
            Ok(Frame::TooLarge(len)) => {
                let err = CommandError::new(
                    ErrorCode::FrameTooLarge,
                    format!("frame of {len} bytes exceeds {MAX_FRAME_LEN}"),
                );
                write_frame(stream, response(Value::Null, Err(err)).to_string().as_bytes())?;
                return Ok(SessionEnd::FrameTooLarge);
            }
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(SessionEnd::Disconnected),
            Err(e) => return Err(e),
        };
        let reply = handle_payload(session, &payload);
        write_frame(stream, reply.to_string().as_bytes())?;
        if session.terminated {
            return Ok(SessionEnd::Closed);
        }
    }
}

/// Accepts one client at a time; each session starts from a fresh copy of
/// the preloaded world, if any.
pub struct Server {
    listener: TcpListener,
    preload: Option<World>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, preload: Option<World>) -> io::Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            preload,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Handle the next client to completion.
    pub fn serve_one(&self) -> io::Result<SessionEnd> {
        let (mut stream, _) = self.listener.accept()?;
        stream.set_nodelay(true)?;
        let mut session = Session::new(self.preload.clone());
        match run_session(&mut stream, &mut session) {
            Ok(end) => Ok(end),
            // a client vanishing mid-reply only ends its own session
            Err(e) if matches!(e.kind(), ErrorKind::BrokenPipe | ErrorKind::ConnectionReset) => {
                Ok(SessionEnd::Disconnected)
            }
            Err(e) => Err(e),
        }
    }

    /// Serve clients one after another, forever.
    pub fn serve(&self) -> io::Result<()> {
        loop {
            if let Err(e) = self.serve_one() {
                if e.kind() != ErrorKind::Interrupted {
                    eprintln!("session error: {e}");
                }
            }
        }
    }
}
