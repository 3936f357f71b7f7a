//! TCP protocol server: framed request/response with several environments
//! multiplexed over one connection.

pub mod codec;

use std::io::{BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;

use serde_json::Value;

pub use codec::{
    decode_frame, encode_frame, read_frame, try_decode, Decoded, Frame, Message, MsgType, StepResult, MAX_PAYLOAD,
    PROTOCOL_VERSION,
};

use crate::env::{Action, Env, EnvConfig, Sensors};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// Base config; HELLO documents override individual fields.
    pub defaults: EnvConfig,
    pub max_envs: u16,
}

/// Overlays a HELLO document on the defaults. `sensors` may also be given
/// as a comma-separated string or a list of names.
pub fn merge_config(defaults: &EnvConfig, doc: &str) -> Result<EnvConfig> {
    let mut overlay: Value = if doc.trim().is_empty() {
        Value::Object(Default::default())
    } else {
        serde_json::from_str(doc)?
    };
    let Value::Object(map) = &mut overlay else {
        return Err(Error::Config("HELLO document must be a JSON object".into()));
    };
    if let Some(v) = map.remove("protocol_version") {
        if v.as_u64() != Some(PROTOCOL_VERSION as u64) {
            return Err(Error::Protocol(format!(
                "protocol version {v} is not supported; server speaks {PROTOCOL_VERSION}"
            )));
        }
    }
    if let Some(s) = map.get_mut("sensors") {
        let list = match s {
            Value::String(t) => Some(t.clone()),
            Value::Array(items) => Some(
                items
                    .iter()
                    .map(|i| i.as_str().unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            _ => None,
        };
        if let Some(list) = list {
            *s = serde_json::to_value(Sensors::parse(&list)?)?;
        }
    }
    let mut base = serde_json::to_value(defaults)?;
    deep_merge(&mut base, overlay);
    Ok(serde_json::from_value(base)?)
}

fn deep_merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Protocol state of one connection, independent of the transport.
pub struct Session {
    config: Arc<ServerConfig>,
    envs: Vec<Option<Env>>,
    closed: bool,
}

impl Session {
    pub fn new(config: Arc<ServerConfig>) -> Session {
        let envs = (0..config.max_envs).map(|_| None).collect();
        Session {
            config,
            envs,
            closed: false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn env(&self, env_id: u16) -> Option<&Env> {
        self.envs.get(env_id as usize)?.as_ref()
    }

    /// Answers one request frame. Every request gets exactly one reply.
    pub fn handle(&mut self, frame: &Frame) -> Frame {
        let id = frame.env_id;
        let reply = self.dispatch(frame).unwrap_or_else(|e| {
            log::debug!("env {id}: {e}");
            Message::error(&e)
        });
        reply.to_frame(id)
    }

    fn dispatch(&mut self, frame: &Frame) -> Result<Message> {
        let msg = Message::from_frame(frame)?;
        if matches!(msg, Message::Close) {
            self.closed = true;
            return Ok(Message::Close);
        }
        let id = frame.env_id;
        if id >= self.config.max_envs {
            return Err(Error::Protocol(format!(
                "env id {id} out of range; this server allows {}",
                self.config.max_envs
            )));
        }
        let slot = &mut self.envs[id as usize];
        match msg {
            Message::Hello(doc) => {
                let config = merge_config(&self.config.defaults, &doc)?;
                let env = Env::new(config)?;
                let ack = serde_json::json!({
                    "protocol_version": PROTOCOL_VERSION,
                    "env_id": id,
                    "config": env.config(),
                    "spec": env.spec(),
                });
                *slot = Some(env);
                Ok(Message::HelloAck(ack.to_string()))
            }
            Message::Reset(seed) => {
                let env = slot
                    .as_mut()
                    .ok_or_else(|| Error::Protocol(format!("env {id} has not been opened with HELLO")))?;
                let seed = seed.unwrap_or(env.config().seed);
                let observations = env.reset(seed)?;
                Ok(Message::StepResult(StepResult {
                    rewards: vec![0.0; observations.len()],
                    observations,
                    done: false,
                    info: "{}".into(),
                }))
            }
            Message::Step(wire) => {
                let env = slot.as_mut().ok_or(Error::NotReset)?;
                let actions = wire
                    .iter()
                    .enumerate()
                    .map(|(i, (kind, v))| Action::from_wire(i, *kind, v))
                    .collect::<Result<Vec<_>>>()?;
                let out = env.step(&actions)?;
                Ok(Message::StepResult(StepResult {
                    observations: out.observations,
                    rewards: out.rewards.iter().map(|r| r.total() as f32).collect(),
                    done: out.done,
                    info: out.info,
                }))
            }
            other => Err(Error::Protocol(format!(
                "unexpected {:?} message from a client",
                other.msg_type()
            ))),
        }
    }
}

/// Serves one connection until CLOSE or end of stream.
pub fn serve_connection(stream: TcpStream, config: Arc<ServerConfig>) -> Result<()> {
    stream.set_nodelay(true)?;
    let peer = stream.peer_addr().ok();
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut session = Session::new(config);
    loop {
        let frame = match read_frame(&mut reader) {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e @ Error::Protocol(_)) => {
                // framing is lost, so report and hang up
                log::warn!("{peer:?}: {e}");
                writer.write_all(&encode_frame(&Message::error(&e).to_frame(0))?)?;
                writer.flush()?;
                break;
            }
            Err(e) => return Err(e),
        };
        let reply = session.handle(&frame);
        let bytes = encode_frame(&reply).or_else(|e| encode_frame(&Message::error(&e).to_frame(frame.env_id)))?;
        writer.write_all(&bytes)?;
        writer.flush()?;
        if session.is_closed() {
            break;
        }
    }
    log::info!("{peer:?}: connection finished");
    Ok(())
}

pub struct Server {
    listener: TcpListener,
    config: Arc<ServerConfig>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, config: ServerConfig) -> Result<Server> {
        if config.max_envs == 0 {
            return Err(Error::Config("max_envs must be at least 1".into()));
        }
        // fail fast on a bad default config rather than on the first HELLO
        config.defaults.validate()?;
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            config: Arc::new(config),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts one connection and serves it to completion on this thread.
    pub fn serve_one(&self) -> Result<()> {
        let (stream, peer) = self.listener.accept()?;
        log::info!("connection from {peer}");
        serve_connection(stream, self.config.clone())
    }

    /// Accepts connections forever, one thread each.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let config = self.config.clone();
            std::thread::spawn(move || {
                if let Err(e) = serve_connection(stream, config) {
                    log::warn!("connection ended with error: {e}");
                }
            });
        }
        Ok(())
    }
}

/// Blocking client used by tests and tools. Server ERROR replies surface
/// as `Error::Protocol` carrying the server's message.
pub struct Client {
    stream: TcpStream,
    reader: BufReader<TcpStream>,
    /// Every frame sent and received, in order, as raw bytes.
    pub transcript: Vec<Vec<u8>>,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Client> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Client {
            reader: BufReader::new(stream.try_clone()?),
            stream,
            transcript: Vec::new(),
        })
    }

    pub fn request(&mut self, env_id: u16, msg: &Message) -> Result<Message> {
        let bytes = encode_frame(&msg.to_frame(env_id))?;
        self.stream.write_all(&bytes)?;
        self.transcript.push(bytes);
        let frame =
            read_frame(&mut self.reader)?.ok_or_else(|| Error::Protocol("server closed the connection".into()))?;
        self.transcript.push(encode_frame(&frame)?);
        match Message::from_frame(&frame)? {
            Message::Error { code, message } => Err(Error::Protocol(format!("server error {code}: {message}"))),
            m => Ok(m),
        }
    }

    /// Opens `env_id` and returns the parsed HELLO_ACK document.
    pub fn hello(&mut self, env_id: u16, doc: &Value) -> Result<Value> {
        match self.request(env_id, &Message::Hello(doc.to_string()))? {
            Message::HelloAck(ack) => Ok(serde_json::from_str(&ack)?),
            other => Err(unexpected(&other)),
        }
    }

    pub fn reset(&mut self, env_id: u16, seed: Option<u64>) -> Result<StepResult> {
        match self.request(env_id, &Message::Reset(seed))? {
            Message::StepResult(r) => Ok(r),
            other => Err(unexpected(&other)),
        }
    }

    pub fn step(&mut self, env_id: u16, actions: &[Action]) -> Result<StepResult> {
        let wire = actions.iter().map(Action::to_wire).collect();
        match self.request(env_id, &Message::Step(wire))? {
            Message::StepResult(r) => Ok(r),
            other => Err(unexpected(&other)),
        }
    }

    pub fn close(mut self) -> Result<()> {
        self.request(0, &Message::Close).map(|_| ())
    }
}

fn unexpected(m: &Message) -> Error {
    Error::Protocol(format!("unexpected {:?} reply", m.msg_type()))
}
