use std::io::{BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde_json::json;

use engine_core::env::{Action, EnvConfig, Sensors};
use engine_core::error::code;
use engine_core::net::{encode_frame, read_frame, Client, Frame, Message, Server, ServerConfig};
use engine_core::tasks::TaskKind;
use engine_core::Error;

fn config(max_envs: u16) -> ServerConfig {
    ServerConfig {
        defaults: EnvConfig {
            sensors: Sensors::parse("audio,proprio").unwrap(),
            ..EnvConfig::for_task(TaskKind::KickTheBall)
        },
        max_envs,
    }
}

/// Serves exactly one connection on an ephemeral port.
fn serve_once(max_envs: u16) -> (SocketAddr, JoinHandle<engine_core::Result<()>>) {
    let server = Server::bind("127.0.0.1:0", config(max_envs)).unwrap();
    let addr = server.local_addr().unwrap();
    (addr, thread::spawn(move || server.serve_one()))
}

/// Raw connection for tests that need to misbehave on the wire.
struct Raw {
    stream: TcpStream,
    reader: BufReader<TcpStream>,
}

impl Raw {
    fn connect(addr: SocketAddr) -> Raw {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
        Raw {
            reader: BufReader::new(stream.try_clone().unwrap()),
            stream,
        }
    }

    fn send(&mut self, bytes: &[u8]) {
        self.stream.write_all(bytes).unwrap();
    }

    fn request(&mut self, env_id: u16, msg: &Message) -> Message {
        self.send(&encode_frame(&msg.to_frame(env_id)).unwrap());
        self.recv()
    }

    fn recv(&mut self) -> Message {
        let f = read_frame(&mut self.reader).unwrap().expect("a reply");
        Message::from_frame(&f).unwrap()
    }
}

fn error_code(m: &Message) -> i32 {
    match m {
        Message::Error { code, .. } => *code,
        other => panic!("expected ERROR, got {other:?}"),
    }
}

fn walk() -> Vec<Action> {
    vec![Action::walk(1.0, 0.3)]
}

#[test]
fn hello_reset_step_close() {
    let (addr, server) = serve_once(4);
    let mut c = Client::connect(addr).unwrap();
    let ack = c.hello(0, &json!({"protocol_version": 1, "seed": 5})).unwrap();
    assert_eq!(ack["protocol_version"], 1);
    assert_eq!(ack["env_id"], 0);
    assert_eq!(ack["config"]["seed"], 5);
    let spec = &ack["spec"];
    assert_eq!(spec["agents"], 1);

    let first = c.reset(0, None).unwrap();
    assert_eq!(first.rewards, vec![0.0]);
    assert!(!first.done);
    for o in spec["observations"].as_array().unwrap() {
        let t = first.observations[0].get(o["key"].as_str().unwrap()).unwrap();
        let shape: Vec<u32> = serde_json::from_value(o["shape"].clone()).unwrap();
        assert_eq!(t.shape, shape);
    }
    let r = c.step(0, &walk()).unwrap();
    assert_eq!(r.rewards.len(), 1);
    let info: serde_json::Value = serde_json::from_str(&r.info).unwrap();
    assert_eq!(info["step"], 1);
    c.close().unwrap();
    server.join().unwrap().unwrap();
}

#[test]
fn requests_out_of_order_get_errors_and_the_connection_survives() {
    let (addr, server) = serve_once(2);
    let mut raw = Raw::connect(addr);
    let step = Message::Step(vec![Action::Noop.to_wire()]);
    assert_eq!(error_code(&raw.request(0, &step)), code::NOT_RESET);
    assert_eq!(error_code(&raw.request(0, &Message::Reset(None))), code::PROTOCOL);
    assert_eq!(
        error_code(&raw.request(2, &Message::Hello("{}".into()))),
        code::PROTOCOL
    );
    // a type the server does not know
    raw.send(
        &encode_frame(&Frame {
            env_id: 0,
            msg_type: 42,
            payload: vec![1, 2, 3],
        })
        .unwrap(),
    );
    assert_eq!(error_code(&raw.recv()), code::PROTOCOL);
    // a server-only message sent by a client
    assert_eq!(
        error_code(&raw.request(0, &Message::HelloAck("{}".into()))),
        code::PROTOCOL
    );
    // bad HELLO documents
    assert_eq!(
        error_code(&raw.request(0, &Message::Hello("{\"task\": \"juggling\"}".into()))),
        code::JSON
    );
    assert_eq!(
        error_code(&raw.request(0, &Message::Hello("{\"protocol_version\": 7}".into()))),
        code::PROTOCOL
    );
    assert_eq!(
        error_code(&raw.request(0, &Message::Hello("{\"task\": \"grab_object\", \"agents\": 3}".into()))),
        code::CONFIG
    );

    assert!(matches!(
        raw.request(0, &Message::Hello(String::new())),
        Message::HelloAck(_)
    ));
    assert!(matches!(
        raw.request(0, &Message::Reset(Some(1))),
        Message::StepResult(_)
    ));
    let torque = Message::Step(vec![Action::Torque(vec![0.0; 34]).to_wire()]);
    assert_eq!(error_code(&raw.request(0, &torque)), code::MODE_CONFLICT);
    let two = Message::Step(vec![Action::Noop.to_wire(), Action::Noop.to_wire()]);
    assert_eq!(error_code(&raw.request(0, &two)), code::INVALID_ACTION);
    let short = Message::Step(vec![(1, vec![1.0, 0.0])]);
    assert_eq!(error_code(&raw.request(0, &short)), code::INVALID_ACTION);
    assert!(matches!(raw.request(0, &step), Message::StepResult(_)));
    assert_eq!(raw.request(0, &Message::Close), Message::Close);
    server.join().unwrap().unwrap();
}

#[test]
fn finished_episode_reports_episode_finished() {
    let (addr, server) = serve_once(1);
    let mut c = Client::connect(addr).unwrap();
    c.hello(0, &json!({"task_params": {"max_steps": 3}})).unwrap();
    c.reset(0, Some(2)).unwrap();
    for k in 1..=3 {
        assert_eq!(c.step(0, &walk()).unwrap().done, k == 3);
    }
    match c.step(0, &walk()) {
        Err(Error::Protocol(m)) => assert!(
            m.starts_with(&format!("server error {}", code::EPISODE_FINISHED)),
            "{m}"
        ),
        other => panic!("{other:?}"),
    }
    assert!(!c.reset(0, Some(2)).unwrap().done);
    assert!(!c.step(0, &walk()).unwrap().done);
    c.close().unwrap();
    server.join().unwrap().unwrap();
}

#[test]
fn multiplexed_environments_are_isolated() {
    let (addr, server) = serve_once(3);
    let mut c = Client::connect(addr).unwrap();
    c.hello(0, &json!({"seed": 8})).unwrap();
    c.hello(2, &json!({"seed": 8, "task": "object_nav"})).unwrap();
    let a0 = c.reset(0, None).unwrap();
    c.reset(2, None).unwrap();
    let mut interleaved = vec![a0];
    for t in 0..10 {
        interleaved.push(c.step(0, &walk()).unwrap());
        // extra traffic on the other environment between every step
        for _ in 0..t % 3 {
            c.step(2, &[Action::walk(-0.5, 1.0)]).unwrap();
        }
    }
    c.close().unwrap();
    server.join().unwrap().unwrap();

    let (addr, server) = serve_once(1);
    let mut solo = Client::connect(addr).unwrap();
    solo.hello(0, &json!({"seed": 8})).unwrap();
    let mut alone = vec![solo.reset(0, None).unwrap()];
    for _ in 0..10 {
        alone.push(solo.step(0, &walk()).unwrap());
    }
    solo.close().unwrap();
    server.join().unwrap().unwrap();
    assert_eq!(interleaved, alone);
}

#[test]
fn slow_writer_still_gets_a_reply() {
    let (addr, server) = serve_once(1);
    let mut raw = Raw::connect(addr);
    let hello = encode_frame(&Message::Hello("{\"seed\": 3}".into()).to_frame(0)).unwrap();
    for chunk in hello.chunks(2) {
        raw.send(chunk);
        thread::sleep(Duration::from_millis(5));
    }
    assert!(matches!(raw.recv(), Message::HelloAck(_)));
    let reset = encode_frame(&Message::Reset(None).to_frame(0)).unwrap();
    raw.send(&reset[..3]);
    thread::sleep(Duration::from_millis(50));
    raw.send(&reset[3..]);
    assert!(matches!(raw.recv(), Message::StepResult(_)));
    raw.request(0, &Message::Close);
    server.join().unwrap().unwrap();
}

#[test]
fn broken_framing_gets_an_error_then_a_hang_up() {
    let (addr, server) = serve_once(1);
    let mut raw = Raw::connect(addr);
    // declared length below the minimum header size
    raw.send(&[1, 0, 0, 0, 0, 0, 0]);
    assert_eq!(error_code(&raw.recv()), code::PROTOCOL);
    assert!(read_frame(&mut raw.reader).unwrap().is_none());
    server.join().unwrap().unwrap();

    let (addr, server) = serve_once(1);
    let mut raw = Raw::connect(addr);
    raw.send(&u32::MAX.to_le_bytes());
    raw.send(&[0, 0, 0]);
    assert_eq!(error_code(&raw.recv()), code::PROTOCOL);
    server.join().unwrap().unwrap();
}

#[test]
fn a_client_leaving_without_close_ends_the_session_cleanly() {
    let (addr, server) = serve_once(1);
    let mut c = Client::connect(addr).unwrap();
    c.hello(0, &json!({})).unwrap();
    drop(c);
    server.join().unwrap().unwrap();
}

fn scripted_session(addr: SocketAddr) -> Vec<Vec<u8>> {
    let mut c = Client::connect(addr).unwrap();
    c.hello(0, &json!({"seed": 21, "sensors": ["audio", "tactile", "proprio"]}))
        .unwrap();
    c.reset(0, None).unwrap();
    for t in 0..40 {
        let a = Action::Primitive {
            walk: 1.0,
            turn: (t as f64 * 0.2).sin(),
            kick: t % 7 == 0,
            grab: false,
            release: false,
        };
        c.step(0, &[a]).unwrap();
    }
    let t = std::mem::take(&mut c.transcript);
    c.close().unwrap();
    t
}

#[test]
fn transcripts_are_reproducible_across_servers() {
    let (a, sa) = serve_once(1);
    let first = scripted_session(a);
    sa.join().unwrap().unwrap();
    let (b, sb) = serve_once(1);
    let second = scripted_session(b);
    sb.join().unwrap().unwrap();
    assert_eq!(first.len(), 2 * 42);
    assert_eq!(first, second);
}

#[test]
fn concurrent_connections_do_not_interfere() {
    let server = Server::bind("127.0.0.1:0", config(1)).unwrap();
    let addr = server.local_addr().unwrap();
    thread::spawn(move || server.run());
    let handles: Vec<_> = (0..3).map(|_| thread::spawn(move || scripted_session(addr))).collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(results.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bind_rejects_bad_server_configs() {
    assert!(matches!(Server::bind("127.0.0.1:0", config(0)), Err(Error::Config(_))));
    let mut bad = config(1);
    bad.defaults.substeps = 0;
    assert!(Server::bind("127.0.0.1:0", bad).is_err());
}
