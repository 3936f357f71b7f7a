//! C interface to the engine.
//!
//! Environments are opaque handles. Every fallible call returns a status
//! code; the message of the most recent failure on the calling thread is
//! available through [`engine_last_error`]. Output buffers follow one
//! convention: the required length is always written to `len_out`, and
//! `ENGINE_ERR_BUFFER_TOO_SMALL` is returned when `cap` is too small.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use engine_core::dataset::{self, DatasetKind, GenOptions};
use engine_core::env::{Action, Env, EnvConfig, ObservationFrame, StepOutput};
use engine_core::error::{code, Error};
use engine_core::net::{self, Decoded, Frame};

pub const ENGINE_OK: i32 = 0;
pub const ENGINE_ERR_UNSUPPORTED_PAIR: i32 = 1;
pub const ENGINE_ERR_INVALID_ACTION: i32 = 2;
pub const ENGINE_ERR_DIVERGED: i32 = 3;
pub const ENGINE_ERR_MODE_CONFLICT: i32 = 4;
pub const ENGINE_ERR_INTERACTION_REFUSED: i32 = 5;
pub const ENGINE_ERR_NOT_FOUND: i32 = 6;
pub const ENGINE_ERR_INVALID_GEOMETRY: i32 = 7;
pub const ENGINE_ERR_CONFIG: i32 = 8;
pub const ENGINE_ERR_EPISODE_FINISHED: i32 = 9;
pub const ENGINE_ERR_NOT_RESET: i32 = 10;
pub const ENGINE_ERR_PROTOCOL: i32 = 11;
pub const ENGINE_ERR_IO: i32 = 12;
pub const ENGINE_ERR_JSON: i32 = 13;
pub const ENGINE_ERR_NULL: i32 = -1;
pub const ENGINE_ERR_UTF8: i32 = -2;
pub const ENGINE_ERR_BUFFER_TOO_SMALL: i32 = -3;
pub const ENGINE_ERR_PANIC: i32 = -4;
/// Returned by [`engine_frame_decode`] when more bytes are needed.
pub const ENGINE_INCOMPLETE: i32 = 100;

// the header needs literal values, so keep them in step with the engine
const _: () = assert!(
    ENGINE_OK == code::OK
        && ENGINE_ERR_UNSUPPORTED_PAIR == code::UNSUPPORTED_PAIR
        && ENGINE_ERR_INVALID_ACTION == code::INVALID_ACTION
        && ENGINE_ERR_DIVERGED == code::DIVERGED
        && ENGINE_ERR_MODE_CONFLICT == code::MODE_CONFLICT
        && ENGINE_ERR_INTERACTION_REFUSED == code::INTERACTION_REFUSED
        && ENGINE_ERR_NOT_FOUND == code::NOT_FOUND
        && ENGINE_ERR_INVALID_GEOMETRY == code::INVALID_GEOMETRY
        && ENGINE_ERR_CONFIG == code::CONFIG
        && ENGINE_ERR_EPISODE_FINISHED == code::EPISODE_FINISHED
        && ENGINE_ERR_NOT_RESET == code::NOT_RESET
        && ENGINE_ERR_PROTOCOL == code::PROTOCOL
        && ENGINE_ERR_IO == code::IO
        && ENGINE_ERR_JSON == code::JSON
);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Fail {
    Engine(Error),
    Code(i32, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

type FfiResult = Result<i32, Fail>;

fn null(what: &str) -> Fail {
    Fail::Code(ENGINE_ERR_NULL, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> FfiResult) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail::Engine(e))) => {
            set_error(e.to_string());
            e.code()
        }
        Ok(Err(Fail::Code(c, msg))) => {
            set_error(msg);
            c
        }
        Err(_) => {
            set_error("panic inside the engine".into());
            ENGINE_ERR_PANIC
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Code(ENGINE_ERR_UTF8, format!("{what} is not valid UTF-8")))
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize, len_out: *mut usize) -> FfiResult {
    if !len_out.is_null() {
        *len_out = src.len();
    }
    if src.len() > cap {
        return Err(Fail::Code(
            ENGINE_ERR_BUFFER_TOO_SMALL,
            format!("buffer holds {cap} elements, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(ENGINE_OK)
}

/// Opaque environment handle.
pub struct EngineEnv {
    env: Env,
    observations: Vec<ObservationFrame>,
    last: Option<StepOutput>,
}

unsafe fn env_mut<'a>(h: *mut EngineEnv) -> Result<&'a mut EngineEnv, Fail> {
    h.as_mut().ok_or_else(|| null("environment handle"))
}

/// Copies the last error message of this thread, NUL-terminated, into
/// `buf`. Returns the message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn engine_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = e.len().min(cap - 1);
            ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn engine_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates an environment from a JSON config document; an empty string
/// selects all defaults.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn engine_env_new(config_json: *const c_char, out: *mut *mut EngineEnv) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let doc = str_arg(config_json, "config_json")?;
        let config = net::merge_config(&EnvConfig::default(), doc)?;
        let env = Env::new(config)?;
        *out = Box::into_raw(Box::new(EngineEnv {
            env,
            observations: Vec::new(),
            last: None,
        }));
        Ok(ENGINE_OK)
    })
}

/// # Safety
/// `env` must be null or a handle from [`engine_env_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn engine_env_free(env: *mut EngineEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn engine_env_reset(env: *mut EngineEnv, seed: u64) -> i32 {
    guard(|| {
        let h = env_mut(env)?;
        h.observations = h.env.reset(seed)?;
        h.last = None;
        Ok(ENGINE_OK)
    })
}

/// Number of agents in the environment, or 0 for a null handle.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn engine_env_num_agents(env: *const EngineEnv) -> u32 {
    env.as_ref().map_or(0, |h| h.env.config().agent_count())
}

/// Steps every agent. Agent `i` uses action kind `kinds[i]` with
/// `lens[i]` values taken in order from the concatenated `values`.
/// `rewards_out` receives one total reward per agent.
///
/// # Safety
/// Arrays must hold `n_agents` entries (`values` the sum of `lens`);
/// `rewards_out` must hold `n_agents` floats and `done_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn engine_env_step(
    env: *mut EngineEnv,
    kinds: *const u8,
    values: *const f32,
    lens: *const usize,
    n_agents: usize,
    rewards_out: *mut f32,
    done_out: *mut u8,
) -> i32 {
    guard(|| {
        let h = env_mut(env)?;
        if n_agents > 0 && (kinds.is_null() || lens.is_null() || rewards_out.is_null()) {
            return Err(null("action arrays"));
        }
        let mut actions = Vec::with_capacity(n_agents);
        let mut offset = 0;
        for i in 0..n_agents {
            let n = *lens.add(i);
            let v = if n == 0 {
                &[][..]
            } else if values.is_null() {
                return Err(null("values"));
            } else {
                std::slice::from_raw_parts(values.add(offset), n)
            };
            offset += n;
            actions.push(Action::from_wire(i, *kinds.add(i), v)?);
        }
        let out = h.env.step(&actions)?;
        for (i, r) in out.rewards.iter().enumerate().take(n_agents) {
            *rewards_out.add(i) = r.total() as f32;
        }
        if !done_out.is_null() {
            *done_out = out.done as u8;
        }
        h.observations = out.observations.clone();
        h.last = Some(out);
        Ok(ENGINE_OK)
    })
}

/// Copies the latest observation tensor `key` of `agent` into `buf`.
///
/// # Safety
/// `key` must be NUL-terminated; `buf` must hold `cap` floats.
#[no_mangle]
pub unsafe extern "C" fn engine_env_observation(
    env: *const EngineEnv,
    agent: u32,
    key: *const c_char,
    buf: *mut f32,
    cap: usize,
    len_out: *mut usize,
) -> i32 {
    guard(|| {
        let h = env.as_ref().ok_or_else(|| null("environment handle"))?;
        let key = str_arg(key, "key")?;
        let t = lookup(h, agent, key)?;
        let data = t
            .as_f32()
            .ok_or_else(|| Fail::Code(ENGINE_ERR_NOT_FOUND, format!("{key} is not an f32 tensor")))?;
        copy_out(data, buf, cap, len_out)
    })
}

/// Copies the shape of observation `key` of `agent` into `dims`.
///
/// # Safety
/// `key` must be NUL-terminated; `dims` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn engine_env_observation_shape(
    env: *const EngineEnv,
    agent: u32,
    key: *const c_char,
    dims: *mut u32,
    cap: usize,
    ndim_out: *mut usize,
) -> i32 {
    guard(|| {
        let h = env.as_ref().ok_or_else(|| null("environment handle"))?;
        let key = str_arg(key, "key")?;
        let t = lookup(h, agent, key)?;
        copy_out(&t.shape, dims, cap, ndim_out)
    })
}

fn lookup<'a>(h: &'a EngineEnv, agent: u32, key: &str) -> Result<&'a engine_core::env::Tensor, Fail> {
    let frame = h.observations.get(agent as usize).ok_or(Error::NotReset)?;
    frame
        .get(key)
        .ok_or_else(|| Fail::Code(ENGINE_ERR_NOT_FOUND, format!("no observation {key:?}")))
}

/// Copies the info JSON of the last step (`{}` after reset), without a
/// terminator.
///
/// # Safety
/// `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn engine_env_info(
    env: *const EngineEnv,
    buf: *mut c_char,
    cap: usize,
    len_out: *mut usize,
) -> i32 {
    guard(|| {
        let h = env.as_ref().ok_or_else(|| null("environment handle"))?;
        let info = h.last.as_ref().map_or("{}", |o| o.info.as_str());
        copy_out(info.as_bytes(), buf as *mut u8, cap, len_out)
    })
}

/// Copies the observation and action spec as JSON, without a terminator.
///
/// # Safety
/// `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn engine_env_spec_json(
    env: *const EngineEnv,
    buf: *mut c_char,
    cap: usize,
    len_out: *mut usize,
) -> i32 {
    guard(|| {
        let h = env.as_ref().ok_or_else(|| null("environment handle"))?;
        let doc = serde_json::to_string(&h.env.spec()).map_err(Error::from)?;
        copy_out(doc.as_bytes(), buf as *mut u8, cap, len_out)
    })
}

/// Encodes one wire frame into `out`.
///
/// # Safety
/// `payload` must hold `payload_len` bytes and `out` `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn engine_frame_encode(
    env_id: u16,
    msg_type: u8,
    payload: *const u8,
    payload_len: usize,
    out: *mut u8,
    cap: usize,
    len_out: *mut usize,
) -> i32 {
    guard(|| {
        let payload = if payload_len == 0 {
            Vec::new()
        } else if payload.is_null() {
            return Err(null("payload"));
        } else {
            std::slice::from_raw_parts(payload, payload_len).to_vec()
        };
        let bytes = net::encode_frame(&Frame {
            env_id,
            msg_type,
            payload,
        })?;
        copy_out(&bytes, out, cap, len_out)
    })
}

/// Decodes the frame at the front of `buf`. On success the payload is
/// `buf[payload_offset .. payload_offset + payload_len]` and `consumed`
/// bytes belong to the frame. Returns `ENGINE_INCOMPLETE` when more bytes
/// are needed.
///
/// # Safety
/// `buf` must hold `len` bytes; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn engine_frame_decode(
    buf: *const u8,
    len: usize,
    env_id: *mut u16,
    msg_type: *mut u8,
    payload_offset: *mut usize,
    payload_len: *mut usize,
    consumed: *mut usize,
) -> i32 {
    guard(|| {
        if env_id.is_null()
            || msg_type.is_null()
            || payload_offset.is_null()
            || payload_len.is_null()
            || consumed.is_null()
        {
            return Err(null("output pointer"));
        }
        let bytes = if len == 0 {
            &[][..]
        } else if buf.is_null() {
            return Err(null("buf"));
        } else {
            std::slice::from_raw_parts(buf, len)
        };
        match net::try_decode(bytes)? {
            Decoded::Incomplete { .. } => Ok(ENGINE_INCOMPLETE),
            Decoded::Frame { frame, consumed: c } => {
                *env_id = frame.env_id;
                *msg_type = frame.msg_type;
                *payload_offset = net::codec::HEADER_LEN;
                *payload_len = frame.payload.len();
                *consumed = c;
                Ok(ENGINE_OK)
            }
        }
    })
}

/// Generates a dataset (`image`, `bbox`, `distance`, `sound` or `tactile`)
/// into `out_dir`.
///
/// # Safety
/// `kind` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn engine_dataset_generate(
    kind: *const c_char,
    n: usize,
    seed: u64,
    out_dir: *const c_char,
) -> i32 {
    guard(|| {
        let kind: DatasetKind = str_arg(kind, "kind")?.parse()?;
        let out = PathBuf::from(str_arg(out_dir, "out_dir")?);
        dataset::generate(&GenOptions::new(kind, n, seed, out))?;
        Ok(ENGINE_OK)
    })
}

/// Tactile response of one taxel for displacement `d`.
#[no_mangle]
pub extern "C" fn engine_tactile_response(d: f64, d_max: f64) -> f64 {
    engine_core::tactile::tactile_response(d, d_max)
}

/// Spherical-head interaural time difference in seconds.
#[no_mangle]
pub extern "C" fn engine_woodworth_itd(head_radius: f64, speed_of_sound: f64, theta: f64) -> f64 {
    engine_core::audio::woodworth_itd(head_radius, speed_of_sound, theta)
}
