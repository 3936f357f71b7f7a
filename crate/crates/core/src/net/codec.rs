//! Little-endian frame layout and message payloads.
//!
//! A frame is `u32 length | u16 env_id | u8 type | payload` where `length`
//! counts everything after itself, so it is always `3 + payload.len()`.

use std::io::Read;

use crate::env::{DType, ObservationFrame, Tensor};
use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 7;
pub const MAX_PAYLOAD: usize = 64 * 1024 * 1024;
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Hello = 0,
    HelloAck = 1,
    Reset = 2,
    Step = 3,
    StepResult = 4,
    Error = 5,
    Close = 6,
}

impl MsgType {
    pub fn from_code(code: u8) -> Option<MsgType> {
        Some(match code {
            0 => MsgType::Hello,
            1 => MsgType::HelloAck,
            2 => MsgType::Reset,
            3 => MsgType::Step,
            4 => MsgType::StepResult,
            5 => MsgType::Error,
            6 => MsgType::Close,
            _ => return None,
        })
    }
}

/// One frame with a raw type byte, so unknown types survive decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub env_id: u16,
    pub msg_type: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(env_id: u16, msg_type: MsgType, payload: Vec<u8>) -> Frame {
        Frame {
            env_id,
            msg_type: msg_type as u8,
            payload,
        }
    }

    pub fn kind(&self) -> Option<MsgType> {
        MsgType::from_code(self.msg_type)
    }
}

pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>> {
    if frame.payload.len() > MAX_PAYLOAD {
        return Err(Error::Protocol(format!(
            "payload of {} bytes exceeds the {MAX_PAYLOAD} byte limit",
            frame.payload.len()
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + frame.payload.len());
    out.extend_from_slice(&(3 + frame.payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&frame.env_id.to_le_bytes());
    out.push(frame.msg_type);
    out.extend_from_slice(&frame.payload);
    Ok(out)
}

/// Outcome of decoding the front of a byte buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Frame {
        frame: Frame,
        consumed: usize,
    },
    /// More bytes are needed; `needed` is the full frame size when known.
    Incomplete {
        needed: Option<usize>,
    },
}

fn declared_len(buf: &[u8]) -> Result<usize> {
    let len = u32::from_le_bytes(buf[..4].try_into().expect("4 bytes")) as usize;
    if len < 3 {
        return Err(Error::Protocol(format!(
            "declared length {len} is shorter than the header"
        )));
    }
    if len - 3 > MAX_PAYLOAD {
        return Err(Error::Protocol(format!(
            "declared payload of {} bytes exceeds the {MAX_PAYLOAD} byte limit",
            len - 3
        )));
    }
    Ok(len)
}

/// Streaming decode of the first frame in `buf`.
pub fn try_decode(buf: &[u8]) -> Result<Decoded> {
    if buf.len() < 4 {
        return Ok(Decoded::Incomplete { needed: None });
    }
    let total = 4 + declared_len(buf)?;
    if buf.len() < total {
        return Ok(Decoded::Incomplete { needed: Some(total) });
    }
    Ok(Decoded::Frame {
        frame: Frame {
            env_id: u16::from_le_bytes([buf[4], buf[5]]),
            msg_type: buf[6],
            payload: buf[HEADER_LEN..total].to_vec(),
        },
        consumed: total,
    })
}

/// Decodes a buffer holding exactly one frame.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame> {
    match try_decode(bytes)? {
        Decoded::Frame { frame, consumed } if consumed == bytes.len() => Ok(frame),
        Decoded::Frame { consumed, .. } => Err(Error::Protocol(format!(
            "declared frame size {consumed} but buffer holds {} bytes",
            bytes.len()
        ))),
        Decoded::Incomplete { .. } => Err(Error::Protocol(format!(
            "incomplete frame: buffer holds {} bytes",
            bytes.len()
        ))),
    }
}

/// Reads one frame; `Ok(None)` on a clean end of stream between frames.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Frame>> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(Error::Protocol("stream ended inside a frame header".into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = declared_len(&header)?;
    let mut payload = vec![0u8; len - 3];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Protocol("stream ended inside a frame".into()),
        _ => e.into(),
    })?;
    Ok(Some(Frame {
        env_id: u16::from_le_bytes([header[4], header[5]]),
        msg_type: header[6],
        payload,
    }))
}

/// Observations, rewards and status of one control step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observations: Vec<ObservationFrame>,
    pub rewards: Vec<f32>,
    pub done: bool,
    pub info: String,
}

/// A decoded message. HELLO and HELLO_ACK carry UTF-8 JSON documents.
#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    Hello(String),
    HelloAck(String),
    /// `None` means the seed from the negotiated config.
    Reset(Option<u64>),
    Step(Vec<(u8, Vec<f32>)>),
    StepResult(StepResult),
    Error {
        code: i32,
        message: String,
    },
    Close,
}

impl Message {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::Hello(_) => MsgType::Hello,
            Message::HelloAck(_) => MsgType::HelloAck,
            Message::Reset(_) => MsgType::Reset,
            Message::Step(_) => MsgType::Step,
            Message::StepResult(_) => MsgType::StepResult,
            Message::Error { .. } => MsgType::Error,
            Message::Close => MsgType::Close,
        }
    }

    pub fn error(e: &Error) -> Message {
        Message::Error {
            code: e.code(),
            message: e.to_string(),
        }
    }

    pub fn to_frame(&self, env_id: u16) -> Frame {
        let mut w = Vec::new();
        match self {
            Message::Hello(doc) | Message::HelloAck(doc) => w.extend_from_slice(doc.as_bytes()),
            Message::Reset(seed) => {
                if let Some(s) = seed {
                    w.extend_from_slice(&s.to_le_bytes());
                }
            }
            Message::Step(actions) => {
                w.extend_from_slice(&(actions.len() as u16).to_le_bytes());
                for (kind, v) in actions {
                    w.push(*kind);
                    w.extend_from_slice(&(v.len() as u32).to_le_bytes());
                    for x in v {
                        w.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
            Message::StepResult(r) => {
                w.extend_from_slice(&(r.observations.len() as u16).to_le_bytes());
                for f in &r.observations {
                    encode_observations(f, &mut w);
                }
                w.extend_from_slice(&(r.rewards.len() as u16).to_le_bytes());
                for x in &r.rewards {
                    w.extend_from_slice(&x.to_le_bytes());
                }
                w.push(r.done as u8);
                w.extend_from_slice(&(r.info.len() as u32).to_le_bytes());
                w.extend_from_slice(r.info.as_bytes());
            }
            Message::Error { code, message } => {
                w.extend_from_slice(&code.to_le_bytes());
                w.extend_from_slice(message.as_bytes());
            }
            Message::Close => {}
        }
        Frame::new(env_id, self.msg_type(), w)
    }

    pub fn from_frame(frame: &Frame) -> Result<Message> {
        let kind = frame
            .kind()
            .ok_or_else(|| Error::Protocol(format!("unknown message type {}", frame.msg_type)))?;
        let mut r = Reader::new(&frame.payload);
        let msg = match kind {
            MsgType::Hello => Message::Hello(r.rest_utf8()?),
            MsgType::HelloAck => Message::HelloAck(r.rest_utf8()?),
            MsgType::Reset => match frame.payload.len() {
                0 => Message::Reset(None),
                8 => Message::Reset(Some(r.u64()?)),
                n => return Err(Error::Protocol(format!("RESET payload must be 0 or 8 bytes, got {n}"))),
            },
            MsgType::Step => {
                let n = r.u16()? as usize;
                let mut actions = Vec::with_capacity(n);
                for _ in 0..n {
                    let kind = r.u8()?;
                    let len = r.u32()? as usize;
                    let bytes = r.take(len.checked_mul(4).ok_or_else(overflow)?)?;
                    let v = bytes
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                        .collect();
                    actions.push((kind, v));
                }
                Message::Step(actions)
            }
            MsgType::StepResult => {
                let n = r.u16()? as usize;
                let mut observations = Vec::with_capacity(n);
                for _ in 0..n {
                    observations.push(decode_observations(&mut r)?);
                }
                let n = r.u16()? as usize;
                let mut rewards = Vec::with_capacity(n);
                for _ in 0..n {
                    rewards.push(r.f32()?);
                }
                let done = match r.u8()? {
                    0 => false,
                    1 => true,
                    b => return Err(Error::Protocol(format!("done flag must be 0 or 1, got {b}"))),
                };
                let len = r.u32()? as usize;
                let info = utf8(r.take(len)?)?;
                Message::StepResult(StepResult {
                    observations,
                    rewards,
                    done,
                    info,
                })
            }
            MsgType::Error => Message::Error {
                code: r.i32()?,
                message: r.rest_utf8()?,
            },
            MsgType::Close => Message::Close,
        };
        r.finish()?;
        Ok(msg)
    }
}

/// Appends a keyed observation frame: `u16 key count`, then per key the
/// tensor header and its row-major payload.
pub fn encode_observations(frame: &ObservationFrame, w: &mut Vec<u8>) {
    w.extend_from_slice(&(frame.len() as u16).to_le_bytes());
    for (key, t) in frame.iter() {
        w.extend_from_slice(&(key.len() as u16).to_le_bytes());
        w.extend_from_slice(key.as_bytes());
        w.push(t.dtype() as u8);
        w.push(t.shape.len() as u8);
        for d in &t.shape {
            w.extend_from_slice(&d.to_le_bytes());
        }
        w.extend_from_slice(&t.payload());
    }
}

pub fn decode_observations(r: &mut Reader) -> Result<ObservationFrame> {
    let keys = r.u16()? as usize;
    let mut frame = ObservationFrame::new();
    for _ in 0..keys {
        let len = r.u16()? as usize;
        let key = utf8(r.take(len)?)?;
        let dtype = DType::from_code(r.u8()?)?;
        let ndim = r.u8()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u32()?);
        }
        let count = shape
            .iter()
            .try_fold(dtype.size(), |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(overflow)?;
        let t = Tensor::from_payload(dtype, shape, r.take(count)?)?;
        if frame.get(&key).is_some() {
            return Err(Error::Protocol(format!("duplicate observation key {key:?}")));
        }
        frame.insert(key, t);
    }
    Ok(frame)
}

fn overflow() -> Error {
    Error::Protocol("size overflow".into())
}

fn utf8(b: &[u8]) -> Result<String> {
    String::from_utf8(b.to_vec()).map_err(|_| Error::Protocol("invalid UTF-8".into()))
}

/// Bounds-checked little-endian cursor.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Protocol(format!(
                "payload truncated: wanted {n} bytes at offset {}, have {}",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        self.array().map(u16::from_le_bytes)
    }

    pub fn u32(&mut self) -> Result<u32> {
        self.array().map(u32::from_le_bytes)
    }

    pub fn i32(&mut self) -> Result<i32> {
        self.array().map(i32::from_le_bytes)
    }

    pub fn u64(&mut self) -> Result<u64> {
        self.array().map(u64::from_le_bytes)
    }

    pub fn f32(&mut self) -> Result<f32> {
        self.array().map(f32::from_le_bytes)
    }

    pub fn rest_utf8(&mut self) -> Result<String> {
        let rest = self.take(self.buf.len() - self.pos)?;
        utf8(rest)
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Protocol(format!(
                "{} trailing payload bytes",
                self.buf.len() - self.pos
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_frame_bytes() {
        let b = encode_frame(&Message::Close.to_frame(0)).unwrap();
        assert_eq!(b, [0x03, 0, 0, 0, 0, 0, 0x06]);
    }

    #[test]
    fn truncation_is_incomplete() {
        let b = encode_frame(&Message::Reset(Some(7)).to_frame(3)).unwrap();
        for cut in 0..b.len() {
            assert!(matches!(try_decode(&b[..cut]).unwrap(), Decoded::Incomplete { .. }));
        }
        assert!(decode_frame(&b[..b.len() - 1]).is_err());
    }

    #[test]
    fn length_mismatch_and_oversize() {
        let mut b = encode_frame(&Message::Close.to_frame(1)).unwrap();
        b.push(0);
        assert!(matches!(decode_frame(&b), Err(Error::Protocol(_))));
        let huge = ((MAX_PAYLOAD + 4) as u32).to_le_bytes();
        assert!(matches!(
            try_decode(&[huge[0], huge[1], huge[2], huge[3], 0, 0, 0]),
            Err(Error::Protocol(_))
        ));
        assert!(try_decode(&[2, 0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn step_result_round_trip() {
        let mut f = ObservationFrame::new();
        f.insert("vision", Tensor::f32(vec![2, 3], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]));
        let m = Message::StepResult(StepResult {
            observations: vec![f],
            rewards: vec![0.5],
            done: true,
            info: "{}".into(),
        });
        let bytes = encode_frame(&m.to_frame(9)).unwrap();
        let back = Message::from_frame(&decode_frame(&bytes).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn unknown_type_is_reported() {
        let f = Frame {
            env_id: 0,
            msg_type: 42,
            payload: vec![],
        };
        assert!(Message::from_frame(&f).is_err());
        assert_eq!(decode_frame(&encode_frame(&f).unwrap()).unwrap(), f);
    }
}
