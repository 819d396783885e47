//! Message framing, transports and the transcript-keeping session.
//!
//! A frame is a 4-byte little-endian payload length, a 1-byte tag and the
//! payload. Both parties hash every frame they send or receive, in order,
//! into a SHA-256 transcript.

use std::io::{BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{CheckKind, Error, Phase, ProtocolAbort, Result};
use crate::field::FieldElem;

pub const MAX_FRAME: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Tag {
    Hello = 1,
    CommitDelta = 2,
    Open = 3,
    Chal = 4,
    MulProof = 5,
    RomSelect = 6,
    IndexMap = 7,
    AssignCodes = 8,
    Checkpoint = 9,
    Verdict = 10,
    Abort = 11,
}

impl Tag {
    pub fn from_byte(b: u8) -> Option<Tag> {
        use Tag::*;
        Some(match b {
            1 => Hello,
            2 => CommitDelta,
            3 => Open,
            4 => Chal,
            5 => MulProof,
            6 => RomSelect,
            7 => IndexMap,
            8 => AssignCodes,
            9 => Checkpoint,
            10 => Verdict,
            11 => Abort,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub tag: Tag,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(tag: Tag, payload: Vec<u8>) -> Self {
        Self { tag, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.push(self.tag as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 5 {
            return Err("short frame".into());
        }
        let len = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
        if bytes.len() != 5 + len {
            return Err(format!("length field {len} disagrees with frame size {}", bytes.len() - 5));
        }
        let tag = Tag::from_byte(bytes[4]).ok_or_else(|| format!("unknown tag {}", bytes[4]))?;
        Ok(Self { tag, payload: bytes[5..].to_vec() })
    }
}

pub fn pack(elems: &[FieldElem]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * elems.len());
    for e in elems {
        out.extend_from_slice(&e.to_le_bytes());
    }
    out
}

pub fn unpack(bytes: &[u8]) -> Option<Vec<FieldElem>> {
    if bytes.len() % 16 != 0 {
        return None;
    }
    Some(bytes.chunks_exact(16).map(|c| FieldElem::from_le_bytes(c.try_into().expect("16 bytes"))).collect())
}

/// A reliable, ordered byte-frame transport.
pub trait Channel: Send {
    fn send(&mut self, frame: Vec<u8>) -> Result<()>;
    fn recv(&mut self) -> Result<Vec<u8>>;
    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// One end of an in-process channel pair.
pub struct Duplex {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

pub fn duplex() -> (Duplex, Duplex) {
    let (atx, brx) = channel();
    let (btx, arx) = channel();
    let timeout = Duration::from_secs(600);
    (Duplex { tx: atx, rx: arx, timeout }, Duplex { tx: btx, rx: brx, timeout })
}

impl Channel for Duplex {
    fn send(&mut self, frame: Vec<u8>) -> Result<()> {
        self.tx.send(frame).map_err(|_| Error::Transport("peer hung up".into()))
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        self.rx.recv_timeout(self.timeout).map_err(|e| Error::Transport(format!("receive failed: {e}")))
    }
}

pub struct TcpChannel {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpChannel {
    pub fn new(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        let r = stream.try_clone()?;
        Ok(Self { reader: BufReader::with_capacity(1 << 16, r), writer: BufWriter::with_capacity(1 << 16, stream) })
    }
}

impl Channel for TcpChannel {
    fn send(&mut self, frame: Vec<u8>) -> Result<()> {
        self.writer.write_all(&frame).map_err(|e| Error::Transport(e.to_string()))
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        self.flush()?;
        let t = |e: std::io::Error| Error::Transport(e.to_string());
        let mut head = [0u8; 5];
        self.reader.read_exact(&mut head).map_err(t)?;
        let len = u32::from_le_bytes(head[..4].try_into().expect("4 bytes")) as usize;
        if len > MAX_FRAME {
            return Err(Error::Transport(format!("frame of {len} bytes exceeds limit")));
        }
        let mut buf = vec![0u8; 5 + len];
        buf[..5].copy_from_slice(&head);
        self.reader.read_exact(&mut buf[5..]).map_err(t)?;
        Ok(buf)
    }

    fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::Transport(e.to_string()))
    }
}

/// Flips one payload byte of the `frame`-th outgoing frame.
pub struct Tamper<C> {
    inner: C,
    sent: usize,
    frame: usize,
    byte: usize,
}

impl<C: Channel> Tamper<C> {
    pub fn new(inner: C, frame: usize, byte: usize) -> Self {
        Self { inner, sent: 0, frame, byte }
    }
}

impl<C: Channel> Channel for Tamper<C> {
    fn send(&mut self, mut frame: Vec<u8>) -> Result<()> {
        if self.sent == self.frame && frame.len() > 5 {
            let i = 5 + self.byte % (frame.len() - 5);
            frame[i] ^= 0x01;
        }
        self.sent += 1;
        self.inner.send(frame)
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        self.inner.recv()
    }

    fn flush(&mut self) -> Result<()> {
        self.inner.flush()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Prover,
    Verifier,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Traffic {
    pub frames_sent: u64,
    pub frames_received: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

/// Transport plus transcript. Received frames may optionally be recorded.
pub struct Session {
    role: Role,
    chan: Box<dyn Channel>,
    transcript: Sha256,
    traffic: Traffic,
    phase: Phase,
    record: Option<Vec<(Phase, Frame)>>,
}

impl Session {
    pub fn new(role: Role, chan: Box<dyn Channel>) -> Self {
        Self { role, chan, transcript: Sha256::new(), traffic: Traffic::default(), phase: Phase::Hello, record: None }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, p: Phase) {
        self.phase = p;
    }

    pub fn traffic(&self) -> Traffic {
        self.traffic
    }

    /// Keep a copy of every received frame.
    pub fn start_recording(&mut self) {
        self.record = Some(Vec::new());
    }

    pub fn recorded(&self) -> &[(Phase, Frame)] {
        self.record.as_deref().unwrap_or(&[])
    }

    pub fn take_recording(&mut self) -> Vec<(Phase, Frame)> {
        self.record.take().unwrap_or_default()
    }

    pub fn digest(&self) -> [u8; 32] {
        self.transcript.clone().finalize().into()
    }

    pub fn abort(&self, kind: CheckKind, reason: impl Into<String>) -> Error {
        Error::abort(self.phase, kind, reason)
    }

    pub fn send(&mut self, tag: Tag, payload: Vec<u8>) -> Result<()> {
        let bytes = Frame::new(tag, payload).encode();
        self.transcript.update(&bytes);
        self.traffic.frames_sent += 1;
        self.traffic.bytes_sent += bytes.len() as u64;
        self.chan.send(bytes)
    }

    /// Receive the next frame, which must carry `tag`. A peer abort is
    /// surfaced as an error.
    pub fn recv(&mut self, tag: Tag) -> Result<Vec<u8>> {
        let bytes = self.chan.recv()?;
        self.transcript.update(&bytes);
        self.traffic.frames_received += 1;
        self.traffic.bytes_received += bytes.len() as u64;
        let frame = Frame::decode(&bytes).map_err(|e| self.abort(CheckKind::Framing, e))?;
        if let Some(r) = &mut self.record {
            r.push((self.phase, frame.clone()));
        }
        if frame.tag == Tag::Abort {
            return Err(Error::Abort(decode_abort(&frame.payload)));
        }
        if frame.tag != tag {
            return Err(self.abort(CheckKind::Framing, format!("expected {tag:?}, got {:?}", frame.tag)));
        }
        Ok(frame.payload)
    }

    /// Receive a frame of exactly `n` packed field elements.
    pub fn recv_elems(&mut self, tag: Tag, n: usize) -> Result<Vec<FieldElem>> {
        let p = self.recv(tag)?;
        match unpack(&p) {
            Some(v) if v.len() == n => Ok(v),
            _ => Err(self.abort(CheckKind::Framing, format!("{tag:?}: expected {n} elements, got {} bytes", p.len()))),
        }
    }

    pub fn send_elems(&mut self, tag: Tag, elems: &[FieldElem]) -> Result<()> {
        self.send(tag, pack(elems))
    }

    /// Tell the peer why we stopped. Delivery failures are ignored.
    pub fn send_abort(&mut self, a: &ProtocolAbort) {
        let _ = self.send(Tag::Abort, encode_abort(a));
        let _ = self.chan.flush();
    }

    pub fn flush(&mut self) -> Result<()> {
        self.chan.flush()
    }
}

fn kind_byte(k: CheckKind) -> u8 {
    use CheckKind::*;
    [Open, Mul, Chal, PoPIdt, Res, IsFalse, Rom, Complement, IndexMap, Statement, Checkpoint, Framing, Peer, Witness]
        .iter()
        .position(|x| *x == k)
        .expect("listed") as u8
}

fn kind_from_byte(b: u8) -> CheckKind {
    use CheckKind::*;
    [Open, Mul, Chal, PoPIdt, Res, IsFalse, Rom, Complement, IndexMap, Statement, Checkpoint, Framing, Peer, Witness]
        .get(b as usize)
        .copied()
        .unwrap_or(Peer)
}

pub fn encode_abort(a: &ProtocolAbort) -> Vec<u8> {
    let mut out = vec![a.phase.to_byte(), kind_byte(a.kind)];
    out.extend_from_slice(a.reason.as_bytes());
    out
}

/// Decode a peer's abort. The kind is kept; an unparsable payload becomes
/// a `Peer` abort.
pub fn decode_abort(p: &[u8]) -> ProtocolAbort {
    match p {
        [ph, k, rest @ ..] => ProtocolAbort {
            phase: Phase::from_byte(*ph).unwrap_or(Phase::Hello),
            kind: kind_from_byte(*k),
            reason: format!("peer: {}", String::from_utf8_lossy(rest)),
        },
        _ => ProtocolAbort { phase: Phase::Hello, kind: CheckKind::Peer, reason: "peer aborted".into() },
    }
}
