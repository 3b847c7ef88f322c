use std::collections::VecDeque;

use super::message::MAX_FRAME;
use super::transcript::Direction;
use crate::error::{Error, Result};

/// Reliable ordered byte channel between the two parties.
pub trait Transport {
    fn send(&mut self, dir: Direction, frame: Vec<u8>) -> Result<()>;
    fn recv(&mut self, dir: Direction) -> Result<Vec<u8>>;
}

#[derive(Debug, Default)]
pub struct InProcessTransport {
    to_prover: VecDeque<Vec<u8>>,
    to_server: VecDeque<Vec<u8>>,
}

impl InProcessTransport {
    pub fn new() -> Self {
        Self::default()
    }

    fn queue(&mut self, dir: Direction) -> &mut VecDeque<Vec<u8>> {
        match dir {
            Direction::ServerToProver => &mut self.to_prover,
            Direction::ProverToServer => &mut self.to_server,
        }
    }
}

impl Transport for InProcessTransport {
    fn send(&mut self, dir: Direction, frame: Vec<u8>) -> Result<()> {
        if frame.len() > MAX_FRAME + 3 {
            return Err(Error::Transport(format!("frame of {} bytes exceeds the cap", frame.len())));
        }
        self.queue(dir).push_back(frame);
        Ok(())
    }

    fn recv(&mut self, dir: Direction) -> Result<Vec<u8>> {
        self.queue(dir)
            .pop_front()
            .ok_or_else(|| Error::Transport(format!("nothing to receive on {}", dir.name())))
    }
}

/// Wraps a transport and injects one fault at the `n`-th send (0-based).
#[derive(Debug)]
pub struct FaultyTransport<T> {
    inner: T,
    sends: usize,
    fault_at: usize,
    fault: Fault,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fault {
    Drop,
    Fail,
    Corrupt,
}

impl<T: Transport> FaultyTransport<T> {
    /// Silently loses the `n`-th frame.
    pub fn dropping(inner: T, n: usize) -> Self {
        Self { inner, sends: 0, fault_at: n, fault: Fault::Drop }
    }

    /// Reports a link failure on the `n`-th send.
    pub fn failing(inner: T, n: usize) -> Self {
        Self { inner, sends: 0, fault_at: n, fault: Fault::Fail }
    }

    /// Flips the last byte of the `n`-th frame.
    pub fn corrupting(inner: T, n: usize) -> Self {
        Self { inner, sends: 0, fault_at: n, fault: Fault::Corrupt }
    }
}

impl<T: Transport> Transport for FaultyTransport<T> {
    fn send(&mut self, dir: Direction, mut frame: Vec<u8>) -> Result<()> {
        let n = self.sends;
        self.sends += 1;
        if n != self.fault_at {
            return self.inner.send(dir, frame);
        }
        match self.fault {
            Fault::Drop => Ok(()),
            Fault::Fail => Err(Error::Transport("injected link failure".into())),
            Fault::Corrupt => {
                if let Some(b) = frame.last_mut() {
                    *b ^= 0xff;
                }
                self.inner.send(dir, frame)
            }
        }
    }

    fn recv(&mut self, dir: Direction) -> Result<Vec<u8>> {
        self.inner.recv(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_per_direction() {
        let mut t = InProcessTransport::new();
        t.send(Direction::ServerToProver, vec![1]).unwrap();
        t.send(Direction::ServerToProver, vec![2]).unwrap();
        t.send(Direction::ProverToServer, vec![3]).unwrap();
        assert_eq!(t.recv(Direction::ServerToProver).unwrap(), vec![1]);
        assert_eq!(t.recv(Direction::ProverToServer).unwrap(), vec![3]);
        assert_eq!(t.recv(Direction::ServerToProver).unwrap(), vec![2]);
        assert!(t.recv(Direction::ServerToProver).is_err());
        assert!(t.send(Direction::ServerToProver, vec![0; MAX_FRAME + 4]).is_err());
    }

    #[test]
    fn injected_faults() {
        let mut t = FaultyTransport::dropping(InProcessTransport::new(), 1);
        t.send(Direction::ServerToProver, vec![1]).unwrap();
        t.send(Direction::ServerToProver, vec![2]).unwrap();
        assert_eq!(t.recv(Direction::ServerToProver).unwrap(), vec![1]);
        assert!(t.recv(Direction::ServerToProver).is_err());
        let mut t = FaultyTransport::failing(InProcessTransport::new(), 0);
        assert!(t.send(Direction::ProverToServer, vec![1]).is_err());
        let mut t = FaultyTransport::corrupting(InProcessTransport::new(), 0);
        t.send(Direction::ProverToServer, vec![1, 0x06]).unwrap();
        assert_eq!(t.recv(Direction::ProverToServer).unwrap(), vec![1, 0xf9]);
    }
}
