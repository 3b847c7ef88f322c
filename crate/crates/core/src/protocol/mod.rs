//! Prover devices, session state machines, transports and adversaries.

mod adversary;
mod device;
mod message;
mod session;
mod transcript;
mod transport;

pub use adversary::{adversary_impostor, adversary_replay, ReplayProver};
pub use device::{Architecture, ProverDevice, ProverSession, SessionMode};
pub use message::{Message, MessageKind, ACK_BYTE, MAX_FRAME};
pub use session::{run_mutual, run_session, run_unilateral, ProverEndpoint, RoundInput, Server, SessionReport};
pub use transcript::{Direction, Transcript};
pub use transport::{FaultyTransport, InProcessTransport, Transport};
