//! Message delivery: an in-process bus with schedulers, and TCP sessions.

mod bus;
mod society;
pub mod tcp;

pub use bus::{AlreadyRegistered, Bus, Delivery, EndpointKind};
pub use society::{Scheduler, Society, SocietyError, DEFAULT_MAX_ROUNDS};
pub use tcp::{serve, PeerError, ServerHandle, TcpPeer};
