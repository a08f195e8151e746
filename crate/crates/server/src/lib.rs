//! The dialogos protocol server: a pure frame handler, the sequencing hub
//! and a TCP front end.

pub mod hub;
pub mod net;
pub mod sim;

pub use hub::{broadcast_policy, handle_frame, Broadcast, ConnId, ConnectionState, Hub, Outcome};
pub use net::Server;
