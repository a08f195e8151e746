//! Structured educational conversations: speech-act grammars, threaded
//! conversation trees, forum sessions and contextual views, participation
//! analytics, a peer-help directory, and the event log everything replays
//! from.

pub mod analytics;
pub mod conversation;
pub mod corpus;
pub mod events;
pub mod forum;
pub mod grammar;
pub mod ids;
pub mod peers;
pub mod protocol;
pub mod world;

pub use conversation::{ChannelMode, ConversationTree, Intervention, Post};
pub use events::{Event, EventLog, EventRecord, ViewMode};
pub use grammar::{load_grammar, ActGrammar, ActRef, Verdict};
pub use ids::{ChannelId, InterventionId, ObjectId, UserId};
pub use world::{replay, state_hash, World};
