//! Reference implementations written for clarity, not speed, plus seeded
//! generators for the inputs they are compared on. Nothing here calls the
//! function it checks.

pub mod analytics;
pub mod context;
pub mod events;
pub mod grammar;
pub mod peers;
pub mod sessions;
