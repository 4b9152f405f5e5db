//! Slow, obviously-correct reference implementations for cross-checking the
//! optimised code, plus fixture builders shared by several test targets.

pub mod agreement;
pub mod fixtures;
pub mod metrics;
pub mod ward;
