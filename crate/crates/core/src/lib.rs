pub mod exterior;
pub mod freealg;
pub mod grading;
pub mod support;
pub mod verify;
