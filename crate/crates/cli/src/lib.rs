//! Parsing, commands and the identity suite behind the `fedosov` binary.

pub mod commands;
pub mod expr;
pub mod problem;
pub mod verify;
