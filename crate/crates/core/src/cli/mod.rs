pub mod commands;
pub mod config;
pub mod outputs;
pub mod verify;
