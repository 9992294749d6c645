//! Command implementations and the read-only query service behind the
//! `tableguard` binary.

pub mod bench;
pub mod commands;
pub mod report;
pub mod service;

use std::path::PathBuf;

use tableguard_core::{Error, Gazetteer};

pub const GAZETTEER_ENV: &str = "TABLEGUARD_GAZETTEER";

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_POLICY_GAP: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// Process exit code for a library error.
pub fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::PolicyGap { .. } => EXIT_POLICY_GAP,
        Error::Io { .. } | Error::Parse { .. } | Error::Json(_) | Error::DuplicateName { .. } => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

/// Path named by `TABLEGUARD_GAZETTEER`, if set and non-empty.
pub fn gazetteer_override() -> Option<PathBuf> {
    std::env::var_os(GAZETTEER_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// The override gazetteer when configured, otherwise the bundled one.
pub fn load_gazetteer() -> Result<Gazetteer, Error> {
    match gazetteer_override() {
        Some(path) => Gazetteer::load(&path),
        None => Ok(Gazetteer::bundled()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tableguard_core::EntityKind;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::policy_gap(&EntityKind::WeekdayName)), EXIT_POLICY_GAP);
        let io = Error::io("x", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(exit_code(&io.at("loading")), EXIT_IO);
        assert_eq!(exit_code(&Error::InvalidParams("x".into())), EXIT_FAILURE);
    }
}
