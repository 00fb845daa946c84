//! Command-line front end for `qlevy-core`: file formats, subcommands and the
//! exit-code taxonomy.

pub mod cli;
pub mod commands;
pub mod format;

use qlevy_core::curves::CurveError;
use qlevy_core::{CalculusError, LimitsError, MeasureError, SpectralError};

pub use commands::{run, Exit};

/// `Type::Variant` of the innermost library error, or a generic class.
pub fn error_name(err: &anyhow::Error) -> String {
    fn variant<T: std::fmt::Debug>(ty: &str, e: &T) -> String {
        let dbg = format!("{e:?}");
        let end = dbg.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(dbg.len());
        format!("{ty}::{}", &dbg[..end])
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SpectralError>() {
            return variant("SpectralError", e);
        }
        if let Some(e) = cause.downcast_ref::<CalculusError>() {
            return variant("CalculusError", e);
        }
        if let Some(e) = cause.downcast_ref::<LimitsError>() {
            return variant("LimitsError", e);
        }
        if let Some(e) = cause.downcast_ref::<MeasureError>() {
            return variant("MeasureError", e);
        }
        if let Some(e) = cause.downcast_ref::<CurveError>() {
            return variant("CurveError", e);
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "ParseError".to_owned();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "IoError".to_owned();
        }
    }
    "ConfigError".to_owned()
}

/// Undecided separation anywhere in the chain is exit class 2; every other
/// error is a hard failure.
pub fn error_exit(err: &anyhow::Error) -> Exit {
    let undecided = |e: &SpectralError| matches!(e, SpectralError::SeparationUndecided { .. });
    for cause in err.chain() {
        let hit = match (cause.downcast_ref::<SpectralError>(), cause.downcast_ref::<LimitsError>()) {
            (Some(e), _) => undecided(e),
            (_, Some(LimitsError::TripletFailed { source, .. } | LimitsError::LimitNotSeparated(source))) => {
                undecided(source)
            }
            (_, Some(_)) => false,
            _ => cause.downcast_ref::<CurveError>().is_some_and(|e| matches!(e, CurveError::Spectral(s) if undecided(s))),
        };
        if hit {
            return Exit::Undecided;
        }
    }
    Exit::Negative
}
