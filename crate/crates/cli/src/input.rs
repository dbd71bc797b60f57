//! Reading problem and decision files.

use std::path::Path;

use it2fgp::dialogue::DecisionScript;
use it2fgp::fixtures::fixture_json;
use it2fgp::sigmodel::{validate_program, FuzzyProgram, ValidationReport};

use crate::CliError;

/// Reads a program from a path. A bundled fixture name (with or without
/// `.json`) is accepted when no such file exists.
pub fn read_program_text(path: &Path) -> Result<String, CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) => {
            let stem = path.to_str().map(|s| s.trim_end_matches(".json"));
            match stem.and_then(fixture_json) {
                Some(text) if !path.exists() => Ok(text.to_string()),
                _ => Err(CliError::BadInput(format!("{}: {e}", path.display()))),
            }
        }
    }
}

pub fn parse_program(text: &str, origin: &str) -> Result<FuzzyProgram, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::BadInput(format!("{origin}: {e}")))
}

/// Parses and validates; validation errors are fatal.
pub fn load_program(path: &Path, strict: bool) -> Result<(FuzzyProgram, ValidationReport), CliError> {
    let origin = path.display().to_string();
    let p = parse_program(&read_program_text(path)?, &origin)?;
    let report = validate_program(&p, strict);
    if !report.is_ok() {
        let msgs: Vec<String> = report.errors.iter().map(|i| format!("{}: {}", i.location, i.message)).collect();
        return Err(CliError::BadInput(format!("{origin}: invalid program\n  {}", msgs.join("\n  "))));
    }
    Ok((p, report))
}

pub fn load_decisions(path: &Path) -> Result<DecisionScript, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

/// [`load_program`], logging the warnings.
pub fn load_program_logged(path: &Path, strict: bool) -> Result<FuzzyProgram, CliError> {
    let (p, report) = load_program(path, strict)?;
    for w in &report.warnings {
        tracing::warn!(location = %w.location, "{}", w.message);
    }
    Ok(p)
}
