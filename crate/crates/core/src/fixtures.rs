//! Bundled example programs.

use crate::sigmodel::FuzzyProgram;

pub const FIXTURE_NAMES: [&str; 4] = ["example1_fuzzy", "example1_crisp", "example2_fuzzy", "example2_crisp"];

/// Raw JSON of a bundled fixture.
pub fn fixture_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "example1_fuzzy" => include_str!("../fixtures/example1_fuzzy.json"),
        "example1_crisp" => include_str!("../fixtures/example1_crisp.json"),
        "example2_fuzzy" => include_str!("../fixtures/example2_fuzzy.json"),
        "example2_crisp" => include_str!("../fixtures/example2_crisp.json"),
        _ => return None,
    })
}

pub fn fixture(name: &str) -> Option<FuzzyProgram> {
    fixture_json(name).map(|s| serde_json::from_str(s).expect("bundled fixture parses"))
}
