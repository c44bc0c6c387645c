//! Bundled reference pairs and tableau files.

use std::path::Path;

use crate::exact::parse_tableau;

use super::{check_minimum_orders, BuildError, EmbeddedMethod};

const BS5: &str = include_str!("../../data/bs5_4.rkt");
const PD8: &str = include_str!("../../data/pd8_7.rkt");

pub fn reference_names() -> &'static [&'static str] {
    &["bs5(4)", "pd8(7)"]
}

fn bundled(name: &str) -> Option<(&'static str, &'static str)> {
    match name.to_ascii_lowercase().as_str() {
        "bs5(4)" | "bs5" | "bs54" => Some(("bs5(4)", BS5)),
        "pd8(7)" | "pd8" | "pd87" => Some(("pd8(7)", PD8)),
        _ => None,
    }
}

fn from_text(origin: &str, text: &str) -> Result<EmbeddedMethod, BuildError> {
    let tableau = parse_tableau(text).map_err(|source| BuildError::Format {
        path: origin.to_string(),
        source,
    })?;
    check_minimum_orders(&tableau)?;
    Ok(EmbeddedMethod::from_tableau(tableau))
}

/// Loads a bundled pair by name, or a tableau file when `name` is a path to
/// an existing file. Orders are re-verified (to tolerance for decimal
/// coefficients).
pub fn load_reference_pair(name: &str) -> Result<EmbeddedMethod, BuildError> {
    if let Some((canonical, text)) = bundled(name) {
        return from_text(canonical, text);
    }
    let path = Path::new(name);
    if path.is_file() {
        return load_tableau_file(path);
    }
    Err(BuildError::UnknownReference(name.to_string()))
}

pub fn load_tableau_file(path: &Path) -> Result<EmbeddedMethod, BuildError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| BuildError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    from_text(&shown, &text)
}
