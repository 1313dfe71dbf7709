//! Structured-output parsing for subroutine responses.

use serde::de::DeserializeOwned;

/// Parses `raw` as `T`. The whole response is tried first; failing that, the
/// first balanced `{...}` substring (models like to wrap JSON in prose or
/// code fences).
pub fn parse_structured<T: DeserializeOwned>(raw: &str) -> Result<T, String> {
    let strict_err = match serde_json::from_str::<T>(raw.trim()) {
        Ok(v) => return Ok(v),
        Err(e) => e.to_string(),
    };
    let Some(candidate) = first_json_object(raw) else {
        return Err(format!("no JSON object in response ({strict_err})"));
    };
    serde_json::from_str::<T>(candidate).map_err(|e| e.to_string())
}

/// The first brace-balanced object in `text`, honouring string literals.
pub fn first_json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}
