//! Plain-text trace files: one non-negative integer per line, `0` for an idle
//! slot. Blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::model::{Item, RequestSequence};

pub fn parse_trace(text: &str) -> Result<RequestSequence> {
    let mut items = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let item: Item = line.parse().map_err(|e| Error::TraceParse {
            line: idx + 1,
            detail: format!("'{line}': {e}"),
        })?;
        items.push(item);
    }
    Ok(RequestSequence::new(items))
}

pub fn render_trace(sequence: &RequestSequence) -> String {
    let mut out = String::with_capacity(sequence.len() * 3);
    for item in sequence.items() {
        out.push_str(&item.to_string());
        out.push('\n');
    }
    out
}
