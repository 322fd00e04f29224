use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = dixmier_core::json::to_string(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// CSV with a header row; the header is written even when `rows` is empty.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let text = if rows.is_empty() {
        format!("{}\n", header.join(","))
    } else {
        csv_string(rows)?
    };
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::SummaryRow;

    #[test]
    fn summary_header_matches_the_fixed_columns() {
        let row = SummaryRow {
            instance_id: 0,
            b: 2,
            dims: "2;3".into(),
            m: 1,
            n: 2,
            lower: 0.5,
            upper: 0.5,
            gap: 0.0,
            seconds: 0.25,
        };
        let text = csv_string(&[row]).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("instance_id,B,dims,m,n,lower,upper,gap,seconds")
        );
        assert_eq!(lines.next(), Some("0,2,2;3,1,2,0.5,0.5,0.0,0.25"));
    }
}
