//! Deterministic artifact writing: CSV tables and JSON records with a
//! stable layout, plus the config fingerprint that every table row carries
//! so results can be traced back to their inputs.

use std::fmt::Write as _;
use std::path::Path;

/// FNV-1a over the canonical JSON of the run inputs. Stable across runs
/// and platforms, unlike the std hasher's keyed variants.
pub fn fingerprint(parts: &[&str]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{h:016x}")
}

/// Fixed-notation float for human-facing tables.
pub fn fmt_table(v: f64) -> String {
    format!("{v:.6}")
}

/// Full-precision scientific notation for transcripts and curves.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.12e}")
}

/// A CSV table accumulated in memory and written atomically, one row per
/// line, comma-separated, no quoting (field content is controlled).
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: Vec<S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width {} != header width {}",
            row.len(),
            self.header.len()
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.render())
            .map_err(|e| anyhow::anyhow!("failed to write {}: {e}", path.display()))
    }
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| anyhow::anyhow!("failed to serialize {}: {e}", path.display()))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| anyhow::anyhow!("failed to write {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_input_sensitive() {
        let a = fingerprint(&["config", "catalog"]);
        assert_eq!(a, fingerprint(&["config", "catalog"]));
        assert_ne!(a, fingerprint(&["config", "catalog2"]));
        assert_ne!(a, fingerprint(&["configcatalog"])); // separator matters
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(vec!["a", "b"]);
        t.push_row(vec!["1", "2"]);
        assert_eq!(t.render(), "a,b\n1,2\n");
    }
}
