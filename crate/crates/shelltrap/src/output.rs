//! Deterministic output emission: CSV tables and JSON documents with a
//! metadata preamble, written atomically (temp file + rename) so no partial
//! file survives an error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Metadata recorded at the top of every artifact. The conventions lines make
/// the sign/normalization choices explicit for downstream analysis.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub subcommand: String,
    pub seed: u64,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            seed,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# shelltrap {}", env!("CARGO_PKG_VERSION")),
            format!("# subcommand: {}", self.subcommand),
            format!("# seed: {}", self.seed),
            "# convention: one-sided power spectral densities".to_string(),
            "# convention: detuning hbar*Delta = hbar*omega_rf - g_F*mu_B*B0".to_string(),
        ];
        for (k, v) in &self.extra {
            out.push(format!("# {k}: {v}"));
        }
        out
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = PathBuf::from(path);
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    name.push_str(".tmp");
    tmp.set_file_name(name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Write a CSV table with the metadata preamble. `rows` are preformatted
/// cells; formatting floats once at the call site keeps reruns bit-identical.
pub fn write_csv(
    path: &Path,
    metadata: &Metadata,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut content = String::new();
    for line in metadata.lines() {
        content.push_str(&line);
        content.push('\n');
    }
    content.push_str(&columns.join(","));
    content.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        content.push_str(&row.join(","));
        content.push('\n');
    }
    write_atomic(path, &content)
}

/// Write a JSON document with the metadata embedded under "_meta".
pub fn write_json(path: &Path, metadata: &Metadata, value: serde_json::Value) -> Result<()> {
    let mut meta = serde_json::Map::new();
    meta.insert(
        "version".into(),
        serde_json::Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    meta.insert(
        "subcommand".into(),
        serde_json::Value::String(metadata.subcommand.clone()),
    );
    meta.insert("seed".into(), serde_json::Value::from(metadata.seed));
    meta.insert(
        "conventions".into(),
        serde_json::Value::from(vec![
            "one-sided power spectral densities",
            "detuning hbar*Delta = hbar*omega_rf - g_F*mu_B*B0",
        ]),
    );
    for (k, v) in &metadata.extra {
        meta.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    let doc = match value {
        serde_json::Value::Object(mut obj) => {
            obj.insert("_meta".into(), serde_json::Value::Object(meta));
            serde_json::Value::Object(obj)
        }
        other => serde_json::json!({ "_meta": meta, "data": other }),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    write_atomic(path, &text)
}

/// Fixed float formatting used in all tables: 9 significant digits,
/// scientific notation, locale-independent.
pub fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_atomicity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let meta = Metadata::new("characterize", 7).with("grid", "3 points");
        write_csv(
            &path,
            &meta,
            &["a", "b"],
            &[vec![fmt(1.0), fmt(2.5)], vec![fmt(-3.0), fmt(4e-6)]],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# shelltrap "));
        assert!(text.contains("# seed: 7"));
        assert!(text.contains("# grid: 3 points"));
        assert!(text.contains("one-sided"));
        assert!(text.contains("\na,b\n"));
        assert_eq!(text.lines().count(), 5 + 1 + 2 + 1);
        // No temp file left behind.
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn json_embeds_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_json(
            &path,
            &Metadata::new("estimate", 1),
            serde_json::json!({"mu_hz": 404.0}),
        )
        .unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc["_meta"]["subcommand"], "estimate");
        assert_eq!(doc["mu_hz"], 404.0);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let meta = Metadata::new("sweep", 3);
        let rows = vec![vec![fmt(0.1 + 0.2), fmt(1e-17)]];
        write_csv(&a, &meta, &["x", "y"], &rows).unwrap();
        write_csv(&b, &meta, &["x", "y"], &rows).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}
