//! CSV result tables: `#` metadata lines, a header row, then one row per
//! grid index. Floats carry 12 significant digits.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

/// Metadata keys with this prefix summarize the rows and are recomputed on
/// every run.
pub const RESULT_PREFIX: &str = "result.";
pub const TIMESTAMP_KEY: &str = "timestamp";

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => sanitize(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// 12 significant digits in scientific notation; `NaN`, `inf`, `-inf`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.11e}")
    }
}

/// Keeps free text inside one CSV field.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' | '"' => ' ',
            c => c,
        })
        .collect()
}

/// A rendered table ready to be written.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    /// Rendered rows in index order, without trailing newline.
    pub rows: Vec<String>,
}

impl ResultTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={}\n", sanitize(v)));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("partial");
        fs::write(&tmp, self.render())?;
        fs::rename(&tmp, path)
    }
}

/// Metadata that identifies a run: everything except results and timestamp.
pub fn identity(metadata: &[(String, String)]) -> Vec<(String, String)> {
    metadata
        .iter()
        .filter(|(k, _)| k != TIMESTAMP_KEY && !k.starts_with(RESULT_PREFIX))
        .map(|(k, v)| (k.clone(), sanitize(v)))
        .collect()
}

/// Rows of an earlier run at the same path, keyed by index, when its
/// identifying metadata and header match; empty otherwise.
pub fn existing_rows(path: &Path, metadata: &[(String, String)], header: &[String]) -> BTreeMap<usize, String> {
    let Ok(text) = fs::read_to_string(path) else {
        return BTreeMap::new();
    };
    let mut meta = Vec::new();
    // a line without its newline was torn by an interrupted write
    let mut lines = text.split_inclusive('\n').filter_map(|l| l.strip_suffix('\n'));
    let mut head = None;
    for line in lines.by_ref() {
        match line.strip_prefix("# ") {
            Some(m) => {
                if let Some((k, v)) = m.split_once('=') {
                    meta.push((k.to_string(), v.to_string()));
                }
            }
            None => {
                head = Some(line);
                break;
            }
        }
    }
    if identity(&meta) != identity(metadata) || head != Some(header.join(",").as_str()) {
        return BTreeMap::new();
    }
    let width = header.len();
    let mut rows = BTreeMap::new();
    for line in lines {
        if line.split(',').count() != width {
            continue;
        }
        if let Some(Ok(i)) = line.split(',').next().map(str::parse::<usize>) {
            rows.insert(i, line.to_string());
        }
    }
    rows
}

/// Splits a rendered row back into fields.
pub fn fields(row: &str) -> Vec<&str> {
    row.split(',').collect()
}

/// Parses a rendered numeric field (NaN for anything else).
pub fn parse_number(field: &str) -> f64 {
    field.parse().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(format_number(-1.5e-7), "-1.50000000000e-7");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(parse_number(&format_number(0.1)), 0.1);
    }

    #[test]
    fn render_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let meta = vec![("task".to_string(), "x".to_string()), ("timestamp".to_string(), "1".to_string())];
        let header = vec!["index".to_string(), "v".to_string()];
        let t = ResultTable { metadata: meta.clone(), header: header.clone(), rows: vec!["0,1".into(), "1,2".into()] };
        t.write(&path).unwrap();
        assert!(fs::read_to_string(&path).unwrap().starts_with("# task=x\n# timestamp=1\nindex,v\n0,1\n"));
        let mut later = meta.clone();
        later[1].1 = "2".into();
        later.push(("result.fit".into(), "3".into()));
        assert_eq!(existing_rows(&path, &later, &header).len(), 2);
        later[0].1 = "y".into();
        assert!(existing_rows(&path, &later, &header).is_empty());
        fs::write(&path, "# task=x\nindex,v\n0,1\n1,").unwrap();
        assert_eq!(existing_rows(&path, &meta, &header).keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn text_stays_in_field() {
        assert_eq!(Cell::from("a,b\nc").render(), "a;b c");
    }
}
