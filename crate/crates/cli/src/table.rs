//! Comma-delimited tables with a header row.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns);
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Optional number as a table field; `None` is an empty field.
pub fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Parsed table addressed by column name.
pub struct Rows {
    index: HashMap<String, usize>,
    pub rows: Vec<Vec<String>>,
}

impl Rows {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| anyhow!("empty table"))?;
        let index: HashMap<String, usize> = header
            .split(',')
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
            if fields.len() != index.len() {
                bail!("line {}: expected {} fields, found {}", i + 2, index.len(), fields.len());
            }
            rows.push(fields);
        }
        Ok(Self { index, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("table {}", path.display()))
    }

    pub fn col(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| anyhow!("missing column {name:?}"))
    }

    pub fn get<'a>(&self, row: &'a [String], name: &str) -> Result<&'a str> {
        Ok(&row[self.col(name)?])
    }

    pub fn num<T: std::str::FromStr>(&self, row: &[String], name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(row, name)?;
        v.parse().map_err(|e| anyhow!("column {name}: bad value {v:?}: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.row(vec!["1".into(), opt(Some(2.5))]);
        t.row(vec!["x".into(), opt::<f64>(None)]);
        assert_eq!(t.as_str(), "a,b\n1,2.5\nx,\n");
        let r = Rows::parse(t.as_str()).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.num::<f64>(&r.rows[0], "b").unwrap(), 2.5);
        assert_eq!(r.get(&r.rows[1], "b").unwrap(), "");
        assert!(r.col("c").is_err());
        assert!(Rows::parse("a,b\n1\n").is_err());
    }
}
