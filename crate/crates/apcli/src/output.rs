use std::io;
use std::path::Path;

/// A CSV table with `# key=value` metadata lines above the header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, values: &[f64]) -> &mut Self {
        self.rows.push(values.iter().map(|v| num(*v)).collect());
        self
    }

    pub fn render(&self) -> io::Result<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render()?)
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}
