use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use walkmeet::seed::RNG_ALGORITHM;

/// Ordered `key=value` pairs describing one invocation.
#[derive(Debug, Default, Clone)]
pub struct Config(Vec<(&'static str, String)>);

impl Config {
    pub fn new(command: &str) -> Self {
        Self(vec![("command", command.to_string())])
    }

    pub fn set(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.0.push((key, value.to_string()));
        self
    }

    /// The comment line every CSV starts with.
    pub fn comment(&self) -> String {
        let mut line = format!("# walkmeet {} rng={}", env!("CARGO_PKG_VERSION"), RNG_ALGORITHM);
        for (key, value) in &self.0 {
            line.push(' ');
            line.push_str(key);
            line.push('=');
            line.push_str(value);
        }
        line
    }
}

/// A CSV document: comment line, header, rows.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(config: &Config, header: &str) -> Self {
        Self { text: format!("{}\n{header}\n", config.comment()) }
    }

    pub fn row(&mut self, row: &str) {
        self.text.push_str(row);
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Joins numbers into the `a,b,c` form used in config lines.
pub fn list<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}
