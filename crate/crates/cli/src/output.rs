use std::fmt;
use std::path::PathBuf;

use pspin::correlators::{TableJson, TauCorrelator};

use crate::{Format, OutputArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(pspin::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(pspin::Error::Usage(_) | pspin::Error::Domain(_)) => 2,
            CliError::Lib(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<pspin::Error> for CliError {
    fn from(e: pspin::Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn extension(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Text => "txt",
    }
}

/// Writes `body` to --output, to the output directory, or to stdout; prints
/// `summary` to stdout whenever the body went to a file.
pub fn emit(out: &OutputArgs, stem: &str, body: &str, summary: &str) -> CliResult<()> {
    let path: Option<PathBuf> = match (&out.output, &out.output_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{stem}.{}", extension(out.format)))),
        (None, None) => None,
    };
    match path {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            print!("{summary}");
            println!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

pub fn json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn render_table(format: Format, table: &TableJson, entries: &[TauCorrelator]) -> CliResult<String> {
    match format {
        Format::Json => json(table),
        Format::Csv => {
            let join = |v: Vec<String>| v.join(";");
            let rows: Vec<Vec<String>> = table
                .entries
                .iter()
                .map(|e| {
                    vec![
                        table.genus.to_string(),
                        join(e.m.iter().map(|x| x.to_string()).collect()),
                        join(e.j.iter().map(|x| x.to_string()).collect()),
                        e.num.clone(),
                        e.den.clone(),
                    ]
                })
                .collect();
            csv_rows(&["genus", "m", "j", "num", "den"], &rows)
        }
        Format::Text => {
            let p = match &table.p {
                serde_json::Value::String(s) => s.clone(),
                v => v.to_string(),
            };
            let mut s = format!("p={} genus={} points={} ({} entries)\n", p, table.genus, table.points, entries.len());
            for t in entries {
                s.push_str(&format!("{t}\n"));
            }
            Ok(s)
        }
    }
}
