use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::commands::CliError;

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::internal)?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(CliError::io),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}").map_err(CliError::io)
        }
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::io)?;
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(row).map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

pub fn csv_to_stdout(header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(row).map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}
