//! JSON Lines persistence: a config header, one line per trial, and a
//! closing summary that marks the file complete.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::aggregate::StatsReport;
use super::config::ExperimentConfig;
use super::record::TrialRecord;
use crate::error::{invalid, Result};

/// Compact JSON with every float written to 17 significant digits.
struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(flatten)]
    inner: &'a T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub complete: bool,
    pub trials: u64,
    pub report: StatsReport,
}

/// One line of JSON, newline included.
pub fn to_line<T: Serialize>(kind: &'static str, value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter);
    Tagged { kind, inner: value }.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn config_line(config: &ExperimentConfig) -> Result<String> {
    to_line("config", config)
}

pub fn trial_line(record: &TrialRecord) -> Result<String> {
    to_line("trial", record)
}

pub fn summary_line(summary: &Summary) -> Result<String> {
    to_line("summary", summary)
}

#[derive(Deserialize)]
struct Kind {
    #[serde(rename = "type")]
    kind: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedFile {
    pub config: Option<ExperimentConfig>,
    pub records: Vec<TrialRecord>,
    pub summary: Option<Summary>,
    /// Length of the prefix made of complete, parseable lines.
    pub valid_bytes: u64,
}

/// Reads a results file. A final line that is cut short or fails to parse
/// is treated as an interrupted write and left out of `valid_bytes`; a bad
/// line anywhere else is an error.
pub fn read_jsonl(path: &Path) -> Result<ParsedFile> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut out = ParsedFile::default();
    let mut line = String::new();
    let mut line_no = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let complete = line.ends_with('\n');
        match parse_line(line.trim_end(), &mut out) {
            Ok(()) if complete => out.valid_bytes += read as u64,
            Ok(()) | Err(_) if reader.fill_buf()?.is_empty() => break,
            Ok(()) => unreachable!("only the last line can lack a newline"),
            Err(e) => return invalid(format!("{}: line {line_no}: {e}", path.display())),
        }
    }
    Ok(out)
}

fn parse_line(text: &str, out: &mut ParsedFile) -> Result<()> {
    let Kind { kind } = serde_json::from_str(text)?;
    match kind.as_str() {
        "config" => out.config = Some(serde_json::from_str(text)?),
        "trial" => out.records.push(serde_json::from_str(text)?),
        "summary" => out.summary = Some(serde_json::from_str(text)?),
        other => return invalid(format!("unknown record type {other:?}")),
    }
    Ok(())
}
