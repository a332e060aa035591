//! Round logs: one CSV row per played round, preceded by `# key=value`
//! metadata lines that record everything needed to reproduce the run.

use std::io::Read;

use rb2_core::bandit::RoundRecord;
use rb2_core::logic::{ConstId, Schema};

use crate::{Error, Result};

pub const COLUMNS: [&str; 7] = ["t", "batch", "context_id", "chosen_arm", "reward", "regret_cum", "p_chosen"];

/// Joins multi-argument contexts.
pub const CONTEXT_SEPARATOR: char = ';';

#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub t: usize,
    pub batch: usize,
    pub context_id: String,
    pub chosen_arm: String,
    pub reward: bool,
    pub regret_cum: u64,
    pub p_chosen: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RoundLog {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<LogRow>,
}

impl RoundLog {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn regret(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.regret_cum).collect()
    }
}

pub fn context_id(schema: &Schema, context: &[ConstId]) -> String {
    let names: Vec<&str> = context.iter().map(|&c| schema.constant_name(c)).collect();
    names.join(&CONTEXT_SEPARATOR.to_string())
}

/// Renders the log. Metadata values must not contain newlines.
pub fn render_round_log(
    metadata: &[(String, String)],
    rounds: &[RoundRecord],
    schema: &Schema,
    arms: &[ConstId],
) -> Result<String> {
    let mut out = String::new();
    for (k, v) in metadata {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::Invalid(format!("metadata entry `{k}` cannot be written on one line")));
        }
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rounds {
        w.write_record([
            r.t.to_string(),
            r.batch.to_string(),
            context_id(schema, &r.context),
            schema.constant_name(arms[r.chosen_arm]).to_string(),
            u8::from(r.reward).to_string(),
            r.regret_cum.to_string(),
            format!("{:?}", r.p_chosen),
        ])?;
    }
    let body = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Invalid(e.to_string()))?);
    Ok(out)
}

pub fn parse_round_log(text: &str, file: &str) -> Result<RoundLog> {
    let mut metadata = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(entry) = line.strip_prefix('#') else {
            break;
        };
        body_start += line.len();
        if let Some((k, v)) = entry.trim().split_once('=') {
            metadata.push((k.trim().to_string(), v.trim_end_matches(['\r', '\n']).to_string()));
        }
    }
    let header_line = metadata.len() + 1;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body_start..].as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::parse(file, header_line, "missing CSV header"));
    }
    if headers.iter().ne(COLUMNS) {
        return Err(Error::parse(file, header_line, format!("expected columns {}", COLUMNS.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = header_line + i + 1;
        let bad = |what: &str| Error::parse(file, line, format!("bad {what}"));
        let field = |j: usize| rec.get(j).unwrap_or("");
        rows.push(LogRow {
            t: field(0).parse().map_err(|_| bad("t"))?,
            batch: field(1).parse().map_err(|_| bad("batch"))?,
            context_id: field(2).to_string(),
            chosen_arm: field(3).to_string(),
            reward: match field(4) {
                "0" => false,
                "1" => true,
                _ => return Err(bad("reward")),
            },
            regret_cum: field(5).parse().map_err(|_| bad("regret_cum"))?,
            p_chosen: field(6).parse().map_err(|_| bad("p_chosen"))?,
        });
    }
    Ok(RoundLog { metadata, rows })
}

pub fn read_round_log(path: &std::path::Path) -> Result<RoundLog> {
    let mut text = String::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(|e| Error::io(path, e))?;
    parse_round_log(&text, &path.display().to_string())
}
