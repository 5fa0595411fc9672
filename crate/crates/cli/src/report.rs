//! Command output in three renderings: human text, `key=value` blocks and
//! CSV. The two machine formats parse back into the same [`Report`].

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Csv,
    Kv,
}

/// 0 success, 1 a negative domain answer; usage and input errors (2) never
/// produce a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Negative,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Negative => 1,
        }
    }
}

/// One result row. Values are never empty; an empty cell means "absent".
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Item {
    pub fields: Vec<(String, String)>,
}

impl Item {
    pub fn new() -> Self {
        Item::default()
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        let mut value = value.to_string();
        if value.is_empty() {
            value = "-".into();
        }
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    /// The command line that produced the report.
    pub command: String,
    pub items: Vec<Item>,
    pub outcome: Outcome,
    /// Text for `--format human`.
    pub human: String,
}

/// Fields that hold wall-clock measurements.
pub const TIMING_KEYS: &[&str] = &["gen_ms", "prune_ms"];

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.human.clone(),
            Format::Kv => self.to_kv(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn to_kv(&self) -> String {
        let mut s = format!("command={}\nitems={}\n", self.command, self.items.len());
        for item in &self.items {
            s.push('\n');
            for (k, v) in &item.fields {
                s += &format!("{k}={v}\n");
            }
        }
        s
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for item in &self.items {
            for (k, _) in &item.fields {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }

    /// A `command` column followed by the union of item keys in first-seen
    /// order.
    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["command".to_string()];
        header.extend(cols.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for item in &self.items {
            let mut row = vec![self.command.clone()];
            row.extend(cols.iter().map(|c| item.get(c).unwrap_or("").to_string()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Same report with timing fields dropped, for comparing runs.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for item in &mut r.items {
            item.fields.retain(|(k, _)| !TIMING_KEYS.contains(&k.as_str()));
        }
        r.human = r
            .human
            .lines()
            .filter(|l| !l.starts_with("time"))
            .map(|l| format!("{l}\n"))
            .collect();
        r
    }
}

/// The machine-readable part of a report: what `to_kv`/`to_csv` encode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub command: String,
    pub items: Vec<Item>,
}

impl From<&Report> for Parsed {
    fn from(r: &Report) -> Self {
        Parsed {
            command: r.command.clone(),
            items: r.items.clone(),
        }
    }
}

impl Parsed {
    pub fn from_kv(text: &str) -> anyhow::Result<Self> {
        let mut blocks = text.split("\n\n");
        let head = blocks.next().context("empty report")?;
        let mut command = None;
        let mut count = None;
        for line in head.lines() {
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("bad line `{line}`"))?;
            match k {
                "command" => command = Some(v.to_string()),
                "items" => count = Some(usize::from_str(v)?),
                _ => bail!("unexpected header key `{k}`"),
            }
        }
        let mut items = Vec::new();
        for block in blocks {
            let mut item = Item::new();
            for line in block.lines().filter(|l| !l.is_empty()) {
                let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("bad line `{line}`"))?;
                item.fields.push((k.to_string(), v.to_string()));
            }
            items.push(item);
        }
        if count != Some(items.len()) {
            bail!("item count mismatch");
        }
        Ok(Parsed {
            command: command.context("missing command")?,
            items,
        })
    }

    pub fn from_csv(text: &str) -> anyhow::Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("command") {
            bail!("first column must be `command`");
        }
        let mut command = None;
        let mut items = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            command.get_or_insert_with(|| rec[0].to_string());
            let mut item = Item::new();
            for (k, v) in header.iter().zip(rec.iter()).skip(1) {
                if !v.is_empty() {
                    item.fields.push((k.clone(), v.to_string()));
                }
            }
            items.push(item);
        }
        Ok(Parsed {
            command: command.context("report has no rows")?,
            items,
        })
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Human => "human",
            Format::Csv => "csv",
            Format::Kv => "kv",
        })
    }
}
