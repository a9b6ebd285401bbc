//! Append-only journal: one canonical JSON record per line in
//! `journal.ndjson`, sequence numbers gap-free from 1.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::error::ArchiveError;
use crate::canonical;
use crate::clock::Timestamp;
use crate::schema::{LinkKind, SchemaRef, TaskTypeSchema};

pub const JOURNAL_FILE: &str = "journal.ndjson";

/// State change carried by one journal record. Entity timestamps are the
/// record's `ts`, so they are not repeated in the payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "payload", rename_all = "snake_case")]
pub enum Event {
    RegisterSchema(TaskTypeSchema),
    BeginInstance {
        id: String,
        schema: SchemaRef,
        title: String,
        actor: String,
    },
    BeginActivity {
        id: String,
        instance: String,
        category: String,
    },
    EndActivity {
        id: String,
    },
    CloseInstance {
        id: String,
    },
    RecordElement {
        id: String,
        instance: String,
        activity: String,
        category: String,
        author: String,
        body: String,
        #[serde(default)]
        attachments: Vec<String>,
        #[serde(default)]
        ds_targets: Vec<String>,
        #[serde(default)]
        rs_targets: Vec<String>,
        #[serde(default)]
        override_warning: bool,
    },
    LinkElements {
        from: String,
        to: String,
        kind: LinkKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Retract {
        id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
}

impl Event {
    pub fn tag(&self) -> &'static str {
        match self {
            Event::RegisterSchema(_) => "register_schema",
            Event::BeginInstance { .. } => "begin_instance",
            Event::BeginActivity { .. } => "begin_activity",
            Event::EndActivity { .. } => "end_activity",
            Event::CloseInstance { .. } => "close_instance",
            Event::RecordElement { .. } => "record_element",
            Event::LinkElements { .. } => "link_elements",
            Event::Retract { .. } => "retract",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub seq: u64,
    pub ts: Timestamp,
    #[serde(flatten)]
    pub event: Event,
}

impl JournalRecord {
    pub fn to_line(&self) -> String {
        canonical::to_line(self)
    }
}

#[derive(Debug)]
enum Sink {
    File(File),
    Memory(Vec<String>),
}

/// Write end of the journal.
#[derive(Debug)]
pub struct Journal {
    sink: Sink,
}

impl Journal {
    pub fn open_file(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            sink: Sink::File(file),
        })
    }

    pub fn memory() -> Self {
        Self {
            sink: Sink::Memory(Vec::new()),
        }
    }

    pub fn append(&mut self, record: &JournalRecord) -> io::Result<()> {
        let mut line = record.to_line();
        match &mut self.sink {
            Sink::File(f) => {
                line.push('\n');
                f.write_all(line.as_bytes())?;
                f.flush()
            }
            Sink::Memory(lines) => {
                lines.push(line);
                Ok(())
            }
        }
    }

    /// Lines held by an in-memory journal; `None` for file-backed journals.
    pub fn memory_lines(&self) -> Option<&[String]> {
        match &self.sink {
            Sink::Memory(lines) => Some(lines),
            Sink::File(_) => None,
        }
    }
}

pub fn journal_path(dir: &Path) -> PathBuf {
    dir.join(JOURNAL_FILE)
}

/// Reads and checks a journal file. A missing file is an empty journal.
pub fn read_journal(path: &Path) -> Result<Vec<JournalRecord>, ArchiveError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    parse_journal(&text)
}

/// Parses journal text, enforcing gap-free sequence numbers from 1.
///
/// A line that does not parse, or whose seq is not the next expected one,
/// is reported as corrupt at the expected seq; a seq that skips ahead is
/// reported as a gap naming the first missing seq.
pub fn parse_journal(text: &str) -> Result<Vec<JournalRecord>, ArchiveError> {
    let mut records = Vec::new();
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Ok(records);
    }
    for (i, line) in body.split('\n').enumerate() {
        let expected = i as u64 + 1;
        let record: JournalRecord =
            serde_json::from_str(line).map_err(|e| ArchiveError::CorruptJournal {
                seq: expected,
                reason: e.to_string(),
            })?;
        if record.seq > expected {
            return Err(ArchiveError::JournalGap { missing: expected });
        }
        if record.seq < expected {
            return Err(ArchiveError::CorruptJournal {
                seq: expected,
                reason: format!("found seq {} out of order", record.seq),
            });
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seq: u64) -> JournalRecord {
        JournalRecord {
            seq,
            ts: Timestamp::from_millis(1_704_067_200_000 + seq as i64),
            event: Event::EndActivity { id: format!("ai-{seq}") },
        }
    }

    #[test]
    fn record_line_has_sorted_keys() {
        let line = record(1).to_line();
        assert_eq!(
            line,
            r#"{"op":"end_activity","payload":{"id":"ai-1"},"seq":1,"ts":"2024-01-01T00:00:00.001Z"}"#
        );
        let back: JournalRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, record(1));
    }

    #[test]
    fn empty_text_is_empty_journal() {
        assert!(parse_journal("").unwrap().is_empty());
    }

    #[test]
    fn gap_names_missing_seq() {
        let text = [1, 2, 4]
            .iter()
            .map(|&s| record(s).to_line())
            .collect::<Vec<_>>()
            .join("\n");
        match parse_journal(&text) {
            Err(ArchiveError::JournalGap { missing }) => assert_eq!(missing, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn garbage_line_reports_first_bad_seq() {
        let text = format!("{}\n{{not json\n{}\n", record(1).to_line(), record(3).to_line());
        match parse_journal(&text) {
            Err(ArchiveError::CorruptJournal { seq, .. }) => assert_eq!(seq, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeated_seq_is_corrupt() {
        let text = format!("{}\n{}\n", record(1).to_line(), record(1).to_line());
        assert!(matches!(
            parse_journal(&text),
            Err(ArchiveError::CorruptJournal { seq: 2, .. })
        ));
    }
}
