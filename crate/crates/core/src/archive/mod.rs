//! Task instances, activity instances, information elements and the episodic
//! DS/RS edges among them, persisted as an append-only journal.
//!
//! All mutations go through one [`Archive`] (single writer). Every accepted
//! operation is validated against the current state, appended to the
//! journal, then applied. Readers take an immutable [`ArchiveState`]
//! snapshot with [`Archive::view`] and may query it from any thread.

mod error;
mod integrity;
pub mod journal;
mod model;
mod query;
mod state;

use std::fs;
use std::ops::Deref;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use error::{ArchiveError, ErrorClass};
pub use journal::{Event, JournalRecord};
pub use model::{
    ActivityInstance, ActivityStatus, EdgeKey, ElementDraft, EpisodicEdge, InformationElement,
    InstanceStatus, RecordedElement, TaskInstance,
};
pub use query::{ContextNode, ContextSubgraph, ProfileEntry, ProfileReport, Via};
pub use state::{ArchiveExport, ArchiveState};

use crate::clock::{ArchiveClock, Timestamp};
use crate::schema::{LinkKind, SchemaRef, TaskTypeSchema};
use journal::Journal;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArchiveOptions {
    /// Fixes id generation and switches to a logical clock, so the same
    /// operation sequence always yields the same journal.
    pub seed: Option<u64>,
}

impl ArchiveOptions {
    pub fn seeded(seed: u64) -> Self {
        Self { seed: Some(seed) }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    last_ts: Option<Timestamp>,
    state: ArchiveExport,
}

/// Writer handle over one archive.
#[derive(Debug)]
pub struct Archive {
    dir: Option<PathBuf>,
    journal: Journal,
    state: Arc<ArchiveState>,
    clock: ArchiveClock,
}

impl Archive {
    /// Opens (or creates) the archive stored in `dir`: loads the newest
    /// usable snapshot, then replays the journal past it.
    pub fn open(dir: impl AsRef<Path>, options: ArchiveOptions) -> Result<Self, ArchiveError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = journal::journal_path(dir);
        let records = journal::read_journal(&path)?;
        let last_seq = records.last().map_or(0, |r| r.seq);

        let mut state = load_snapshot(dir, last_seq).unwrap_or_default();
        let base = state.seq;
        for r in records.iter().filter(|r| r.seq > base) {
            state.apply(r);
        }

        let mut clock = ArchiveClock::new(options.seed);
        if let Some(ts) = state.last_ts() {
            clock.observe(ts);
        }
        Ok(Self {
            dir: Some(dir.to_owned()),
            journal: Journal::open_file(&path)?,
            state: Arc::new(state),
            clock,
        })
    }

    /// Archive whose journal lives only in memory.
    pub fn in_memory(options: ArchiveOptions) -> Self {
        Self {
            dir: None,
            journal: Journal::memory(),
            state: Arc::new(ArchiveState::default()),
            clock: ArchiveClock::new(options.seed),
        }
    }

    /// Builds an in-memory archive by replaying journal text.
    pub fn from_journal_text(text: &str, options: ArchiveOptions) -> Result<Self, ArchiveError> {
        let mut archive = Self::in_memory(options);
        for r in journal::parse_journal(text)? {
            archive.journal.append(&r)?;
            Arc::make_mut(&mut archive.state).apply(&r);
            archive.clock.observe(r.ts);
        }
        Ok(archive)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Immutable snapshot of the current state.
    pub fn view(&self) -> Arc<ArchiveState> {
        Arc::clone(&self.state)
    }

    /// Journal lines of an in-memory archive.
    pub fn memory_journal(&self) -> Option<&[String]> {
        self.journal.memory_lines()
    }

    fn commit(&mut self, ts: Timestamp, event: Event) -> Result<JournalRecord, ArchiveError> {
        let record = JournalRecord {
            seq: self.state.seq() + 1,
            ts,
            event,
        };
        self.journal.append(&record)?;
        Arc::make_mut(&mut self.state).apply(&record);
        Ok(record)
    }

    fn fresh_id(&mut self, prefix: &str, ts: Timestamp) -> String {
        loop {
            let id = self.clock.mint_id(prefix, ts);
            let taken = self.state.instance(&id).is_some()
                || self.state.activity(&id).is_some()
                || self.state.element(&id).is_some();
            if !taken {
                return id;
            }
        }
    }

    /// Loads a schema version. Re-registering identical content is a no-op;
    /// returns whether a journal record was written.
    pub fn register_schema(&mut self, schema: TaskTypeSchema) -> Result<bool, ArchiveError> {
        if !self.state.check_schema_registration(&schema)? {
            return Ok(false);
        }
        let mut schema = schema;
        schema.canonicalize();
        let ts = self.clock.tick();
        self.commit(ts, Event::RegisterSchema(schema))?;
        Ok(true)
    }

    pub fn begin_instance(
        &mut self,
        schema: &SchemaRef,
        title: &str,
        actor: &str,
    ) -> Result<TaskInstance, ArchiveError> {
        self.state.check_begin_instance(schema)?;
        let ts = self.clock.tick();
        let id = self.fresh_id("ti", ts);
        self.commit(
            ts,
            Event::BeginInstance {
                id: id.clone(),
                schema: schema.clone(),
                title: title.to_owned(),
                actor: actor.to_owned(),
            },
        )?;
        Ok(self.state.instance(&id).cloned().expect("just applied"))
    }

    pub fn begin_activity(
        &mut self,
        instance: &str,
        category: &str,
    ) -> Result<ActivityInstance, ArchiveError> {
        self.state.check_begin_activity(instance, category)?;
        let ts = self.clock.tick();
        let id = self.fresh_id("ai", ts);
        self.commit(
            ts,
            Event::BeginActivity {
                id: id.clone(),
                instance: instance.to_owned(),
                category: category.to_owned(),
            },
        )?;
        Ok(self.state.activity(&id).cloned().expect("just applied"))
    }

    pub fn end_activity(&mut self, activity: &str) -> Result<ActivityInstance, ArchiveError> {
        self.state.check_end_activity(activity)?;
        let ts = self.clock.tick();
        self.commit(
            ts,
            Event::EndActivity {
                id: activity.to_owned(),
            },
        )?;
        Ok(self.state.activity(activity).cloned().expect("exists"))
    }

    /// Closes an instance. Its current activity must be ended first.
    pub fn close_instance(&mut self, instance: &str) -> Result<TaskInstance, ArchiveError> {
        self.state.check_close_instance(instance)?;
        let ts = self.clock.tick();
        self.commit(
            ts,
            Event::CloseInstance {
                id: instance.to_owned(),
            },
        )?;
        Ok(self.state.instance(instance).cloned().expect("exists"))
    }

    /// Records an element under the active activity, with one DS edge to each
    /// `ds_targets` entry and one RS edge to each `rs_targets` entry, all in
    /// one journal record.
    pub fn record_element(&mut self, draft: ElementDraft) -> Result<RecordedElement, ArchiveError> {
        let override_warning = self.state.check_record(&draft)?;
        let ts = self.clock.tick();
        let id = self.fresh_id("ie", ts);
        self.commit(
            ts,
            Event::RecordElement {
                id: id.clone(),
                instance: draft.instance,
                activity: draft.activity,
                category: draft.category,
                author: draft.author,
                body: draft.body,
                attachments: draft.attachments,
                ds_targets: draft.ds_targets,
                rs_targets: draft.rs_targets,
                override_warning,
            },
        )?;
        let element = self.state.element(&id).cloned().expect("just applied");
        let edges = self.state.outgoing(&id).cloned().collect();
        Ok(RecordedElement { element, edges })
    }

    pub fn link_elements(
        &mut self,
        from: &str,
        to: &str,
        kind: LinkKind,
        note: Option<String>,
    ) -> Result<EpisodicEdge, ArchiveError> {
        self.state.check_link(from, to, kind)?;
        let ts = self.clock.tick();
        self.commit(
            ts,
            Event::LinkElements {
                from: from.to_owned(),
                to: to.to_owned(),
                kind,
                note,
            },
        )?;
        let key = EdgeKey {
            from: from.to_owned(),
            to: to.to_owned(),
            kind,
        };
        Ok(self.state.edges.get(&key).cloned().expect("just applied"))
    }

    /// Marks an element superseded. It stays in the store and in every graph;
    /// only retrieval skips it.
    pub fn retract_element(
        &mut self,
        id: &str,
        note: Option<String>,
    ) -> Result<InformationElement, ArchiveError> {
        self.state.check_retract(id)?;
        let ts = self.clock.tick();
        self.commit(
            ts,
            Event::Retract {
                id: id.to_owned(),
                note,
            },
        )?;
        Ok(self.state.element(id).cloned().expect("exists"))
    }

    /// Writes `snapshot-{seq}.json` next to the journal. Returns `None` for
    /// in-memory archives.
    pub fn write_snapshot(&self) -> Result<Option<PathBuf>, ArchiveError> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let path = dir.join(format!("snapshot-{}.json", self.state.seq()));
        let snapshot = Snapshot {
            last_ts: self.state.last_ts(),
            state: self.state.export(),
        };
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, crate::canonical::to_pretty(&snapshot))?;
        fs::rename(&tmp, &path)?;
        Ok(Some(path))
    }
}

impl Deref for Archive {
    type Target = ArchiveState;

    fn deref(&self) -> &ArchiveState {
        &self.state
    }
}

/// Newest snapshot at or below `max_seq` that parses. Snapshots that fail
/// to load are skipped; the journal alone is always sufficient.
fn load_snapshot(dir: &Path, max_seq: u64) -> Option<ArchiveState> {
    let mut candidates: Vec<(u64, PathBuf)> = fs::read_dir(dir)
        .ok()?
        .filter_map(Result::ok)
        .filter_map(|entry| {
            let name = entry.file_name().into_string().ok()?;
            let seq = name
                .strip_prefix("snapshot-")?
                .strip_suffix(".json")?
                .parse::<u64>()
                .ok()?;
            (seq <= max_seq).then(|| (seq, entry.path()))
        })
        .collect();
    candidates.sort_by_key(|c| std::cmp::Reverse(c.0));
    candidates.into_iter().find_map(|(seq, path)| {
        let text = fs::read_to_string(path).ok()?;
        let snap: Snapshot = serde_json::from_str(&text).ok()?;
        (snap.state.seq == seq).then(|| ArchiveState::from_export(snap.state, snap.last_ts))
    })
}
