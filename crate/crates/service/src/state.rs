use std::collections::BTreeMap;
use std::sync::Arc;

use iw_core::archive::ArchiveState;
use iw_core::retrieval::build_index;
use iw_core::{Archive, ArchiveError, ArchiveOptions, Index, Timestamp};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;

/// A login stub: one bearer token per `POST /api/sessions`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSession {
    pub token: String,
    pub actor: String,
    pub created_at: Timestamp,
}

struct Shared {
    /// The single writer. Readers take a state view and release the lock.
    archive: Mutex<Archive>,
    index: RwLock<Arc<Index>>,
    sessions: RwLock<BTreeMap<String, ApiSession>>,
    config: ServiceConfig,
}

/// Handle shared by all request handlers.
#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(archive: Archive, config: ServiceConfig) -> Self {
        let index = build_index(&archive, config.scoring.tokenizer());
        Self(Arc::new(Shared {
            archive: Mutex::new(archive),
            index: RwLock::new(Arc::new(index)),
            sessions: RwLock::new(BTreeMap::new()),
            config,
        }))
    }

    /// Opens the configured archive directory.
    pub fn open(config: ServiceConfig) -> Result<Self, ArchiveError> {
        let archive = Archive::open(&config.archive_dir, ArchiveOptions { seed: config.seed })?;
        Ok(Self::new(archive, config))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    /// Immutable view of the archive at its current seq.
    pub fn view(&self) -> Arc<ArchiveState> {
        self.0.archive.lock().view()
    }

    pub fn write<R>(&self, f: impl FnOnce(&mut Archive) -> R) -> R {
        f(&mut self.0.archive.lock())
    }

    /// The index searches are served from.
    pub fn index(&self) -> Arc<Index> {
        Arc::clone(&self.0.index.read())
    }

    /// Builds an index over the current state without installing it.
    pub fn build_pending_index(&self) -> Index {
        build_index(&self.view(), self.0.config.scoring.tokenizer())
    }

    /// Installs `index` unless a newer one is already in place. Returns the
    /// index now being served.
    pub fn swap_index(&self, index: Index) -> Arc<Index> {
        let mut slot = self.0.index.write();
        if index.built_at_seq >= slot.built_at_seq {
            *slot = Arc::new(index);
        }
        Arc::clone(&slot)
    }

    pub fn reindex(&self) -> Arc<Index> {
        let pending = self.build_pending_index();
        self.swap_index(pending)
    }

    /// The served index, rebuilt first if it is stale and auto-reindex is on.
    pub fn search_index(&self) -> Arc<Index> {
        let current = self.index();
        if self.0.config.auto_reindex && current.built_at_seq < self.view().seq() {
            return self.reindex();
        }
        current
    }

    pub fn create_session(&self, actor: &str) -> ApiSession {
        let mut sessions = self.0.sessions.write();
        let token = loop {
            let t = format!("{:032x}", rand::random::<u128>());
            if !sessions.contains_key(&t) {
                break t;
            }
        };
        let session = ApiSession {
            token: token.clone(),
            actor: actor.to_owned(),
            created_at: Timestamp::now(),
        };
        sessions.insert(token, session.clone());
        session
    }

    pub fn session(&self, token: &str) -> Option<ApiSession> {
        self.0.sessions.read().get(token).cloned()
    }

    pub fn is_admin(&self, actor: &str) -> bool {
        self.0.config.admin_actors.iter().any(|a| a == actor)
    }
}
