//! Timestamps, the archive clock, and archive id generation.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// UTC instant with millisecond precision, serialized as ISO-8601
/// (`2024-01-01T00:00:00.000Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

const FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.3fZ";

impl Timestamp {
    pub fn from_millis(ms: i64) -> Self {
        Self(ms)
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn now() -> Self {
        Self(Utc::now().timestamp_millis())
    }

    fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_millis_opt(self.0)
            .single()
            .unwrap_or(DateTime::<Utc>::MIN_UTC)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_datetime().format(FORMAT))
    }
}

impl FromStr for Timestamp {
    type Err = chrono::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dt = DateTime::parse_from_rfc3339(s)?;
        Ok(Self(dt.with_timezone(&Utc).timestamp_millis()))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 2024-01-01T00:00:00Z, the origin of the logical clock.
pub const LOGICAL_EPOCH_MS: i64 = 1_704_067_200_000;

/// Step of the logical clock per tick.
pub const LOGICAL_TICK_MS: i64 = 1_000;

/// Source of journal timestamps and ids.
///
/// With a seed, time is logical (advancing one tick per append from a fixed
/// epoch) and id suffixes come from a seeded ChaCha stream, so a replayed
/// script produces byte-identical archives. Without a seed, wall-clock time
/// and OS entropy are used. Either way timestamps never go backwards.
#[derive(Debug)]
pub struct ArchiveClock {
    logical: bool,
    last: Option<Timestamp>,
    rng: ChaCha8Rng,
}

impl ArchiveClock {
    pub fn new(seed: Option<u64>) -> Self {
        match seed {
            Some(seed) => Self {
                logical: true,
                last: None,
                rng: ChaCha8Rng::seed_from_u64(seed),
            },
            None => Self {
                logical: false,
                last: None,
                rng: ChaCha8Rng::from_os_rng(),
            },
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.logical
    }

    /// Records a timestamp already present in the journal so that later
    /// ticks stay at or after it.
    pub fn observe(&mut self, ts: Timestamp) {
        if self.last.is_none_or(|last| ts > last) {
            self.last = Some(ts);
        }
    }

    pub fn last(&self) -> Option<Timestamp> {
        self.last
    }

    /// Next timestamp; strictly increasing in logical mode, non-decreasing
    /// otherwise.
    pub fn tick(&mut self) -> Timestamp {
        let ts = if self.logical {
            match self.last {
                Some(last) => Timestamp(last.0 + LOGICAL_TICK_MS),
                None => Timestamp(LOGICAL_EPOCH_MS),
            }
        } else {
            let now = Timestamp::now();
            match self.last {
                Some(last) if last > now => last,
                _ => now,
            }
        };
        self.last = Some(ts);
        ts
    }

    /// Fresh id of the form `{prefix}-{millis as 12 hex digits}-{8 hex digits}`.
    /// Ids sort lexicographically by creation time.
    pub fn mint_id(&mut self, prefix: &str, at: Timestamp) -> String {
        let suffix: u32 = self.rng.random();
        format!("{prefix}-{:012x}-{suffix:08x}", at.0.max(0))
    }
}
