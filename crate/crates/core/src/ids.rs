//! Identifiers shared by the graph, access-control and adversary modules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Opaque user identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        UserId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(s: &str) -> Self {
        UserId(s.to_owned())
    }
}

impl From<String> for UserId {
    fn from(s: String) -> Self {
        UserId(s)
    }
}

impl From<&UserId> for UserId {
    fn from(id: &UserId) -> Self {
        id.clone()
    }
}

/// Public secretary identifier. Ids are handed out as a seeded shuffle at
/// setup, so their order says nothing about group layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SnodeId(u64);

impl SnodeId {
    pub const fn new(raw: u64) -> Self {
        SnodeId(raw)
    }

    pub const fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for SnodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Key of a relationship group: type label, instance number and an optional
/// sub-type. Encoded as `label#instance[/subtype]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    label: String,
    instance: u32,
    subtype: Option<String>,
}

impl GroupKey {
    pub fn new(label: impl Into<String>, instance: u32, subtype: Option<String>) -> Self {
        GroupKey {
            label: label.into(),
            instance,
            subtype,
        }
    }

    /// First instance of `label`, no sub-type.
    pub fn simple(label: impl Into<String>) -> Self {
        Self::new(label, 1, None)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn instance(&self) -> u32 {
        self.instance
    }

    pub fn subtype(&self) -> Option<&str> {
        self.subtype.as_deref()
    }

    /// Labels may not be empty or contain the encoding separators.
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.label.is_empty() {
            return Err("empty relationship label".into());
        }
        if self.label.contains(['#', '/']) {
            return Err(format!("label {:?} contains '#' or '/'", self.label));
        }
        if self.instance == 0 {
            return Err(format!("instance of {:?} must be positive", self.label));
        }
        if matches!(self.subtype.as_deref(), Some("")) {
            return Err(format!("empty subtype on {:?}", self.label));
        }
        Ok(())
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.label, self.instance)?;
        if let Some(sub) = &self.subtype {
            write!(f, "/{sub}")?;
        }
        Ok(())
    }
}

impl FromStr for GroupKey {
    type Err = String;

    /// Accepts `label`, `label/sub`, `label#j` and `label#j/sub`; a missing
    /// instance means 1.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, subtype) = match s.split_once('/') {
            Some((h, sub)) => (h, Some(sub.to_owned())),
            None => (s, None),
        };
        let (label, instance) = match head.split_once('#') {
            Some((l, j)) => {
                let j = j
                    .parse::<u32>()
                    .map_err(|_| format!("bad instance in group key {s:?}"))?;
                (l, j)
            }
            None => (head, 1),
        };
        let key = GroupKey::new(label, instance, subtype);
        key.validate().map_err(|e| format!("bad group key {s:?}: {e}"))?;
        Ok(key)
    }
}

impl Serialize for GroupKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
