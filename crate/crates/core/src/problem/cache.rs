use std::any::Any;
use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::manifolds::{Ambient, Tangent};

/// Maximum number of point tokens kept alive at once.
pub const CACHE_CAPACITY: usize = 2;

/// Token a solver issues for every distinct point it evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointKey(u64);

/// User-visible per-point scratch space, e.g. for intermediate products
/// shared between the cost and its gradient.
#[derive(Default)]
pub struct PointStore {
    values: HashMap<String, Box<dyn Any + Send>>,
}

impl PointStore {
    pub fn get<T: Any>(&self, key: &str) -> Option<&T> {
        self.values.get(key).and_then(|v| v.downcast_ref())
    }

    pub fn insert<T: Any + Send>(&mut self, key: &str, value: T) {
        self.values.insert(key.to_owned(), Box::new(value));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Returns the value stored under `key`, computing it first if absent or
    /// stored with a different type.
    pub fn get_or_insert_with<T: Any + Send>(&mut self, key: &str, f: impl FnOnce() -> T) -> &T {
        let present = self.get::<T>(key).is_some();
        if !present {
            self.insert(key, f());
        }
        self.get::<T>(key).expect("value was just inserted")
    }

    fn clear(&mut self) {
        self.values.clear();
    }
}

impl fmt::Debug for PointStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.values.keys().collect();
        keys.sort();
        f.debug_struct("PointStore").field("keys", &keys).finish()
    }
}

/// Evaluation counters, monotone within a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub cost_evals: u64,
    pub grad_evals: u64,
    pub hess_evals: u64,
}

#[derive(Debug)]
pub(crate) struct Entry {
    key: Option<PointKey>,
    pub(crate) cost: Option<f64>,
    pub(crate) grad: Option<Tangent>,
    pub(crate) egrad: Option<Ambient>,
    pub(crate) user: PointStore,
}

impl Entry {
    fn new(key: Option<PointKey>) -> Self {
        Self {
            key,
            cost: None,
            grad: None,
            egrad: None,
            user: PointStore::default(),
        }
    }

    fn reset(&mut self) {
        self.cost = None;
        self.grad = None;
        self.egrad = None;
        self.user.clear();
    }
}

/// Per-run cache of values computed at recently visited points.
///
/// Entries are keyed by [`PointKey`] tokens rather than by point contents.
/// At most [`CACHE_CAPACITY`] tokens are retained, least recently used
/// first out. A disabled store keeps nothing between calls, so every query
/// recomputes; the counters are maintained either way.
#[derive(Debug)]
pub struct CacheStore {
    enabled: bool,
    next_key: u64,
    entries: Vec<Entry>,
    scratch: Entry,
    pub(crate) counters: Counters,
    pub(crate) fd_fallback_logged: bool,
}

impl Default for CacheStore {
    fn default() -> Self {
        Self::new()
    }
}

impl CacheStore {
    pub fn new() -> Self {
        Self::with_caching(true)
    }

    pub fn disabled() -> Self {
        Self::with_caching(false)
    }

    pub fn with_caching(enabled: bool) -> Self {
        Self {
            enabled,
            next_key: 0,
            entries: Vec::with_capacity(CACHE_CAPACITY),
            scratch: Entry::new(None),
            counters: Counters::default(),
            fd_fallback_logged: false,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Issues a fresh token for a new point.
    pub fn new_key(&mut self) -> PointKey {
        let key = PointKey(self.next_key);
        self.next_key += 1;
        key
    }

    /// Drops everything cached for `key`.
    pub fn discard(&mut self, key: PointKey) {
        self.entries.retain(|e| e.key != Some(key));
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Keys currently retained, least recently used first.
    pub fn live_keys(&self) -> Vec<PointKey> {
        self.entries.iter().filter_map(|e| e.key).collect()
    }

    /// The user scratch space for `key`.
    pub fn user_store(&mut self, key: PointKey) -> &mut PointStore {
        &mut self.entry(key).user
    }

    pub(crate) fn entry(&mut self, key: PointKey) -> &mut Entry {
        if !self.enabled {
            self.scratch.reset();
            return &mut self.scratch;
        }
        if let Some(pos) = self.entries.iter().position(|e| e.key == Some(key)) {
            let e = self.entries.remove(pos);
            self.entries.push(e);
        } else {
            if self.entries.len() >= CACHE_CAPACITY {
                self.entries.remove(0);
            }
            self.entries.push(Entry::new(Some(key)));
        }
        self.entries.last_mut().expect("entry was just pushed")
    }
}
