use indexmap::IndexSet;

/// Fixed-capacity LRU set of data keys. Least recently used first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LruCache {
    capacity: usize,
    entries: IndexSet<String>,
}

impl LruCache {
    pub fn new(capacity: usize) -> Self {
        LruCache {
            capacity,
            entries: IndexSet::with_capacity(capacity.min(1024)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Membership test without touching recency.
    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains(key)
    }

    /// Hit refreshes recency.
    pub fn get(&mut self, key: &str) -> bool {
        match self.entries.get_index_of(key) {
            Some(i) => {
                let last = self.entries.len() - 1;
                self.entries.move_index(i, last);
                true
            }
            None => false,
        }
    }

    /// Inserts or refreshes `key`; returns the evicted key, if any.
    pub fn put(&mut self, key: &str) -> Option<String> {
        if self.capacity == 0 {
            return None;
        }
        if self.get(key) {
            return None;
        }
        let evicted = if self.entries.len() >= self.capacity {
            self.entries.shift_remove_index(0)
        } else {
            None
        };
        self.entries.insert(key.to_owned());
        evicted
    }

    /// Keys from least to most recently used.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }
}
