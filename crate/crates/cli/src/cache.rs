use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use ecyl_core::mathieu::{BasisIndex, ExpansionSource, MathieuExpansion};

type Key = (BasisIndex, u64, u64, u32);

/// Process-wide memo of Mathieu expansions keyed by the exact bits of
/// `(index, q, tol, depth)`.
///
/// Expansions are pure functions of the key, so a hit returns the same
/// numbers a fresh build would and the cache never changes results.
#[derive(Debug, Default)]
pub struct ExpansionCache {
    map: RwLock<HashMap<Key, Arc<MathieuExpansion>>>,
}

impl ExpansionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ExpansionSource for ExpansionCache {
    fn expansion(&self, index: BasisIndex, q: f64, tol: f64, depth: u32) -> ecyl_core::Result<Arc<MathieuExpansion>> {
        let key = (index, q.to_bits(), tol.to_bits(), depth);
        if let Some(e) = self.map.read().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(e);
        }
        let built = Arc::new(MathieuExpansion::build(index, q, tol, depth)?);
        let mut map = self.map.write().unwrap_or_else(|p| p.into_inner());
        Ok(map.entry(key).or_insert(built).clone())
    }
}
