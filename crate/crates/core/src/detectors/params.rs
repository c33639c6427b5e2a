use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use crate::error::{Error, Result};

/// Typed, validated access to a detector's hyperparameter map. Every key
/// must be read by the detector; leftovers are reported by [`Params::finish`].
pub(crate) struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    seen: RefCell<BTreeSet<&'a str>>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(map: &'a BTreeMap<String, Value>) -> Self {
        Self {
            map,
            seen: RefCell::new(BTreeSet::new()),
        }
    }

    fn get(&self, name: &str) -> Option<&'a Value> {
        let (key, value) = self.map.get_key_value(name)?;
        self.seen.borrow_mut().insert(key.as_str());
        Some(value)
    }

    pub(crate) fn usize(&self, name: &str, default: usize, min: usize) -> Result<usize> {
        let v = match self.get(name) {
            None => default,
            Some(v) => v
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| Error::hyperparam(name, format!("expected an integer, got {v}")))?,
        };
        if v < min {
            return Err(Error::hyperparam(name, format!("{v} is below the minimum {min}")));
        }
        Ok(v)
    }

    pub(crate) fn opt_usize(&self, name: &str, min: usize) -> Result<Option<usize>> {
        if !self.map.contains_key(name) {
            return Ok(None);
        }
        self.usize(name, min, min).map(Some)
    }

    pub(crate) fn f64_in(&self, name: &str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        let v = match self.get(name) {
            None => default,
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::hyperparam(name, format!("expected a number, got {v}")))?,
        };
        if !(lo..=hi).contains(&v) {
            return Err(Error::hyperparam(name, format!("{v} outside [{lo}, {hi}]")));
        }
        Ok(v)
    }

    pub(crate) fn bool(&self, name: &str, default: bool) -> Result<bool> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Error::hyperparam(name, format!("expected a boolean, got {v}"))),
        }
    }

    pub(crate) fn finish(self) -> Result<()> {
        let seen = self.seen.into_inner();
        match self.map.keys().find(|k| !seen.contains(k.as_str())) {
            Some(k) => Err(Error::hyperparam(k, "unknown hyperparameter")),
            None => Ok(()),
        }
    }
}
