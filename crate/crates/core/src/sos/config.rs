//! Configurations `⟨p, ϱ⟩` with the snapshots needed to undo steps exactly.

use alloc::vec::Vec;

use super::{forget, Sos, SosError};
use crate::model::Backend;
use crate::qstate::{apply_effect, DensityMatrix};
use crate::term::{histories, rename_keys, ActionLabel, HistoryKey, Term};

/// A term, the current quantum state and one snapshot per recorded history.
///
/// `rho` is `None` in symbolic mode. Snapshots are kept sorted by key and hold
/// the state from just before the step that recorded the key.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub term: Term,
    pub rho: Option<DensityMatrix>,
    pub snapshots: Vec<(HistoryKey, Option<DensityMatrix>)>,
}

/// One transition out of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub label: ActionLabel,
    pub target: Configuration,
    pub key: Option<HistoryKey>,
    pub entangled: bool,
}

impl Configuration {
    /// The configuration of `term` under the model's backend. Histories
    /// already present in `term` get the initial state as their snapshot, so
    /// undoing them returns to it.
    pub fn initial(term: Term, backend: &Backend) -> Self {
        let rho = match backend {
            Backend::Symbolic => None,
            Backend::Concrete(r) => Some(r.clone()),
        };
        let snapshots = histories(&term).into_iter().map(|k| (k, rho.clone())).collect();
        Configuration { term, rho, snapshots }
    }

    pub fn next_key(&self) -> HistoryKey {
        histories(&self.term).last().map_or(1, |k| k + 1)
    }

    pub fn forward_steps(&self, sos: &Sos<'_>) -> Result<Vec<Step>, SosError> {
        let m = self.next_key();
        let mut out = Vec::new();
        for s in sos.forward(&self.term, m)? {
            let rho = match (&self.rho, &s.effect) {
                (Some(r), Some(op)) => {
                    let e = sos.model().effects.get(op).ok_or_else(|| SosError::MissingEffect(op.clone()))?;
                    Some(apply_effect(r, e)?)
                }
                (r, _) => r.clone(),
            };
            let mut snapshots = self.snapshots.clone();
            if s.keyed {
                snapshots.push((m, self.rho.clone()));
            }
            out.push(Step {
                label: s.label,
                target: Configuration { term: s.residue, rho, snapshots },
                key: s.keyed.then_some(m),
                entangled: s.entangled,
            });
        }
        Ok(out)
    }

    pub fn reverse_steps(&self, sos: &Sos<'_>) -> Result<Vec<Step>, SosError> {
        let mut out = Vec::new();
        for r in sos.reverse(&self.term)? {
            let pos = self
                .snapshots
                .iter()
                .position(|(k, _)| *k == r.key)
                .ok_or(SosError::MissingSnapshot(r.key))?;
            let mut snapshots = self.snapshots.clone();
            let (_, rho) = snapshots.remove(pos);
            out.push(Step {
                label: r.label,
                target: Configuration { term: r.residue, rho, snapshots },
                key: Some(r.key),
                entangled: r.entangled,
            });
        }
        Ok(out)
    }

    pub fn terminated(&self, sos: &Sos<'_>) -> bool {
        sos.terminated(&self.term)
    }

    /// Renumbers history keys to `1..=k`, keeping their order.
    ///
    /// Undoing an early action and redoing it would otherwise mint ever larger
    /// keys, so reversible interleavings would never close into a finite graph.
    pub fn compacted(&self) -> Configuration {
        let keys: Vec<HistoryKey> = histories(&self.term).into_iter().collect();
        if keys.iter().enumerate().all(|(i, &k)| k == i as HistoryKey + 1) {
            return self.clone();
        }
        let map = |k: HistoryKey| keys.binary_search(&k).map_or(k, |i| i as HistoryKey + 1);
        Configuration {
            term: rename_keys(&self.term, &map),
            rho: self.rho.clone(),
            snapshots: self.snapshots.iter().map(|(k, r)| (map(*k), r.clone())).collect(),
        }
    }

    /// The forward-only view: execution record dropped, snapshots discarded.
    pub fn forgotten(&self) -> Configuration {
        Configuration { term: forget(&self.term), rho: self.rho.clone(), snapshots: Vec::new() }
    }
}
