//! The context a term is executed in: which names are communication actions
//! and which are quantum operations, the communication function, the effect of
//! each quantum operation and the quantum backend.

use alloc::collections::BTreeMap;
use core::fmt;

use crate::qstate::{DensityMatrix, QuantumEffect};
use crate::term::{name, LabelSet, Name};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelKind {
    Quantum,
    Comm,
}

/// Symbolic runs ignore `ϱ`; concrete runs start from the given state.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Backend {
    #[default]
    Symbolic,
    Concrete(DensityMatrix),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    UndeclaredLabel(Name),
    DeclaredTwice(Name),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::UndeclaredLabel(n) => write!(f, "label `{n}` is not declared as comm or qop"),
            ModelError::DeclaredTwice(n) => write!(f, "label `{n}` is declared both comm and qop"),
        }
    }
}

impl core::error::Error for ModelError {}

#[derive(Clone, Debug, Default)]
pub struct Model {
    pub comm: LabelSet,
    pub qops: LabelSet,
    gamma: BTreeMap<(Name, Name), Name>,
    pub effects: BTreeMap<Name, QuantumEffect>,
    /// When set, undeclared names are treated as quantum operations.
    pub permissive: bool,
    /// When cleared, the parallel operators have no transitions at all.
    pub parallel_rules: bool,
    pub backend: Backend,
}

impl Model {
    /// Strict model with the parallel rules loaded.
    pub fn new() -> Self {
        Model { parallel_rules: true, ..Model::default() }
    }

    /// Every undeclared name is a quantum operation; `γ` starts empty.
    pub fn permissive() -> Self {
        Model { permissive: true, ..Model::new() }
    }

    pub fn declare_comm(&mut self, n: &str) -> Result<(), ModelError> {
        let n = name(n);
        if self.qops.contains(&n) {
            return Err(ModelError::DeclaredTwice(n));
        }
        self.comm.insert(n);
        Ok(())
    }

    pub fn declare_qop(&mut self, n: &str) -> Result<(), ModelError> {
        let n = name(n);
        if self.comm.contains(&n) {
            return Err(ModelError::DeclaredTwice(n));
        }
        self.qops.insert(n);
        Ok(())
    }

    /// Defines `γ(a, b) = γ(b, a) = c`. The result is a communication action.
    pub fn set_gamma(&mut self, a: &str, b: &str, c: &str) -> Result<(), ModelError> {
        for n in [a, b, c] {
            self.declare_comm(n)?;
        }
        let (a, b) = if a <= b { (name(a), name(b)) } else { (name(b), name(a)) };
        self.gamma.insert((a, b), name(c));
        Ok(())
    }

    pub fn gamma(&self, a: &Name, b: &Name) -> Option<&Name> {
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.gamma.get(&key)
    }

    pub fn gamma_table(&self) -> impl Iterator<Item = (&Name, &Name, &Name)> {
        self.gamma.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn set_effect(&mut self, n: &str, e: QuantumEffect) {
        self.effects.insert(name(n), e);
    }

    pub fn kind(&self, n: &Name) -> Result<LabelKind, ModelError> {
        if self.comm.contains(n) {
            Ok(LabelKind::Comm)
        } else if self.qops.contains(n) || self.permissive {
            Ok(LabelKind::Quantum)
        } else {
            Err(ModelError::UndeclaredLabel(n.clone()))
        }
    }

    pub fn is_concrete(&self) -> bool {
        matches!(self.backend, Backend::Concrete(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_is_symmetric() {
        let mut m = Model::new();
        m.set_gamma("send", "receive", "c").unwrap();
        assert_eq!(m.gamma(&name("receive"), &name("send")), Some(&name("c")));
        assert_eq!(m.gamma(&name("send"), &name("receive")), Some(&name("c")));
        assert_eq!(m.gamma(&name("send"), &name("send")), None);
        assert_eq!(m.kind(&name("c")), Ok(LabelKind::Comm));
    }

    #[test]
    fn kinds_follow_declarations() {
        let mut m = Model::new();
        m.declare_qop("M").unwrap();
        assert_eq!(m.kind(&name("M")), Ok(LabelKind::Quantum));
        assert_eq!(m.kind(&name("x")), Err(ModelError::UndeclaredLabel(name("x"))));
        assert_eq!(m.declare_comm("M"), Err(ModelError::DeclaredTwice(name("M"))));
        assert_eq!(Model::permissive().kind(&name("x")), Ok(LabelKind::Quantum));
    }
}
