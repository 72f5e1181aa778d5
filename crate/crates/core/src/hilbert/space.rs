use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of labeled subsystems.
///
/// Flattened indices are row-major with the first-listed subsystem varying
/// slowest, so `|i⟩_a ⊗ |j⟩_b` sits at `i * dim_b + j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, usize)>", into = "Vec<(String, usize)>")]
pub struct TensorSpace {
    subsystems: Vec<(String, usize)>,
}

impl TensorSpace {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems: Vec<(String, usize)> =
            subsystems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if subsystems.is_empty() {
            return Err(Error::InvalidSpace("no subsystems".into()));
        }
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::InvalidSpace(format!("subsystem {label:?} has dimension 0")));
            }
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::LabelCollision(label.clone()));
            }
        }
        let total = subsystems
            .iter()
            .try_fold(1usize, |acc, (_, d)| acc.checked_mul(*d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows".into()))?;
        if total == 0 {
            return Err(Error::InvalidSpace("total dimension 0".into()));
        }
        Ok(Self { subsystems })
    }

    /// One subsystem.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|(_, d)| *d).collect()
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subsystems.iter().any(|(l, _)| l == label)
    }

    pub fn flatten(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch { expected: self.subsystems.len(), found: multi.len() });
        }
        let mut index = 0;
        for (&m, (label, d)) in multi.iter().zip(&self.subsystems) {
            if m >= *d {
                return Err(Error::InvalidArgument(format!("index {m} out of range for {label:?} (dim {d})")));
            }
            index = index * d + m;
        }
        Ok(index)
    }

    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut multi = vec![0; self.subsystems.len()];
        for (slot, (_, d)) in multi.iter_mut().zip(&self.subsystems).rev() {
            *slot = index % d;
            index /= d;
        }
        multi
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &TensorSpace) -> Result<TensorSpace> {
        for label in other.labels() {
            if self.contains(label) {
                return Err(Error::LabelCollision(label.to_string()));
            }
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        TensorSpace::new(subsystems)
    }

    /// Subsystems named in `labels`, kept in this space's declared order.
    pub fn restrict(&self, labels: &[&str]) -> Result<TensorSpace> {
        for (i, l) in labels.iter().enumerate() {
            self.position(l)?;
            if labels[..i].contains(l) {
                return Err(Error::LabelCollision(l.to_string()));
            }
        }
        TensorSpace::new(self.subsystems.iter().filter(|(l, _)| labels.contains(&l.as_str())).cloned())
    }

    /// Labels not named in `labels`, in declared order.
    pub fn complement(&self, labels: &[&str]) -> Vec<&str> {
        self.labels().filter(|l| !labels.contains(l)).collect()
    }

    /// For every flat index, its flat index within the `group` subsystems
    /// (in the order given by `group`) and within the remaining ones.
    pub(crate) fn split_indices(&self, group: &[usize]) -> (Vec<usize>, Vec<usize>, usize, usize) {
        let dims = self.dims();
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !group.contains(k)).collect();
        let group_dim: usize = group.iter().map(|&k| dims[k]).product();
        let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
        let total = self.total_dim();
        let mut g_idx = Vec::with_capacity(total);
        let mut r_idx = Vec::with_capacity(total);
        for flat in 0..total {
            let multi = self.unflatten(flat);
            g_idx.push(group.iter().fold(0, |acc, &k| acc * dims[k] + multi[k]));
            r_idx.push(rest.iter().fold(0, |acc, &k| acc * dims[k] + multi[k]));
        }
        (g_idx, r_idx, group_dim, rest_dim)
    }
}

impl TryFrom<Vec<(String, usize)>> for TensorSpace {
    type Error = Error;

    fn try_from(value: Vec<(String, usize)>) -> Result<Self> {
        TensorSpace::new(value)
    }
}

impl From<TensorSpace> for Vec<(String, usize)> {
    fn from(value: TensorSpace) -> Self {
        value.subsystems
    }
}

impl fmt::Display for TensorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (l, d)) in self.subsystems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}:{d}")?;
        }
        write!(f, "]")
    }
}
