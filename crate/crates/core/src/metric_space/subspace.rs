use super::{Coordinates, MetricSpace};
use crate::error::{Error, Result};

/// The metric subspace induced on a subset of a parent space.
///
/// Members are kept in increasing parent order; subspace index `k` refers
/// to parent point `members[k]`.
#[derive(Debug, Clone)]
pub struct Subspace<'a, S: MetricSpace> {
    parent: &'a S,
    members: Vec<usize>,
    position: Vec<u32>,
}

impl<'a, S: MetricSpace> Subspace<'a, S> {
    pub fn new(parent: &'a S, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::input("subspace must be nonempty"));
        }
        if members.last().is_some_and(|&m| m >= parent.len()) {
            return Err(Error::input("subspace member outside the parent space"));
        }
        let mut position = vec![u32::MAX; parent.len()];
        for (k, &m) in members.iter().enumerate() {
            position[m] = k as u32;
        }
        Ok(Subspace {
            parent,
            members,
            position,
        })
    }

    pub fn parent(&self) -> &'a S {
        self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Parent index of subspace point `k`.
    pub fn to_parent(&self, k: usize) -> usize {
        self.members[k]
    }

    /// Subspace index of parent point `p`, if it is a member.
    pub fn from_parent(&self, p: usize) -> Option<usize> {
        match self.position.get(p) {
            Some(&k) if k != u32::MAX => Some(k as usize),
            _ => None,
        }
    }

    fn project(&self, parent_ball: Vec<usize>) -> Vec<usize> {
        parent_ball
            .into_iter()
            .filter_map(|p| self.from_parent(p))
            .collect()
    }
}

impl<S: MetricSpace> MetricSpace for Subspace<'_, S> {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.parent.dist(self.members[i], self.members[j])
    }

    fn label(&self, i: usize) -> String {
        self.parent.label(self.members[i])
    }

    fn closed_ball(&self, x: usize, r: f64) -> Vec<usize> {
        self.project(self.parent.closed_ball(self.members[x], r))
    }

    fn open_ball(&self, x: usize, r: f64) -> Vec<usize> {
        self.project(self.parent.open_ball(self.members[x], r))
    }
}

impl<S: Coordinates> Coordinates for Subspace<'_, S> {
    fn dim(&self) -> usize {
        self.parent.dim()
    }

    fn coords(&self, i: usize) -> &[f64] {
        self.parent.coords(self.members[i])
    }
}
