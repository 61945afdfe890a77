//! Role-tagged coordinate charts.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::GeomError;

/// What a coordinate means in a control-theoretic chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Time,
    State,
    Control,
    /// Jet coordinate `z<chain>_<order>`.
    Jet { chain: usize, order: usize },
    /// Group coordinate `eps<a>`.
    Group(usize),
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coord {
    pub name: String,
    pub role: Role,
}

struct Inner {
    coords: Vec<Coord>,
    index: HashMap<String, usize>,
}

/// An ordered list of named coordinates. Cloning is cheap.
#[derive(Clone)]
pub struct Chart(Arc<Inner>);

impl Chart {
    pub fn new(coords: Vec<Coord>) -> Result<Chart, GeomError> {
        let mut index = HashMap::new();
        let mut times = 0;
        for (i, c) in coords.iter().enumerate() {
            if index.insert(c.name.clone(), i).is_some() {
                return Err(GeomError::DuplicateCoordinate(c.name.clone()));
            }
            if c.role == Role::Time {
                times += 1;
            }
        }
        if times > 1 {
            return Err(GeomError::MultipleTime);
        }
        Ok(Chart(Arc::new(Inner { coords, index })))
    }

    /// Chart from `(name, role)` pairs.
    pub fn from_pairs(pairs: &[(&str, Role)]) -> Result<Chart, GeomError> {
        Chart::new(
            pairs
                .iter()
                .map(|(n, r)| Coord {
                    name: n.to_string(),
                    role: *r,
                })
                .collect(),
        )
    }

    /// Control chart `(t, states, controls)`.
    pub fn control(time: &str, states: &[&str], controls: &[&str]) -> Result<Chart, GeomError> {
        let mut v = vec![(time, Role::Time)];
        v.extend(states.iter().map(|s| (*s, Role::State)));
        v.extend(controls.iter().map(|s| (*s, Role::Control)));
        Chart::from_pairs(&v)
    }

    /// Chart with every coordinate tagged `Other`.
    pub fn plain(names: &[&str]) -> Result<Chart, GeomError> {
        Chart::from_pairs(&names.iter().map(|n| (*n, Role::Other)).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.0.coords
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0.coords[i].name
    }

    pub fn role(&self, i: usize) -> Role {
        self.0.coords[i].role
    }

    pub fn names(&self) -> Vec<String> {
        self.0.coords.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, GeomError> {
        self.index_of(name)
            .ok_or_else(|| GeomError::UnknownCoordinate(name.to_string()))
    }

    pub fn time_index(&self) -> Option<usize> {
        self.0.coords.iter().position(|c| c.role == Role::Time)
    }

    pub fn time_name(&self) -> Option<&str> {
        self.time_index().map(|i| self.name(i))
    }

    pub fn indices_with(&self, pred: impl Fn(Role) -> bool) -> Vec<usize> {
        (0..self.dim()).filter(|&i| pred(self.role(i))).collect()
    }

    pub fn controls(&self) -> Vec<usize> {
        self.indices_with(|r| r == Role::Control)
    }

    pub fn states(&self) -> Vec<usize> {
        self.indices_with(|r| r == Role::State)
    }

    /// Column priority used when row-reducing one-forms: states, jets,
    /// group and other coordinates first, then time, then controls. Bases
    /// then read `dx - f dt`.
    pub fn form_column_order(&self) -> Vec<usize> {
        let rank = |r: Role| match r {
            Role::State | Role::Jet { .. } | Role::Group(_) | Role::Other => 0,
            Role::Time => 1,
            Role::Control => 2,
        };
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by_key(|&i| (rank(self.role(i)), i));
        idx
    }

    pub fn same(&self, other: &Chart) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.coords == other.0.coords
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({})", self.names().join(", "))
    }
}
