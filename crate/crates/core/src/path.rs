//! Finite colored paths with two designated end-points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{SystemBuilder, TransitionSystem};
use crate::{Color, Label};

/// A path `c_0 -a_1-> c_1 ... -a_n-> c_n`. Length-0 paths are legal; their
/// two end-points coincide.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointedPath {
    colors: Vec<Option<Color>>,
    labels: Vec<Label>,
}

impl PointedPath {
    pub fn new(colors: Vec<Option<Color>>, labels: Vec<Label>) -> Result<Self> {
        if colors.len() != labels.len() + 1 {
            return Err(Error::Invalid(format!(
                "path with {} labels needs {} vertex colors, got {}",
                labels.len(),
                labels.len() + 1,
                colors.len()
            )));
        }
        Ok(Self { colors, labels })
    }

    /// The length-0 path on one vertex.
    pub fn unit(color: Option<&str>) -> Self {
        Self { colors: vec![color.map(str::to_owned)], labels: Vec::new() }
    }

    /// The single-edge path `from -label-> to`.
    pub fn edge(from: Option<&str>, label: &str, to: Option<&str>) -> Self {
        Self { colors: vec![from.map(str::to_owned), to.map(str::to_owned)], labels: vec![label.to_owned()] }
    }

    /// Uncolored path spelling `labels`.
    pub fn word<S: AsRef<str>>(labels: &[S]) -> Self {
        Self { colors: vec![None; labels.len() + 1], labels: labels.iter().map(|s| s.as_ref().to_owned()).collect() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn colors(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn first_color(&self) -> Option<&str> {
        self.colors[0].as_deref()
    }

    pub fn last_color(&self) -> Option<&str> {
        self.colors[self.colors.len() - 1].as_deref()
    }

    /// Glues the last vertex of `self` to the first vertex of `other`.
    pub fn concat(&self, other: &PointedPath) -> Result<PointedPath> {
        if self.last_color() != other.first_color() {
            return Err(Error::ColorMismatch(format!(
                "cannot glue end color {:?} to start color {:?}",
                self.last_color(),
                other.first_color()
            )));
        }
        let mut colors = self.colors.clone();
        colors.extend(other.colors[1..].iter().cloned());
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(PointedPath { colors, labels })
    }

    /// `self` concatenated with itself `k` times (`k >= 1`).
    pub fn power(&self, k: usize) -> Result<PointedPath> {
        assert!(k >= 1, "power exponent must be positive");
        let mut p = self.clone();
        for _ in 1..k {
            p = p.concat(self)?;
        }
        Ok(p)
    }

    /// Sub-path between vertex positions `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> PointedPath {
        PointedPath { colors: self.colors[from..=to].to_vec(), labels: self.labels[from..to].to_vec() }
    }

    /// The path as a transition system; vertex `i` is named `p{i}` and the
    /// first vertex is initial.
    pub fn to_system(&self) -> TransitionSystem {
        let mut b = SystemBuilder::new();
        let v: Vec<usize> = self.colors.iter().enumerate().map(|(i, c)| b.colored_state(format!("p{i}"), c.as_deref())).collect();
        for (i, l) in self.labels.iter().enumerate() {
            b.edge(v[i], l.clone(), v[i + 1]);
        }
        b.build(v[0])
    }

    /// Same path with every vertex color rewritten.
    pub fn map_colors(&self, mut f: impl FnMut(usize, Option<&str>) -> Option<Color>) -> PointedPath {
        PointedPath {
            colors: self.colors.iter().enumerate().map(|(i, c)| f(i, c.as_deref())).collect(),
            labels: self.labels.clone(),
        }
    }
}

impl fmt::Display for PointedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |c: &Option<Color>| c.as_deref().unwrap_or("_").to_owned();
        write!(f, "{}", c(&self.colors[0]))?;
        for (i, l) in self.labels.iter().enumerate() {
            write!(f, " -{l}-> {}", c(&self.colors[i + 1]))?;
        }
        Ok(())
    }
}
