//! Finite metric control spaces and their subsets.
//!
//! A control space is a finite indexed point set with an exact rational
//! distance matrix. Every size predicate downstream ("radius <= eps over W",
//! "supported over Y") is decided against these distances.

use crate::rat::{rat, Rat};
use num_traits::Zero;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("distance matrix must be {n}x{n}, got {rows}x{cols}")]
    BadShape { n: usize, rows: usize, cols: usize },
    #[error("dist({i},{j}) is negative")]
    Negative { i: usize, j: usize },
    #[error("dist({i},{i}) must be zero")]
    NonzeroDiagonal { i: usize },
    #[error("dist({i},{j}) != dist({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality fails: dist({i},{k}) > dist({i},{j}) + dist({j},{k})")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("duplicate point id `{0}`")]
    DuplicateId(String),
    #[error("subset belongs to a different space")]
    ForeignSubset,
}

/// Finite metric space: named points plus a symmetric rational distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlSpace {
    pub ids: Vec<String>,
    dist: Vec<Rat>,
}

impl ControlSpace {
    pub fn new(ids: Vec<String>, dist_rows: Vec<Vec<Rat>>) -> Result<Arc<Self>, SpaceError> {
        let n = ids.len();
        {
            let mut seen = std::collections::BTreeSet::new();
            for id in &ids {
                if !seen.insert(id.clone()) {
                    return Err(SpaceError::DuplicateId(id.clone()));
                }
            }
        }
        if dist_rows.len() != n || dist_rows.iter().any(|r| r.len() != n) {
            return Err(SpaceError::BadShape {
                n,
                rows: dist_rows.len(),
                cols: dist_rows.first().map_or(0, |r| r.len()),
            });
        }
        let mut dist = Vec::with_capacity(n * n);
        for row in &dist_rows {
            dist.extend(row.iter().cloned());
        }
        let space = ControlSpace { ids, dist };
        space.verify()?;
        Ok(Arc::new(space))
    }

    /// A one-point space, the control space of every "at a point" example.
    pub fn point() -> Arc<Self> {
        ControlSpace::new(vec!["pt".to_string()], vec![vec![rat(0)]]).expect("point space")
    }

    /// Evenly spaced points on a line, `gap` apart.
    pub fn line(n: usize, gap: Rat) -> Arc<Self> {
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| gap.clone() * rat((i as i128 - j as i128).abs()))
                    .collect()
            })
            .collect();
        ControlSpace::new(ids, rows).expect("line space")
    }

    fn verify(&self) -> Result<(), SpaceError> {
        let n = self.len();
        for i in 0..n {
            if !self.d(i, i).is_zero() {
                return Err(SpaceError::NonzeroDiagonal { i });
            }
            for j in 0..n {
                if self.d(i, j) < rat(0) {
                    return Err(SpaceError::Negative { i, j });
                }
                if self.d(i, j) != self.d(j, i) {
                    return Err(SpaceError::Asymmetric { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d(i, k) > self.d(i, j) + self.d(j, k) {
                        return Err(SpaceError::Triangle { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> Rat {
        self.dist[i * self.len() + j].clone()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn full_subset(self: &Arc<Self>) -> Subset {
        Subset { space: Arc::clone(self), bits: vec![true; self.len()] }
    }

    pub fn empty_subset(self: &Arc<Self>) -> Subset {
        Subset { space: Arc::clone(self), bits: vec![false; self.len()] }
    }

    pub fn subset_of(self: &Arc<Self>, members: &[usize]) -> Subset {
        let mut bits = vec![false; self.len()];
        for &m in members {
            bits[m] = true;
        }
        Subset { space: Arc::clone(self), bits }
    }
}

/// Membership bit-vector over the points of a control space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    pub space: Arc<ControlSpace>,
    bits: Vec<bool>,
}

/// Smallest `eps >= 0` such that one set lies inside the `eps` neighborhood
/// of another; `Infinite` when no neighborhood suffices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slack {
    Finite(Rat),
    Infinite,
}

impl Subset {
    pub fn contains(&self, point: usize) -> bool {
        self.bits[point]
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn card(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn complement(&self) -> Subset {
        Subset { space: Arc::clone(&self.space), bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        assert!(Arc::ptr_eq(&self.space, &other.space) || self.space == other.space);
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Subset { space: Arc::clone(&self.space), bits }
    }

    pub fn intersect(&self, other: &Subset) -> Subset {
        assert!(Arc::ptr_eq(&self.space, &other.space) || self.space == other.space);
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect();
        Subset { space: Arc::clone(&self.space), bits }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Distance from a point to the set; `None` for the empty set.
    pub fn dist_to(&self, point: usize) -> Option<Rat> {
        self.members().map(|m| self.space.d(point, m)).min()
    }

    /// The closed `eps` neighborhood. Nonnegative `eps` gives
    /// `{x : d(x, S) <= eps}`; negative `eps` gives the convention
    /// `X - (X - S)^{-eps}`.
    pub fn neighborhood(&self, eps: &Rat) -> Subset {
        if eps < &rat(0) {
            let minus = -eps.clone();
            return self.complement().neighborhood(&minus).complement();
        }
        let bits = (0..self.space.len())
            .map(|x| match self.dist_to(x) {
                Some(d) => d <= *eps,
                None => false,
            })
            .collect();
        Subset { space: Arc::clone(&self.space), bits }
    }

    /// Smallest `eps >= 0` with `other` contained in `self.neighborhood(eps)`.
    pub fn hausdorff_slack(&self, other: &Subset) -> Slack {
        let mut worst = rat(0);
        for t in other.members() {
            match self.dist_to(t) {
                None => return Slack::Infinite,
                Some(d) => {
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        Slack::Finite(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn line3() -> Arc<ControlSpace> {
        ControlSpace::line(3, rat(1))
    }

    #[test]
    fn rejects_triangle_violation() {
        let err = ControlSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![rat(0), rat(1), rat(5)],
                vec![rat(1), rat(0), rat(1)],
                vec![rat(5), rat(1), rat(0)],
            ],
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::Triangle { .. }));
    }

    #[test]
    fn zero_radius_neighborhood_is_the_set() {
        let sp = line3();
        let s = sp.subset_of(&[0]);
        assert_eq!(s.neighborhood(&rat(0)), s);
    }

    #[test]
    fn unit_neighborhood_on_line() {
        let sp = line3();
        let s = sp.subset_of(&[0]);
        assert_eq!(s.neighborhood(&rat(1)), sp.subset_of(&[0, 1]));
    }

    #[test]
    fn negative_radius_follows_complement_convention() {
        // S = {a,b} on the unit line a-b-c: S^{-1} = X - ({c})^{1} = {a}.
        let sp = line3();
        let s = sp.subset_of(&[0, 1]);
        assert_eq!(s.neighborhood(&rat(-1)), sp.subset_of(&[0]));
    }

    #[test]
    fn hausdorff_slack_cases() {
        let sp = line3();
        let s = sp.subset_of(&[0]);
        let t = sp.subset_of(&[0, 1]);
        assert_eq!(s.hausdorff_slack(&s), Slack::Finite(rat(0)));
        assert_eq!(s.hausdorff_slack(&t), Slack::Finite(rat(1)));
        let empty = sp.empty_subset();
        assert_eq!(empty.hausdorff_slack(&t), Slack::Infinite);
        assert_eq!(empty.hausdorff_slack(&empty), Slack::Finite(rat(0)));
    }

    #[test]
    fn monotone_in_radius_brute_force() {
        // Signed-radius monotonicity on every subset of a 5-point space.
        let sp = ControlSpace::line(5, ratio(1, 2));
        let radii: Vec<Rat> = vec![rat(-2), rat(-1), ratio(-1, 2), rat(0), ratio(1, 2), rat(1)];
        for mask in 0u32..(1 << 5) {
            let members: Vec<usize> = (0..5).filter(|i| mask & (1 << i) != 0).collect();
            let s = sp.subset_of(&members);
            for w in radii.windows(2) {
                let small = s.neighborhood(&w[0]);
                let big = s.neighborhood(&w[1]);
                assert!(small.is_subset_of(&big));
            }
        }
    }

    #[test]
    fn negative_radius_definition_brute_force() {
        // X - (X-S)^{-eps} agrees entry-wise with the direct evaluation on
        // all subsets of a 6-point space.
        let sp = ControlSpace::line(6, rat(1));
        for mask in 0u32..(1 << 6) {
            let members: Vec<usize> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
            let s = sp.subset_of(&members);
            let eps = rat(-2);
            let via_def = s.complement().neighborhood(&rat(2)).complement();
            assert_eq!(s.neighborhood(&eps), via_def);
        }
    }
}
