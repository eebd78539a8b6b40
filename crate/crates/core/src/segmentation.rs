//! Receiver segmentation: split the receivers into K groups, each served by
//! its own common signal, and pick the split that maximizes the worst group's
//! capacity or minimizes the worst group's segmentation loss.
//!
//! Partitions are enumerated exhaustively as restricted growth strings, which
//! also fixes the canonical order used to break ties.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::channel::MulticastProblem;
use crate::error::{Error, Result};
use crate::multicast::solve_for;

/// Largest receiver count accepted by the exhaustive search.
pub const MAX_RECEIVERS: usize = 12;
/// Scores closer than this are treated as equal.
pub const SCORE_TIE_TOL: f64 = 1e-9;

/// A partition of receivers `0..L` into nonempty groups. Groups are sorted
/// internally and ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segmentation {
    groups: Vec<Vec<usize>>,
}

impl Segmentation {
    pub fn new(receivers: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; receivers];
        let mut canonical = Vec::with_capacity(groups.len());
        for mut g in groups {
            if g.is_empty() {
                return Err(Error::InvalidArgument("empty group".into()));
            }
            g.sort_unstable();
            for &r in &g {
                if r >= receivers {
                    return Err(Error::InvalidArgument(format!(
                        "receiver {r} outside 0..{receivers}"
                    )));
                }
                if std::mem::replace(&mut seen[r], true) {
                    return Err(Error::InvalidArgument(format!(
                        "receiver {r} appears in two groups"
                    )));
                }
            }
            canonical.push(g);
        }
        if let Some(r) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "receiver {r} is in no group"
            )));
        }
        canonical.sort_by_key(|g| g[0]);
        Ok(Self { groups: canonical })
    }

    fn from_labels(labels: &[usize], k: usize) -> Self {
        let mut groups = vec![Vec::new(); k];
        for (r, &b) in labels.iter().enumerate() {
            groups[b].push(r);
        }
        Self { groups }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Receivers are printed 1-based, e.g. `{1}{2,3}`.
impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            let names: Vec<String> = g.iter().map(|r| (r + 1).to_string()).collect();
            write!(f, "{{{}}}", names.join(","))?;
        }
        Ok(())
    }
}

/// Partitions of `0..L` into exactly `K` groups, in lexicographic order of
/// their restricted growth strings.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<usize>,
    k: usize,
    done: bool,
}

impl Iterator for Partitions {
    type Item = Segmentation;

    fn next(&mut self) -> Option<Segmentation> {
        while !self.done {
            let blocks = self.labels.iter().max().map_or(0, |m| m + 1);
            let current =
                (blocks == self.k).then(|| Segmentation::from_labels(&self.labels, self.k));
            self.advance();
            if current.is_some() {
                return current;
            }
        }
        None
    }
}

impl Partitions {
    fn advance(&mut self) {
        let l = self.labels.len();
        for i in (1..l).rev() {
            let prefix_max = self.labels[..i].iter().copied().max().unwrap_or(0);
            if self.labels[i] + 1 < self.k && self.labels[i] <= prefix_max {
                self.labels[i] += 1;
                self.labels[i + 1..].iter_mut().for_each(|v| *v = 0);
                return;
            }
        }
        self.done = true;
    }
}

pub fn enumerate_partitions(l: usize, k: usize) -> Result<Partitions> {
    if l == 0 || l > MAX_RECEIVERS || k == 0 || k > l {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ K ≤ L ≤ {MAX_RECEIVERS}, got L = {l}, K = {k}"
        )));
    }
    Ok(Partitions {
        labels: vec![0; l],
        k,
        done: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationScore {
    pub per_group_capacity: Vec<f64>,
    /// Worst group capacity.
    pub c_q: f64,
    pub per_group_loss: Vec<f64>,
    pub max_loss: f64,
}

fn map_receivers(err: Error, group: &[usize]) -> Error {
    match err {
        Error::Infeasible { receivers, b_max } => Error::Infeasible {
            receivers: receivers.into_iter().map(|r| group[r]).collect(),
            b_max,
        },
        other => other,
    }
}

/// Multicast capacity of the receivers in `group` under their joint
/// constraints.
pub fn group_capacity(group: &[usize], prob: &MulticastProblem) -> Result<f64> {
    let sub = prob.restrict(group)?;
    let all: Vec<usize> = (0..group.len()).collect();
    solve_for(&sub, &all)
        .map(|s| s.value)
        .map_err(|e| map_receivers(e, group))
}

/// `|C_group − min_m max_{q ∈ F_group} I(q; P(m))|`: the gap between the
/// group's capacity and its weakest member served alone, both under the
/// group's joint constraints. Exactly zero for singletons.
pub fn segmentation_loss(group: &[usize], prob: &MulticastProblem) -> Result<f64> {
    Ok(group_score(group, prob)?.loss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GroupScore {
    capacity: f64,
    loss: f64,
}

fn group_score(group: &[usize], prob: &MulticastProblem) -> Result<GroupScore> {
    let capacity = group_capacity(group, prob)?;
    if group.len() == 1 {
        return Ok(GroupScore {
            capacity,
            loss: 0.0,
        });
    }
    let sub = prob.restrict(group)?;
    let mut weakest = f64::INFINITY;
    for m in 0..group.len() {
        let alone = solve_for(&sub, &[m]).map_err(|e| map_receivers(e, group))?;
        weakest = weakest.min(alone.value);
    }
    Ok(GroupScore {
        capacity,
        loss: (capacity - weakest).abs(),
    })
}

fn mask(group: &[usize]) -> u32 {
    group.iter().fold(0, |m, r| m | 1 << r)
}

/// Exhaustive segmentation search over one problem. Group scores are cached
/// by receiver set and shared between searches.
pub struct Segmenter<'a> {
    prob: &'a MulticastProblem,
    cache: RwLock<HashMap<u32, Result<GroupScore>>>,
}

/// A partition with its score, or the error that made one of its groups
/// infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPartition {
    pub segmentation: Segmentation,
    pub score: Result<SegmentationScore>,
}

impl<'a> Segmenter<'a> {
    pub fn new(prob: &'a MulticastProblem) -> Result<Self> {
        if prob.receivers() > MAX_RECEIVERS {
            return Err(Error::InvalidArgument(format!(
                "{} receivers exceed the limit of {MAX_RECEIVERS}",
                prob.receivers()
            )));
        }
        Ok(Self {
            prob,
            cache: RwLock::new(HashMap::new()),
        })
    }

    fn lookup(&self, group: &[usize]) -> Result<GroupScore> {
        let key = mask(group);
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return hit.clone();
        }
        let score = group_score(group, self.prob);
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, score.clone());
        score
    }

    pub fn score(&self, seg: &Segmentation) -> Result<SegmentationScore> {
        let mut per_group_capacity = Vec::with_capacity(seg.len());
        let mut per_group_loss = Vec::with_capacity(seg.len());
        for g in seg.groups() {
            let s = self.lookup(g)?;
            per_group_capacity.push(s.capacity);
            per_group_loss.push(s.loss);
        }
        Ok(SegmentationScore {
            c_q: per_group_capacity
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            max_loss: per_group_loss.iter().copied().fold(0.0, f64::max),
            per_group_capacity,
            per_group_loss,
        })
    }

    /// Scores every K-partition, in canonical order. Distinct groups are
    /// solved in parallel first.
    pub fn scan(&self, k: usize) -> Result<Vec<ScoredPartition>> {
        let partitions: Vec<Segmentation> =
            enumerate_partitions(self.prob.receivers(), k)?.collect();
        let groups: BTreeSet<Vec<usize>> = partitions
            .iter()
            .flat_map(|p| p.groups().iter().cloned())
            .collect();
        groups.par_iter().for_each(|g| {
            self.lookup(g).ok();
        });
        Ok(partitions
            .into_iter()
            .map(|segmentation| ScoredPartition {
                score: self.score(&segmentation),
                segmentation,
            })
            .collect())
    }

    /// Largest worst-group capacity; the canonically first partition wins
    /// ties.
    pub fn optimize_capacity(&self, k: usize) -> Result<(Segmentation, SegmentationScore)> {
        self.best(k, |s| s.c_q)
    }

    /// Smallest worst-group loss; the canonically first partition wins ties.
    pub fn optimize_loss(&self, k: usize) -> Result<(Segmentation, SegmentationScore)> {
        self.best(k, |s| -s.max_loss)
    }

    fn best(
        &self,
        k: usize,
        key: impl Fn(&SegmentationScore) -> f64,
    ) -> Result<(Segmentation, SegmentationScore)> {
        let mut best: Option<(Segmentation, SegmentationScore)> = None;
        let mut first_error = None;
        for p in self.scan(k)? {
            match p.score {
                Ok(score) => {
                    let better = best
                        .as_ref()
                        .is_none_or(|(_, b)| key(&score) > key(b) + SCORE_TIE_TOL);
                    if better {
                        best = Some((p.segmentation, score));
                    }
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        best.ok_or_else(|| first_error.expect("at least one partition exists"))
    }
}

pub fn optimize_capacity(
    prob: &MulticastProblem,
    k: usize,
) -> Result<(Segmentation, SegmentationScore)> {
    Segmenter::new(prob)?.optimize_capacity(k)
}

pub fn optimize_loss(
    prob: &MulticastProblem,
    k: usize,
) -> Result<(Segmentation, SegmentationScore)> {
    Segmenter::new(prob)?.optimize_loss(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bsc, make_z, EnergyFunctional};

    /// BSC(0.3), Z(0.6), Z(0.65) with Hamming energy.
    fn trio(b: f64) -> MulticastProblem {
        MulticastProblem::common(
            vec![
                make_bsc(0.3).unwrap(),
                make_z(0.6).unwrap(),
                make_z(0.65).unwrap(),
            ],
            vec![EnergyFunctional::hamming(); 3],
            b,
        )
        .unwrap()
    }

    fn shown(l: usize, k: usize) -> Vec<String> {
        enumerate_partitions(l, k)
            .unwrap()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn partition_counts_and_order() {
        assert_eq!(shown(3, 2), ["{1,2}{3}", "{1,3}{2}", "{1}{2,3}"]);
        assert_eq!(shown(3, 3), ["{1}{2}{3}"]);
        assert_eq!(shown(4, 2).len(), 7);
        assert_eq!(shown(1, 1), ["{1}"]);
        // Stirling numbers of the second kind.
        for (l, k, s) in [(5, 3, 25), (6, 3, 90), (7, 4, 350), (10, 5, 42_525)] {
            assert_eq!(enumerate_partitions(l, k).unwrap().count(), s);
        }
        assert!(enumerate_partitions(3, 4).is_err());
        assert!(enumerate_partitions(13, 2).is_err());
        assert!(enumerate_partitions(3, 0).is_err());
    }

    #[test]
    fn segmentation_validation() {
        let s = Segmentation::new(3, vec![vec![2, 1], vec![0]]).unwrap();
        assert_eq!(s.groups(), [vec![0], vec![1, 2]]);
        assert!(Segmentation::new(3, vec![vec![0, 1]]).is_err());
        assert!(Segmentation::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Segmentation::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(Segmentation::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn group_examples() {
        let p = trio(0.0);
        let bsc = 0.118_709_100_769_307_3;
        assert!((group_capacity(&[0], &p).unwrap() - bsc).abs() < 1e-9);
        assert_eq!(segmentation_loss(&[1], &p).unwrap(), 0.0);
        assert!((group_capacity(&[0, 1], &p).unwrap() - bsc).abs() < 1e-9);
        assert!(segmentation_loss(&[0, 1], &p).unwrap() < 1e-9);
        let zz = group_capacity(&[1, 2], &p).unwrap();
        assert!((zz - 0.210_714_450_962_005_8).abs() < 1e-9, "{zz}");
        // Z(0.65) is a degraded Z(0.6), so pairing them costs nothing.
        assert!(segmentation_loss(&[1, 2], &p).unwrap() < 1e-9);
    }

    #[test]
    fn infeasible_groups_are_reported_with_global_indices() {
        // Z(0.65) delivers at most 0.35.
        let p = trio(0.4);
        match group_capacity(&[0, 2], &p).unwrap_err() {
            Error::Infeasible { receivers, .. } => assert_eq!(receivers, vec![2]),
            other => panic!("{other}"),
        }
        assert!(optimize_capacity(&p, 2).is_err());
    }

    #[test]
    fn capacity_prefers_grouping_the_z_channels() {
        let (seg, score) = optimize_capacity(&trio(0.25), 2).unwrap();
        assert_eq!(seg.to_string(), "{1}{2,3}");
        assert!((score.c_q - 0.118_709_100_769_307_3).abs() < 1e-8);
    }

    #[test]
    fn loss_is_zero_and_ties_go_to_the_first_partition() {
        let (seg, score) = optimize_loss(&trio(0.1), 2).unwrap();
        assert!(score.max_loss < 1e-6);
        assert_eq!(seg.to_string(), "{1,2}{3}");
    }

    #[test]
    fn singletons_and_identical_channels() {
        let p = trio(0.2);
        let (seg, score) = optimize_capacity(&p, 3).unwrap();
        assert_eq!(seg.to_string(), "{1}{2}{3}");
        assert_eq!(score.max_loss, 0.0);
        let individual = (0..3)
            .map(|r| group_capacity(&[r], &p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(score.c_q, individual);

        let same = MulticastProblem::common(
            vec![make_bsc(0.2).unwrap(); 4],
            vec![EnergyFunctional::hamming(); 4],
            0.3,
        )
        .unwrap();
        let seg = Segmenter::new(&same).unwrap();
        let all = seg.scan(2).unwrap();
        let first = all[0].score.as_ref().unwrap().clone();
        for p in &all {
            let s = p.score.as_ref().unwrap();
            assert!((s.c_q - first.c_q).abs() < 1e-9 && s.max_loss < 1e-9);
        }
        assert_eq!(seg.optimize_capacity(2).unwrap().0, all[0].segmentation);
        assert_eq!(seg.optimize_loss(2).unwrap().0, all[0].segmentation);
    }
}
