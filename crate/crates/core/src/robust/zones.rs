use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::ParetoArchive;
use crate::objective::ObjectiveInfo;

use super::{ObjectiveStats, PosteriorRecord};

/// A band `target ± tol` of one objective's natural value. A zone with a
/// non-finite target and infinite tolerance matches everything and pairs
/// the best design of each front instead of the closest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub name: String,
    pub target: f64,
    pub tol: f64,
}

impl Zone {
    pub fn new(name: impl Into<String>, target: f64, tol: f64) -> Self {
        Zone {
            name: name.into(),
            target,
            tol,
        }
    }

    pub fn all() -> Self {
        Zone::new("ALL", f64::NAN, f64::INFINITY)
    }

    pub fn is_all(&self) -> bool {
        !self.target.is_finite() && self.tol == f64::INFINITY
    }

    pub fn contains(&self, v: f64) -> bool {
        self.tol == f64::INFINITY || (v - self.target).abs() <= self.tol
    }
}

/// Which posterior statistic places a design in a zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneStatistic {
    Mean,
    Median,
    WorstCase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneKey {
    pub objective: usize,
    pub statistic: ZoneStatistic,
}

impl ZoneKey {
    fn value(&self, stats: &[ObjectiveStats]) -> Option<f64> {
        let s = stats.get(self.objective)?;
        match self.statistic {
            ZoneStatistic::Mean => Some(s.summary.mean),
            ZoneStatistic::Median => Some(s.summary.q2),
            ZoneStatistic::WorstCase => s.worst_case,
        }
    }
}

/// Archive members whose natural value of `objective` lies in
/// `[target - tol, target + tol]`.
pub fn zone_select(archive: &ParetoArchive, objective: usize, target: f64, tol: f64) -> Vec<usize> {
    let zone = Zone::new("", target, tol);
    archive
        .natural_column(objective)
        .into_iter()
        .enumerate()
        .filter(|(_, v)| zone.contains(*v))
        .map(|(i, _)| i)
        .collect()
}

/// One design picked from a front for a zone, with natural statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matched {
    pub index: usize,
    pub key: f64,
    pub stats: Vec<ObjectiveStats>,
}

/// Differences `a - b` of natural statistics for one objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub mean: f64,
    pub std: f64,
    pub q3: f64,
    pub worst_case: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZonePair {
    pub zone: Zone,
    pub a: Option<Matched>,
    pub b: Option<Matched>,
    /// Per-objective deltas when both sides matched.
    pub deltas: Option<Vec<Delta>>,
}

impl ZonePair {
    pub fn is_populated(&self) -> bool {
        self.a.is_some() && self.b.is_some()
    }
}

fn pick(records: &[PosteriorRecord], infos: &[ObjectiveInfo], zone: &Zone, key: ZoneKey) -> Option<Matched> {
    let mut best: Option<(f64, Matched)> = None;
    for (index, r) in records.iter().enumerate() {
        let Some(s) = &r.stats else { continue };
        let stats = s.natural(infos);
        let Some(v) = key.value(&stats) else { continue };
        if !zone.contains(v) {
            continue;
        }
        let score = if zone.is_all() {
            infos[key.objective].to_min(v)
        } else {
            (v - zone.target).abs()
        };
        if best.as_ref().map_or(true, |(b, _)| score < *b) {
            best = Some((score, Matched { index, key: v, stats }));
        }
    }
    best.map(|(_, m)| m)
}

/// Pairs, per zone, the design of each front whose key statistic is closest
/// to the zone target. Zones empty on either side come back unmatched.
pub fn compare_fronts(
    a: &[PosteriorRecord],
    b: &[PosteriorRecord],
    infos: &[ObjectiveInfo],
    zones: &[Zone],
    key: ZoneKey,
) -> Result<Vec<ZonePair>> {
    if key.objective >= infos.len() {
        return Err(Error::invalid(format!("zone objective {} out of range", key.objective)));
    }
    Ok(zones
        .iter()
        .map(|zone| {
            let (ma, mb) = (pick(a, infos, zone, key), pick(b, infos, zone, key));
            let deltas = match (&ma, &mb) {
                (Some(x), Some(y)) => Some(
                    x.stats
                        .iter()
                        .zip(&y.stats)
                        .map(|(p, q)| Delta {
                            mean: p.summary.mean - q.summary.mean,
                            std: p.summary.std - q.summary.std,
                            q3: p.summary.q3 - q.summary.q3,
                            worst_case: p.worst_case.zip(q.worst_case).map(|(u, v)| u - v),
                        })
                        .collect(),
                ),
                _ => None,
            };
            ZonePair {
                zone: zone.clone(),
                a: ma,
                b: mb,
                deltas,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moo::Formulation;
    use crate::robust::{boxplot_stats, RobustStats};

    fn record(values: &[f64]) -> PosteriorRecord {
        let summary = boxplot_stats(values).unwrap();
        PosteriorRecord {
            x: vec![0.0],
            stats: Some(RobustStats {
                x: vec![0.0],
                n: values.len(),
                objectives: vec![ObjectiveStats {
                    summary,
                    worst_case: Some(summary.max),
                }],
            }),
            error: None,
        }
    }

    #[test]
    fn torque_zones_select_bands() {
        let infos = vec![ObjectiveInfo::maximize("torque", "N·m"), ObjectiveInfo::minimize("ripple", "%")];
        let mut a = ParetoArchive::new(Formulation::Expectation, infos);
        for (t, r) in [(429.95, 3.0), (430.2, 3.1), (435.05, 3.5), (441.0, 4.0), (450.0, 5.0)] {
            a.insert(&[t], &[-t, r]);
        }
        let targets = [430.0, 435.0, 440.0, 445.0, 450.0];
        let hits: Vec<usize> = targets.iter().map(|&t| zone_select(&a, 0, t, 0.1).len()).collect();
        assert_eq!(hits, vec![1, 1, 0, 0, 1]);
        assert_eq!(zone_select(&a, 0, 0.0, f64::INFINITY).len(), a.len());
        assert!(zone_select(&a, 0, 500.0, 0.1).is_empty());
    }

    #[test]
    fn self_comparison_has_zero_deltas() {
        let infos = vec![ObjectiveInfo::minimize("f", "")];
        let front = vec![record(&[1.0, 2.0, 3.0]), record(&[4.0, 5.0, 9.0])];
        let zones = vec![Zone::new("A", 2.0, 0.5), Zone::new("B", 7.0, 0.5), Zone::all()];
        let key = ZoneKey {
            objective: 0,
            statistic: ZoneStatistic::Mean,
        };
        let pairs = compare_fronts(&front, &front, &infos, &zones, key).unwrap();
        assert!(pairs[0].is_populated());
        for d in pairs[0].deltas.as_ref().unwrap() {
            assert_eq!((d.mean, d.std, d.q3, d.worst_case), (0.0, 0.0, 0.0, Some(0.0)));
        }
        assert!(!pairs[1].is_populated() && pairs[1].deltas.is_none());
        assert_eq!(pairs[2].a.as_ref().unwrap().index, 0);
    }

    #[test]
    fn closest_design_wins_and_failures_are_skipped() {
        let infos = vec![ObjectiveInfo::minimize("f", "")];
        let mut failed = record(&[2.0]);
        failed.stats = None;
        failed.error = Some("boom".into());
        let a = vec![record(&[1.9]), failed, record(&[2.05])];
        let b = vec![record(&[2.3])];
        let key = ZoneKey {
            objective: 0,
            statistic: ZoneStatistic::Mean,
        };
        let p = compare_fronts(&a, &b, &infos, &[Zone::new("Z", 2.0, 0.5)], key).unwrap();
        assert_eq!(p[0].a.as_ref().unwrap().index, 2);
        let d = p[0].deltas.as_ref().unwrap()[0];
        assert!((d.mean - (2.05 - 2.3)).abs() < 1e-12);
    }
}
