use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveInfo;
use crate::sampling::{csv_err, fmt_f64};
use crate::space::DesignSpace;

use super::dominates;

/// Which optimization problem produced a front.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Deterministic,
    Expectation,
    WorstCase,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::Deterministic, Formulation::Expectation, Formulation::WorstCase];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Deterministic => "deterministic",
            Formulation::Expectation => "expectation",
            Formulation::WorstCase => "worst_case",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown formulation `{s}`")))
    }
}

/// One archived design: normalized point and minimization-form objectives.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
}

/// Mutually non-dominated designs (minimization convention).
#[derive(Clone, Debug)]
pub struct ParetoArchive {
    formulation: Formulation,
    infos: Vec<ObjectiveInfo>,
    members: Vec<Member>,
}

impl ParetoArchive {
    pub fn new(formulation: Formulation, infos: Vec<ObjectiveInfo>) -> Self {
        ParetoArchive {
            formulation,
            infos,
            members: Vec::new(),
        }
    }

    /// Archive with `m` anonymous minimized objectives `f1..fm`.
    pub fn anonymous(m: usize) -> Self {
        let infos = (1..=m).map(|j| ObjectiveInfo::minimize(&format!("f{j}"), "")).collect();
        ParetoArchive::new(Formulation::Deterministic, infos)
    }

    /// Same members under a new tag and objective metadata.
    pub fn relabel(mut self, formulation: Formulation, infos: Vec<ObjectiveInfo>) -> Result<Self> {
        if infos.len() != self.infos.len() {
            return Err(Error::DimensionMismatch {
                expected: self.infos.len(),
                found: infos.len(),
            });
        }
        self.formulation = formulation;
        self.infos = infos;
        Ok(self)
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn infos(&self) -> &[ObjectiveInfo] {
        &self.infos
    }

    pub fn n_objectives(&self) -> usize {
        self.infos.len()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Inserts `(x, f)` unless an existing member is at least as good in
    /// every objective; drops members the newcomer dominates. Returns
    /// whether the point was kept.
    pub fn insert(&mut self, x: &[f64], objectives: &[f64]) -> bool {
        debug_assert_eq!(objectives.len(), self.infos.len());
        if self
            .members
            .iter()
            .any(|m| m.objectives.iter().zip(objectives).all(|(a, b)| a <= b))
        {
            return false;
        }
        self.members.retain(|m| !dominates(objectives, &m.objectives));
        self.members.push(Member {
            x: x.to_vec(),
            objectives: objectives.to_vec(),
        });
        true
    }

    pub fn merge(&mut self, other: &ParetoArchive) {
        for m in &other.members {
            self.insert(&m.x, &m.objectives);
        }
    }

    /// Objective `j` of every member in natural (display) sign.
    pub fn natural_column(&self, j: usize) -> Vec<f64> {
        self.members.iter().map(|m| self.infos[j].to_natural(m.objectives[j])).collect()
    }

    pub fn natural(&self, i: usize) -> Vec<f64> {
        self.members[i]
            .objectives
            .iter()
            .zip(&self.infos)
            .map(|(v, info)| info.to_natural(*v))
            .collect()
    }

    /// Members sorted by the first objective, for stable output order.
    pub fn sort(&mut self) {
        self.members.sort_by(|a, b| {
            a.objectives
                .iter()
                .zip(&b.objectives)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    /// One row per design: variables in native units, natural objective
    /// values, formulation tag.
    pub fn write_csv<W: Write>(&self, w: W, space: &DesignSpace) -> Result<()> {
        if space.dim() != self.members.first().map_or(space.dim(), |m| m.x.len()) {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: self.members[0].x.len(),
            });
        }
        let mut wr = csv::Writer::from_writer(w);
        let mut header = space.names();
        header.extend(self.infos.iter().map(|i| i.name.clone()));
        header.push("formulation".into());
        wr.write_record(&header).map_err(csv_err)?;
        for (i, m) in self.members.iter().enumerate() {
            let mut rec: Vec<String> = space.denormalize(&m.x).into_iter().map(fmt_f64).collect();
            rec.extend(self.natural(i).into_iter().map(fmt_f64));
            rec.push(self.formulation.name().into());
            wr.write_record(&rec).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv). Columns are matched by
    /// name.
    pub fn read_csv<R: Read>(r: R, space: &DesignSpace, infos: Vec<ObjectiveInfo>) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::invalid(format!("missing column `{name}`")))
        };
        let var_cols: Vec<usize> = space.names().iter().map(|n| find(n)).collect::<Result<_>>()?;
        let obj_cols: Vec<usize> = infos.iter().map(|i| find(&i.name)).collect::<Result<_>>()?;
        let tag_col = find("formulation")?;
        let mut formulation = None;
        let mut members = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let num = |c: usize| {
                let s = rec.get(c).unwrap_or("").trim();
                s.parse::<f64>().map_err(|e| Error::invalid(format!("bad number `{s}`: {e}")))
            };
            let native: Vec<f64> = var_cols.iter().map(|&c| num(c)).collect::<Result<_>>()?;
            let objectives: Vec<f64> = obj_cols
                .iter()
                .zip(&infos)
                .map(|(&c, info)| num(c).map(|v| info.to_min(v)))
                .collect::<Result<_>>()?;
            let tag: Formulation = rec.get(tag_col).unwrap_or("").parse()?;
            if formulation.is_some_and(|f| f != tag) {
                return Err(Error::invalid("mixed formulation tags in one archive"));
            }
            formulation = Some(tag);
            members.push(Member {
                x: space.normalize_unchecked(&native),
                objectives,
            });
        }
        Ok(ParetoArchive {
            formulation: formulation.unwrap_or(Formulation::Deterministic),
            infos,
            members,
        })
    }

    pub fn save(&self, path: &Path, space: &DesignSpace) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f), space)
    }

    pub fn load(path: &Path, space: &DesignSpace, infos: Vec<ObjectiveInfo>) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        ParetoArchive::read_csv(f, space, infos).map_err(|e| Error::artifact(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_keeps_mutual_non_dominance() {
        let mut a = ParetoArchive::anonymous(2);
        assert!(a.insert(&[0.0], &[1.0, 2.0]));
        assert!(a.insert(&[0.1], &[2.0, 1.0]));
        assert!(!a.insert(&[0.2], &[2.0, 2.0]));
        assert!(!a.insert(&[0.3], &[1.0, 2.0]), "duplicates are rejected");
        assert!(a.insert(&[0.4], &[0.5, 1.5]));
        assert_eq!(a.len(), 2);
        for m in a.members() {
            for k in a.members() {
                assert!(!dominates(&m.objectives, &k.objectives));
            }
        }
    }

    #[test]
    fn single_objective_degenerates_to_best() {
        let mut a = ParetoArchive::anonymous(1);
        for v in [3.0, 1.0, 2.0, 1.0, 5.0] {
            a.insert(&[v], &[v]);
        }
        assert_eq!(a.len(), 1);
        assert_eq!(a.members()[0].objectives, vec![1.0]);
    }

    #[test]
    fn csv_round_trip_restores_signs_and_units() {
        let space = DesignSpace::uniform(2, -1.0, 3.0, 0.0, false);
        let infos = vec![ObjectiveInfo::maximize("torque", "N·m"), ObjectiveInfo::minimize("ripple", "%")];
        let mut a = ParetoArchive::new(Formulation::WorstCase, infos.clone());
        a.insert(&[0.25, 0.5], &[-430.0, 4.5]);
        a.insert(&[0.75, 0.1], &[-440.0, 5.5]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf, &space).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,torque,ripple,formulation\n"));
        assert!(text.contains("4.3000000000000000e2"));
        assert!(text.contains("worst_case"));
        let b = ParetoArchive::read_csv(buf.as_slice(), &space, infos).unwrap();
        assert_eq!(b.formulation(), Formulation::WorstCase);
        assert_eq!(b.members(), a.members());
    }

    #[test]
    fn formulation_names_parse() {
        for f in Formulation::ALL {
            assert_eq!(f.name().parse::<Formulation>().unwrap(), f);
        }
        assert!("robust".parse::<Formulation>().is_err());
    }
}
