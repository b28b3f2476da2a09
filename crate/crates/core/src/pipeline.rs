//! Configuration-driven batch runner.
//!
//! Stages run in order: `doe`, `fit`, `sensitivity`, `optimize`, `analyze`,
//! `report`. Every stage reads its inputs from the artifacts earlier stages
//! left in the output directory, so any stage can be re-run on its own and
//! produces the same files as a full run. `manifest.json` records the
//! effective config, the derived seeds, NRMSE values, wall times and the
//! files each stage wrote.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BoxChoice, PipelineConfig, SelectionRule};
use crate::error::{Error, Result};
use crate::moo::{nsga2, Formulation, Nsga2Config, ParetoArchive, PsoConfig};
use crate::objective::{ObjectiveInfo, SurrogateObjectives};
use crate::problems::{self, Problem};
use crate::report::{self, formulation_color, Overlay};
use crate::robust::{
    compare_fronts, posterior_perturbation, PosteriorConfig, PosteriorRecord, RobustConfig, UncertainObjective, Zone,
    ZoneKey, ZonePair, ZoneStatistic,
};
use crate::sampling::{csv_err, fmt_f64, maximin_lhs, train_test_split, SampleKind, SampleMatrix};
use crate::seed::{self, stream};
use crate::sensitivity::{select_uncertain, sobol_indices_multi, Selection, SobolResult};
use crate::space::{Bounds, DesignSpace};
use crate::surrogate::{self, FitOptions, KrigingModel};

pub const MANIFEST: &str = "manifest.json";
const DEFAULT_OUT: &str = "rdopt-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Doe,
    Fit,
    Sensitivity,
    Optimize,
    Analyze,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Doe,
        Stage::Fit,
        Stage::Sensitivity,
        Stage::Optimize,
        Stage::Analyze,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Doe => "doe",
            Stage::Fit => "fit",
            Stage::Sensitivity => "sensitivity",
            Stage::Optimize => "optimize",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub seconds: f64,
    pub files: Vec<String>,
}

/// Run summary written to `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub problem: String,
    pub config: PipelineConfig,
    pub seeds: BTreeMap<String, u64>,
    /// Test-set NRMSE in percent per objective.
    pub nrmse: BTreeMap<String, f64>,
    pub uncertain: Vec<String>,
    /// Front sizes per formulation.
    pub fronts: BTreeMap<String, usize>,
    /// Comparison names, `<a>_vs_<b>`.
    pub comparisons: Vec<String>,
    pub stages: Vec<StageRecord>,
    /// Every file of the run, sorted, relative to the output directory.
    pub files: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::artifact(path, e))
    }

    fn refresh_files(&mut self) {
        let mut files: Vec<String> = self.stages.iter().flat_map(|s| s.files.iter().cloned()).collect();
        files.push(MANIFEST.into());
        files.sort();
        files.dedup();
        self.files = files;
    }
}

/// Pairs compared after posterior analysis, with the statistic that places
/// designs into zones.
pub const COMPARISONS: [(Formulation, Formulation, ZoneStatistic); 3] = [
    (Formulation::Expectation, Formulation::Deterministic, ZoneStatistic::Mean),
    (Formulation::WorstCase, Formulation::Deterministic, ZoneStatistic::WorstCase),
    (Formulation::Expectation, Formulation::WorstCase, ZoneStatistic::Mean),
];

pub fn comparison_name(a: Formulation, b: Formulation) -> String {
    format!("{}_vs_{}", a.name(), b.name())
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

fn formulation_index(f: Formulation) -> u64 {
    Formulation::ALL.iter().position(|g| *g == f).expect("known formulation") as u64
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<Manifest> {
    Pipeline::new(config.clone())?.run_from(Stage::Doe)
}

pub struct Pipeline {
    cfg: PipelineConfig,
    problem: Box<dyn Problem>,
    space: DesignSpace,
    infos: Vec<ObjectiveInfo>,
    out: PathBuf,
}

/// Files written by one stage plus manifest fields it fills in.
#[derive(Default)]
struct StageOutput {
    files: Vec<String>,
    nrmse: Option<BTreeMap<String, f64>>,
    uncertain: Option<Vec<String>>,
    fronts: Option<BTreeMap<String, usize>>,
    comparisons: Option<Vec<String>>,
}

impl Pipeline {
    /// Checks the config against the problem; every failure is a config error.
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let problem = problems::by_name(&cfg.problem, cfg.dim)?;
        let space = match &cfg.variables {
            Some(vars) => {
                if vars.len() != problem.space().dim() {
                    return Err(Error::Config(format!(
                        "variables override has {} entries, problem `{}` has {}",
                        vars.len(),
                        cfg.problem,
                        problem.space().dim()
                    )));
                }
                DesignSpace::checked(vars.clone()).map_err(|e| Error::Config(e.to_string()))?
            }
            None => problem.space().clone(),
        };
        space.ensure_valid().map_err(|e| Error::Config(e.to_string()))?;
        let infos = problem.objectives().to_vec();
        if cfg.zones.objective >= infos.len() {
            return Err(Error::Config(format!(
                "zones.objective = {} but the problem has {} objectives",
                cfg.zones.objective,
                infos.len()
            )));
        }
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(Pipeline {
            cfg,
            problem,
            space,
            infos,
            out,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    /// Runs `start` and every later stage.
    pub fn run_from(&self, start: Stage) -> Result<Manifest> {
        self.run_stages(Stage::ALL.into_iter().filter(|s| *s >= start).collect())
    }

    /// Runs one stage against the artifacts already on disk.
    pub fn run_stage(&self, stage: Stage) -> Result<Manifest> {
        self.run_stages(vec![stage])
    }

    fn run_stages(&self, stages: Vec<Stage>) -> Result<Manifest> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        let first = stages.first().copied().unwrap_or(Stage::Doe);
        let mut manifest = self.initial_manifest(first)?;
        for stage in stages {
            // artifacts of this and every later stage are superseded
            for old in manifest.stages.iter().filter(|r| r.stage >= stage) {
                for f in &old.files {
                    let _ = std::fs::remove_file(self.out.join(f));
                }
            }
            manifest.stages.retain(|r| r.stage < stage);
            log::info!("stage {stage}");
            let t = Instant::now();
            let result = match stage {
                Stage::Doe => self.doe(),
                Stage::Fit => self.fit(),
                Stage::Sensitivity => self.sensitivity(),
                Stage::Optimize => self.optimize(),
                Stage::Analyze => self.analyze(),
                Stage::Report => self.report(),
            };
            let output = match result {
                Ok(o) => o,
                Err(e) => {
                    manifest.refresh_files();
                    let _ = self.write_manifest(&manifest);
                    return Err(Error::Stage {
                        stage: stage.name().into(),
                        source: Box::new(e),
                    });
                }
            };
            if let Some(v) = output.nrmse {
                manifest.nrmse = v;
            }
            if let Some(v) = output.uncertain {
                manifest.uncertain = v;
            }
            if let Some(v) = output.fronts {
                manifest.fronts = v;
            }
            if let Some(v) = output.comparisons {
                manifest.comparisons = v;
            }
            manifest.stages.push(StageRecord {
                stage,
                seconds: t.elapsed().as_secs_f64(),
                files: output.files,
            });
            manifest.refresh_files();
            self.write_manifest(&manifest)?;
        }
        Ok(manifest)
    }

    fn initial_manifest(&self, first: Stage) -> Result<Manifest> {
        let path = self.out.join(MANIFEST);
        let mut m = if path.exists() {
            Manifest::load(&path)?
        } else {
            Manifest {
                problem: self.cfg.problem.clone(),
                config: self.cfg.clone(),
                seeds: BTreeMap::new(),
                nrmse: BTreeMap::new(),
                uncertain: Vec::new(),
                fronts: BTreeMap::new(),
                comparisons: Vec::new(),
                stages: Vec::new(),
                files: Vec::new(),
            }
        };
        if first == Stage::Doe {
            for f in &m.files {
                if f != MANIFEST {
                    let _ = std::fs::remove_file(self.out.join(f));
                }
            }
            m.stages.clear();
            m.nrmse.clear();
            m.uncertain.clear();
            m.fronts.clear();
            m.comparisons.clear();
        }
        m.problem = self.cfg.problem.clone();
        m.config = self.cfg.clone();
        m.seeds = self.seeds();
        Ok(m)
    }

    fn write_manifest(&self, m: &Manifest) -> Result<()> {
        let path = self.out.join(MANIFEST);
        let text = serde_json::to_string_pretty(m).map_err(|e| Error::artifact(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Every seed the run derives from the master seed.
    pub fn seeds(&self) -> BTreeMap<String, u64> {
        let s = self.cfg.seed;
        let mut m = BTreeMap::new();
        m.insert("master".into(), s);
        m.insert("doe".into(), seed::derive(s, stream::DOE, 0));
        m.insert("split".into(), seed::derive(s, stream::SPLIT, 0));
        for (j, info) in self.infos.iter().enumerate() {
            m.insert(format!("fit.{}", info.name), seed::derive(s, stream::FIT, j as u64));
        }
        m.insert("sobol".into(), seed::derive(s, stream::SOBOL, 0));
        for f in &self.cfg.optimize.formulations {
            let k = formulation_index(*f);
            m.insert(format!("optimize.{f}"), seed::derive(s, stream::OPTIMIZE, k));
            if *f != Formulation::Deterministic {
                m.insert(format!("robust.{f}"), seed::derive(s, stream::CRN, k));
            }
        }
        m.insert("posterior".into(), s);
        m
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_text(&self, name: &str, text: &str, files: &mut Vec<String>) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T, files: &mut Vec<String>) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::artifact(self.path(name), e))?;
        self.write_text(name, &(text + "\n"), files)
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<T> {
        let p = self.path(name);
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| Error::artifact(&p, e))
    }

    fn write_csv_with(&self, name: &str, files: &mut Vec<String>, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let p = self.path(name);
        std::fs::write(&p, buf).map_err(|e| Error::io(&p, e))?;
        files.push(name.to_string());
        Ok(())
    }

    fn objective_names(&self) -> Vec<String> {
        self.infos.iter().map(|i| i.name.clone()).collect()
    }

    fn model_file(&self, j: usize) -> String {
        format!("model_{}.json", file_stem(&self.infos[j].name))
    }

    fn doe(&self) -> Result<StageOutput> {
        let mut out = StageOutput::default();
        let d = self.space.dim();
        let n = self.cfg.doe.size;
        let doe_seed = seed::derive(self.cfg.seed, stream::DOE, 0);
        let iters = self.cfg.doe.exchanges.unwrap_or(10 * n * d);
        let unit = maximin_lhs(n, d, doe_seed, iters)?;
        let box_ = match self.cfg.doe.domain {
            BoxChoice::Nominal => Bounds::unit(d),
            BoxChoice::Extended => self.all_tolerances()?.normalized_extended(),
        };
        let native: Vec<Vec<f64>> = unit.rows().map(|z| self.space.denormalize(&box_.from_unit(z))).collect();
        let values: Vec<Vec<f64>> = native
            .par_iter()
            .map(|x| {
                let v = self.problem.evaluate(x).map_err(|e| Error::Evaluation {
                    x: x.clone(),
                    reason: e.to_string(),
                })?;
                if v.iter().any(|y| !y.is_finite()) {
                    return Err(Error::Evaluation {
                        x: x.clone(),
                        reason: "non-finite objective value".into(),
                    });
                }
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let doe = SampleMatrix::from_rows(&native, SampleKind::MaximinLhs, doe_seed)?
            .with_columns(self.space.names())?
            .with_values(self.objective_names(), &values)?;
        let (train, test) = train_test_split(&doe, self.cfg.doe.train, seed::derive(self.cfg.seed, stream::SPLIT, 0))?;
        for (name, s) in [("doe.csv", &doe), ("train.csv", &train), ("test.csv", &test)] {
            self.write_csv_with(name, &mut out.files, |w| s.write_csv(w))?;
        }
        self.write_text("config.toml", &self.cfg.to_toml(), &mut out.files)?;
        Ok(out)
    }

    /// The space with every variable of non-zero tolerance marked uncertain.
    fn all_tolerances(&self) -> Result<DesignSpace> {
        let flags: Vec<bool> = self.space.variables().iter().map(|v| v.tolerance > 0.0).collect();
        self.space.with_uncertain(&flags)
    }

    fn load_samples(&self, name: &str) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let s = SampleMatrix::load(&self.path(name), self.space.dim())?;
        let names = self.objective_names();
        let cols: Vec<Vec<f64>> = names
            .iter()
            .map(|n| {
                let j = s.value_names.iter().position(|v| v == n).ok_or_else(|| Error::artifact(self.path(name), format!("missing column `{n}`")))?;
                Ok(s.value_column(j).expect("values present"))
            })
            .collect::<Result<_>>()?;
        let x = s.rows().map(|r| self.space.normalize_unchecked(r)).collect();
        Ok((x, cols))
    }

    fn fit(&self) -> Result<StageOutput> {
        let mut out = StageOutput::default();
        let (xtr, ytr) = self.load_samples("train.csv")?;
        let (xte, yte) = self.load_samples("test.csv")?;
        let mut nrmse = BTreeMap::new();
        let mut rows = Vec::new();
        for (j, info) in self.infos.iter().enumerate() {
            let kind = self.cfg.surrogate.kernel_for(j);
            let opts = FitOptions {
                restarts: self.cfg.surrogate.restarts,
                seed: seed::derive(self.cfg.seed, stream::FIT, j as u64),
                nugget: self.cfg.surrogate.nugget,
                ..FitOptions::default()
            };
            let model = surrogate::fit(&xtr, &ytr[j], kind, &opts)?;
            let name = self.model_file(j);
            model.save(&self.path(&name))?;
            out.files.push(name);
            let pred: Vec<f64> = xte.iter().map(|x| model.predict_mean(x)).collect::<Result<_>>()?;
            let e = surrogate::nrmse(&yte[j], &pred)?;
            nrmse.insert(info.name.clone(), e);
            rows.push(vec![info.name.clone(), kind.name().to_string(), fmt_f64(e), xtr.len().to_string(), xte.len().to_string()]);
        }
        self.write_csv_with("nrmse.csv", &mut out.files, |w| {
            let mut wr = csv::Writer::from_writer(w);
            wr.write_record(["objective", "kernel", "nrmse_percent", "n_train", "n_test"]).map_err(csv_err)?;
            for r in &rows {
                wr.write_record(r).map_err(csv_err)?;
            }
            wr.flush().map_err(|e| Error::io("nrmse.csv", e))
        })?;
        out.nrmse = Some(nrmse);
        Ok(out)
    }

    fn surrogates(&self) -> Result<SurrogateObjectives> {
        let models = (0..self.infos.len())
            .map(|j| KrigingModel::load(&self.path(&self.model_file(j))))
            .collect::<Result<Vec<_>>>()?;
        SurrogateObjectives::new(models, self.infos.clone())
    }

    fn sensitivity(&self) -> Result<StageOutput> {
        let mut out = StageOutput::default();
        let sur = self.surrogates()?;
        let d = self.space.dim();
        let m = self.infos.len();
        let models = sur.models();
        let mut results = sobol_indices_multi(
            |x| Ok(models.iter().map(|md| md.mean_unchecked(x)).collect()),
            m,
            &Bounds::unit(d),
            self.cfg.sensitivity.n_base,
            self.cfg.seed,
            self.space.names(),
        )?;
        for (r, info) in results.iter_mut().zip(&self.infos) {
            r.output = info.name.clone();
            let stem = file_stem(&info.name);
            self.write_csv_with(&format!("sobol_{stem}.csv"), &mut out.files, |w| r.write_csv(w))?;
            self.write_json(&format!("sobol_{stem}.json"), r, &mut out.files)?;
        }
        let chosen = match self.cfg.sensitivity.selection {
            SelectionRule::TopK => select_uncertain(&results, &self.space, Selection::TopK(self.cfg.sensitivity.top_k.min(d)))?,
            SelectionRule::Threshold => select_uncertain(&results, &self.space, Selection::Threshold(self.cfg.sensitivity.threshold))?,
            SelectionRule::Problem => self.space.clone(),
        };
        let score: Vec<f64> = (0..d).map(|i| results.iter().map(|r| r.total[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
        self.write_csv_with("uncertain.csv", &mut out.files, |w| {
            let mut wr = csv::Writer::from_writer(w);
            wr.write_record(["variable", "lower", "upper", "tolerance", "uncertain", "score"]).map_err(csv_err)?;
            for (v, s) in chosen.variables().iter().zip(&score) {
                wr.write_record([
                    v.name.clone(),
                    fmt_f64(v.lower),
                    fmt_f64(v.upper),
                    fmt_f64(v.tolerance),
                    v.uncertain.to_string(),
                    fmt_f64(*s),
                ])
                .map_err(csv_err)?;
            }
            wr.flush().map_err(|e| Error::io("uncertain.csv", e))
        })?;
        out.uncertain = Some(chosen.variables().iter().filter(|v| v.uncertain).map(|v| v.name.clone()).collect());
        Ok(out)
    }

    /// Design space with the uncertain flags chosen by screening.
    fn robust_space(&self) -> Result<DesignSpace> {
        let p = self.path("uncertain.csv");
        let mut rd = csv::Reader::from_path(&p).map_err(|e| Error::artifact(&p, e))?;
        let mut flags = vec![false; self.space.dim()];
        let mut seen = 0;
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::artifact(&p, e))?;
            let (name, flag) = (rec.get(0).unwrap_or(""), rec.get(4).unwrap_or(""));
            let j = self.space.index_of(name).ok_or_else(|| Error::artifact(&p, format!("unknown variable `{name}`")))?;
            flags[j] = flag.parse::<bool>().map_err(|e| Error::artifact(&p, e))?;
            seen += 1;
        }
        if seen != self.space.dim() {
            return Err(Error::artifact(&p, format!("expected {} rows, found {seen}", self.space.dim())));
        }
        self.space.with_uncertain(&flags)
    }

    fn inner_pso(&self) -> PsoConfig {
        PsoConfig::with_budget(self.cfg.robust.inner_particles, self.cfg.robust.inner_iterations, 0)
    }

    fn front_file(f: Formulation) -> String {
        format!("front_{}.csv", f.name())
    }

    fn optimize(&self) -> Result<StageOutput> {
        let mut out = StageOutput::default();
        let sur = self.surrogates()?;
        let space = self.robust_space()?;
        let mut fronts = BTreeMap::new();
        for &f in &self.cfg.optimize.formulations {
            let k = formulation_index(f);
            let rc = RobustConfig {
                n_expectation: self.cfg.robust.n_expectation,
                inner: self.inner_pso(),
                qmc: self.cfg.robust.qmc,
                seed: seed::derive(self.cfg.seed, stream::CRN, k),
            };
            let objective = UncertainObjective::new(&sur, &space, f, &rc)?;
            let bounds = match self.cfg.optimize.outer_box {
                BoxChoice::Nominal => Bounds::unit(space.dim()),
                BoxChoice::Extended => space.normalized_extended(),
            };
            let nc = Nsga2Config {
                population: self.cfg.optimize.population,
                generations: self.cfg.optimize.generations,
                seed: seed::derive(self.cfg.seed, stream::OPTIMIZE, k),
                ..Nsga2Config::default()
            };
            log::info!("optimizing {f}");
            let mut archive = nsga2(&objective, &bounds, &nc)?.archive.relabel(f, self.infos.clone())?;
            archive.sort();
            let name = Self::front_file(f);
            archive.save(&self.path(&name), &self.space)?;
            out.files.push(name);
            fronts.insert(f.name().to_string(), archive.len());
        }
        out.fronts = Some(fronts);
        Ok(out)
    }

    fn load_front(&self, f: Formulation) -> Result<ParetoArchive> {
        ParetoArchive::load(&self.path(&Self::front_file(f)), &self.space, self.infos.clone())
    }

    fn posterior_file(f: Formulation) -> String {
        format!("posterior_{}.json", f.name())
    }

    fn zones(&self) -> Vec<Zone> {
        if self.cfg.zones.targets.is_empty() {
            return vec![Zone::all()];
        }
        self.cfg
            .zone_names()
            .into_iter()
            .zip(&self.cfg.zones.targets)
            .map(|(n, &t)| Zone::new(n, t, self.cfg.zones.tol))
            .collect()
    }

    fn comparisons(&self) -> Vec<(Formulation, Formulation, ZoneKey)> {
        let have = &self.cfg.optimize.formulations;
        COMPARISONS
            .iter()
            .filter(|(a, b, _)| have.contains(a) && have.contains(b))
            .map(|&(a, b, statistic)| {
                (
                    a,
                    b,
                    ZoneKey {
                        objective: self.cfg.zones.objective,
                        statistic,
                    },
                )
            })
            .collect()
    }

    fn pairs(&self, posterior: &BTreeMap<Formulation, Vec<PosteriorRecord>>, a: Formulation, b: Formulation, key: ZoneKey) -> Result<Vec<ZonePair>> {
        compare_fronts(&posterior[&a], &posterior[&b], &self.infos, &self.zones(), key)
    }

    fn analyze(&self) -> Result<StageOutput> {
        let mut out = StageOutput::default();
        let sur = self.surrogates()?;
        let space = self.robust_space()?;
        let pc = PosteriorConfig {
            n: self.cfg.robust.n_posterior,
            worst_case: self.cfg.robust.posterior_worst_case,
            inner: self.inner_pso(),
            qmc: self.cfg.robust.qmc,
            seed: self.cfg.seed,
        };
        let mut posterior = BTreeMap::new();
        for &f in &self.cfg.optimize.formulations {
            let front = self.load_front(f)?;
            let designs: Vec<Vec<f64>> = front.members().iter().map(|m| m.x.clone()).collect();
            log::info!("posterior analysis of {} {f} designs", designs.len());
            let records = posterior_perturbation(&designs, &sur, &space, &pc)?;
            self.write_csv_with(&format!("posterior_{}.csv", f.name()), &mut out.files, |w| {
                report::write_posterior_csv(w, &records, &self.space, &self.infos)
            })?;
            self.write_json(&Self::posterior_file(f), &records, &mut out.files)?;
            posterior.insert(f, records);
        }
        let mut names = Vec::new();
        for (a, b, key) in self.comparisons() {
            let pairs = self.pairs(&posterior, a, b, key)?;
            let name = comparison_name(a, b);
            self.write_csv_with(&format!("zones_{name}.csv"), &mut out.files, |w| {
                report::write_zones_csv(w, &pairs, [a.name(), b.name()], &self.infos)
            })?;
            self.write_json(&format!("zones_{name}.json"), &pairs, &mut out.files)?;
            names.push(name);
        }
        out.comparisons = Some(names);
        Ok(out)
    }

    /// Objective shown in boxplots: the first one not used to define zones.
    fn boxplot_objective(&self) -> usize {
        (0..self.infos.len()).find(|&j| j != self.cfg.zones.objective).unwrap_or(0)
    }

    fn report(&self) -> Result<StageOutput> {
        let mut out = StageOutput::default();
        for info in &self.infos {
            let stem = file_stem(&info.name);
            let r: SobolResult = self.read_json(&format!("sobol_{stem}.json"))?;
            self.write_text(&format!("sobol_{stem}.svg"), &report::emit_sobol_svg(&r, 6), &mut out.files)?;
        }
        let have = self.cfg.optimize.formulations.clone();
        let mut posterior = BTreeMap::new();
        for &f in &have {
            posterior.insert(f, self.read_json::<Vec<PosteriorRecord>>(&Self::posterior_file(f))?);
        }
        let zones: Vec<Zone> = self.zones().into_iter().filter(|z| !z.is_all()).collect();
        if self.infos.len() >= 2 && have.contains(&Formulation::Deterministic) {
            let det = self.load_front(Formulation::Deterministic)?;
            for (f, color, worst) in [(Formulation::Expectation, "#e377c2", false), (Formulation::WorstCase, "#98df8a", true)] {
                if !have.contains(&f) {
                    continue;
                }
                let other = self.load_front(f)?;
                let points: Vec<[f64; 2]> = posterior[&Formulation::Deterministic]
                    .iter()
                    .filter_map(|r| r.stats.as_ref())
                    .filter_map(|s| {
                        let nat = s.natural(&self.infos);
                        let v = |o: &crate::robust::ObjectiveStats| if worst { o.worst_case } else { Some(o.summary.mean) };
                        Some([v(&nat[0])?, v(&nat[1])?])
                    })
                    .collect();
                let mut overlays = Vec::new();
                if !points.is_empty() {
                    overlays.push(Overlay {
                        label: format!("deterministic, posterior {}", if worst { "worst case" } else { "mean" }),
                        color: color.into(),
                        points,
                    });
                }
                let svg = report::emit_front_svg(&[&det, &other], &overlays, &zones, &format!("deterministic vs {f} front"))?;
                self.write_text(&format!("front_{}.svg", f.name()), &svg, &mut out.files)?;
            }
        }
        let j = self.boxplot_objective();
        for (a, b, key) in self.comparisons() {
            let pairs = self.pairs(&posterior, a, b, key)?;
            let name = comparison_name(a, b);
            let svg = report::emit_boxplot_svg(
                &pairs,
                j,
                &self.infos[j],
                [(a.name(), formulation_color(a)), (b.name(), formulation_color(b))],
                &format!("posterior {}: {a} vs {b}", self.infos[j].name),
            )?;
            self.write_text(&format!("boxplot_{name}.svg"), &svg, &mut out.files)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(problem: &str, dir: &Path) -> PipelineConfig {
        let mut c = PipelineConfig::for_problem(problem);
        c.out = Some(dir.to_path_buf());
        c.doe.size = 24;
        c.doe.train = 18;
        c.surrogate.restarts = 2;
        c.sensitivity.n_base = 64;
        c.optimize.population = 12;
        c.optimize.generations = 5;
        c.robust.n_expectation = 8;
        c.robust.n_posterior = 16;
        c.robust.inner_particles = 4;
        c.robust.inner_iterations = 4;
        c
    }

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!(matches!("fitt".parse::<Stage>(), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_only_run_has_no_robust_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small("quadratic", dir.path());
        c.optimize.formulations = vec![Formulation::Deterministic];
        let m = run_pipeline(&c).unwrap();
        assert!(m.files.contains(&"front_deterministic.csv".to_string()));
        assert!(!m.files.iter().any(|f| f.contains("expectation") || f.contains("worst_case")));
        assert!(m.comparisons.is_empty());
        for f in &m.files {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn config_errors_are_reported_before_running() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small("quadratic", dir.path());
        c.zones.objective = 3;
        assert!(matches!(Pipeline::new(c), Err(Error::Config(_))));
        let mut c = small("nope", dir.path());
        c.problem = "nope".into();
        assert!(matches!(Pipeline::new(c), Err(Error::Config(_))));
    }

    #[test]
    fn missing_inputs_fail_with_stage_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(small("quadratic", dir.path())).unwrap();
        match p.run_stage(Stage::Fit) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "fit"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
