//! JSON job files: a problem description plus a list of tasks.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::CertificateSpec;
use crate::model::{
    validate, BoundingBox, OccupationProblem, SdeModel, SemialgebraicSet, SetKind,
};
use crate::poly::Polynomial;
use crate::simulate::{SimConfig, DEFAULT_DT, DEFAULT_PATHS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub inequalities: Vec<Polynomial>,
    pub kind: SetKind,
}

impl SetSpec {
    pub fn of(set: &SemialgebraicSet) -> Self {
        SetSpec {
            inequalities: set.inequalities().to_vec(),
            kind: set.kind(),
        }
    }
}

/// Serialized form of an [`OccupationProblem`]. The state dimension is the
/// length of `initial_state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub drift: Vec<Polynomial>,
    /// Row-major `n x m` matrix.
    pub diffusion: Vec<Vec<Polynomial>>,
    pub initial_state: Vec<f64>,
    pub safe: SetSpec,
    pub target: SetSpec,
    pub horizon: f64,
    pub threshold: f64,
    pub bounding_box: BoundingBox,
}

impl ProblemSpec {
    pub fn of(problem: &OccupationProblem) -> Self {
        ProblemSpec {
            drift: problem.model.drift().to_vec(),
            diffusion: problem.model.diffusion().to_vec(),
            initial_state: problem.model.initial_state().to_vec(),
            safe: SetSpec::of(&problem.safe),
            target: SetSpec::of(&problem.target),
            horizon: problem.horizon,
            threshold: problem.threshold,
            bounding_box: problem.bounding_box.clone(),
        }
    }

    /// Builds and validates the problem. Issues carry pointers relative to
    /// the document root, assuming the spec sits at `/problem`.
    pub fn build(&self) -> Result<OccupationProblem, Vec<ConfigIssue>> {
        let n = self.initial_state.len();
        let mut issues = Vec::new();
        if n == 0 {
            issues.push(ConfigIssue::new(
                "/problem/initial_state",
                "state dimension must be at least 1",
            ));
            return Err(issues);
        }
        let mut polys: Vec<(String, &Polynomial)> = Vec::new();
        for (i, f) in self.drift.iter().enumerate() {
            polys.push((format!("/problem/drift/{i}"), f));
        }
        for (i, row) in self.diffusion.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                polys.push((format!("/problem/diffusion/{i}/{j}"), s));
            }
        }
        for (name, set) in [("safe", &self.safe), ("target", &self.target)] {
            for (i, g) in set.inequalities.iter().enumerate() {
                polys.push((format!("/problem/{name}/inequalities/{i}"), g));
            }
            if set.inequalities.is_empty() {
                issues.push(ConfigIssue::new(
                    format!("/problem/{name}/inequalities"),
                    "at least one inequality is required",
                ));
            }
        }
        for (ptr, p) in polys {
            if p.dim() != n {
                issues.push(ConfigIssue::new(
                    ptr,
                    format!("polynomial has {} variables, expected {n}", p.dim()),
                ));
            }
        }
        if self.drift.len() != n {
            issues.push(ConfigIssue::new(
                "/problem/drift",
                format!("expected {n} drift components, found {}", self.drift.len()),
            ));
        }
        let m = self.diffusion.first().map_or(0, Vec::len);
        if self.diffusion.len() != n || m == 0 || self.diffusion.iter().any(|r| r.len() != m) {
            issues.push(ConfigIssue::new(
                "/problem/diffusion",
                format!("diffusion must be an {n} x m matrix with m >= 1"),
            ));
        }
        if let Err(e) = BoundingBox::new(
            self.bounding_box.lower.clone(),
            self.bounding_box.upper.clone(),
        ) {
            issues.push(ConfigIssue::new("/problem/bounding_box", e.to_string()));
        }
        if !issues.is_empty() {
            return Err(issues);
        }

        let model = SdeModel::new(
            self.drift.clone(),
            self.diffusion.clone(),
            self.initial_state.clone(),
        )
        .map_err(|e| vec![ConfigIssue::new("/problem", e.to_string())])?;
        let set = |name: &str, s: &SetSpec| {
            SemialgebraicSet::new(n, s.inequalities.clone(), s.kind)
                .map_err(|e| vec![ConfigIssue::new(format!("/problem/{name}"), e.to_string())])
        };
        let problem = OccupationProblem::new(
            model,
            set("safe", &self.safe)?,
            set("target", &self.target)?,
            self.horizon,
            self.threshold,
            self.bounding_box.clone(),
        );
        let violations = validate(&problem);
        if violations.is_empty() {
            Ok(problem)
        } else {
            Err(violations
                .into_iter()
                .map(|v| {
                    let ptr = if v.field == "problem" {
                        "/problem".to_string()
                    } else {
                        format!("/problem/{}", v.field)
                    };
                    ConfigIssue::new(ptr, v.message)
                })
                .collect())
        }
    }
}

/// Monte Carlo check of a certificate's expectation inequality.
///
/// The certificate comes either from a JSON file (relative paths resolve
/// against the job's `output_dir`) or from the best certificate of an earlier
/// verify task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditTask {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_task: Option<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_paths() -> usize {
    DEFAULT_PATHS
}

impl AuditTask {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.dt, self.n_paths, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Verify(CertificateSpec),
    Simulate(SimConfig),
    Audit(AuditTask),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Verify(_) => "verify",
            Task::Simulate(_) => "simulate",
            Task::Audit(_) => "audit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub problem: ProblemSpec,
    pub tasks: Vec<Task>,
    pub output_dir: PathBuf,
}

impl JobConfig {
    pub fn problem(&self) -> Result<OccupationProblem, ConfigError> {
        self.problem.build().map_err(ConfigError::Schema)
    }

    /// Replaces the seed of every simulate and audit task.
    pub fn override_seed(&mut self, seed: u64) {
        for t in &mut self.tasks {
            match t {
                Task::Simulate(c) => c.seed = seed,
                Task::Audit(a) => a.seed = seed,
                Task::Verify(_) => {}
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// One schema or validation problem, located by JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigIssue {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.pointer.is_empty() {
            "/"
        } else {
            &self.pointer
        };
        write!(f, "{p}: {}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config:\n{}", format_issues(.0))]
    Schema(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Schema(v) => v,
            ConfigError::Json { .. } => &[],
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn escape_token(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", escape_token(key))),
            Segment::Enum { variant } => out.push_str(&format!("/{}", escape_token(variant))),
            Segment::Unknown => {}
        }
    }
    out
}

/// Parses and fully validates a job file.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let job: JobConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let ptr = pointer_of(e.path());
        ConfigError::Schema(vec![ConfigIssue::new(ptr, e.into_inner().to_string())])
    })?;
    let issues = check(&job);
    if issues.is_empty() {
        Ok(job)
    } else {
        Err(ConfigError::Schema(issues))
    }
}

fn check(job: &JobConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    if job.tasks.is_empty() {
        issues.push(ConfigIssue::new("/tasks", "tasks must be non-empty"));
    }
    if job.output_dir.as_os_str().is_empty() {
        issues.push(ConfigIssue::new("/output_dir", "output_dir must not be empty"));
    }
    if let Err(mut v) = job.problem.build() {
        issues.append(&mut v);
    }
    for (i, task) in job.tasks.iter().enumerate() {
        let ptr = format!("/tasks/{i}/{}", task.kind());
        match task {
            Task::Verify(spec) => {
                if let Err(e) = spec.check() {
                    issues.push(ConfigIssue::new(ptr, e.to_string()));
                }
            }
            Task::Simulate(cfg) => {
                if let Err(e) = cfg.check() {
                    issues.push(ConfigIssue::new(ptr.clone(), e.to_string()));
                }
                if let Some(c) = &cfg.audit {
                    if c.v.dim() != job.problem.initial_state.len() {
                        issues.push(ConfigIssue::new(
                            format!("{ptr}/audit/v"),
                            "certificate dimension does not match the problem",
                        ));
                    }
                }
            }
            Task::Audit(a) => {
                if let Err(e) = a.sim_config().check() {
                    issues.push(ConfigIssue::new(ptr.clone(), e.to_string()));
                }
                match (&a.certificate, a.from_task) {
                    (Some(_), None) => {}
                    (None, Some(j)) => {
                        if j >= i || !matches!(job.tasks[j], Task::Verify(_)) {
                            issues.push(ConfigIssue::new(
                                format!("{ptr}/from_task"),
                                "from_task must name an earlier verify task",
                            ));
                        }
                    }
                    _ => issues.push(ConfigIssue::new(
                        ptr,
                        "exactly one of certificate and from_task is required",
                    )),
                }
            }
        }
    }
    issues
}
