//! Parameter sweeps: configuration, deterministic parallel execution and
//! CSV output for every task.

pub mod config;
pub mod table;
mod tasks;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use config::{parse_config, parse_config_for, AxisGrid, ConfigError, ScalingMode, SweepConfig, Task};
use table::{existing_rows, Cell, ResultTable, TIMESTAMP_KEY};

/// Exit codes of the command-line front end.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

const CHECKPOINT_INTERVAL: Duration = Duration::from_secs(2);

/// One output file of a task.
pub(crate) struct FilePlan {
    /// Suffix distinguishing per-measure files.
    pub tag: Option<String>,
    pub metadata: Vec<(String, String)>,
    pub value_header: Vec<String>,
}

type Values = Vec<Vec<Cell>>;

/// A task laid out as independent jobs, each producing a fixed set of rows.
pub(crate) struct Plan {
    pub coord_header: Vec<String>,
    pub files: Vec<FilePlan>,
    pub jobs: usize,
    pub job_rows: Box<dyn Fn(usize) -> Vec<usize> + Sync>,
    pub coords: Box<dyn Fn(usize) -> Vec<Cell> + Sync>,
    /// Per row of the job (in `job_rows` order), the value cells per file.
    pub compute: Box<dyn Fn(usize) -> Result<Vec<Values>, crate::Error> + Sync>,
    /// Summary metadata per file from the rendered rows.
    pub summary: Option<Box<dyn Fn(usize, &[String]) -> Vec<(String, String)> + Sync>>,
}

/// Outcome of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub computed_rows: usize,
    pub failed_rows: usize,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failed_rows > 0 { EXIT_PARTIAL } else { EXIT_OK }
    }
}

/// Failure of the sweep as a whole.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
    Internal(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
            RunError::Internal(e) => write!(f, "internal error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => EXIT_INTERNAL,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn output_path(base: &Path, tag: Option<&str>, several: bool) -> PathBuf {
    match tag {
        Some(t) if several => {
            let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let ext = base.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
            base.with_file_name(format!("{stem}.{t}{ext}"))
        }
        _ => base.to_path_buf(),
    }
}

fn timestamp() -> String {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()).to_string()
}

struct Output {
    path: PathBuf,
    metadata: Vec<(String, String)>,
    header: Vec<String>,
    rows: BTreeMap<usize, String>,
}

impl Output {
    fn table(&self, extra: Vec<(String, String)>) -> ResultTable {
        let mut metadata = self.metadata.clone();
        metadata.extend(extra);
        metadata.push((TIMESTAMP_KEY.into(), timestamp()));
        ResultTable { metadata, header: self.header.clone(), rows: self.rows.values().cloned().collect() }
    }
}

fn render_row(index: usize, coords: &[Cell], values: &[Cell], error: &str) -> String {
    let mut f = vec![index.to_string()];
    f.extend(coords.iter().map(Cell::render));
    f.extend(values.iter().map(Cell::render));
    f.push(table::sanitize(error));
    f.join(",")
}

/// Runs a sweep. Rows already present at the output path from an identical
/// run are kept; only missing indices are computed.
pub fn run(cfg: &SweepConfig) -> Result<RunSummary, RunError> {
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.task.label())));
    let plan = tasks::plan(cfg)?;
    let several = plan.files.len() > 1;
    let mut outputs: Vec<Output> = plan
        .files
        .iter()
        .map(|f| {
            let mut header = vec!["index".to_string()];
            header.extend(plan.coord_header.iter().cloned());
            header.extend(f.value_header.iter().cloned());
            header.push("error".into());
            let path = output_path(&out, f.tag.as_deref(), several);
            let rows = existing_rows(&path, &f.metadata, &header);
            Output { path, metadata: f.metadata.clone(), header, rows }
        })
        .collect();
    let missing: Vec<usize> = (0..plan.jobs)
        .filter(|&j| (plan.job_rows)(j).iter().any(|r| outputs.iter().any(|o| !o.rows.contains_key(r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let chunk = (cfg.workers * 4).max(16);
    let mut last_checkpoint = Instant::now();
    let mut computed_rows = 0;
    for jobs in missing.chunks(chunk) {
        let results: Vec<(usize, Result<Vec<Values>, crate::Error>)> =
            pool.install(|| jobs.par_iter().map(|&j| (j, (plan.compute)(j))).collect());
        for (j, res) in results {
            let rows = (plan.job_rows)(j);
            for (k, &r) in rows.iter().enumerate() {
                let coords = (plan.coords)(r);
                for (fi, o) in outputs.iter_mut().enumerate() {
                    let line = match &res {
                        Ok(v) if v.len() == rows.len() && v[k].len() == plan.files.len() => {
                            render_row(r, &coords, &v[k][fi], "")
                        }
                        Ok(_) => return Err(RunError::Internal(format!("job {j} returned a malformed result"))),
                        Err(e) => {
                            let nan = vec![Cell::Num(f64::NAN); plan.files[fi].value_header.len()];
                            render_row(r, &coords, &nan, &e.to_string())
                        }
                    };
                    o.rows.insert(r, line);
                }
                computed_rows += 1;
            }
        }
        if last_checkpoint.elapsed() > CHECKPOINT_INTERVAL {
            for o in &outputs {
                o.table(Vec::new()).write(&o.path).map_err(RunError::Io)?;
            }
            last_checkpoint = Instant::now();
        }
    }
    let total_rows: usize = outputs.first().map_or(0, |o| o.rows.len());
    let mut failed = std::collections::BTreeSet::new();
    for (fi, o) in outputs.iter().enumerate() {
        let rows: Vec<String> = o.rows.values().cloned().collect();
        for (i, r) in &o.rows {
            if !r.ends_with(',') {
                failed.insert(*i);
            }
        }
        let extra = plan.summary.as_ref().map(|s| s(fi, &rows)).unwrap_or_default();
        o.table(extra).write(&o.path).map_err(RunError::Io)?;
    }
    Ok(RunSummary {
        files: outputs.iter().map(|o| o.path.clone()).collect(),
        rows: total_rows,
        computed_rows,
        failed_rows: failed.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(path: &Path) -> String {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# timestamp="))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn output_names() {
        assert_eq!(output_path(Path::new("a/b.csv"), Some("ln"), true), PathBuf::from("a/b.ln.csv"));
        assert_eq!(output_path(Path::new("a/b.csv"), Some("ln"), false), PathBuf::from("a/b.csv"));
        assert_eq!(output_path(Path::new("b"), Some("qd"), true), PathBuf::from("b.qd"));
    }

    #[test]
    fn phase_diagram_is_deterministic_and_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let text = "task = \"phase-diagram\"\n[grid]\nlambda1 = \"-1.5:1.5:4\"\nlambda2 = \"0:1:3\"\n[run]\nmeasure = \"ln\"\n";
        let mut a = parse_config(text).unwrap();
        a.out = Some(dir.path().join("a.csv"));
        a.workers = 1;
        let mut b = a.clone();
        b.out = Some(dir.path().join("b.csv"));
        b.workers = 3;
        let ra = run(&a).unwrap();
        let rb = run(&b).unwrap();
        assert_eq!((ra.rows, ra.failed_rows), (12, 0));
        assert_eq!(body(&ra.files[0]), body(&rb.files[0]));
        let lines: Vec<String> = body(&ra.files[0]).lines().map(String::from).collect();
        assert!(lines.iter().any(|l| l == "index,lambda1,lambda2,beta,ln,error"));
        assert!(lines.iter().any(|l| l.starts_with("1,-5.00000000000e-1,0,inf,")));

        // drop two rows and rerun: only those are recomputed
        let kept: Vec<String> = std::fs::read_to_string(&ra.files[0])
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("3,") && !l.starts_with("7,"))
            .map(|l| format!("{l}\n"))
            .collect();
        std::fs::write(&ra.files[0], kept.concat()).unwrap();
        let again = run(&a).unwrap();
        assert_eq!(again.computed_rows, 2);
        assert_eq!(body(&again.files[0]), body(&rb.files[0]));
    }

    #[test]
    fn failures_become_nan_rows() {
        let dir = tempfile::tempdir().unwrap();
        let text = "task = \"quench\"\n[grid]\nlambda1 = 0.5\n[quench]\ntimes = \"0:1:2\"\n[run]\nmeasure = \"ln\"\nsize = 8\nlattice = \"exact\"\n";
        let mut c = parse_config(text).unwrap();
        c.out = Some(dir.path().join("q.csv"));
        let r = run(&c).unwrap();
        assert_eq!(r.failed_rows, 2);
        assert_eq!(r.exit_code(), EXIT_PARTIAL);
        let text = std::fs::read_to_string(&r.files[0]).unwrap();
        assert!(text.lines().last().unwrap().contains(",NaN,"));
    }
}
