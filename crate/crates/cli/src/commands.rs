use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use terracini_core::conditioning::{cpdcond_with, CondOptions};
use terracini_core::decomp::{cpd_gevd, kruskal_check_with, DEFAULT_KRUSKAL_TOL};
use terracini_core::lab::{gen_random_factors, run_experiment, seeded_rng, unit_vector, SampleKind};
use terracini_core::scaling::{distance_with, iterated_scaling, DistanceOptions};
use terracini_core::tensor::io::{params_from_json, params_to_json, tensor_from_json, tensor_to_json, DecompositionFile};
use terracini_core::{build_terracini, cpdgen, kernel_basis, ConditionState, Error, Params};

use crate::{Cli, Command, Format};

/// Process exit status. Diagnostics go to stderr, payloads to stdout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failure = 1,
    AccuracyWarning = 2,
    NotSubgeneric = 3,
    SolverFailed = 4,
}

#[derive(Debug)]
pub struct CliError {
    status: Status,
    message: String,
}

impl CliError {
    pub fn status(&self) -> Status {
        self.status
    }

    fn context(path: &Path, e: Error) -> Self {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DecompositionFailed(_) | Error::NotConverged { .. } => Status::SolverFailed,
            _ => Status::Failure,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Direction of the kernel perturbation fed to `isl`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelDir {
    Column(usize),
    Random(u64),
}

impl FromStr for KernelDir {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(KernelDir::Random)
                .map_err(|e| format!("bad seed `{seed}`: {e}"));
        }
        s.parse()
            .map(KernelDir::Column)
            .map_err(|_| format!("expected a column index or random:<seed>, got `{s}`"))
    }
}

fn read_params(path: &Path) -> Result<Params> {
    let text = fs::read_to_string(path).map_err(|e| CliError::context(path, e.into()))?;
    params_from_json(&text).map_err(|e| CliError::context(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::context(path, e.into()))
}

/// Writes `payload` to `out`, or to stdout when no path is given.
fn emit(out: Option<&PathBuf>, payload: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, payload).map_err(|e| CliError::context(path, e.into())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(payload.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable payload") + "\n"
}

fn matrix_csv(m: &dump::Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows {
        for j in 0..m.cols {
            if j > 0 {
                s.push(',');
            }
            write!(s, "{:.16e}", m.values[i * m.cols + j]).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Row-major dense matrix as written by `terracini` and `kernel`.
mod dump {
    use serde::Serialize;

    #[derive(Serialize)]
    pub struct Matrix {
        pub rows: usize,
        pub cols: usize,
        pub values: Vec<f64>,
    }

    impl Matrix {
        pub fn from_columns(rows: usize, cols: usize, col_major: &[f64]) -> Self {
            let values = (0..rows * cols)
                .map(|k| col_major[(k % cols) * rows + k / cols])
                .collect();
            Matrix { rows, cols, values }
        }
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let started = Instant::now();
    let status = match &cli.command {
        Command::Gen(a) => {
            let kind = if a.uniform { SampleKind::Uniform } else { SampleKind::Normal };
            let p = gen_random_factors(&mut seeded_rng(a.seed), &a.dims, a.rank, kind)?;
            if let Some(path) = &a.tensor {
                emit(Some(path), &(tensor_to_json(&cpdgen(&p)) + "\n"))?;
            }
            emit(a.out.as_ref(), &(params_to_json(&p) + "\n"))?;
            Status::Ok
        }
        Command::Cond(a) => {
            let p = read_params(&a.input)?;
            let opts = CondOptions {
                balance: !a.unbalanced,
                singular_tol: a.svd_tol.unwrap_or(0.0),
            };
            let report = cpdcond_with(&p, opts)?;
            emit(None, &json(&report))?;
            match report.state {
                ConditionState::NotSubgeneric => {
                    eprintln!(
                        "not subgeneric: r(Σ+1) = {} exceeds the {} tensor entries",
                        report.expected_rank,
                        report.dims.iter().product::<usize>()
                    );
                    Status::NotSubgeneric
                }
                ConditionState::Singular => {
                    eprintln!("warning: Terracini's matrix is numerically singular");
                    Status::AccuracyWarning
                }
                ConditionState::Finite if report.accuracy_warning => {
                    eprintln!("warning: ς_N is within 100ε of ς_1; the condition number is unreliable");
                    Status::AccuracyWarning
                }
                ConditionState::Finite => Status::Ok,
            }
        }
        Command::Terracini(a) => {
            let p = read_params(&a.input)?;
            let t = build_terracini(&p).matrix;
            let m = dump::Matrix::from_columns(t.nrows(), t.ncols(), t.as_slice());
            write_matrix(&m, a.format, a.out.as_ref())?;
            Status::Ok
        }
        Command::Kernel(a) => {
            let p = read_params(&a.input)?;
            let k = kernel_basis(&p)?.matrix;
            let m = dump::Matrix::from_columns(k.nrows(), k.ncols(), k.as_slice());
            write_matrix(&m, a.format, a.out.as_ref())?;
            Status::Ok
        }
        Command::Distance(a) => {
            let p = read_params(&a.a)?;
            let q = read_params(&a.b)?;
            let mut opts = DistanceOptions::default();
            if let Some(tol) = cli.distance_tol {
                opts.tol = tol;
            }
            let res = distance_with(&p, &q, &opts)?;
            #[derive(Serialize)]
            struct Out<'a> {
                value: f64,
                permutation: &'a [usize],
                thetas: &'a [Vec<f64>],
            }
            emit(
                None,
                &json(&Out {
                    value: res.value,
                    permutation: &res.minimizer.perm,
                    thetas: &res.minimizer.thetas,
                }),
            )?;
            Status::Ok
        }
        Command::Isl(a) => isl(a)?,
        Command::Gevd(a) => {
            let t = tensor_from_json(&read_text(&a.input)?).map_err(|e| CliError::context(&a.input, e))?;
            let p = cpd_gevd(&t, a.rank)?;
            if cli.verbose {
                let backward = cpdgen(&p).distance(&t) / t.norm();
                eprintln!("relative backward error {backward:.3e}");
            }
            emit(a.out.as_ref(), &(params_to_json(&p) + "\n"))?;
            Status::Ok
        }
        Command::Kruskal(a) => {
            let p = read_params(&a.input)?;
            let info = kruskal_check_with(&p, a.kruskal_tol.unwrap_or(DEFAULT_KRUSKAL_TOL))?;
            emit(None, &json(&info))?;
            Status::Ok
        }
        Command::Experiment(a) => {
            let mut buf = Vec::new();
            run_experiment(a.name, a.seed, a.range(), &mut buf)?;
            match &a.out {
                Some(path) => fs::write(path, &buf).map_err(|e| CliError::context(path, e.into()))?,
                None => {
                    let mut out = BufWriter::new(io::stdout().lock());
                    out.write_all(&buf)?;
                    out.flush()?;
                }
            }
            Status::Ok
        }
    };
    if cli.verbose {
        eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
    }
    Ok(status)
}

fn write_matrix(m: &dump::Matrix, format: Format, out: Option<&PathBuf>) -> Result<()> {
    match format {
        Format::Csv => emit(out, &matrix_csv(m)),
        Format::Json => emit(out, &json(m)),
    }
}

#[derive(Serialize)]
struct IslOut {
    p_dot: DecompositionFile,
    delta: Vec<f64>,
    gammas: Vec<Vec<f64>>,
    nabla_norms: Vec<f64>,
    iterations: usize,
    lambda: f64,
    precondition_ok: bool,
}

fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut s = String::from("iteration,nabla_norm\n");
    for (k, t) in trace.iter().enumerate() {
        writeln!(s, "{k},{t:.16e}").unwrap();
    }
    fs::write(path, s).map_err(|e| CliError::context(path, e.into()))
}

fn isl(a: &crate::IslArgs) -> Result<Status> {
    let p = read_params(&a.input)?;
    let kb = kernel_basis(&p)?;
    let coeffs = match a.kernel_dir {
        KernelDir::Column(j) if j < kb.ncols() => {
            let mut c = vec![0.0; kb.ncols()];
            c[j] = 1.0;
            c
        }
        KernelDir::Column(j) => {
            return Err(Error::InvalidArgument(format!(
                "kernel column {j} out of range (basis has {} columns)",
                kb.ncols()
            ))
            .into())
        }
        KernelDir::Random(seed) => unit_vector(&mut seeded_rng(seed), kb.ncols()),
    };
    let v = kb.apply(&coeffs);
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nabla: Vec<f64> = v.iter().map(|x| x * a.nabla_norm / vn).collect();
    match iterated_scaling(&p, &nabla) {
        Ok(res) => {
            if let Some(path) = &a.trace_csv {
                write_trace(path, &res.nabla_norms)?;
            }
            if !res.precondition_ok {
                eprintln!(
                    "note: ‖∇‖ = {:.3e} exceeds 1/(2λ) = {:.3e}; convergence is not guaranteed",
                    a.nabla_norm,
                    0.5 / res.lambda
                );
            }
            let out = IslOut {
                p_dot: DecompositionFile::from(&res.p_dot),
                delta: res.delta,
                gammas: res.gammas,
                nabla_norms: res.nabla_norms,
                iterations: res.iterations,
                lambda: res.lambda,
                precondition_ok: res.precondition_ok,
            };
            emit(None, &json(&out))?;
            Ok(Status::Ok)
        }
        Err(Error::NotConverged { iterations, last, trace }) => {
            if let Some(path) = &a.trace_csv {
                write_trace(path, &trace)?;
            }
            Err(Error::NotConverged { iterations, last, trace }.into())
        }
        Err(e) => Err(e.into()),
    }
}
