use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tensortrain::io::{self, Container};
use tensortrain::solvers::{self, CcaOptions, RankPolicy, SolveReport, SweepConfig};
use tensortrain::tensor::{matrix_from_row_major, row_major};
use tensortrain::tensorize::{self, StorageReport};
use tensortrain::{DenseTensor, TruncationPolicy, TtMatrix, TtVector};

use crate::SolverArgs;

pub enum Outcome {
    Done,
    NotConverged,
}

/// Largest dense object `reconstruct` will write.
const RECONSTRUCT_CAP: usize = 1 << 28;

fn policy(tol: f64, max_rank: Option<usize>) -> Result<TruncationPolicy> {
    Ok(TruncationPolicy::new(tol, max_rank)?)
}

fn load(path: &Path) -> Result<Container<f64>> {
    io::load(path).with_context(|| format!("reading {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<TtMatrix<f64>> {
    match load(path)? {
        Container::Matrix(a) => Ok(a),
        other => bail!("{} holds a {}, expected an operator", path.display(), other.kind_name()),
    }
}

fn load_vector(path: &Path) -> Result<TtVector<f64>> {
    match load(path)? {
        Container::Vector(x) => Ok(x),
        other => bail!("{} holds a {}, expected a vector", path.display(), other.kind_name()),
    }
}

fn save(path: &Path, c: &Container<f64>) -> Result<()> {
    io::save(path, c).with_context(|| format!("writing {}", path.display()))
}

/// `dir/stem.suffix` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn read_input(input: &Path) -> Result<Vec<f64>> {
    io::read_raw(input).with_context(|| format!("reading {}", input.display()))
}

pub fn compress(
    input: &Path,
    shape: Option<Vec<usize>>,
    row_shape: Option<Vec<usize>>,
    col_shape: Option<Vec<usize>>,
    tol: f64,
    max_rank: Option<usize>,
    out: &Path,
) -> Result<Outcome> {
    let data = read_input(input)?;
    let policy = policy(tol, max_rank)?;
    let (container, report) = match (shape, row_shape, col_shape) {
        (Some(shape), None, None) => {
            let n: usize = shape.iter().product();
            if n != data.len() {
                bail!("shape {shape:?} has {n} entries but {} holds {}", input.display(), data.len());
            }
            let t = DenseTensor::new(shape, data)?;
            let x = TtVector::from_dense(&t, &policy)?;
            let r = StorageReport::for_vector(&x);
            (Container::Vector(x), r)
        }
        (None, Some(rows), Some(cols)) => {
            let (m, n) = (rows.iter().product::<usize>(), cols.iter().product::<usize>());
            if m * n != data.len() {
                bail!("{m}×{n} operator needs {} entries but {} holds {}", m * n, input.display(), data.len());
            }
            let dense = matrix_from_row_major(m, n, &data);
            let a = TtMatrix::from_dense(&dense, &rows, &cols, &policy)?;
            let r = StorageReport::for_matrix(&a);
            (Container::Matrix(a), r)
        }
        _ => bail!("give either --shape, or both --row-shape and --col-shape"),
    };
    save(out, &container)?;
    print!("{}", report.to_key_value());
    Ok(Outcome::Done)
}

#[allow(clippy::too_many_arguments)]
pub fn quantize(
    input: &Path,
    base: usize,
    mixed_radix: bool,
    row_shape: Option<usize>,
    col_shape: Option<usize>,
    tol: f64,
    max_rank: Option<usize>,
    out: &Path,
) -> Result<Outcome> {
    let data = read_input(input)?;
    let policy = policy(tol, max_rank)?;
    let (container, report, plan) = match (row_shape, col_shape) {
        (None, None) => {
            let plan = tensorize::plan_auto(data.len(), base, mixed_radix)?;
            let x = tensorize::quantize_vector(&data, &plan, &policy)?;
            let r = StorageReport::for_vector(&x);
            (Container::Vector(x), r, plan.to_string())
        }
        (Some(m), Some(n)) => {
            if m * n != data.len() {
                bail!("{m}×{n} matrix needs {} entries but {} holds {}", m * n, input.display(), data.len());
            }
            let (rp, cp) = tensorize::plan_matrix(m, n, base, mixed_radix)?;
            let dense = matrix_from_row_major(m, n, &data);
            let a = tensorize::quantize_matrix(&dense, &rp, &cp, &policy)?;
            let r = StorageReport::for_matrix(&a);
            (Container::Matrix(a), r, format!("rows:{rp};cols:{cp}"))
        }
        _ => bail!("matrix mode needs both --row-shape and --col-shape"),
    };
    save(out, &container)?;
    println!("plan={plan}");
    print!("{}", report.to_key_value());
    Ok(Outcome::Done)
}

pub fn info(file: &Path) -> Result<Outcome> {
    let c = load(file)?;
    let report = match &c {
        Container::Vector(x) => StorageReport::for_vector(x),
        Container::Matrix(a) => StorageReport::for_matrix(a),
        Container::Block(b) => StorageReport::for_block(b),
    };
    print!("{}", report.to_key_value());
    if let Container::Block(b) = &c {
        println!("block_position={}", b.position());
        println!("block_count={}", b.block_count());
    }
    Ok(Outcome::Done)
}

fn check_size(n: usize) -> Result<()> {
    if n > RECONSTRUCT_CAP {
        bail!("dense size {n} exceeds the reconstruct cap {RECONSTRUCT_CAP}");
    }
    Ok(())
}

pub fn reconstruct(file: &Path, out: &Path) -> Result<Outcome> {
    let data = match load(file)? {
        Container::Vector(x) => {
            check_size(x.full_len())?;
            x.to_dense().into_data()
        }
        Container::Matrix(a) => {
            check_size(a.nrows().saturating_mul(a.ncols()))?;
            row_major(&a.to_dense())
        }
        Container::Block(b) => {
            let per: usize = b.modes().iter().product();
            check_size(per.saturating_mul(b.block_count()))?;
            let mut data = Vec::new();
            for x in b.to_vectors()? {
                data.extend(x.to_dense().into_data());
            }
            data
        }
    };
    io::write_raw(out, &data).with_context(|| format!("writing {}", out.display()))?;
    Ok(Outcome::Done)
}

fn config(args: &SolverArgs) -> Result<SweepConfig> {
    let rank = if args.adaptive {
        RankPolicy::Adaptive(policy(args.trunc_tol, args.max_rank)?)
    } else {
        RankPolicy::Fixed(args.rank.unwrap_or(8))
    };
    let c = SweepConfig {
        max_sweeps: args.max_sweeps,
        tol: args.tol,
        residual_tol: args.tol,
        rank,
        seed: args.seed,
        ..SweepConfig::default()
    };
    c.validate()?;
    Ok(c)
}

/// Writes the report files and prints the summary.
fn finish(args: &SolverArgs, report: &SolveReport, value_name: &str) -> Result<Outcome> {
    let report_path = sibling(&args.out, "report.txt");
    let csv_path = sibling(&args.out, "trajectory.csv");
    fs::write(&report_path, report.to_key_value()).with_context(|| format!("writing {}", report_path.display()))?;
    fs::write(&csv_path, report.trajectory_csv()).with_context(|| format!("writing {}", csv_path.display()))?;

    let mut s = String::new();
    let _ = writeln!(s, "solver: {}", report.solver);
    let _ = writeln!(
        s,
        "converged: {} after {} sweep(s), residual {:.6e}",
        report.converged,
        report.sweeps,
        report.final_residual()
    );
    if report.regularizations > 0 {
        let _ = writeln!(s, "warning: {} local Gram matrices were regularized", report.regularizations);
    }
    for (i, r) in report.ranks.iter().enumerate() {
        let r: Vec<String> = r.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "ranks[{i}]: {}", r.join(","));
    }
    let _ = writeln!(s, "index,{value_name}");
    for (i, v) in report.values.iter().enumerate() {
        let _ = writeln!(s, "{i},{v:.15e}");
    }
    print!("{s}");
    Ok(if report.converged || args.allow_nonconverged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

pub fn eig(operator: &Path, k: usize, args: &SolverArgs) -> Result<Outcome> {
    let a = load_matrix(operator)?;
    let r = solvers::eig_block(&a, k, &config(args)?)?;
    save(&args.out, &Container::Block(r.vectors))?;
    finish(args, &r.report, "eigenvalue")
}

pub fn svd(operator: &Path, smallest: bool, k: usize, args: &SolverArgs) -> Result<Outcome> {
    let a = load_matrix(operator)?;
    let cfg = config(args)?;
    if smallest {
        let r = solvers::svd_small_k(&a, k, &cfg)?;
        save(&args.out, &Container::Block(r.vectors))?;
        finish(args, &r.report, "singular_value")
    } else {
        if k != 1 {
            bail!("the largest-triplet solver returns one triplet; use --smallest for K > 1");
        }
        let r = solvers::svd_dominant(&a, &cfg)?;
        save(&args.out, &Container::Vector(r.u))?;
        save(&sibling(&args.out, "v.ttk"), &Container::Vector(r.v))?;
        finish(args, &r.report, "singular_value")
    }
}

pub fn gevd(x: &Path, a: &Path, b: &Path, k: usize, args: &SolverArgs) -> Result<Outcome> {
    let (x, a, b) = (load_matrix(x)?, load_matrix(a)?, load_matrix(b)?);
    let r = solvers::gevd(&x, &a, &b, k, &config(args)?)?;
    save(&args.out, &Container::Block(r.vectors))?;
    finish(args, &r.report, "eigenvalue")
}

pub fn cca(x: &Path, y: &Path, k: usize, identity_gram: bool, args: &SolverArgs) -> Result<Outcome> {
    let (x, y) = (load_matrix(x)?, load_matrix(y)?);
    let opts = CcaOptions { k, identity_gram };
    let r = solvers::cca(&x, &y, opts, &config(args)?)?;
    save(&args.out, &Container::Block(r.wx))?;
    save(&sibling(&args.out, "wy.ttk"), &Container::Block(r.wy))?;
    finish(args, &r.report, "correlation")
}

pub fn solve(operator: &Path, rhs: &Path, args: &SolverArgs) -> Result<Outcome> {
    let a = load_matrix(operator)?;
    let y = load_vector(rhs)?;
    let r = solvers::linsolve(&a, &y, &config(args)?)?;
    save(&args.out, &Container::Vector(r.x))?;
    finish(args, &r.report, "relative_residual")
}
