use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sphmf::analysis::{anti_diagonal_split, clustering_accuracy, kmeans, top_components};
use sphmf::data_io::{
    center_columns, filter_by_label, generate_two_angle_clusters, read_csv_matrix, read_factors,
    read_idx_images_with, read_idx_labels, read_labels, write_csv_matrix, write_factors,
    write_labels, write_trace, LabeledDataset, TRACE_FILE,
};
use sphmf::{solve, ConstraintSpec, DenseMatrix, Error, SolverConfig, USet, VSet};

const KMEANS_MAX_ITERS: usize = 300;

#[derive(Parser)]
#[command(name = "sphmf", version, about = "Spherical matrix factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the two-cluster angular dataset as data.csv and labels.csv.
    Synth(SynthArgs),
    /// Factorize a data matrix and write U, V_hat, metadata and the trace.
    Factorize(FactorizeArgs),
    /// Compare the anti-diagonal split of V_hat with k-means on the data.
    Eval(EvalArgs),
    /// Factorize one digit class of an MNIST IDX pair with sparse components.
    MnistDemo(MnistArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Step-size safety factor; values <= 1 forfeit monotone descent.
    #[arg(long, default_value_t = 1.01)]
    margin: f64,
    /// Stop when ‖ΔU‖ + ‖ΔV‖ falls below this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the radius fixed at its initial value.
    #[arg(long)]
    no_radius_update: bool,
    /// Subtract the mean column before factorizing.
    #[arg(long)]
    center: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        if self.margin <= 1.0 {
            eprintln!(
                "warning: margin {} <= 1, the objective is no longer guaranteed to decrease",
                self.margin
            );
        }
        SolverConfig {
            max_iters: self.iters,
            margin: self.margin,
            stop_tol: self.tol,
            seed: self.seed,
            update_radius: !self.no_radius_update,
            record_trace: true,
        }
    }
}

#[derive(Args)]
struct FactorizeArgs {
    /// Data CSV, one sample per column.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    input: Option<PathBuf>,
    /// Use a generated two-cluster dataset of this size instead of --input.
    #[arg(long)]
    synth: Option<usize>,
    #[arg(long, default_value = "orthogonal")]
    u: USet,
    #[arg(long, default_value = "sphere")]
    v: VSet,
    #[arg(long)]
    r: usize,
    /// Nonzeros per column for the sparse V sets.
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory written by `factorize`.
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Data CSV the factors were computed from; k-means runs on it.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MnistArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 3)]
    digit: i64,
    #[arg(long, default_value_t = 10)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    s: usize,
    /// Use raw byte values instead of pixels scaled to [0, 1].
    #[arg(long)]
    raw_pixels: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

fn maybe_center(x: DenseMatrix, center: bool) -> sphmf::Result<DenseMatrix> {
    if center {
        Ok(center_columns(&x)?.0)
    } else {
        Ok(x)
    }
}

fn create_dir(dir: &Path) -> sphmf::Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn cmd_synth(args: &SynthArgs) -> sphmf::Result<()> {
    let ds = generate_two_angle_clusters(args.n, args.seed)?;
    create_dir(&args.out)?;
    write_csv_matrix(&ds.x, args.out.join("data.csv"))?;
    write_labels(&ds.labels, args.out.join("labels.csv"))?;
    println!("n={} seed={}", args.n, args.seed);
    Ok(())
}

fn factorize_and_write(
    x: &DenseMatrix,
    r: usize,
    spec: &ConstraintSpec,
    config: &SolverConfig,
    out: &Path,
) -> sphmf::Result<sphmf::FactorizationState> {
    let (state, trace) = solve(x, r, spec, config)?;
    write_factors(&state, spec, config.seed, out)?;
    write_trace(&trace, out.join(TRACE_FILE))?;
    Ok(state)
}

fn cmd_factorize(args: &FactorizeArgs) -> sphmf::Result<()> {
    let x = match (&args.input, args.synth) {
        (Some(path), _) => read_csv_matrix(path)?,
        (None, Some(n)) => generate_two_angle_clusters(n, args.solver.seed)?.x,
        (None, None) => unreachable!("clap requires one input source"),
    };
    let x = maybe_center(x, args.solver.center)?;
    let spec = ConstraintSpec::new(args.u, args.v, args.s);
    let config = args.solver.config();
    let state = factorize_and_write(&x, args.r, &spec, &config, &args.out)?;
    println!(
        "objective={} iters={} l={}",
        state.objective, state.iter, state.l
    );
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> sphmf::Result<()> {
    let (_, v_hat, _) = read_factors(&args.factors)?;
    let x = read_csv_matrix(&args.input)?;
    let ds = LabeledDataset::new(x, read_labels(&args.labels)?)?;
    if v_hat.cols() != ds.x.cols() {
        return Err(Error::Dimension(format!(
            "V_hat has {} columns but the data has {} samples",
            v_hat.cols(),
            ds.x.cols()
        )));
    }
    let sphmf_acc = clustering_accuracy(&anti_diagonal_split(&v_hat)?, &ds.labels)?;
    let clusters = kmeans(&ds.x, 2, args.seed, KMEANS_MAX_ITERS)?;
    let pred: Vec<i64> = clusters.assignments.iter().map(|&a| a as i64).collect();
    let kmeans_acc = clustering_accuracy(&pred, &ds.labels)?;
    println!("sphmf_acc={sphmf_acc} kmeans_acc={kmeans_acc}");
    Ok(())
}

fn cmd_mnist_demo(args: &MnistArgs) -> sphmf::Result<()> {
    let images = read_idx_images_with(&args.images, !args.raw_pixels)?;
    let ds = LabeledDataset::new(images, read_idx_labels(&args.labels)?)?;
    let x = filter_by_label(&ds, args.digit);
    if x.cols() == 0 {
        return Err(Error::InvalidInput(format!(
            "no images with label {}",
            args.digit
        )));
    }
    if args.r < 2 {
        return Err(Error::InvalidParameter(format!(
            "the component summary needs r >= 2, got {}",
            args.r
        )));
    }
    let n = x.cols();
    let x = maybe_center(x, args.solver.center)?;
    let spec = ConstraintSpec::new(USet::Orthogonal, VSet::NonnegSparseSphere, args.s);
    let config = args.solver.config();
    let state = factorize_and_write(&x, args.r, &spec, &config, &args.out)?;

    let v = state.v();
    let mut table = String::from("column,first,first_coef,second,second_coef\n");
    for (j, top) in top_components(&v, 2)?.iter().enumerate() {
        let _ = writeln!(
            table,
            "{j},{},{},{},{}",
            top[0],
            v.get(top[0], j),
            top[1],
            v.get(top[1], j)
        );
    }
    let path = args.out.join("top_components.csv");
    fs::write(&path, table).map_err(|e| Error::Io { path, source: e })?;

    println!(
        "n={n} objective={} iters={} l={}",
        state.objective, state.iter, state.l
    );
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Degenerate(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Factorize(a) => cmd_factorize(a),
        Command::Eval(a) => cmd_eval(a),
        Command::MnistDemo(a) => cmd_mnist_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
