use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use spformat::bench::{
    bench_corpus, discover_corpus, matrix_id, parse_records, write_records, BenchConfig, Bencher, ClockSource,
    WallClock, WallClockSource,
};
use spformat::features::{extract_features, parse_feature_records, write_feature_records, FeatureRecord};
use spformat::kernels::{spmv_into, Executor};
use spformat::matrix::{dense_spmv_oracle, read_matrix_market_file, CooMatrix};
use spformat::model::{assemble_training_set, cross_validate, fit_model, predict, CvConfig, CvReport, DecisionTreeModel};
use spformat::report::aggregate;
use spformat::synth::CostModelClock;
use spformat::{convert, FormatMatrix, FormatTag};

use crate::{BenchArgs, ClockKind, Command, ConvertArgs, FeaturesArgs, PredictArgs, ReportArgs, SpmvArgs, TrainArgs};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_CONVERSION: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_EMPTY: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn fail<T>(code: u8, message: impl Into<String>) -> Result<T, CliError> {
    Err(CliError {
        code,
        message: message.into(),
    })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    }
}

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Convert(a) => cmd_convert(a),
        Command::Spmv(a) => cmd_spmv(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Features(a) => cmd_features(a),
        Command::Train(a) => cmd_train(a, true),
        Command::Cv(a) => cmd_train(a, false),
        Command::Predict(a) => cmd_predict(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn paths(p: &[PathBuf]) -> String {
    p.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" ")
}

fn opt<T: std::fmt::Display>(flag: &str, v: &Option<T>) -> String {
    v.as_ref().map(|v| format!(" {flag} {v}")).unwrap_or_default()
}

fn config_line(text: String) {
    println!("# config: spformat {text}");
}

/// Destination for record output: a file when `--out` is given, else stdout.
fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(io_err(p))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Expands directories into their `*.mtx` files. Ids are relative to the
/// directory given, or the bare file stem for files named directly.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<(String, PathBuf)>, CliError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            for f in discover_corpus(p).map_err(io_err(p))? {
                out.push((matrix_id(p, &f), f));
            }
        } else {
            let root = p.parent().unwrap_or(Path::new(""));
            out.push((matrix_id(root, p), p.clone()));
        }
    }
    Ok(out)
}

fn read_matrix(path: &Path) -> Result<CooMatrix, CliError> {
    read_matrix_market_file(path).map_err(|e| CliError {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .or_else(|e| fail(EXIT_INPUT, format!("cannot start {jobs} jobs: {e}")))
}

fn layout_stats(m: &FormatMatrix) -> String {
    match m {
        FormatMatrix::Csr(_) => String::new(),
        FormatMatrix::Csr5(m) => format!(" omega={} sigma={} tiles={}", m.omega(), m.sigma(), m.num_tiles()),
        FormatMatrix::Ell(m) => format!(" k={} slots={}", m.k(), m.k() * m.n_rows()),
        FormatMatrix::Sell(m) => {
            let widths: Vec<String> = m.slices().iter().map(|w| w.to_string()).collect();
            let shown = if widths.len() <= 16 {
                format!("[{}]", widths.join(","))
            } else {
                m.num_slices().to_string()
            };
            format!(
                " C={} sigma={} slices={shown} slots={}",
                m.c(),
                m.sigma(),
                m.slice_ptr().last().copied().unwrap_or(0)
            )
        }
        FormatMatrix::Hyb(m) => format!(" K={} tail_nnz={}", m.k(), m.tail().nnz()),
    }
}

fn cmd_convert(args: ConvertArgs) -> Result<(), CliError> {
    config_line(format!(
        "convert {} --format {} {} --jobs {}",
        paths(&args.inputs),
        args.format,
        args.params.describe(),
        args.jobs
    ));
    let inputs = expand_inputs(&args.inputs)?;
    let params = args.params.params();
    let tag = args.format;
    let results: Vec<Result<String, CliError>> = pool(args.jobs)?.install(|| {
        inputs
            .par_iter()
            .map(|(id, path)| {
                let a = read_matrix(path)?;
                let m = convert(&a, tag, &params).map_err(|e| CliError {
                    code: EXIT_CONVERSION,
                    message: format!("{id}: {e}"),
                })?;
                if m.to_coo() != a {
                    return fail(EXIT_CONVERSION, format!("{id}: round trip through {tag} changed the matrix"));
                }
                Ok(format!(
                    "{id}: {}x{} nnz={} format={tag}{} round_trip=ok",
                    a.n_rows(),
                    a.n_cols(),
                    a.nnz(),
                    layout_stats(&m)
                ))
            })
            .collect()
    });
    let mut first_code = None;
    let mut failed = 0;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {}", e.message);
                first_code.get_or_insert(e.code);
                failed += 1;
            }
        }
    }
    match first_code {
        Some(code) => fail(code, format!("{failed} of {} inputs failed", inputs.len())),
        None if inputs.is_empty() => fail(EXIT_EMPTY, "no matrices found"),
        None => Ok(()),
    }
}

fn cmd_spmv(args: SpmvArgs) -> Result<(), CliError> {
    config_line(format!(
        "spmv {} --format {} {} --workers {}{}",
        args.input.display(),
        args.format,
        args.params.describe(),
        args.workers,
        opt("--out", &args.out.as_ref().map(|p| p.display()))
    ));
    let a = read_matrix(&args.input)?;
    let m = convert(&a, args.format, &args.params.params()).or_else(|e| fail(EXIT_CONVERSION, e.to_string()))?;
    let exec = Executor::with_workers(args.workers).or_else(|e| fail(EXIT_INPUT, e.to_string()))?;
    let x = vec![1.0; a.n_cols()];
    let mut y = vec![0.0; a.n_rows()];
    spmv_into(&m, &x, &mut y, &exec).or_else(|e| fail(EXIT_CONVERSION, e.to_string()))?;
    let reference = dense_spmv_oracle(&a, &x).expect("x sized to n_cols");
    let diff = y.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("# max_abs_diff_vs_dense: {diff}");
    let mut out = open_out(&args.out)?;
    let written: io::Result<()> = y.iter().try_for_each(|v| writeln!(out, "{v}"));
    written.and_then(|_| out.flush()).or_else(|e| fail(EXIT_INPUT, e.to_string()))
}

fn bench_config(args: &BenchArgs) -> BenchConfig {
    BenchConfig {
        min_reps: args.min_reps,
        max_reps: args.max_reps,
        ci_gap: args.ci_gap,
        warmup_reps: args.warmup,
        workers: args.workers,
        fixed_reps: args.fixed_reps,
        params: args.params.params(),
        ..BenchConfig::default()
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let formats: Vec<String> = args.formats.iter().map(|f| f.to_string()).collect();
    let clock = match args.clock {
        ClockKind::Wall => "wall",
        ClockKind::CostModel => "cost-model",
    };
    config_line(format!(
        "bench {} --formats {} {} --workers {} --min-reps {} --max-reps {}{} --ci-gap {} --warmup {} --clock {clock}{}",
        args.corpus.display(),
        formats.join(","),
        args.params.describe(),
        args.workers,
        args.min_reps,
        args.max_reps,
        opt("--fixed-reps", &args.fixed_reps),
        args.ci_gap,
        args.warmup,
        opt("--out", &args.out.as_ref().map(|p| p.display()))
    ));
    if !args.corpus.is_dir() {
        return fail(EXIT_INPUT, format!("{}: not a directory", args.corpus.display()));
    }
    let cfg = bench_config(&args);
    let mut source: Box<dyn ClockSource> = match args.clock {
        ClockKind::Wall => Box::new(WallClockSource::default()),
        ClockKind::CostModel => Box::new(CostModelClock),
    };
    let result = bench_corpus(&args.corpus, &cfg, &args.formats, source.as_mut()).or_else(|e| fail(EXIT_INPUT, e.to_string()))?;
    for d in &result.diagnostics {
        eprintln!("warning: {d}");
    }
    let mut out = open_out(&args.out)?;
    write_records(&result.records, &mut out)
        .and_then(|_| out.flush())
        .or_else(|e| fail(EXIT_INPUT, e.to_string()))?;
    drop(out);
    println!("# best formats ({} matrices)", result.labels.len());
    for (id, tag) in &result.labels {
        println!("# {id}\t{tag}");
    }
    if result.labels.is_empty() {
        return fail(EXIT_EMPTY, "no matrix was benchmarked successfully");
    }
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> Result<(), CliError> {
    config_line(format!(
        "features {} --jobs {}{}",
        paths(&args.inputs),
        args.jobs,
        opt("--out", &args.out.as_ref().map(|p| p.display()))
    ));
    let inputs = expand_inputs(&args.inputs)?;
    let results: Vec<Result<FeatureRecord, String>> = pool(args.jobs)?.install(|| {
        inputs
            .par_iter()
            .map(|(id, path)| {
                let a = read_matrix_market_file(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let features = extract_features(&a).map_err(|e| format!("{id}: {e}"))?;
                Ok(FeatureRecord {
                    matrix_id: id.clone(),
                    features,
                })
            })
            .collect()
    });
    let mut records = Vec::new();
    for r in results {
        match r {
            Ok(r) => records.push(r),
            Err(e) => eprintln!("warning: skipping {e}"),
        }
    }
    let mut out = open_out(&args.out)?;
    write_feature_records(&records, &mut out)
        .and_then(|_| out.flush())
        .or_else(|e| fail(EXIT_INPUT, e.to_string()))?;
    if records.is_empty() {
        return fail(EXIT_EMPTY, "no features extracted");
    }
    Ok(())
}

fn print_cv(report: &CvReport, verbose: bool) {
    if verbose {
        for f in &report.folds {
            let ratio = f.perf_ratio.map(|r| format!("\tperf_ratio:{r}")).unwrap_or_default();
            println!("fold:{}\trepeat:{}\ttest:{}\taccuracy:{}{ratio}", f.fold, f.repeat, f.test.len(), f.accuracy);
        }
        println!("confusion (rows: best format, columns: predicted)");
        println!("{:<6} {}", "", FormatTag::ALL.map(|t| format!("{:>6}", t.name())).join(" "));
        for t in FormatTag::ALL {
            let row = report.confusion[t.index()].map(|c| format!("{c:>6}")).join(" ");
            println!("{:<6} {row}", t.name());
        }
    }
    println!("cv_accuracy: {}", report.mean_accuracy());
    if let Some(r) = report.mean_perf_ratio() {
        println!("cv_perf_ratio: {r}");
    }
    if let Some((tag, r)) = report.best_fixed_format() {
        println!("best_fixed_format: {tag} perf_ratio: {r}");
    }
}

fn cmd_train(args: TrainArgs, write_model: bool) -> Result<(), CliError> {
    let name = if write_model { "train" } else { "cv" };
    config_line(format!(
        "{name} --features {} --records {} --depth {} --min-leaf {} --folds {} --repeats {} --seed {}{}",
        args.features.display(),
        args.records.display(),
        args.depth,
        args.min_leaf,
        args.folds,
        args.repeats,
        args.seed,
        opt("--out", &args.out.as_ref().map(|p| p.display()))
    ));
    let out = match (&args.out, write_model) {
        (Some(p), true) => Some(p.clone()),
        (None, true) => return fail(EXIT_INPUT, "train needs --out <model file>"),
        _ => None,
    };
    let ftext = fs::read_to_string(&args.features).map_err(io_err(&args.features))?;
    let features = parse_feature_records(&ftext).or_else(|e| fail(EXIT_INPUT, format!("{}: {e}", args.features.display())))?;
    let rtext = fs::read_to_string(&args.records).map_err(io_err(&args.records))?;
    let records = parse_records(&rtext).or_else(|e| fail(EXIT_INPUT, format!("{}: {e}", args.records.display())))?;
    let set = assemble_training_set(&records, &features);
    for m in &set.mismatches {
        eprintln!("warning: {m}");
    }
    if set.records.is_empty() {
        return fail(EXIT_EMPTY, "joining features with benchmark records produced no samples");
    }
    println!("samples: {}", set.records.len());

    let cv = CvConfig {
        k: args.folds,
        seed: args.seed,
        repeats: args.repeats,
        max_depth: args.depth,
        min_samples_leaf: args.min_leaf,
    };
    match cross_validate(&set.records, &cv) {
        Ok(report) => print_cv(&report, !write_model),
        Err(e) if write_model => eprintln!("warning: skipping cross-validation: {e}"),
        Err(e) => return fail(EXIT_EMPTY, e.to_string()),
    }

    if let Some(path) = out {
        let model = fit_model(&set.records, args.depth, args.min_leaf).or_else(|e| fail(EXIT_MODEL, e.to_string()))?;
        if model.is_single_leaf() {
            eprintln!("warning: degenerate tree (single leaf)");
        }
        model
            .save(&path)
            .or_else(|e| fail(EXIT_MODEL, format!("{}: {e}", path.display())))?;
        println!("model: {} ({} nodes, depth {})", path.display(), model.tree.nodes().len(), model.tree.depth());
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    config_line(format!(
        "predict {} --model {}{} {} --workers {}",
        args.input.display(),
        args.model.display(),
        if args.run { " --run" } else { "" },
        args.params.describe(),
        args.workers
    ));
    let model = DecisionTreeModel::load(&args.model).or_else(|e| fail(EXIT_MODEL, format!("{}: {e}", args.model.display())))?;
    let a = read_matrix(&args.input)?;
    let f = extract_features(&a).or_else(|e| fail(EXIT_INPUT, e.to_string()))?;
    let tag = predict(&model, &f);
    println!("{tag}");
    if args.run {
        let cfg = BenchConfig {
            workers: args.workers,
            params: args.params.params(),
            ..BenchConfig::default()
        };
        let bencher = Bencher::new(cfg).or_else(|e| fail(EXIT_INPUT, e.to_string()))?;
        let root = args.input.parent().unwrap_or(Path::new(""));
        let record = bencher.run(&matrix_id(root, &args.input), &a, tag, &mut WallClock::new());
        println!("{record}");
        if !record.converted_ok {
            return fail(EXIT_CONVERSION, format!("conversion to {tag} failed"));
        }
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    config_line(format!("report {}", args.records.display()));
    let text = fs::read_to_string(&args.records).map_err(io_err(&args.records))?;
    let records = parse_records(&text).or_else(|e| fail(EXIT_INPUT, format!("{}: {e}", args.records.display())))?;
    let report = aggregate(&records).or_else(|e| fail(EXIT_EMPTY, e.to_string()))?;
    print!("{report}");
    for t in FormatTag::ALL {
        if let Some(s) = report.slowdown[t.index()] {
            println!("slowdown:{t}\t{s}");
        }
    }
    if report.failures.iter().any(|&f| f > 0) {
        warn!("some formats failed on some matrices; their slowdowns cover successful runs only");
    }
    Ok(())
}
