//! `gesturekeeper` command-line tool.

mod params;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gesturekeeper::features::{FeatureRegistry, Scaler};
use gesturekeeper::imu::{extract_segment, load_recordings, parse_imu_csv, Channel, Recording};
use gesturekeeper::pipeline::{
    end_to_end_evaluate, identify_segments, loso_evaluate, noise_augment, permutation_importance,
    segment_dataset, train_identifier, EvaluationReport, ForestTrainer, ImportanceOptions,
    SelectingTrainer, SvmTrainer, Trainer,
};
use gesturekeeper::rqa::{embedded_recurrence_plot, time_delay_embed, windowed_rqa, write_rqa_csv};
use gesturekeeper::svm::{load_model, save_model, OvoSvmModel, SvmParams};
use gesturekeeper::synthgen::{generate_dataset, SynthConfig};
use gesturekeeper::{Error, Label, LabeledDataset, LabeledInterval};

use params::{Settings, DEFAULTS_HELP};

const DEFAULT_SEED: u64 = 2024;

#[derive(Parser)]
#[command(
    name = "gesturekeeper",
    version,
    about = "Gesture identification and recognition for wearable IMU streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; every random draw derives from it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = one per core). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Parameter override file with `key = value` lines.
    #[arg(long)]
    params: Option<PathBuf>,
}

/// Where a recognition dataset comes from.
#[derive(Args, Clone)]
struct DataSource {
    /// Feature CSV written by `featurize` (or `augment`).
    #[arg(long, conflicts_with = "recordings")]
    data: Option<PathBuf>,
    /// Directory of `<subject>.imu.csv` + `<subject>.labels.csv` recordings.
    #[arg(long = "in", value_name = "DIR")]
    recordings: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FeatureSet {
    /// Per-fold selection of the top statistical features plus all sample features.
    Selected,
    All,
    Samples,
    Statistical,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Classifier {
    Svm,
    Forest,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Loso,
    EndToEnd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Task {
    Recognition,
    Identification,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic recognition and identification corpora.
    #[command(after_help = DEFAULTS_HELP)]
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        subjects: usize,
        /// Repetitions of each gesture per subject.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Subjects in the continuous identification corpus.
        #[arg(long, default_value_t = 4)]
        id_subjects: usize,
        /// Minutes per identification recording.
        #[arg(long, default_value_t = 56.25)]
        adl_minutes: f64,
        /// Share of identification samples inside gestures.
        #[arg(long, default_value_t = 0.005)]
        gesture_fraction: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Windowed recurrence rate and transitivity of one channel.
    #[command(after_help = DEFAULTS_HELP)]
    RqaFeatures {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "acc_y")]
        channel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Export one window's recurrence plot as a binary PGM image.
    #[command(after_help = DEFAULTS_HELP)]
    RpExport {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "acc_y")]
        channel: String,
        /// First sample of the window.
        #[arg(long, default_value_t = 0)]
        start: usize,
        /// Window length in samples (defaults to rqa.window).
        #[arg(long)]
        len: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Turn labelled recordings into a feature CSV (one row per gesture).
    #[command(after_help = DEFAULTS_HELP)]
    Featurize {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train the gesture-window identifier with leave-one-subject-out evaluation.
    #[command(after_help = DEFAULTS_HELP)]
    TrainIdentifier {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Directory for report.csv and confusion.csv.
        #[arg(long)]
        report_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Find candidate gesture intervals in a stream.
    #[command(after_help = DEFAULTS_HELP)]
    Identify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train the twelve-gesture recogniser.
    #[command(after_help = DEFAULTS_HELP)]
    TrainRecognizer {
        #[command(flatten)]
        source: DataSource,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = FeatureSet::Selected)]
        features: FeatureSet,
        /// Standard deviation of the noisy copy added to the standardised training rows.
        #[arg(long)]
        augment: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Classify segments of a stream.
    #[command(after_help = DEFAULTS_HELP)]
    Recognize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// CSV with `start,end` columns (label files qualify); default: the whole stream.
        #[arg(long)]
        segments: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate recognition or identification.
    #[command(after_help = DEFAULTS_HELP)]
    Evaluate {
        #[command(flatten)]
        source: DataSource,
        #[arg(long, value_enum, default_value_t = Mode::Loso)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Task::Recognition)]
        task: Task,
        #[arg(long, value_enum, default_value_t = Classifier::Svm)]
        classifier: Classifier,
        /// Feature set (default: selected for svm, all for forest).
        #[arg(long, value_enum)]
        features: Option<FeatureSet>,
        /// Noise augmentation of the standardised training rows (svm only).
        #[arg(long)]
        augment: Option<f64>,
        /// Identification recordings for end-to-end mode.
        #[arg(long, value_name = "DIR")]
        streams: Option<PathBuf>,
        /// Output directory for report files.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Permutation importance of each feature.
    #[command(after_help = DEFAULTS_HELP)]
    Importance {
        #[command(flatten)]
        source: DataSource,
        #[arg(long, value_enum, default_value_t = FeatureSet::Statistical)]
        features: FeatureSet,
        /// Repetitions per feature (defaults to importance.reps).
        #[arg(long)]
        reps: Option<usize>,
        /// Rank with the recognition kernel instead of gamma = 1/d.
        #[arg(long)]
        tuned: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Standardise a feature CSV and append a Gaussian-noise copy of every row.
    #[command(after_help = DEFAULTS_HELP)]
    Augment {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Synth { common, .. }
            | Command::RqaFeatures { common, .. }
            | Command::RpExport { common, .. }
            | Command::Featurize { common, .. }
            | Command::TrainIdentifier { common, .. }
            | Command::Identify { common, .. }
            | Command::TrainRecognizer { common, .. }
            | Command::Recognize { common, .. }
            | Command::Evaluate { common, .. }
            | Command::Importance { common, .. }
            | Command::Augment { common, .. } => common,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Format(_) | Error::Io(_) | Error::Csv(_) => 2,
        Error::InvalidInput(_) | Error::Convergence(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let jobs = cli.command.common().jobs;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

type Result<T> = gesturekeeper::Result<T>;

fn channel(name: &str) -> Result<Channel> {
    Channel::all()
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::invalid(format!("unknown channel '{name}'")))
}

/// Fails early, naming the path, when an input file or directory is missing.
fn existing(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{}: no such file or directory", path.display()),
        )))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn load_dataset(source: &DataSource, settings: &Settings) -> Result<LabeledDataset> {
    match (&source.data, &source.recordings) {
        (Some(p), _) => LabeledDataset::load_csv(existing(p)?),
        (None, Some(dir)) => segment_dataset(
            &load_recordings(existing(dir)?)?,
            &FeatureRegistry::standard(settings.samples),
        ),
        (None, None) => Err(Error::invalid("give --data FILE or --in DIR")),
    }
}

/// Restricts to a fixed feature subset; `Selected` keeps every column for per-fold selection.
fn restrict(ds: &LabeledDataset, set: FeatureSet) -> Result<LabeledDataset> {
    let reg = FeatureRegistry::from_names(ds.feature_names())?;
    match set {
        FeatureSet::All | FeatureSet::Selected => Ok(ds.clone()),
        FeatureSet::Samples => ds.select_columns(&reg.sample_indices()),
        FeatureSet::Statistical => ds.select_columns(&reg.statistical_indices()),
    }
}

fn svm_trainer(settings: &Settings, augment: Option<f64>) -> Result<SvmTrainer> {
    Ok(SvmTrainer {
        params: settings.recognition()?,
        augment_sigma: augment,
    })
}

fn selecting(settings: &Settings, svm: SvmTrainer) -> SelectingTrainer {
    SelectingTrainer {
        svm,
        k: settings.k,
        importance_reps: settings.selection_reps,
    }
}

fn save_report(report: &EvaluationReport, dir: &Path) -> Result<()> {
    report.save(dir)?;
    println!("{}", report.summary());
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    let settings = Settings::load(cmd.common().params.as_deref())?;
    let seed = cmd.common().seed;
    match cmd {
        Command::Synth {
            out,
            subjects,
            reps,
            id_subjects,
            adl_minutes,
            gesture_fraction,
            ..
        } => {
            let cfg = SynthConfig {
                n_subjects: subjects,
                reps,
                identification_subjects: id_subjects,
                adl_minutes,
                gesture_fraction,
                seed,
                ..SynthConfig::default()
            };
            let corpus = generate_dataset(&cfg)?;
            corpus.save(&out)?;
            let segments: usize = corpus.recognition.iter().map(|r| r.intervals.len()).sum();
            println!(
                "wrote {segments} gesture segments for {subjects} subjects and {id_subjects} identification recordings to {}",
                out.display()
            );
        }
        Command::RqaFeatures {
            input,
            out,
            channel: ch,
            ..
        } => {
            let cfg = settings.identification()?;
            let series = parse_imu_csv(existing(&input)?)?.channel(channel(&ch)?);
            let rows = windowed_rqa(&series, cfg.embedding, &cfg.rp, cfg.window)?;
            write_rqa_csv(&rows, create(&out)?)?;
            println!("wrote {} windows to {}", rows.len(), out.display());
        }
        Command::RpExport {
            input,
            out,
            channel: ch,
            start,
            len,
            ..
        } => {
            let cfg = settings.identification()?;
            let series = parse_imu_csv(existing(&input)?)?.channel(channel(&ch)?);
            let len = len.unwrap_or(cfg.window.window_len);
            let end = start
                .checked_add(len)
                .filter(|&e| e <= series.len())
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "window [{start}, {start}+{len}) exceeds stream of length {}",
                        series.len()
                    ))
                })?;
            let states = time_delay_embed(&series[start..end], cfg.embedding)?;
            let plot = embedded_recurrence_plot(&states, cfg.embedding, &cfg.rp);
            plot.write_pgm(create(&out)?)?;
            println!(
                "wrote {0}x{0} recurrence plot to {1}",
                plot.size(),
                out.display()
            );
        }
        Command::Featurize { input, out, .. } => {
            let ds = segment_dataset(
                &load_recordings(existing(&input)?)?,
                &FeatureRegistry::standard(settings.samples),
            )?;
            ds.save_csv(&out)?;
            println!(
                "wrote {} rows x {} features to {}",
                ds.len(),
                ds.n_features(),
                out.display()
            );
        }
        Command::TrainIdentifier {
            input,
            model,
            report_dir,
            ..
        } => {
            let cfg = settings.identification()?;
            let outcome = train_identifier(&load_recordings(existing(&input)?)?, &cfg, seed)?;
            save_model(&outcome.model, &model)?;
            if let Some(dir) = report_dir {
                save_report(&outcome.report, &dir)?;
            } else {
                println!("{}", outcome.report.summary());
            }
        }
        Command::Identify {
            input, model, out, ..
        } => {
            let cfg = settings.identification()?;
            let model: OvoSvmModel<f64> = load_model(existing(&model)?)?;
            let found = identify_segments(&parse_imu_csv(existing(&input)?)?, &model, &cfg)?;
            let mut w = create(&out)?;
            use std::io::Write;
            writeln!(w, "start,end")?;
            for r in &found {
                writeln!(w, "{},{}", r.start, r.end)?;
            }
            println!("found {} candidate segments", found.len());
        }
        Command::TrainRecognizer {
            source,
            model,
            features,
            augment,
            ..
        } => {
            let ds = restrict(&load_dataset(&source, &settings)?, features)?;
            let svm = svm_trainer(&settings, augment)?;
            let trained = if features == FeatureSet::Selected {
                let columns = selecting(&settings, svm).select(&ds, seed)?;
                svm.train(&ds.select_columns(&columns)?, seed)?
            } else {
                svm.train(&ds, seed)?
            };
            save_model(&trained, &model)?;
            println!(
                "trained {} pairwise models on {} rows x {} features",
                trained.num_models(),
                ds.len(),
                trained.feature_names().len()
            );
        }
        Command::Recognize {
            input,
            model,
            segments,
            out,
            ..
        } => recognize(&input, &model, segments.as_deref(), &out)?,
        Command::Evaluate {
            source,
            mode,
            task,
            classifier,
            features,
            augment,
            streams,
            out,
            ..
        } => evaluate(
            &settings,
            seed,
            &source,
            mode,
            task,
            classifier,
            features,
            augment,
            streams.as_deref(),
            &out,
        )?,
        Command::Importance {
            source,
            features,
            reps,
            tuned,
            out,
            ..
        } => {
            let ds = restrict(&load_dataset(&source, &settings)?, features)?;
            let params = if tuned {
                settings.recognition()?
            } else {
                SvmParams::exploratory(ds.n_features())
            };
            let opts = ImportanceOptions {
                n_reps: reps.unwrap_or(settings.importance_reps),
                seed,
            };
            let report = permutation_importance(&ds, &SvmTrainer::new(params), &opts)?;
            report.write_csv(create(&out)?)?;
            println!(
                "baseline accuracy {:.4}; wrote {}",
                report.baseline,
                out.display()
            );
        }
        Command::Augment {
            data, out, sigma, ..
        } => {
            let ds = LabeledDataset::load_csv(existing(&data)?)?;
            let scaler = Scaler::fit(ds.rows())?;
            let scaled = ds.with_rows(scaler.transform(ds.rows())?)?;
            let aug = noise_augment(&scaled, sigma, seed)?;
            aug.save_csv(&out)?;
            println!("wrote {} rows to {}", aug.len(), out.display());
        }
    }
    Ok(())
}

fn recognize(input: &Path, model: &Path, segments: Option<&Path>, out: &Path) -> Result<()> {
    use std::io::Write;
    let stream = parse_imu_csv(existing(input)?)?;
    let model: OvoSvmModel<f64> = load_model(existing(model)?)?;
    let registry = FeatureRegistry::from_names(model.feature_names())?;
    let ranges = match segments {
        Some(p) => read_ranges(existing(p)?)?,
        None => vec![(0, stream.len())],
    };
    let mut w = create(out)?;
    writeln!(w, "start,end,label")?;
    for (start, end) in ranges {
        let iv = LabeledInterval {
            start,
            end,
            label: Label::Adl,
            subject_id: stream.subject_id().to_string(),
        };
        let row = registry.extract(&extract_segment(&stream, &iv)?)?;
        let p = model.predict(&row)?;
        writeln!(w, "{start},{end},{}", model.classes()[p.class])?;
    }
    Ok(())
}

/// `start,end` pairs from any CSV carrying those two columns.
fn read_ranges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = lines
        .next()
        .map(|(_, h)| h.split(',').map(str::trim).collect())
        .ok_or_else(|| Error::Format(format!("{}: empty segment file", path.display())))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Format(format!("{}: missing column '{name}'", path.display())))
    };
    let (s, e) = (col("start")?, col("end")?);
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize| -> Result<usize> {
            cells.get(c).and_then(|v| v.parse().ok()).ok_or_else(|| {
                Error::parse(
                    "segments",
                    i as u64 + 1,
                    "expected non-negative integer start/end",
                )
            })
        };
        out.push((get(s)?, get(e)?));
    }
    Ok(out)
}

fn evaluate_with<T: Trainer>(
    ds: &LabeledDataset,
    trainer: &T,
    seed: u64,
    out: &Path,
) -> Result<()> {
    save_report(&loso_evaluate(ds, trainer, seed)?, out)
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    settings: &Settings,
    seed: u64,
    source: &DataSource,
    mode: Mode,
    task: Task,
    classifier: Classifier,
    features: Option<FeatureSet>,
    augment: Option<f64>,
    streams: Option<&Path>,
    out: &Path,
) -> Result<()> {
    if task == Task::Identification {
        let dir = source
            .recordings
            .as_ref()
            .ok_or_else(|| Error::invalid("identification needs --in DIR of recordings"))?;
        let cfg = settings.identification()?;
        let outcome = train_identifier(&load_recordings(existing(dir)?)?, &cfg, seed)?;
        return save_report(&outcome.report, out);
    }
    let features = features.unwrap_or(match classifier {
        Classifier::Svm => FeatureSet::Selected,
        Classifier::Forest => FeatureSet::All,
    });
    let ds = restrict(&load_dataset(source, settings)?, features)?;
    if classifier == Classifier::Forest && (features == FeatureSet::Selected || augment.is_some()) {
        return Err(Error::invalid(
            "the forest baseline takes a fixed feature set and no augmentation",
        ));
    }
    match mode {
        Mode::Loso => match classifier {
            Classifier::Forest => evaluate_with(
                &ds,
                &ForestTrainer {
                    cfg: settings.forest(seed),
                },
                seed,
                out,
            ),
            Classifier::Svm => {
                let svm = svm_trainer(settings, augment)?;
                if features == FeatureSet::Selected {
                    evaluate_with(&ds, &selecting(settings, svm), seed, out)
                } else {
                    evaluate_with(&ds, &svm, seed, out)
                }
            }
        },
        Mode::EndToEnd => {
            let dir =
                streams.ok_or_else(|| Error::invalid("end-to-end mode needs --streams DIR"))?;
            let recordings: Vec<Recording> = load_recordings(existing(dir)?)?;
            let cfg = settings.identification()?;
            let report = match classifier {
                Classifier::Forest => end_to_end_evaluate(
                    &recordings,
                    &ds,
                    &ForestTrainer {
                        cfg: settings.forest(seed),
                    },
                    &cfg,
                    seed,
                )?,
                Classifier::Svm => {
                    let svm = svm_trainer(settings, augment)?;
                    if features == FeatureSet::Selected {
                        end_to_end_evaluate(
                            &recordings,
                            &ds,
                            &selecting(settings, svm),
                            &cfg,
                            seed,
                        )?
                    } else {
                        end_to_end_evaluate(&recordings, &ds, &svm, &cfg, seed)?
                    }
                }
            };
            std::fs::create_dir_all(out)?;
            report.write_csv(create(&out.join("end_to_end.csv"))?)?;
            report
                .confusion
                .write_csv(create(&out.join("confusion.csv"))?)?;
            println!("{}", report.summary());
            Ok(())
        }
    }
}
