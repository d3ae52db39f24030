use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use deepmap_core::alignment::{dataset_centralities, read_tensor, write_tensor};
use deepmap_core::eval::{
    gram_matrix_sparse, CvReport, KernelPipeline, DeepMapPipeline, FoldPipeline, LogRegConfig,
};
use deepmap_core::features::{
    featurize_dataset, graph_feature_map_sparse, read_index, read_vertex_features, write_index,
    write_vertex_features,
};
use deepmap_core::graph::{generate_er_dataset, read_tu_dataset, write_tu_dataset, SynthConfig};
use deepmap_core::nn::{train as train_model, write_checkpoint};
use deepmap_core::{
    assemble_input, cross_validate, min_eigenvalue, FeatureKind, GraphDataset, Model, ModelConfig, TrainConfig,
};
use log::{info, warn};

use crate::exit::{CliError, CliResult};
use crate::settings::Settings;
use crate::{DataArgs, KindArgs, TrainArgs};

const EFFECTIVE_CONFIG: &str = "effective_config.txt";
const PSD_TOLERANCE: f64 = 1e-12;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::from_io(path, e)
}

/// Refuses if any of `files` already exists in `out` (unless forced), then
/// creates the directory.
fn prepare_out(out: &Path, files: &[&str], force: bool) -> CliResult<()> {
    if !force {
        if let Some(f) = files.iter().map(|f| out.join(f)).find(|p| p.exists()) {
            return Err(CliError::Refusal(f.display().to_string()));
        }
    }
    fs::create_dir_all(out).map_err(io_err(out))
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    write(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(io_err(path))?))
}

fn finish(s: &Settings, command: &str, out: &Path) -> CliResult<()> {
    for key in s.unused_keys() {
        warn!("config key {key:?} is not used by {command}");
    }
    let text = format!("command = {command}\n{}", s.render());
    let path = out.join(EFFECTIVE_CONFIG);
    fs::write(&path, text).map_err(io_err(&path))
}

fn synth_config(
    s: &mut Settings,
    prefix: &str,
    flags: [Option<&str>; 6],
) -> CliResult<SynthConfig> {
    let d = SynthConfig::default();
    let [graphs, classes, min_size, max_size, p, seed] = flags;
    let key = |k: &str| format!("{prefix}{k}");
    Ok(SynthConfig {
        num_graphs: s.get(&key("graphs"), graphs, &d.num_graphs.to_string())?,
        classes: s.get(&key("classes"), classes, &d.classes.to_string())?,
        min_size: s.get(&key("min-size"), min_size, &d.min_size.to_string())?,
        max_size: s.get(&key("max-size"), max_size, &d.max_size.to_string())?,
        edge_prob: s.get(&key("p"), p, &d.edge_prob.to_string())?,
        seed: s.get(&key("seed"), seed, &d.seed.to_string())?,
    })
}

fn load_dataset(s: &mut Settings, args: &DataArgs) -> CliResult<GraphDataset> {
    let synthetic = s.get::<bool>("synthetic", args.synthetic.then_some("true"), "false")?;
    let data = s.get_opt("data", args.data.as_deref());
    match (data, synthetic) {
        (Some(_), true) | (None, false) => Err(CliError::Argument(
            "give exactly one dataset source: --data DIR or --synthetic".into(),
        )),
        (None, true) => {
            let config = synth_config(
                s,
                "synth-",
                [
                    args.synth_graphs.as_deref(),
                    args.synth_classes.as_deref(),
                    args.synth_min_size.as_deref(),
                    args.synth_max_size.as_deref(),
                    args.synth_p.as_deref(),
                    args.synth_seed.as_deref(),
                ],
            )?;
            Ok(generate_er_dataset(&config)?)
        }
        (Some(dir), false) => {
            let dir = PathBuf::from(dir);
            let default_name = dir_name(&dir)?;
            let name = s.get::<String>("name", args.name.as_deref(), &default_name)?;
            let indicator = dir.join(format!("{name}_graph_indicator.txt"));
            if !indicator.exists() {
                return Err(CliError::Missing(indicator));
            }
            let ds = read_tu_dataset(&dir, &name)?;
            info!("read {} graphs, {} classes from {}", ds.len(), ds.class_count(), dir.display());
            Ok(ds)
        }
    }
}

fn dir_name(dir: &Path) -> CliResult<String> {
    dir.file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Argument(format!("cannot derive a dataset name from {}", dir.display())))
}

fn resolve_kind(s: &mut Settings, args: &KindArgs, seed: u64) -> CliResult<FeatureKind> {
    let kind = match s.get::<String>("kind", args.kind.as_deref(), "wl")?.as_str() {
        "wl" => FeatureKind::WlSubtree {
            iterations: s.get("h", args.h.as_deref(), "2")?,
        },
        "sp" => FeatureKind::ShortestPath,
        "gk" => FeatureKind::Graphlet {
            size: s.get("k", args.k.as_deref(), "3")?,
            samples: s.get("q", args.q.as_deref(), "20")?,
            seed,
        },
        other => return Err(CliError::Argument(format!("unknown feature kind {other:?}; expected wl, sp or gk"))),
    };
    kind.validate()?;
    Ok(kind)
}

fn train_config(s: &mut Settings, args: &TrainArgs, seed: u64) -> CliResult<TrainConfig> {
    let d = TrainConfig::default();
    let config = TrainConfig {
        learning_rate: s.get("lr", args.lr.as_deref(), &d.learning_rate.to_string())?,
        decay_factor: s.get("decay", args.decay.as_deref(), &d.decay_factor.to_string())?,
        patience: s.get("patience", args.patience.as_deref(), &d.patience.to_string())?,
        batch_size: s.get("batch", args.batch.as_deref(), &d.batch_size.to_string())?,
        max_epochs: s.get("epochs", args.epochs.as_deref(), &d.max_epochs.to_string())?,
        seed,
        ..d
    };
    config.validate()?;
    Ok(config)
}

pub struct SynthArgs {
    pub graphs: Option<String>,
    pub classes: Option<String>,
    pub min_size: Option<String>,
    pub max_size: Option<String>,
    pub p: Option<String>,
    pub seed: Option<String>,
    pub name: Option<String>,
}

pub fn synth(s: &mut Settings, args: &SynthArgs, out: &Path, force: bool) -> CliResult<()> {
    let config = synth_config(
        s,
        "",
        [
            args.graphs.as_deref(),
            args.classes.as_deref(),
            args.min_size.as_deref(),
            args.max_size.as_deref(),
            args.p.as_deref(),
            args.seed.as_deref(),
        ],
    )?;
    let name = s.get::<String>("name", args.name.as_deref(), &dir_name(out)?)?;
    let files: Vec<String> = ["A", "graph_indicator", "graph_labels", "node_labels"]
        .iter()
        .map(|f| format!("{name}_{f}.txt"))
        .chain([EFFECTIVE_CONFIG.to_string()])
        .collect();
    let files: Vec<&str> = files.iter().map(String::as_str).collect();
    // validate before touching the filesystem
    let ds = generate_er_dataset(&config)?;
    prepare_out(out, &files, force)?;
    write_tu_dataset(&ds, out, &name)?;
    finish(s, "synth", out)?;
    println!("wrote {} graphs in {} classes to {}", ds.len(), ds.class_count(), out.display());
    Ok(())
}

pub fn graph_file(id: usize) -> String {
    format!("graph_{id:06}.txt")
}

pub fn featurize(
    s: &mut Settings,
    data: &DataArgs,
    kind: &KindArgs,
    seed: Option<&str>,
    out: &Path,
    force: bool,
) -> CliResult<()> {
    let ds = load_dataset(s, data)?;
    let seed: u64 = s.get("seed", seed, "0")?;
    let kind = resolve_kind(s, kind, seed)?;
    prepare_out(out, &["index.txt", EFFECTIVE_CONFIG], force)?;
    let (index, vfms) = featurize_dataset(&ds, kind)?;
    write_file(&out.join("index.txt"), |w| write_index(w, &index))?;
    for vfm in &vfms {
        write_file(&out.join(graph_file(vfm.graph_id)), |w| write_vertex_features(w, vfm))?;
    }
    finish(s, "featurize", out)?;
    println!("{kind}: {} graphs, dimension {}", vfms.len(), index.dimension());
    Ok(())
}

pub fn assemble(
    s: &mut Settings,
    data: &DataArgs,
    features: &Path,
    r: Option<&str>,
    out: &Path,
    force: bool,
) -> CliResult<()> {
    let ds = load_dataset(s, data)?;
    let r: usize = s.get("r", r, "5")?;
    let index = read_index(open(&features.join("index.txt"))?)?;
    let vfms = (0..ds.len())
        .map(|i| Ok(read_vertex_features(open(&features.join(graph_file(i)))?)?))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(bad) = vfms.iter().find(|v| v.dimension != index.dimension()) {
        return Err(CliError::Other(format!(
            "graph {} has dimension {}, index has {}",
            bad.graph_id,
            bad.dimension,
            index.dimension()
        )));
    }
    prepare_out(out, &["tensor.bin", "labels.txt", EFFECTIVE_CONFIG], force)?;
    let tensor = assemble_input(&ds, &vfms, &dataset_centralities(&ds), r)?;
    write_file(&out.join("tensor.bin"), |w| write_tensor(w, &tensor))?;
    write_file(&out.join("labels.txt"), |w| {
        ds.class_labels().iter().try_for_each(|l| writeln!(w, "{l}"))
    })?;
    finish(s, "assemble", out)?;
    println!(
        "tensor: {} graphs, w = {}, r = {}, m = {}",
        tensor.len(),
        tensor.w,
        tensor.r,
        tensor.m
    );
    Ok(())
}

fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|_| CliError::Other(format!("{}: bad class label {l:?}", path.display())))
        })
        .collect()
}

pub fn train(
    s: &mut Settings,
    tensor_path: &Path,
    labels: Option<&Path>,
    args: &TrainArgs,
    seed: Option<&str>,
    out: &Path,
    force: bool,
) -> CliResult<()> {
    let seed: u64 = s.get("seed", seed, "0")?;
    let config = train_config(s, args, seed)?;
    let labels_path = labels
        .map(Path::to_path_buf)
        .unwrap_or_else(|| tensor_path.with_file_name("labels.txt"));
    let tensor = read_tensor(open(tensor_path)?)?;
    let labels = read_labels(&labels_path)?;
    if labels.len() != tensor.len() {
        return Err(CliError::Other(format!(
            "{} labels for {} tensor graphs",
            labels.len(),
            tensor.len()
        )));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    if classes < 2 {
        return Err(CliError::Argument("training needs at least 2 classes".into()));
    }
    let files = ["checkpoint.bin", "history.csv", "metrics.txt", EFFECTIVE_CONFIG];
    prepare_out(out, &files, force)?;
    let mut model = Model::new(ModelConfig::for_tensor(&tensor, classes), seed)?;
    let history = train_model(&mut model, &tensor, &labels, &config)?;
    write_file(&out.join("checkpoint.bin"), |w| write_checkpoint(w, &model))?;
    write_file(&out.join("history.csv"), |w| history.write_csv(w))?;

    let last = history.last();
    let mut metrics = String::new();
    for key in ["lr", "decay", "patience", "batch", "epochs", "seed"] {
        metrics.push_str(&format!("{key} = {}\n", s.raw(key).unwrap_or("")));
    }
    metrics.push_str(&format!("parameters = {}\n", model.config.parameter_count()));
    metrics.push_str(&format!("epochs_run = {}\n", history.epochs.len()));
    if let Some(e) = last {
        metrics.push_str(&format!(
            "final_loss = {:.6}\nfinal_accuracy = {:.6}\nfinal_lr = {}\n",
            e.loss, e.accuracy, e.lr
        ));
    }
    let path = out.join("metrics.txt");
    fs::write(&path, &metrics).map_err(io_err(&path))?;
    finish(s, "train", out)?;
    print!("{metrics}");
    Ok(())
}

pub struct CvArgs {
    pub pipeline: Option<String>,
    pub r: Option<String>,
    pub l2: Option<String>,
    pub folds: Option<String>,
    pub seed: Option<String>,
}

pub fn cv(
    s: &mut Settings,
    data: &DataArgs,
    kind: &KindArgs,
    train: &TrainArgs,
    args: &CvArgs,
    out: &Path,
    force: bool,
) -> CliResult<()> {
    let ds = load_dataset(s, data)?;
    let seed: u64 = s.get("seed", args.seed.as_deref(), "0")?;
    let folds: usize = s.get("folds", args.folds.as_deref(), "10")?;
    let kind = resolve_kind(s, kind, seed)?;
    let pipeline: Box<dyn FoldPipeline> = match s.get::<String>("pipeline", args.pipeline.as_deref(), "deepmap")?.as_str() {
        "deepmap" => Box::new(DeepMapPipeline {
            kind,
            field_size: s.get("r", args.r.as_deref(), "5")?,
            train: train_config(s, train, seed)?,
        }),
        "kernel" => {
            let d = LogRegConfig::default();
            Box::new(KernelPipeline {
                kind,
                classifier: LogRegConfig {
                    l2_strength: s.get("l2", args.l2.as_deref(), &d.l2_strength.to_string())?,
                    seed,
                    ..d
                },
            })
        }
        other => return Err(CliError::Argument(format!("unknown pipeline {other:?}; expected deepmap or kernel"))),
    };
    let files = ["report.txt", "rows.tsv", "epochs.tsv", EFFECTIVE_CONFIG];
    prepare_out(out, &files, force)?;

    let start = Instant::now();
    let (_, result) = cross_validate(pipeline.as_ref(), &ds, folds, seed)?;
    let wall = start.elapsed().as_secs_f64();
    let mut report = CvReport::new(pipeline.as_ref(), seed, result);
    if pipeline.name() == "kernel" {
        let (index, vfms) = featurize_dataset(&ds, kind)?;
        let maps: Vec<_> = vfms.iter().map(graph_feature_map_sparse).collect();
        let gram = gram_matrix_sparse(&maps, index.dimension())?;
        let lambda = min_eigenvalue(&gram, PSD_TOLERANCE)?;
        let psd = lambda >= -1e-8 * gram.trace().max(1.0);
        report.extra.push(("gram_min_eigenvalue".into(), format!("{lambda:.6e}")));
        report.extra.push(("gram_psd".into(), if psd { "pass" } else { "fail" }.into()));
    }

    let text = report.to_text();
    let path = out.join("report.txt");
    fs::write(&path, &text).map_err(io_err(&path))?;
    write_file(&out.join("rows.tsv"), |w| {
        writeln!(w, "{}", CvReport::ROW_HEADER)?;
        writeln!(w, "{}", report.machine_row(wall))
    })?;
    write_file(&out.join("epochs.tsv"), |w| {
        writeln!(w, "epoch\tmean_accuracy")?;
        report
            .result
            .epoch_means
            .iter()
            .enumerate()
            .try_for_each(|(e, a)| writeln!(w, "{}\t{a:.6}", e + 1))
    })?;
    finish(s, "cv", out)?;
    print!("{text}");
    Ok(())
}
