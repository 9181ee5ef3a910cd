use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};

use cine_core::eval::{
    embed_method, evaluate_embedding, run_experiment, Builtin, EmbedContext, Embedder, ExperimentConfig, Method,
    MetricsRow, MetricsTable,
};
use cine_core::graph::ProximityMatrix;
use cine_core::io::{self, DatasetBundle};
use cine_core::labels::{LabeledView, SplitPlan};
use cine_core::{Embedding, Error};

use crate::args::{
    parse_list, BenchArgs, Cli, Command, ConvertArgs, DatasetArgs, EmbedArgs, EvalArgs, Source, SplitArgs,
};

/// Stopping threshold for embed and eval when `--tol` is absent.
const RUN_TOL: f64 = 1e-4;
/// Bench runs a fixed iteration count so timings compare like for like.
const BENCH_TOL: f64 = 0.0;

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Convert(a) => convert(a),
        Command::Split(a) => split(a),
        Command::Embed(a) => embed(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
    }
}

fn load(data: &DatasetArgs) -> Result<DatasetBundle> {
    let bundle = io::load_dataset(
        &data.edges,
        data.features.as_deref(),
        data.labels.as_deref(),
        data.directed,
    )?;
    log::info!(
        "loaded {}: {} nodes, {} edges, {} classes",
        bundle.name,
        bundle.n(),
        bundle.graph.edge_count(),
        bundle.labels.num_classes()
    );
    Ok(bundle)
}

fn require_labels(bundle: &DatasetBundle, what: &str) -> Result<()> {
    if bundle.has_labels() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} needs --labels")).into())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Absolute form of an input path so a manifest replays from any directory.
fn absolute(path: &Path) -> String {
    std::path::absolute(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string()
}

fn dataset_manifest(data: &DatasetArgs) -> Vec<(&'static str, String)> {
    let mut out = vec![("edges", absolute(&data.edges))];
    if let Some(p) = &data.features {
        out.push(("features", absolute(p)));
    }
    if let Some(p) = &data.labels {
        out.push(("labels", absolute(p)));
    }
    out.push(("directed", data.directed.to_string()));
    out
}

fn format_manifest(command: &str, pairs: &[(&str, String)]) -> String {
    let mut out = format!("# cine {command}; replay with `cine {command} --config <this file> --out <dir>`\n");
    for (k, v) in pairs {
        writeln!(out, "{k}={v}").unwrap();
    }
    out
}

fn convert(a: &ConvertArgs) -> Result<()> {
    create_dir(&a.out)?;
    match a.from {
        Source::Planetoid => {
            let (Some(content), Some(cites)) = (&a.content, &a.cites) else {
                return Err(Error::Config("--from planetoid needs --content and --cites".into()).into());
            };
            let name = a.name.clone().unwrap_or_else(|| {
                content
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into())
            });
            let s = io::convert_planetoid(content, cites, &a.out, &name)?;
            println!(
                "{name}: {} nodes, {} edges ({} dropped), {} features",
                s.nodes, s.edges, s.dropped_edges, s.feature_dim
            );
            println!("{}\n{}\n{}", s.edges_path.display(), s.features_path.display(), s.labels_path.display());
        }
        Source::Sbm | Source::Random => {
            let bundle = if a.from == Source::Sbm {
                io::generate_sbm(a.blocks, a.per_block, a.p_in, a.p_out, a.seed)?
            } else {
                io::generate_random_graph(a.nodes, a.seed)?
            };
            let name = a.name.clone().unwrap_or_else(|| bundle.name.clone());
            let paths = io::write_dataset(&bundle, &a.out, &name)?;
            println!(
                "{name}: {} nodes, {} edges, {} classes",
                bundle.n(),
                bundle.graph.edge_count(),
                bundle.labels.num_classes()
            );
            for p in [Some(paths.edges), paths.features, paths.labels].into_iter().flatten() {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn split(a: &SplitArgs) -> Result<()> {
    let bundle = load(&a.data)?;
    require_labels(&bundle, "split")?;
    let labels = &bundle.labels;
    let plan = match &a.unseen_classes {
        Some(list) => {
            let unseen = list
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|name| {
                    labels
                        .class_index(name)
                        .ok_or_else(|| Error::Config(format!("unknown class `{name}`")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            SplitPlan::with_unseen(labels, a.rate, &unseen, a.seed)?
        }
        None => SplitPlan::sample(labels, a.rate, a.unseen, a.seed)?,
    };
    plan.write(labels, &a.out)?;
    let names: Vec<&str> = plan.unseen().iter().map(|&c| labels.class_names()[c].as_str()).collect();
    println!(
        "train {} (seen {}), test {}, unseen [{}]",
        plan.train().len(),
        plan.seen_train().len(),
        plan.test().len(),
        names.join(",")
    );
    Ok(())
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let bundle = load(&a.data)?;
    if a.method.uses_labels() {
        require_labels(&bundle, a.method.name())?;
    }
    let plan = match &a.split {
        Some(p) => Some(SplitPlan::read(&bundle.labels, p)?),
        None if bundle.has_labels() => Some(SplitPlan::sample(&bundle.labels, a.rate, a.unseen, a.seed)?),
        None => None,
    };
    let view = match &plan {
        Some(plan) => LabeledView::new(plan, &bundle.labels),
        None => LabeledView::unlabeled(bundle.n(), bundle.labels.num_classes()),
    };
    let settings = a.model.settings(RUN_TOL, a.seed);
    let proximity = ProximityMatrix::of_graph(&bundle.graph);
    let ctx = EmbedContext {
        graph: &bundle.graph,
        features: bundle.features.as_ref(),
        proximity: &proximity,
    };
    let start = Instant::now();
    let out = embed_method(a.method, &ctx, &view, &settings, None)?;
    log::info!("{} finished in {:.2}s", a.method, start.elapsed().as_secs_f64());

    create_dir(&a.out)?;
    io::write_embedding(&a.out.join("embedding.tsv"), &out.embedding, Some(&bundle.ids))?;
    write_text(&a.out.join("trace.tsv"), &out.trace)?;
    io::write_idmap(&a.out.join(format!("{}.idmap", bundle.name)), &bundle.ids)?;
    if let Some(plan) = &plan {
        plan.write(&bundle.labels, &a.out.join("split.txt"))?;
    }

    let mut pairs = dataset_manifest(&a.data);
    pairs.push(("method", a.method.name().to_string()));
    match &a.split {
        Some(p) => pairs.push(("split", absolute(p))),
        None => {
            pairs.push(("rate", a.rate.to_string()));
            pairs.push(("unseen", a.unseen.to_string()));
        }
    }
    pairs.push(("seed", a.seed.to_string()));
    pairs.extend(a.model.manifest(RUN_TOL));
    write_text(&a.out.join("manifest.txt"), &format_manifest("embed", &pairs))?;
    println!(
        "{}: {} x {} embedding written to {}",
        a.method,
        out.embedding.n(),
        out.embedding.dim(),
        a.out.display()
    );
    Ok(())
}

/// Reorders stored rows into the dataset's node order by id.
fn align_embedding(embedding: Embedding, stored_ids: &[String], bundle: &DatasetBundle) -> Result<Embedding> {
    if embedding.n() != bundle.n() {
        return Err(Error::Data(format!("embedding has {} rows, dataset has {} nodes", embedding.n(), bundle.n())).into());
    }
    if stored_ids.is_empty() || stored_ids == bundle.ids.as_slice() {
        return Ok(embedding);
    }
    let row_of: HashMap<&str, usize> = stored_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut order = Vec::with_capacity(bundle.n());
    for id in &bundle.ids {
        let r = row_of
            .get(id.as_str())
            .ok_or_else(|| Error::Data(format!("node `{id}` missing from the embedding")))?;
        order.push(*r);
    }
    Ok(Embedding::new(embedding.matrix().select_rows(&order)))
}

fn eval(a: &EvalArgs) -> Result<()> {
    let bundle = load(&a.data)?;
    require_labels(&bundle, "eval")?;
    let table = match &a.embedding {
        Some(path) => eval_stored(a, &bundle, path)?,
        None => eval_methods(a, &bundle)?,
    };
    let report = table.report();
    print!("{report}");
    match &a.out {
        Some(dir) => {
            create_dir(dir)?;
            write_text(&dir.join("metrics.tsv"), &table.to_tsv())?;
            write_text(&dir.join("report.txt"), &report)?;
            write_text(&dir.join("manifest.txt"), &format_manifest("eval", &eval_manifest(a)))?;
        }
        None => print!("{}", table.to_tsv()),
    }
    Ok(())
}

fn eval_stored(a: &EvalArgs, bundle: &DatasetBundle, path: &Path) -> Result<MetricsTable> {
    let split = a.split.as_ref().expect("clap enforces --split with --embedding");
    let (embedding, ids) = io::read_embedding(path)?;
    let embedding = align_embedding(embedding, &ids, bundle)?;
    let plan = SplitPlan::read(&bundle.labels, split)?;
    let report = evaluate_embedding(&embedding, &plan, &bundle.labels, &a.svm(plan.seed()))?;
    Ok(MetricsTable {
        rows: vec![MetricsRow {
            method: "embedding".into(),
            rate: plan.train_fraction(),
            repeat: 0,
            unseen: plan.unseen().to_vec(),
            micro_f1: report.micro_f1,
            macro_f1: report.macro_f1,
        }],
    })
}

fn eval_methods(a: &EvalArgs, bundle: &DatasetBundle) -> Result<MetricsTable> {
    let methods: Vec<Method> = parse_list(&a.method, "method")?;
    let rates: Vec<f64> = parse_list(&a.rates, "rate")?;
    let settings = a.model.settings(RUN_TOL, a.seed);
    let builtins: Vec<Builtin> = methods
        .iter()
        .map(|&method| Builtin {
            method,
            settings: settings.clone(),
        })
        .collect();
    let embedders: Vec<&dyn Embedder> = builtins.iter().map(|b| b as &dyn Embedder).collect();
    let config = ExperimentConfig {
        rates,
        unseen_count: a.unseen,
        schedule: a.schedule.into(),
        repeats: a.repeats,
        seed: a.seed,
        svm: a.svm(a.seed),
    };
    let proximity = ProximityMatrix::of_graph(&bundle.graph);
    let ctx = EmbedContext {
        graph: &bundle.graph,
        features: bundle.features.as_ref(),
        proximity: &proximity,
    };
    Ok(run_experiment(&ctx, &bundle.labels, &embedders, &config)?)
}

fn eval_manifest(a: &EvalArgs) -> Vec<(&'static str, String)> {
    let mut pairs = dataset_manifest(&a.data);
    if let Some(p) = &a.embedding {
        pairs.push(("embedding", absolute(p)));
    }
    if let Some(p) = &a.split {
        pairs.push(("split", absolute(p)));
    }
    pairs.extend([
        ("method", a.method.clone()),
        ("rates", a.rates.clone()),
        ("unseen", a.unseen.to_string()),
        ("schedule", format!("{:?}", a.schedule).to_lowercase()),
        ("repeats", a.repeats.to_string()),
        ("seed", a.seed.to_string()),
        ("svm-c", a.svm_c.to_string()),
        ("svm-epochs", a.svm_epochs.to_string()),
    ]);
    pairs.extend(a.model.manifest(RUN_TOL));
    pairs
}

fn bench(a: &BenchArgs) -> Result<()> {
    let sizes: Vec<usize> = parse_list(&a.sizes, "size")?;
    let methods: Vec<Method> = parse_list(&a.method, "method")?;
    if !(a.timeout > 0.0) {
        return Err(Error::Config("--timeout must be positive".into()).into());
    }
    let settings = a.model.settings(BENCH_TOL, a.seed);
    let mut table = String::from("n\tmethod\tseconds\n");
    print!("{table}");
    for &n in &sizes {
        let bundle = io::generate_random_graph(n, a.seed)?;
        let plan = io::scalability_split(&bundle.labels, a.seed)?;
        let view = LabeledView::new(&plan, &bundle.labels);
        let proximity = ProximityMatrix::of_graph(&bundle.graph);
        let ctx = EmbedContext {
            graph: &bundle.graph,
            features: bundle.features.as_ref(),
            proximity: &proximity,
        };
        for &method in &methods {
            let start = Instant::now();
            let deadline = start + Duration::from_secs_f64(a.timeout);
            let cell = match embed_method(method, &ctx, &view, &settings, Some(deadline)) {
                Ok(_) => format!("{:.3}", start.elapsed().as_secs_f64()),
                Err(Error::Timeout(_)) => "timeout".to_string(),
                Err(e) => return Err(e.into()),
            };
            let line = format!("{n}\t{method}\t{cell}\n");
            print!("{line}");
            table.push_str(&line);
        }
    }
    if let Some(path) = &a.out {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_dir(dir)?;
        }
        write_text(path, &table)?;
    }
    Ok(())
}
