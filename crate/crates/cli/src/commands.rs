use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use alterlda_core::classify::{
    classify_corpus, ClassifierConfig, ClassifierDeps, LemmaDictionary, ParatextRules,
    UnknownHandPolicy, WordVectors,
};
use alterlda_core::corpus::{
    build_corpus, parse_tei, read_corpus, tokenize, write_corpus, Corpus, TokenizerConfig,
};
use alterlda_core::eval::{evaluate, split, Setting, SplitSpec, DEFAULT_TEST_FRACTION};
use alterlda_core::model::{
    fold_in_corpus, suggest_report, train as train_model, Checkpoint, FoldInConfig, FoldInResult,
    HyperParams, TrainSchedule,
};
use alterlda_core::report::{emit_report, parse_report_json, Format, Report};
use alterlda_core::synth::{alpha_sign_test, grid_search, GridConfig, ReconstructionRule};

use crate::error::{require_exists, CliError};
use crate::meta::{write_artifact, write_sidecar};
use crate::params::{parse_list, ConfigFile, Params};
use crate::{
    ClassifyArgs, EvalArgs, FoldInArgs, IngestArgs, ReportArgs, RunArgs, SuggestArgs, SynthArgs,
    TrainArgs,
};

fn module_at(module: &'static str, path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Module {
        module,
        message: format!("{}: {e}", path.display()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        None => Ok(()),
    }
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    require_exists(path)?;
    read_corpus(path).map_err(|e| module_at("ingest", path, e))
}

/// TEI inputs in file-name order.
fn xml_files(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    if input.is_file() {
        return Ok(vec![input.to_owned()]);
    }
    let entries = std::fs::read_dir(input).map_err(|e| CliError::io(input, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(input, e))?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|x| x.eq_ignore_ascii_case("xml"))
        {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(module_at("ingest", input, "no .xml files"));
    }
    Ok(files)
}

fn format_of(p: &mut Params<'_>, flag: Option<String>, default: &str) -> Result<Format, CliError> {
    let raw = p.value("format", flag, default.to_owned())?;
    raw.parse().map_err(CliError::Config)
}

pub fn ingest(args: &IngestArgs, file: Option<&ConfigFile>) -> Result<PathBuf, CliError> {
    let mut p = Params::new(file, "ingest");
    let input = p.path("input", args.input.clone())?;
    let out = p.path("out", args.out.clone())?;
    let keep_punct = p.flag("keep_punct", args.keep_punct)?;
    let stopwords = p.optional_path("stopwords", args.stopwords.clone());
    let seed = p.seed(args.seed, 0)?;

    require_exists(&input)?;
    let mut cfg = TokenizerConfig {
        keep_punct,
        stopwords: HashSet::new(),
    };
    if let Some(path) = stopwords {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        cfg.stopwords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
    }

    let mut docs = Vec::new();
    for path in xml_files(&input)? {
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let raw = parse_tei(&bytes).map_err(|e| module_at("ingest", &path, e))?;
        for w in &raw.warnings {
            eprintln!("warning: {}: {w}", path.display());
        }
        docs.push(tokenize(&raw, &cfg));
    }
    let corpus = build_corpus(docs)?;
    ensure_parent(&out)?;
    write_corpus(&corpus, &out).map_err(|e| module_at("ingest", &out, e))?;
    write_sidecar(&out, &p, seed)?;
    eprintln!(
        "ingested {} documents, {} tokens, {} word types",
        corpus.num_docs(),
        corpus.total_tokens(),
        corpus.vocab_size()
    );
    Ok(out)
}

pub fn classify(args: &ClassifyArgs, file: Option<&ConfigFile>) -> Result<PathBuf, CliError> {
    let mut p = Params::new(file, "classify");
    let corpus_path = p.path("corpus", args.corpus.clone())?;
    let lemmas = p.path("lemmas", args.lemmas.clone())?;
    let vectors = p.path("vectors", args.vectors.clone())?;
    let patterns = p.optional_path("paratext_patterns", args.paratext_patterns.clone());
    let max_dist = p.value("max_dist", args.max_dist, 2)?;
    let style_threshold = p.value("style_threshold", args.style_threshold, 0.3)?;
    let unknown_hand: UnknownHandPolicy = p
        .value(
            "unknown_hand",
            args.unknown_hand.clone(),
            "accept".to_owned(),
        )?
        .parse()
        .map_err(CliError::Config)?;
    let out = p.path("out", args.out.clone())?;
    let out_corpus = p.path("out_corpus", args.out_corpus.clone())?;
    let seed = p.seed(args.seed, 0)?;

    let mut corpus = load_corpus(&corpus_path)?;
    require_exists(&lemmas)?;
    let dict = LemmaDictionary::from_reader(open(&lemmas)?)
        .map_err(|e| module_at("classify", &lemmas, e))?;
    require_exists(&vectors)?;
    let vecs = WordVectors::from_reader(open(&vectors)?)
        .map_err(|e| module_at("classify", &vectors, e))?;
    let mut paratext = match &patterns {
        Some(path) => {
            require_exists(path)?;
            ParatextRules::from_reader(open(path)?).map_err(|e| module_at("classify", path, e))?
        }
        None => ParatextRules::default(),
    };
    paratext.unknown_hand = unknown_hand;
    let config = ClassifierConfig {
        max_dist,
        style_threshold,
        paratext,
    };
    let deps = ClassifierDeps {
        dict: &dict,
        vectors: &vecs,
        config: &config,
    };
    let table = classify_corpus(&mut corpus, &deps)?;

    write_artifact(
        &out,
        &emit_report(&Report::Categories(table.clone()), Format::Csv),
        &p,
        seed,
    )?;
    ensure_parent(&out_corpus)?;
    write_corpus(&corpus, &out_corpus).map_err(|e| module_at("ingest", &out_corpus, e))?;
    write_sidecar(&out_corpus, &p, seed)?;

    let mut counts = std::collections::BTreeMap::new();
    for row in &table {
        *counts.entry(row.category).or_insert(0usize) += 1;
    }
    let summary: Vec<String> = counts.iter().map(|(c, n)| format!("{c} {n}")).collect();
    eprintln!("classified {} spans: {}", table.len(), summary.join(", "));
    Ok(out_corpus)
}

fn parse_xi(raw: &str) -> Result<[f64; 2], CliError> {
    match parse_list::<f64>("xi", raw)?.as_slice() {
        [x] => Ok([*x, *x]),
        [a, b] => Ok([*a, *b]),
        _ => Err(CliError::config(format!(
            "`xi` takes one or two values, got `{raw}`"
        ))),
    }
}

fn split_spec(
    setting: Setting,
    test_fraction: Option<f64>,
    seed: u64,
) -> Result<SplitSpec, CliError> {
    let spec = SplitSpec {
        setting,
        test_fraction: match setting {
            Setting::S3 => Some(test_fraction.unwrap_or(DEFAULT_TEST_FRACTION)),
            _ => test_fraction,
        },
        seed,
    };
    spec.validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(spec)
}

pub fn train(args: &TrainArgs, file: Option<&ConfigFile>) -> Result<PathBuf, CliError> {
    let mut p = Params::new(file, "train");
    let corpus_path = p.path("corpus", args.corpus.clone())?;
    let k = p.value("k", args.k, 20)?;
    let alpha = p.value("alpha", args.alpha, 0.1)?;
    let eta = p.value("eta", args.eta, 0.1)?;
    let xi = parse_xi(&p.value("xi", args.xi.clone(), "1.0,1.0".to_owned())?)?;
    let sweeps = p.value("sweeps", args.sweeps, 1000)?;
    let burn_in = p.value("burn_in", args.burn_in, 500)?;
    let lag = p.value("lag", args.lag, 10)?;
    let setting: Setting = p
        .value("split", args.split.clone(), "s1".to_owned())?
        .parse()
        .map_err(|e: alterlda_core::eval::EvalError| CliError::config(e.to_string()))?;
    let test_fraction = p.optional("test_fraction", args.test_fraction)?;
    let seed = p.seed(args.seed, 0)?;
    let out = p.path("out", args.out.clone())?;

    let spec = split_spec(setting, test_fraction, seed)?;
    let corpus = load_corpus(&corpus_path)?;
    let (train_corpus, test_corpus) = split(&corpus, &spec)?;
    let hyper = HyperParams::symmetric(k, corpus.vocab_size(), alpha, eta, xi);
    let schedule = TrainSchedule {
        sweeps,
        burn_in,
        sample_lag: (lag > 0).then_some(lag),
    };
    let (state, posterior) = train_model(&train_corpus, hyper, seed, schedule)?;
    let mut ckpt = Checkpoint::new(&state, posterior, &corpus.vocabulary, schedule, spec);
    let stored = std::path::absolute(&corpus_path).unwrap_or(corpus_path.clone());
    ckpt.corpus_path = Some(stored.display().to_string());
    ensure_parent(&out)?;
    ckpt.save(&out).map_err(|e| module_at("model", &out, e))?;
    write_sidecar(&out, &p, seed)?;
    eprintln!(
        "trained K={k} on {} documents ({} tokens, {} held out) for {sweeps} sweeps; log joint {:.3}",
        train_corpus.num_docs(),
        train_corpus.total_tokens(),
        test_corpus.total_tokens(),
        state.log_joint()
    );
    Ok(out)
}

struct Loaded {
    ckpt: Checkpoint,
    train: Corpus,
    test: Corpus,
}

fn load_model(p: &mut Params<'_>, args: &FoldInArgs) -> Result<Loaded, CliError> {
    let model = p.path("model", args.model.clone())?;
    require_exists(&model)?;
    let ckpt = Checkpoint::load(&model).map_err(|e| module_at("model", &model, e))?;
    let corpus_path = match p.optional_path("corpus", args.corpus.clone()) {
        Some(c) => c,
        None => ckpt
            .corpus_path
            .clone()
            .map(PathBuf::from)
            .ok_or_else(|| CliError::config("model names no corpus; pass --corpus"))?,
    };
    let corpus = load_corpus(&corpus_path)?;
    ckpt.check_vocabulary(&corpus.vocabulary)
        .map_err(|e| module_at("model", &corpus_path, e))?;
    let (train, test) = split(&corpus, &ckpt.split)?;
    Ok(Loaded { ckpt, train, test })
}

fn fold_in_all(
    p: &mut Params<'_>,
    args: &FoldInArgs,
    loaded: &Loaded,
    target: &Corpus,
) -> Result<(Vec<FoldInResult>, f64, u64), CliError> {
    let threshold = p.value("threshold", args.threshold, 0.5)?;
    let defaults = FoldInConfig::default();
    let cfg = FoldInConfig {
        sweeps: p.value("foldin_sweeps", args.foldin_sweeps, defaults.sweeps)?,
        burn_in: p.value("foldin_burn_in", args.foldin_burn_in, defaults.burn_in)?,
        threshold,
    };
    let seed = p.seed(args.seed, loaded.ckpt.seed)?;
    let results = fold_in_corpus(
        &loaded.ckpt.posterior,
        &loaded.ckpt.hyper,
        target,
        &cfg,
        seed,
    )?;
    Ok((results, threshold, seed))
}

pub fn suggest(args: &SuggestArgs, file: Option<&ConfigFile>) -> Result<PathBuf, CliError> {
    let args = &args.common;
    let mut p = Params::new(file, "suggest");
    let loaded = load_model(&mut p, args)?;
    let group_by = p.value("group_by", args.group_by.clone(), "author".to_owned())?;
    let format = format_of(&mut p, args.format.clone(), "csv")?;
    let out = p.path("out", args.out.clone())?;
    // s1 keeps no test documents; suggest over the training corpus then
    let target = if loaded.test.num_docs() > 0 {
        &loaded.test
    } else {
        &loaded.train
    };
    let (results, _, seed) = fold_in_all(&mut p, args, &loaded, target)?;
    let table = suggest_report(&results, target, &group_by)?;
    write_artifact(
        &out,
        &emit_report(&Report::Suggestions(table), format),
        &p,
        seed,
    )?;
    Ok(out)
}

pub fn eval(args: &EvalArgs, file: Option<&ConfigFile>) -> Result<PathBuf, CliError> {
    let common = &args.common;
    let mut p = Params::new(file, "eval");
    let loaded = load_model(&mut p, common)?;
    let spec = loaded.ckpt.split;
    if let Some(raw) = p.optional("split", args.split.clone())? {
        let setting: Setting = raw
            .parse()
            .map_err(|e: alterlda_core::eval::EvalError| CliError::config(e.to_string()))?;
        if setting != spec.setting {
            return Err(CliError::config(format!(
                "model was trained with split {}, not {setting}",
                spec.setting
            )));
        }
    }
    if let Some(f) = p.optional("test_fraction", args.test_fraction)? {
        if spec.test_fraction != Some(f) {
            return Err(CliError::config(format!(
                "model was trained with test fraction {:?}, not {f}",
                spec.test_fraction
            )));
        }
    }
    let group_by = p.value("group_by", common.group_by.clone(), "author".to_owned())?;
    let format = format_of(&mut p, common.format.clone(), "csv")?;
    let out = p.path("out", common.out.clone())?;
    if loaded.test.num_docs() == 0 {
        eprintln!(
            "warning: split {} has no test documents; the table is empty",
            spec.setting
        );
    }
    let (results, threshold, seed) = fold_in_all(&mut p, common, &loaded, &loaded.test)?;
    let report = evaluate(&results, &loaded.test, &group_by, threshold)?;
    if let Some(total) = &report.total_row {
        eprintln!(
            "balanced accuracy {:.3}, AUROC {} over {} test tokens",
            total.balanced_accuracy,
            total.auroc.map_or("n/a".to_owned(), |a| format!("{a:.3}")),
            total.support
        );
    }
    write_artifact(&out, &emit_report(&Report::Eval(report), format), &p, seed)?;
    Ok(out)
}

pub fn synth(args: &SynthArgs, file: Option<&ConfigFile>) -> Result<PathBuf, CliError> {
    let mut p = Params::new(file, "synth");
    let defaults = GridConfig::default();
    let list = |p: &mut Params<'_>,
                key: &str,
                flag: Option<String>,
                default: &[f64]|
     -> Result<Vec<f64>, CliError> {
        let joined = default
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        parse_list(key, &p.value(key, flag, joined)?)
    };
    let alphas = list(
        &mut p,
        "grid_alpha",
        args.grid_alpha.clone(),
        &defaults.alphas,
    )?;
    let etas = list(&mut p, "grid_eta", args.grid_eta.clone(), &defaults.etas)?;
    let xis = list(&mut p, "grid_xi", args.grid_xi.clone(), &defaults.xis)?;
    let sizes_default = defaults
        .sizes
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let sizes: Vec<usize> = parse_list(
        "sizes",
        &p.value("sizes", args.sizes.clone(), sizes_default)?,
    )?;
    let rule: ReconstructionRule = p
        .value("rule", args.rule.clone(), defaults.rule.to_string())?
        .parse()?;
    let lag = p.value("lag", args.lag, defaults.schedule.sample_lag.unwrap_or(0))?;
    let grid = GridConfig {
        alphas,
        etas,
        xis,
        sizes,
        runs: p.value("runs", args.runs, defaults.runs)?,
        num_topics: p.value("k", args.k, defaults.num_topics)?,
        vocab_size: p.value("vocab", args.vocab, defaults.vocab_size)?,
        doc_len: p.value("doc_len", args.doc_len, defaults.doc_len)?,
        schedule: TrainSchedule {
            sweeps: p.value("sweeps", args.sweeps, defaults.schedule.sweeps)?,
            burn_in: p.value("burn_in", args.burn_in, defaults.schedule.burn_in)?,
            sample_lag: (lag > 0).then_some(lag),
        },
        rule,
        seed: p.seed(args.seed, 0)?,
    };
    let format = format_of(&mut p, args.format.clone(), "csv")?;
    let out = p.path("out", args.out.clone())?;

    let result = grid_search(&grid)?;
    let report = Report::Grid(result.clone());
    write_artifact(&out, &emit_report(&report, format), &p, grid.seed)?;

    let mut stdout = std::io::stdout().lock();
    let text = emit_report(&report, Format::Text);
    // the heat map follows the row table
    let heat = String::from_utf8_lossy(&text);
    let heat = heat
        .split_once("\ntokens = ")
        .map(|(_, h)| format!("tokens = {h}"));
    let _ = stdout.write_all(heat.unwrap_or_default().as_bytes());
    let lo = grid.alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid
        .alphas
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if lo < hi {
        let s = alpha_sign_test(&result, lo, hi);
        let _ = writeln!(
            stdout,
            "alpha {lo} vs {hi}: mean accuracy {:.4} vs {:.4}, {} wins / {} losses / {} ties, one-sided sign test p = {:.3e}",
            s.mean_low, s.mean_high, s.wins, s.losses, s.ties, s.p_value
        );
    }
    let _ = writeln!(
        stdout,
        "token counts are a design choice of this run: {:?}",
        grid.sizes
    );
    Ok(out)
}

pub fn report(args: &ReportArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let mut p = Params::new(file, "report");
    let input = p.path("input", args.input.clone())?;
    let format = format_of(&mut p, args.format.clone(), "text")?;
    let out = p.optional_path("out", args.out.clone());
    let bytes = std::fs::read(&input).map_err(|e| CliError::io(&input, e))?;
    let report = parse_report_json(&bytes).map_err(|e| module_at("report", &input, e))?;
    let rendered = emit_report(&report, format);
    match out {
        Some(path) => {
            let seed = seed_of(&input);
            write_artifact(&path, &rendered, &p, seed)
        }
        None => std::io::stdout()
            .write_all(&rendered)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// Seed recorded in the sidecar of `path`, or 0.
fn seed_of(path: &Path) -> u64 {
    std::fs::read(crate::meta::sidecar_path(path))
        .ok()
        .and_then(|b| serde_json::from_slice::<serde_json::Value>(&b).ok())
        .and_then(|v| v["seed"].as_u64())
        .unwrap_or(0)
}

const DEFAULT_STAGES: &str = "ingest,classify,train,eval,suggest";

/// Runs the stages named in the config file in order. A stage input left
/// unset in the file defaults to the output of the stage before it.
pub fn run(args: &RunArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let file = file.ok_or_else(|| CliError::config("`run` needs --config"))?;
    let mut p = Params::new(Some(file), "run");
    let stages = p.value("stages", args.stages.clone(), DEFAULT_STAGES.to_owned())?;
    let unset = |section: &str, key: &str| file.config.get(section, key).is_none();

    let mut corpus: Option<PathBuf> = None;
    let mut model: Option<PathBuf> = None;
    for stage in stages.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        eprintln!("== {stage}");
        match stage {
            "ingest" => corpus = Some(ingest(&IngestArgs::default(), Some(file))?),
            "classify" => {
                let a = ClassifyArgs {
                    corpus: corpus.clone().filter(|_| unset("classify", "corpus")),
                    ..ClassifyArgs::default()
                };
                corpus = Some(classify(&a, Some(file))?);
            }
            "train" => {
                let a = TrainArgs {
                    corpus: corpus.clone().filter(|_| unset("train", "corpus")),
                    ..TrainArgs::default()
                };
                model = Some(train(&a, Some(file))?);
            }
            "eval" => {
                let a = EvalArgs {
                    common: FoldInArgs {
                        model: model.clone().filter(|_| unset("eval", "model")),
                        ..FoldInArgs::default()
                    },
                    ..EvalArgs::default()
                };
                eval(&a, Some(file))?;
            }
            "suggest" => {
                let a = SuggestArgs {
                    common: FoldInArgs {
                        model: model.clone().filter(|_| unset("suggest", "model")),
                        ..FoldInArgs::default()
                    },
                };
                suggest(&a, Some(file))?;
            }
            "synth" => {
                synth(&SynthArgs::default(), Some(file))?;
            }
            other => return Err(CliError::config(format!("unknown stage `{other}`"))),
        }
    }
    Ok(())
}
