use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde_json::{json, Value};

use csa_core::cca::{fit_matrices, project, project_matrix, CsaModel, SRule, Side};
use csa_core::eval::{
    classify, retrieval_metrics, robustness_sweep, roc_curve, sweep_s, two_threshold_roc, EvalReport, LabeledScores,
    Provenance, Table,
};
use csa_core::io::{
    encode_model, load_manifest, read_feature_file, read_model, save_manifest, write_feature_file, write_scores_binary,
    write_scores_tsv, Dtype, Manifest, PairEntry, PairedDataset, PairedSplit, Split,
};
use csa_core::similarity::{score_features, score_matrix_with_ids, similarity};
use csa_core::synth::{tradeoff_curves, ClassTask, ClassTaskConfig, SyntheticConfig};
use csa_core::{CsaError, DegeneratePolicy, FeatureMatrix, Matrix};

use crate::args::*;
use crate::output::{sha256_file, write_report, write_to};

pub fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Fit(a) => fit_cmd(a),
        Command::Score(a) => score_cmd(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Retrieve(a) => retrieve_cmd(a),
        Command::Detect(a) => detect_cmd(a),
        Command::Synth(SynthCommand::Tradeoff(a)) => tradeoff_cmd(a),
        Command::Synth(SynthCommand::Export(a)) => export_cmd(a),
        Command::Robustness(a) => robustness_cmd(a),
    }
}

fn fit_cmd(a: FitArgs) -> anyhow::Result<()> {
    let ds = load_manifest(&a.manifest)?;
    let train = ds.train()?;
    let model = fit_matrices(train.first.values(), train.second.values(), a.eps, a.rule())?;
    log::info!("fitted r = {}, s = {}, rho_1 = {}", model.r(), model.s, model.rho[0]);
    let bytes = encode_model(&model)?;
    write_to(&a.output, |w| Ok(w.write_all(&bytes)?))
}

/// A model with its overrides applied, the chosen split and the provenance of both inputs.
struct Loaded {
    model: CsaModel,
    dataset: PairedDataset,
    provenance: Provenance,
}

impl Loaded {
    fn open(input: &ModelInput) -> anyhow::Result<Self> {
        let mut model = read_model(&input.model)?;
        if let Some(rule) = input.rule() {
            model = model.with_rule(rule)?;
        }
        let dataset = load_manifest(&input.manifest)?;
        let provenance = Provenance {
            model_sha256: Some(sha256_file(&input.model)?),
            manifest_sha256: Some(sha256_file(&input.manifest)?),
            seed: None,
            s: Some(model.s),
            eps: Some(model.eps),
        };
        Ok(Loaded { model, dataset, provenance })
    }

    fn split(&self, choice: SplitChoice) -> anyhow::Result<&PairedSplit> {
        pick_split(&self.dataset, choice)
    }
}

fn pick_split(ds: &PairedDataset, choice: SplitChoice) -> anyhow::Result<&PairedSplit> {
    Ok(match choice {
        SplitChoice::Auto => ds.evaluation(),
        SplitChoice::Train => ds.train()?,
        SplitChoice::Test => ds.test.as_ref().ok_or_else(|| anyhow!("manifest has no test split"))?,
    })
}

fn score_cmd(a: ScoreArgs) -> anyhow::Result<()> {
    let loaded = Loaded::open(&a.input)?;
    let split = loaded.split(a.input.split)?;
    let scores = score_features(&loaded.model, &split.first, &split.second, a.input.degenerate.into())?;
    write_to(&a.input.output, |w| {
        match a.format {
            ScoreFormat::Tsv => write_scores_tsv(w, &scores)?,
            ScoreFormat::Binary => write_scores_binary(w, &scores)?,
        }
        Ok(())
    })
}

fn labels_of(split: &PairedSplit) -> anyhow::Result<&[String]> {
    split
        .labels
        .as_deref()
        .ok_or_else(|| anyhow!("manifest pairs carry no labels; this command needs one per pair"))
}

/// Class index of every label, by position of the matching id in `classes`.
fn class_indices(labels: &[String], classes: &FeatureMatrix) -> anyhow::Result<Vec<usize>> {
    let index: HashMap<&str, usize> = classes.ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    labels
        .iter()
        .map(|l| index.get(l.as_str()).copied().ok_or_else(|| anyhow!("label '{l}' has no entry in the class feature file")))
        .collect()
}

/// Scores `queries` (modality 1) against `classes` (modality 2) and returns accuracy.
struct ClassScorer {
    queries: Matrix,
    query_ids: Vec<String>,
    classes: Matrix,
    class_ids: Vec<String>,
    truth: Vec<usize>,
    policy: DegeneratePolicy,
}

impl ClassScorer {
    fn new(model: &CsaModel, split: &PairedSplit, classes: &FeatureMatrix, policy: DegeneratePolicy) -> anyhow::Result<Self> {
        let truth = class_indices(labels_of(split)?, classes)?;
        Ok(ClassScorer {
            queries: project(model, Side::First, &split.first)?,
            query_ids: split.first.ids().to_vec(),
            classes: project(model, Side::Second, classes)?,
            class_ids: classes.ids().to_vec(),
            truth,
            policy,
        })
    }

    fn accuracy(&self, rho: &[f64], s: usize) -> csa_core::Result<f64> {
        let scores = score_matrix_with_ids(
            &self.queries,
            &self.classes,
            rho,
            s,
            self.policy,
            self.query_ids.clone(),
            self.class_ids.clone(),
        )?;
        Ok(classify(&scores, &self.truth)?.accuracy)
    }
}

fn classify_cmd(a: ClassifyArgs) -> anyhow::Result<()> {
    let loaded = Loaded::open(&a.input)?;
    let mut provenance = loaded.provenance.clone();
    let split = loaded.split(a.input.split)?;
    let classes = read_feature_file(&a.classes)?;
    let scorer = ClassScorer::new(&loaded.model, split, &classes, a.input.degenerate.into())?;
    let n_queries = split.len();

    let mut report = if a.s_sweep {
        let s_values: Vec<usize> = (1..=loaded.model.r()).collect();
        let sweep = sweep_s(&loaded.model, &s_values, "accuracy", |m| scorer.accuracy(&m.rho, m.s))?;
        provenance.s = Some(sweep.best_s);
        let mut report = EvalReport::new("classify", provenance);
        let mut table = Table::new(&["s", "accuracy", "best"]);
        for row in &sweep.rows {
            table.push(vec![json!(row.s), json!(row.value), json!(row.s == sweep.best_s)]);
        }
        report.metrics.accuracy = sweep.rows.iter().find(|r| r.s == sweep.best_s).map(|r| r.value);
        report.detail("s_rule", "sweep").detail("best_s", sweep.best_s);
        report.table = Some(table);
        report
    } else {
        let mut report = EvalReport::new("classify", provenance);
        report.metrics.accuracy = Some(scorer.accuracy(&loaded.model.rho, loaded.model.s)?);
        report
    };
    report
        .detail("n_queries", n_queries)
        .detail("n_classes", classes.n_items())
        .detail("r", loaded.model.r());
    write_report(&a.input.output, &report, a.format)
}

fn retrieve_cmd(a: RetrieveArgs) -> anyhow::Result<()> {
    let loaded = Loaded::open(&a.input)?;
    let split = loaded.split(a.input.split)?;
    let scores = score_features(&loaded.model, &split.first, &split.second, a.input.degenerate.into())?;
    let scores = match a.direction {
        Direction::OneToTwo => scores.scores,
        Direction::TwoToOne => scores.transposed().scores,
    };
    // Relevance is symmetric, so the same relation serves both directions.
    let labels = split.labels.as_deref();
    let relevant = |i: usize, j: usize| match labels {
        Some(l) => l[i] == l[j],
        None => i == j,
    };
    let rep = retrieval_metrics(&scores, relevant, a.k, a.strict)?;
    let mut report = EvalReport::new("retrieve", loaded.provenance.clone());
    report.metrics.precision_at_1 = Some(rep.precision_at_1);
    report.metrics.precision_at_k = Some(rep.precision_at_k);
    report.metrics.map_at_k = Some(rep.map_at_k);
    report
        .detail("k", rep.k)
        .detail(
            "direction",
            match a.direction {
                Direction::OneToTwo => "1to2",
                Direction::TwoToOne => "2to1",
            },
        )
        .detail("n_queries", scores.rows())
        .detail("skipped_queries", rep.skipped)
        .detail("relevance", if labels.is_some() { "same label" } else { "paired item" });
    write_report(&a.input.output, &report, a.format)
}

fn parse_binary_label(label: &str) -> anyhow::Result<bool> {
    match label.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => bail!("detection labels must be 0/1 or true/false, got '{other}'"),
    }
}

/// Similarity of each listed pair (column j with column j).
fn pair_scores(model: &CsaModel, split: &PairedSplit, policy: DegeneratePolicy) -> anyhow::Result<Vec<f64>> {
    let p1 = project(model, Side::First, &split.first)?;
    let p2 = project(model, Side::Second, &split.second)?;
    let mut out = Vec::with_capacity(split.len());
    for j in 0..split.len() {
        let v = match similarity(&p1.column(j), &p2.column(j), &model.rho, model.s) {
            Err(CsaError::DegenerateVector(_)) if policy == DegeneratePolicy::Zero => 0.0,
            Err(CsaError::DegenerateVector(_)) => {
                return Err(CsaError::DegenerateVector(format!("{}/{}", split.first.ids()[j], split.second.ids()[j])).into())
            }
            other => other?,
        };
        out.push(v);
    }
    Ok(out)
}

fn threshold_value(t: f64) -> Value {
    if t.is_finite() {
        json!(t)
    } else if t > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Second score per pair from a TSV with header `id1 id2 score`.
fn read_second_scores(path: &Path) -> anyhow::Result<HashMap<(String, String), f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| anyhow!("{}: empty score file", path.display()))?.split('\t').collect();
    if header != ["id1", "id2", "score"] {
        bail!("{}: header must be 'id1<TAB>id2<TAB>score'", path.display());
    }
    let mut out = HashMap::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        let [id1, id2, score] = fields[..] else {
            bail!("{}: line {} does not have 3 fields", path.display(), n + 2);
        };
        let v: f64 = score.trim().parse().with_context(|| format!("{}: line {}", path.display(), n + 2))?;
        if out.insert((id1.to_string(), id2.to_string()), v).is_some() {
            bail!("{}: pair ({id1}, {id2}) listed twice", path.display());
        }
    }
    Ok(out)
}

fn detect_cmd(a: DetectArgs) -> anyhow::Result<()> {
    let loaded = Loaded::open(&a.input)?;
    let split = loaded.split(a.input.split)?;
    let labels: Vec<bool> = labels_of(split)?.iter().map(|l| parse_binary_label(l)).collect::<anyhow::Result<_>>()?;
    let scores = pair_scores(&loaded.model, split, a.input.degenerate.into())?;
    let mut report = EvalReport::new("detect", loaded.provenance.clone());
    report.detail("n_pairs", split.len()).detail("positives", labels.iter().filter(|&&l| l).count());

    if a.two_threshold {
        let path = a.second_scores.as_deref().expect("enforced by argument parser");
        let second = read_second_scores(path)?;
        let caption_scores: Vec<f64> = split
            .first
            .ids()
            .iter()
            .zip(split.second.ids())
            .map(|(i1, i2)| {
                second
                    .get(&(i1.clone(), i2.clone()))
                    .copied()
                    .ok_or_else(|| anyhow!("no second score for pair ({i1}, {i2})"))
            })
            .collect::<anyhow::Result<_>>()?;
        let roc = two_threshold_roc(&scores, &caption_scores, &labels)?;
        report.metrics.auc = Some(roc.auc);
        report.detail("mode", "two-threshold").detail("positive", "misinformative");
        let mut table = Table::new(&["fpr", "tpr", "t1", "t2"]);
        for (&(f, t), &(t1, t2)) in roc.points.iter().zip(&roc.thresholds) {
            table.push(vec![json!(f), json!(t), threshold_value(t1), threshold_value(t2)]);
        }
        report.table = Some(table);
    } else {
        let roc = roc_curve(&LabeledScores::new(scores, labels)?)?;
        report.metrics.auc = Some(roc.auc);
        report.detail("mode", "single").detail("positive", "aligned");
        let mut table = Table::new(&["fpr", "tpr", "threshold"]);
        for (&(f, t), &th) in roc.points.iter().zip(&roc.thresholds) {
            table.push(vec![json!(f), json!(t), threshold_value(th)]);
        }
        report.table = Some(table);
    }
    write_report(&a.input.output, &report, a.format)
}

fn tradeoff_cmd(a: TradeoffArgs) -> anyhow::Result<()> {
    let cfg = SyntheticConfig {
        q: a.q,
        p1: a.p1,
        p2: a.p2,
        n: a.n,
        noise_sigma: a.noise_sigma,
        latent_sigma: a.latent_sigma,
        seed: a.seed,
    };
    let grid = a.s_grid.clone().unwrap_or_else(|| (1..=a.q).collect());
    if grid.is_empty() {
        bail!("--s-grid is empty");
    }
    let rows = tradeoff_curves(&cfg, &grid)?;
    let mut text = String::new();
    text.push_str("# experiment: synth-tradeoff\n");
    text.push_str(&format!("# seed: {}\n", a.seed));
    text.push_str(&format!(
        "# q: {} p1: {} p2: {} n: {} noise_sigma: {} latent_sigma: {}\n",
        a.q, a.p1, a.p2, a.n, a.noise_sigma, a.latent_sigma
    ));
    text.push_str("s\tsnr_db\tlambda_min_db\tp_value\n");
    for r in &rows {
        text.push_str(&format!("{}\t{}\t{}\t{:e}\n", r.s, r.snr_db, r.lambda_min_db, r.p_value));
    }
    write_to(&a.output, |w| Ok(w.write_all(text.as_bytes())?))
}

/// Concatenates items of two feature sets of equal dimension.
fn concat(a: &FeatureMatrix, b: &FeatureMatrix) -> csa_core::Result<FeatureMatrix> {
    let items: Vec<Vec<f64>> = (0..a.n_items()).map(|j| a.item(j)).chain((0..b.n_items()).map(|j| b.item(j))).collect();
    let ids = a.ids().iter().chain(b.ids()).cloned().collect();
    FeatureMatrix::from_items(&items, ids)
}

fn export_cmd(a: ExportArgs) -> anyhow::Result<()> {
    let cfg = ClassTaskConfig {
        q: a.q,
        p1: a.p1,
        p2: a.p2,
        n_classes: a.n_classes,
        n_train: a.n_train,
        n_test: a.n_test,
        noise_sigma: a.noise_sigma,
        seed: a.seed,
        ..Default::default()
    };
    let task = ClassTask::generate(&cfg)?.encode()?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_feature_file(a.out_dir.join("features1.csaf"), &concat(&task.train1, &task.test1)?, Dtype::F64)?;
    write_feature_file(a.out_dir.join("features2.csaf"), &concat(&task.train2, &task.test2)?, Dtype::F64)?;
    write_feature_file(a.out_dir.join("classes.csaf"), &task.prototypes, Dtype::F64)?;

    let entries = |ids: &[String], labels: &[usize], split: Split| -> Vec<PairEntry> {
        ids.iter()
            .zip(labels)
            .map(|(id, &c)| PairEntry {
                id1: id.clone(),
                id2: id.clone(),
                label: Some(task.prototypes.ids()[c].clone()),
                split: Some(split),
            })
            .collect()
    };
    let mut pairs = entries(task.train1.ids(), &task.train_labels, Split::Train);
    pairs.extend(entries(task.test1.ids(), &task.test_labels, Split::Test));
    let manifest = Manifest {
        dataset: format!("synthetic-classes-seed{}", a.seed),
        encoder1: "optimal-linear".into(),
        encoder2: "optimal-linear".into(),
        features1: "features1.csaf".into(),
        features2: "features2.csaf".into(),
        pairs,
    };
    save_manifest(a.out_dir.join("manifest.json"), &manifest)?;
    Ok(())
}

fn robustness_cmd(a: RobustnessArgs) -> anyhow::Result<()> {
    if let Some(&bad) = a.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        bail!("shuffle fraction {bad} outside [0, 1]");
    }
    let ds = load_manifest(&a.manifest)?;
    let train = ds.train()?;
    let eval = pick_split(&ds, a.split)?;
    let rule = match (a.s_fixed, a.s_threshold) {
        (Some(k), _) => SRule::Fixed(k),
        (None, Some(t)) => SRule::Threshold(t),
        (None, None) => SRule::Fixed(train.first.dim().min(train.second.dim())),
    };
    let policy: DegeneratePolicy = a.degenerate.into();
    let classes = a.classes.as_ref().map(read_feature_file).transpose()?;
    let truth = match &classes {
        Some(c) => Some(class_indices(labels_of(eval)?, c)?),
        None => None,
    };
    let labels = eval.labels.as_deref();

    let metric_name = if classes.is_some() { "accuracy" } else { "precision_at_1" };
    let metric = |model: &CsaModel| -> csa_core::Result<f64> {
        let q = project_matrix(model, Side::First, eval.first.values())?;
        let ids1 = eval.first.ids().to_vec();
        match (&classes, &truth) {
            (Some(c), Some(t)) => {
                let cp = project(model, Side::Second, c)?;
                let scores = score_matrix_with_ids(&q, &cp, &model.rho, model.s, policy, ids1, c.ids().to_vec())?;
                Ok(classify(&scores, t)?.accuracy)
            }
            _ => {
                let cp = project(model, Side::Second, &eval.second)?;
                let ids2 = eval.second.ids().to_vec();
                let scores = score_matrix_with_ids(&q, &cp, &model.rho, model.s, policy, ids1, ids2)?;
                let relevant = |i: usize, j: usize| match labels {
                    Some(l) => l[i] == l[j],
                    None => i == j,
                };
                Ok(retrieval_metrics(&scores.scores, relevant, 1, false)?.precision_at_1)
            }
        }
    };
    let points = robustness_sweep(&train.first, &train.second, a.eps, rule, &a.fractions, a.reps, a.seed, metric)?;

    let provenance = Provenance {
        model_sha256: None,
        manifest_sha256: Some(sha256_file(&a.manifest)?),
        seed: Some(a.seed),
        s: match rule {
            SRule::Fixed(k) => Some(k),
            SRule::Threshold(_) => None,
        },
        eps: Some(a.eps),
    };
    let mut report = EvalReport::new("robustness", provenance);
    report.detail("metric", metric_name).detail("reps", a.reps).detail("n_train", train.len()).detail("n_eval", eval.len());
    if let SRule::Threshold(t) = rule {
        report.detail("s_threshold", t);
    }
    let mut table = Table::new(&["fraction", metric_name, "std_err", "runs"]);
    for p in &points {
        table.push(vec![json!(p.fraction), json!(p.mean), json!(p.std_err), json!(p.runs.len())]);
    }
    report.table = Some(table);
    write_report(&a.output, &report, a.format)
}
