// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end runs: train, fit, score, prove, write.
//!
//! Every artifact except `manifest.json` is a pure function of the config.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::BackgroundTheory;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::explainers::{
    discover_circuit, fcm_scores, fit_clustering, fit_dictionary, fit_mixture, Ablator, ClusteringOptions,
    DictionaryOptions, Straightforward,
};
use crate::explanation::Explanation;
use crate::proofs::svg::frontier_svg;
use crate::proofs::{audit, brute_force_proof, circuit_guided_proof, cluster_guided_proof, pareto, ProofCertificate};
use crate::toy::{split_enumeration, train_toy, NetManifest, ToyNet};
use crate::virtues::{score, ScoreContext, VirtueScorecard};

use super::config::RunConfig;
use super::rubric::map_rubric;
use super::table::ComparisonTable;

/// A trained network with its data split.
#[derive(Debug, Clone)]
pub struct TrainedNet {
    pub id: String,
    pub net: Arc<ToyNet>,
    pub manifest: NetManifest,
    pub data: Dataset,
}

#[derive(Debug, Clone)]
pub struct FittedExplanation {
    pub id: String,
    /// Index into the trained nets.
    pub net: usize,
    pub explanation: Explanation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub net: String,
    #[serde(flatten)]
    pub certificate: ProofCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRecord {
    pub net: String,
    pub bound: f64,
    pub flops: u64,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct ProofOutputs {
    pub certificates: Vec<CertificateRecord>,
    pub frontier: Vec<FrontierRecord>,
    /// One standalone SVG per net.
    pub plots: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scorecards: Vec<VirtueScorecard>,
    pub table: ComparisonTable,
    pub proofs: ProofOutputs,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

pub fn net_id(cfg: &RunConfig, seed: u64) -> String {
    format!("{}-s{seed}", cfg.task)
}

pub fn train_nets(cfg: &RunConfig) -> Result<Vec<TrainedNet>> {
    let task = cfg.task_spec();
    stage(
        "train",
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let report = train_toy(&task, seed)?;
                let manifest = NetManifest::new(&task, &report);
                let data = split_enumeration(&report.net, &task, cfg.train_fraction, seed);
                Ok(TrainedNet {
                    id: net_id(cfg, seed),
                    net: Arc::new(report.net),
                    manifest,
                    data,
                })
            })
            .collect(),
    )
}

enum Job {
    Clustering(usize),
    Dictionary(usize),
    Circuit(f64),
    Mixture(usize),
    Straightforward,
}

pub fn fit_explanations(
    cfg: &RunConfig,
    nets: &[TrainedNet],
    theory: &BackgroundTheory,
) -> Result<Vec<FittedExplanation>> {
    let g = &cfg.grid;
    let task = cfg.task_spec();
    let mut jobs = Vec::new();
    for (i, tn) in nets.iter().enumerate() {
        let mut push = |suffix: String, job: Job| jobs.push((i, format!("{}-{suffix}", tn.id), job, tn.manifest.seed));
        for &k in &g.clustering_k {
            push(format!("clustering-k{k}"), Job::Clustering(k));
        }
        for &a in &g.dictionary_atoms {
            push(format!("dictionary-m{a}"), Job::Dictionary(a));
        }
        for &tau in &g.circuit_tau {
            push(format!("circuit-tau{tau}"), Job::Circuit(tau));
        }
        for &h in &g.mixture_hypotheses {
            push(format!("mixture-h{h}"), Job::Mixture(h));
        }
        if g.straightforward {
            push("straightforward".into(), Job::Straightforward);
        }
    }
    let ablators: Vec<Arc<Ablator>> = stage(
        "fit",
        nets.iter()
            .map(|tn| Ablator::new(tn.net.clone(), g.circuit_ablation).map(Arc::new))
            .collect(),
    )?;
    stage(
        "fit",
        jobs.into_par_iter()
            .map(|(i, id, job, seed)| {
                let net = &nets[i].net;
                let explanation = match job {
                    Job::Clustering(k) => {
                        let opts = ClusteringOptions {
                            space: g.clustering_space,
                            k,
                            seed,
                        };
                        Explanation::Clustering(fit_clustering(net, &opts, theory)?)
                    }
                    Job::Dictionary(a) => {
                        let opts = DictionaryOptions::new(g.dictionary_layer, a, g.dictionary_max_l0, seed);
                        Explanation::Dictionary(fit_dictionary(net, &opts, theory)?)
                    }
                    Job::Circuit(tau) => Explanation::Circuit(discover_circuit(ablators[i].clone(), tau)),
                    Job::Mixture(h) => {
                        Explanation::Mixture(fit_mixture(task.n, task.labels, &nets[i].data.train, h, theory)?)
                    }
                    Job::Straightforward => Explanation::Straightforward(Straightforward::new(net, theory)?),
                };
                Ok(FittedExplanation {
                    id,
                    net: i,
                    explanation,
                })
            })
            .collect(),
    )
}

pub fn score_explanations(
    cfg: &RunConfig,
    nets: &[TrainedNet],
    fitted: &[FittedExplanation],
    theory: &BackgroundTheory,
) -> Result<Vec<VirtueScorecard>> {
    let thresholds = cfg.thresholds();
    stage(
        "score",
        fitted
            .par_iter()
            .map(|f| {
                let tn = &nets[f.net];
                let ctx = ScoreContext {
                    train: &tn.data.train,
                    heldout: &tn.data.heldout,
                    theory,
                    sampler: cfg.sampler,
                    generator: &tn.net,
                    hv: cfg.hv,
                };
                let mut card = score(&f.id, &f.explanation, &ctx)?;
                if let Explanation::Circuit(c) = &f.explanation {
                    let fcm = fcm_scores(c, &cfg.fcm)?;
                    card.extra
                        .insert("circuit_incompleteness_max".into(), fcm.incompleteness_max);
                    let min = fcm.minimality.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
                    if min.is_finite() {
                        card.extra.insert("circuit_minimality_min".into(), min);
                    }
                }
                card.rubric_levels = map_rubric(&card, &thresholds)?;
                Ok(card)
            })
            .collect(),
    )
}

/// Brute force plus one guided proof per clustering and circuit, audited,
/// with the Pareto frontier per net.
pub fn prove(cfg: &RunConfig, nets: &[TrainedNet], fitted: &[FittedExplanation]) -> Result<ProofOutputs> {
    let task = cfg.task_spec();
    let mut out = ProofOutputs::default();
    for (i, tn) in nets.iter().enumerate() {
        let mut certs = vec![brute_force_proof(&tn.net, &task)];
        let guided: Vec<ProofCertificate> = fitted
            .par_iter()
            .filter(|f| f.net == i)
            .filter_map(|f| match &f.explanation {
                Explanation::Clustering(c) => Some(cluster_guided_proof(&f.id, &tn.net, &task, c)),
                Explanation::Circuit(c) => Some(circuit_guided_proof(&f.id, &tn.net, &task, c)),
                _ => None,
            })
            .collect();
        certs.extend(guided);
        for c in &mut certs {
            if !audit(c, &tn.net, &task) {
                return Err(Error::InvalidArgument(format!(
                    "certificate `{}` claims more than the net gets right",
                    c.id
                ))
                .in_stage("prove"));
            }
        }
        let points: Vec<_> = certs.iter().map(|c| c.pareto_point()).collect();
        let frontier = pareto(&points);
        out.plots.push((tn.id.clone(), frontier_svg(&points, &frontier)));
        out.frontier.extend(frontier.into_iter().map(|p| FrontierRecord {
            net: tn.id.clone(),
            bound: p.bound,
            flops: p.flops,
            label: p.label,
        }));
        out.certificates
            .extend(certs.into_iter().map(|certificate| CertificateRecord {
                net: tn.id.clone(),
                certificate,
            }));
    }
    Ok(out)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    codebook_version: &'a str,
    rubric_version: String,
    command: &'a str,
    task: String,
    seeds: &'a [u64],
    config: &'a RunConfig,
    files: Vec<String>,
    created_unix_seconds: u64,
}

fn write_manifest(cfg: &RunConfig, theory: &BackgroundTheory, command: &str, mut files: Vec<String>) -> Result<()> {
    files.sort();
    let manifest = RunManifest {
        tool: "virtue-bench",
        version: env!("CARGO_PKG_VERSION"),
        codebook_version: theory.version(),
        rubric_version: cfg.thresholds().version,
        command,
        task: cfg.task.to_string(),
        seeds: &cfg.seeds,
        config: cfg,
        files,
        created_unix_seconds: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    write_json(&cfg.output_dir.join("manifest.json"), &manifest)
}

fn write_nets(dir: &Path, nets: &[TrainedNet], files: &mut Vec<String>) -> Result<()> {
    fs::create_dir_all(dir.join("nets"))?;
    for tn in nets {
        let blob = format!("nets/{}.xtn", tn.id);
        fs::write(dir.join(&blob), tn.net.to_blob())?;
        let meta = format!("nets/{}.json", tn.id);
        write_json(&dir.join(&meta), &tn.manifest)?;
        files.push(blob);
        files.push(meta);
    }
    Ok(())
}

fn write_explanations(
    dir: &Path,
    fitted: &[FittedExplanation],
    theory: &BackgroundTheory,
    files: &mut Vec<String>,
) -> Result<()> {
    fs::create_dir_all(dir.join("explanations"))?;
    for f in fitted {
        let name = format!("explanations/{}.xvb", f.id);
        fs::write(dir.join(&name), f.explanation.to_blob(theory)?)?;
        files.push(name);
    }
    Ok(())
}

fn write_scores(dir: &Path, cards: &[VirtueScorecard], table: &ComparisonTable, files: &mut Vec<String>) -> Result<()> {
    write_json(&dir.join("scorecards.json"), cards)?;
    fs::write(dir.join("table.txt"), table.render_text())?;
    fs::write(dir.join("table.csv"), table.to_csv()?)?;
    files.extend(["scorecards.json", "table.txt", "table.csv"].map(String::from));
    Ok(())
}

fn write_proofs(dir: &Path, proofs: &ProofOutputs, files: &mut Vec<String>) -> Result<()> {
    write_json(&dir.join("certificates.json"), &proofs.certificates)?;
    write_json(&dir.join("frontier.json"), &proofs.frontier)?;
    files.extend(["certificates.json", "frontier.json"].map(String::from));
    for (net, svg) in &proofs.plots {
        let name = format!("frontier_{net}.svg");
        fs::write(dir.join(&name), svg)?;
        files.push(name);
    }
    Ok(())
}

fn prepare(cfg: &RunConfig) -> Result<BackgroundTheory> {
    cfg.validate()?;
    stage("write", fs::create_dir_all(&cfg.output_dir).map_err(Error::from))?;
    Ok(BackgroundTheory::default())
}

/// The full pipeline.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let theory = prepare(cfg)?;
    let nets = train_nets(cfg)?;
    let fitted = fit_explanations(cfg, &nets, &theory)?;
    let scorecards = score_explanations(cfg, &nets, &fitted, &theory)?;
    let table = stage(
        "table",
        ComparisonTable::from_scorecards(&scorecards, &cfg.thresholds()),
    )?;
    let proofs = prove(cfg, &nets, &fitted)?;
    let dir = &cfg.output_dir;
    let mut files = Vec::new();
    stage(
        "write",
        (|| {
            write_nets(dir, &nets, &mut files)?;
            write_explanations(dir, &fitted, &theory, &mut files)?;
            write_scores(dir, &scorecards, &table, &mut files)?;
            write_proofs(dir, &proofs, &mut files)?;
            write_manifest(cfg, &theory, "run", files)
        })(),
    )?;
    Ok(RunOutput {
        scorecards,
        table,
        proofs,
    })
}

/// Train, fit, and score; no proofs.
pub fn run_score(cfg: &RunConfig) -> Result<(Vec<VirtueScorecard>, ComparisonTable)> {
    let theory = prepare(cfg)?;
    let nets = train_nets(cfg)?;
    let fitted = fit_explanations(cfg, &nets, &theory)?;
    let cards = score_explanations(cfg, &nets, &fitted, &theory)?;
    let table = stage("table", ComparisonTable::from_scorecards(&cards, &cfg.thresholds()))?;
    let dir = &cfg.output_dir;
    let mut files = Vec::new();
    stage(
        "write",
        (|| {
            write_nets(dir, &nets, &mut files)?;
            write_explanations(dir, &fitted, &theory, &mut files)?;
            write_scores(dir, &cards, &table, &mut files)?;
            write_manifest(cfg, &theory, "score", files)
        })(),
    )?;
    Ok((cards, table))
}

/// Train, fit, and prove; no scoring.
pub fn run_prove(cfg: &RunConfig) -> Result<ProofOutputs> {
    let theory = prepare(cfg)?;
    let nets = train_nets(cfg)?;
    let fitted = fit_explanations(cfg, &nets, &theory)?;
    let proofs = prove(cfg, &nets, &fitted)?;
    let dir = &cfg.output_dir;
    let mut files = Vec::new();
    stage(
        "write",
        (|| {
            write_nets(dir, &nets, &mut files)?;
            write_proofs(dir, &proofs, &mut files)?;
            write_manifest(cfg, &theory, "prove", files)
        })(),
    )?;
    Ok(proofs)
}

/// Rebuilds the table from `scorecards.json` in the output directory with
/// the config's thresholds.
pub fn run_table(cfg: &RunConfig) -> Result<ComparisonTable> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    let text = stage(
        "table",
        fs::read_to_string(dir.join("scorecards.json")).map_err(Error::from),
    )?;
    let mut cards: Vec<VirtueScorecard> = stage("table", serde_json::from_str(&text).map_err(Error::from))?;
    let thresholds = cfg.thresholds();
    for c in &mut cards {
        c.rubric_levels = stage("table", map_rubric(c, &thresholds))?;
    }
    let table = stage("table", ComparisonTable::from_scorecards(&cards, &thresholds))?;
    let mut files = Vec::new();
    stage("write", write_scores(dir, &cards, &table, &mut files))?;
    Ok(table)
}
