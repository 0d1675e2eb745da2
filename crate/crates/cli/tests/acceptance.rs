// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance checks. Runs without the test harness so that every criterion
//! prints one PASS or FAIL line, then exits non-zero if any failed.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use virtue_core::codec::{BackgroundTheory, Symbol, Tag};
use virtue_core::data::Observation;
use virtue_core::explainers::{
    discover_circuit, fcm_scores, fit_clustering, Ablation, Ablator, Circuit, ClusteringOptions, FcmOptions, Mixture,
    Program, Space, Straightforward,
};
use virtue_core::explanation::{Explanation, Family, SMOOTHING_EPS};
use virtue_core::proofs::{audit, brute_force_proof, circuit_guided_proof, cluster_guided_proof};
use virtue_core::report::{self, RunConfig};
use virtue_core::toy::{train_toy, Activation, Layer, TaskName, TaskSpec, ToyNet};
use virtue_core::virtues::hard_to_vary::local_maximum;
use virtue_core::virtues::{self, adhocness, is_hard_to_vary, HvOptions, SamplerConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn default_config() -> RunConfig {
    RunConfig::load(&workspace_root().join("configs/default.json")).expect("default config loads")
}

/// `log2 P(obs | E)` without the library's likelihood code. Distributions
/// still come from the explanation; the combination is recomputed here.
fn oracle_joint(e: &Explanation, obs: &[Observation], theory: &BackgroundTheory) -> f64 {
    match e {
        Explanation::Mixture(m) => {
            let hs = m.hypotheses();
            let total: f64 = hs.iter().map(|h| h.weight as f64).sum();
            let grid = (1u64 << theory.quantization_bits()) as f64;
            let labels = m.label_count() as f64;
            let terms: Vec<f64> = hs
                .iter()
                .map(|h| {
                    let prior = if total == 0.0 {
                        1.0 / hs.len() as f64
                    } else {
                        h.weight as f64 / total
                    };
                    let eta = h.eta_grid as f64 / grid;
                    obs.iter().fold(prior.log2(), |acc, o| {
                        let p = if h.program.eval(o.input) == o.output {
                            1.0 - eta
                        } else {
                            eta / (labels - 1.0)
                        };
                        acc + p.log2()
                    })
                })
                .collect();
            let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return obs.len() as f64 * SMOOTHING_EPS.log2();
            }
            max + terms.iter().map(|t| (t - max).exp2()).sum::<f64>().log2()
        }
        _ => oracle_pointwise(e, obs),
    }
}

fn oracle_pointwise(e: &Explanation, obs: &[Observation]) -> f64 {
    obs.iter()
        .map(|o| {
            let p = e.distribution(o.input).unwrap()[o.output as usize];
            if p > 0.0 {
                p.log2()
            } else {
                SMOOTHING_EPS.log2()
            }
        })
        .sum()
}

fn random_pair(
    rng: &mut rand_chacha::ChaCha8Rng,
    b: &BackgroundTheory,
    family: Family,
) -> (Explanation, Arc<ToyNet>, Vec<Observation>) {
    let (e, net) = support::random_explanation(rng, family, b);
    let len = rng.gen_range(1..=24);
    let obs = support::random_observations(rng, e.input_width(), e.label_count(), len);
    (e, net, obs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let b = BackgroundTheory::default();
    let mut rng = support::rng(1);
    let pairs = 1000;
    let mut worst = 0.0f64;
    for i in 0..pairs {
        let family = Family::ALL[i % Family::ALL.len()];
        let (e, net, obs) = random_pair(&mut rng, &b, family);
        let acc = virtues::accuracy(&e, &obs).unwrap();
        let desc = virtues::descriptiveness(&e, &obs).unwrap();
        let co = virtues::co_explanation(&e, &obs).unwrap();
        ensure(close(acc, desc + co, 1e-9), || {
            format!("pair {i}: {acc} != {desc} + {co}")
        })?;
        let (j, p) = (oracle_joint(&e, &obs, &b), oracle_pointwise(&e, &obs));
        ensure(close(acc, j, 1e-9) && close(desc, p, 1e-9), || {
            format!("pair {i} ({family}): library ({acc}, {desc}) vs oracle ({j}, {p})")
        })?;
        worst = worst.max((acc - desc - co).abs());

        let cfg = SamplerConfig {
            num_datasets: 3,
            dataset_size: 8,
            seed: i as u64,
        };
        let mc = virtues::monte_carlo(&e, &cfg, &net).unwrap();
        ensure(
            close(mc.precision.mean, mc.power.mean + mc.unification.mean, 1e-9),
            || {
                format!(
                    "pair {i}: precision {} != power {} + unification {}",
                    mc.precision.mean, mc.power.mean, mc.unification.mean
                )
            },
        )?;
        let datasets: Vec<Vec<Observation>> = (0..3).map(|d| virtues::sampled_dataset(&net, &cfg, d)).collect();
        let oj = datasets.iter().map(|d| oracle_joint(&e, d, &b)).sum::<f64>() / 3.0;
        let op = datasets.iter().map(|d| oracle_pointwise(&e, d)).sum::<f64>() / 3.0;
        ensure(
            close(mc.precision.mean, oj, 1e-9) && close(mc.power.mean, op, 1e-9),
            || {
                format!(
                    "pair {i}: sampled estimates ({}, {}) vs oracle ({oj}, {op})",
                    mc.precision.mean, mc.power.mean
                )
            },
        )?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs() < 60, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{pairs} pairs, max residual {worst:.1e}, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let b = BackgroundTheory::default();
    let mut rng = support::rng(2);
    let mut checked = 0;
    for family in Family::ALL.into_iter().filter(|f| f.is_factorized()) {
        for i in 0..50 {
            let (e, net, obs) = random_pair(&mut rng, &b, family);
            let co = virtues::co_explanation(&e, &obs).unwrap();
            let cfg = SamplerConfig {
                num_datasets: 4,
                dataset_size: 16,
                seed: i,
            };
            let u = virtues::unification(&e, &cfg, &net).unwrap();
            ensure(co == 0.0 && u.mean == 0.0, || {
                format!("{family} #{i}: co-explanation {co}, unification {}", u.mean)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} factorized explanations, all exactly zero"))
}

fn criterion_3() -> Outcome {
    let b = BackgroundTheory::default();
    let m = Mixture::new(2, 2, &[(Program::Const(0), 1, 0.0), (Program::Const(1), 1, 0.0)], &b).unwrap();
    let e = Explanation::Mixture(m);
    let x = virtue_core::data::Input::new(0b01, 2).unwrap();
    let obs = vec![Observation::new(x, 0); 3];
    let acc = virtues::accuracy(&e, &obs).unwrap();
    let desc = virtues::descriptiveness(&e, &obs).unwrap();
    let co = virtues::co_explanation(&e, &obs).unwrap();
    ensure(
        close(acc, -1.0, 1e-12) && close(desc, -3.0, 1e-12) && close(co, 2.0, 1e-12),
        || format!("joint {acc}, descriptiveness {desc}, co-explanation {co}"),
    )?;
    Ok(format!("joint {acc}, descriptiveness {desc}, co-explanation {co}"))
}

fn criterion_4() -> Outcome {
    let b = BackgroundTheory::default();
    let mut lines = Vec::new();
    for name in TaskName::ALL {
        let task = TaskSpec::get(name);
        let net = train_toy(&task, 4).unwrap().net;
        let e = Explanation::Straightforward(Straightforward::new(&net, &b).unwrap());
        let acc = virtues::accuracy(&e, &net.enumerate_io()).unwrap();
        ensure(acc.abs() <= 1e-5, || format!("{name}: accuracy {acc}"))?;
        let header = b.tag_length(Tag::FamilyStraightforward).unwrap() as u64
            + b.tag_length(Tag::ActRelu).unwrap() as u64
            + 8 * (net.layer_sizes().len() as u64 + 1);
        let expected = net.parameter_count() as u64 * 16 + header;
        let got = e.conciseness(&b).unwrap();
        ensure(got == expected, || {
            format!("{name}: conciseness {got}, expected {expected}")
        })?;
        lines.push(format!("{name} {got}b"));
    }

    // Hidden neuron 1 feeds nothing, so its incoming weights are free to vary.
    let mut l1 = Layer::zeros(2, 2);
    l1.weights = vec![256, -256, 128, 64];
    let mut l2 = Layer::zeros(2, 2);
    l2.weights = vec![256, 0, -256, 0];
    l2.biases = vec![0, 64];
    let net = ToyNet::new(vec![l1, l2], Activation::Relu, 0).unwrap();
    let e = Explanation::Straightforward(Straightforward::new(&net, &b).unwrap());
    let k = virtues::k_complexity(&e, &b).unwrap();
    let c = e.conciseness(&b).unwrap();
    ensure(k == c, || {
        format!("k {k} should equal conciseness {c} on a net this small")
    })?;
    let v = is_hard_to_vary(&e, &net.enumerate_io(), &b, &HvOptions::default()).unwrap();
    ensure(!v.hard_to_vary && v.tie, || format!("dead-neuron net: {v:?}"))?;
    lines.push(format!("dead neuron: tie over {} neighbors", v.valid));
    Ok(lines.join(", "))
}

fn criterion_5() -> Outcome {
    let mut rng = support::rng(5);
    let mut checked = 0;
    for sizes in [[4usize, 3, 2], [6, 4, 3]] {
        for i in 0..10 {
            let net = support::random_net(&mut rng, &sizes);
            let ablation = if i % 2 == 0 { Ablation::Zero } else { Ablation::Mean };
            let ab = Arc::new(Ablator::new(Arc::new(net.clone()), ablation).unwrap());
            ensure(ab.blocks().len() <= 12, || {
                "too many blocks for the exhaustive oracle".into()
            })?;
            let circuit = if i == 0 {
                Circuit::full(ab.clone())
            } else {
                Circuit::from_active(ab.clone(), rng.gen::<u64>() & ab.full_mask())
            };
            let s = fcm_scores(&circuit, &FcmOptions::default()).unwrap();
            let (faith, inc, mins) = support::oracle_fcm(&net, ablation, circuit.mask());
            ensure(s.exhaustive, || "small circuits must be scored exhaustively".into())?;
            ensure(
                s.faithfulness == faith && s.incompleteness_max == inc && s.minimality == mins,
                || format!("{sizes:?} #{i}: library {s:?}, oracle ({faith}, {inc}, {mins:?})"),
            )?;
            if i == 0 {
                ensure(s.incompleteness_max == 0.0, || {
                    format!("full circuit incompleteness {}", s.incompleteness_max)
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} circuits match the exhaustive oracle"))
}

fn criterion_6() -> Outcome {
    let b = BackgroundTheory::default();
    let jobs: Vec<(TaskName, u64)> = TaskName::ALL
        .into_iter()
        .flat_map(|t| (0..20).map(move |s| (t, s)))
        .collect();
    let results: Vec<Result<usize, String>> = jobs
        .par_iter()
        .map(|&(name, seed)| {
            let task = TaskSpec::get(name);
            let net = Arc::new(train_toy(&task, seed).map_err(|e| e.to_string())?.net);
            let truth = support::all_inputs(task.n)
                .into_iter()
                .filter(|&x| support::reference_label(&net, x) == task.target(x))
                .count() as u64;
            let bf = brute_force_proof(&net, &task);
            ensure(
                bf.credited == truth && bf.bound == truth as f64 / (1u64 << task.n) as f64,
                || format!("{name} s{seed}: brute force {} vs oracle {truth}", bf.credited),
            )?;
            let clustering = fit_clustering(
                &net,
                &ClusteringOptions {
                    space: Space::Input,
                    k: 16,
                    seed,
                },
                &b,
            )
            .map_err(|e| e.to_string())?;
            let ab = Arc::new(Ablator::new(net.clone(), Ablation::Mean).map_err(|e| e.to_string())?);
            let mut certs = vec![
                bf,
                cluster_guided_proof("k16", &net, &task, &clustering),
                circuit_guided_proof("tau0.05", &net, &task, &discover_circuit(ab, 0.05)),
            ];
            for c in &mut certs {
                ensure(audit(c, &net, &task) && c.credited <= truth, || {
                    format!("{name} s{seed}: {} credits {} of {truth}", c.id, c.credited)
                })?;
            }
            Ok(certs.len())
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{} nets, {total} certificates sound", jobs.len()))
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = default_config();
    cfg.output_dir = dir.path().to_path_buf();
    let out = report::run(&cfg).map_err(|e| e.to_string())?;
    let mut by_net: BTreeMap<String, Vec<(f64, u64)>> = BTreeMap::new();
    for c in &out.proofs.certificates {
        by_net
            .entry(c.net.clone())
            .or_default()
            .push((c.certificate.bound, c.certificate.flops));
    }
    let mut sizes = Vec::new();
    for (net, points) in &by_net {
        let mut want: Vec<(u64, u64)> = support::oracle_frontier(points)
            .into_iter()
            .map(|i| (points[i].1, points[i].0.to_bits()))
            .collect();
        let mut got: Vec<(u64, u64)> = out
            .proofs
            .frontier
            .iter()
            .filter(|f| &f.net == net)
            .map(|f| (f.flops, f.bound.to_bits()))
            .collect();
        want.sort_unstable();
        got.sort_unstable();
        ensure(got == want, || format!("{net}: frontier {got:?}, oracle {want:?}"))?;
        sizes.push(format!("{net}: {} of {} points", got.len(), points.len()));
    }
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("frontier.json")).unwrap()).unwrap();
    ensure(
        written.as_array().map(|a| a.len()) == Some(out.proofs.frontier.len()),
        || "frontier.json disagrees with the run output".into(),
    )?;
    Ok(sizes.join(", "))
}

/// Scores that depend only on the stream, with some streams invalid.
fn synthetic_hv(target: Vec<Symbol>, salt: u64) -> impl Fn(&[Symbol]) -> Option<f64> + Sync {
    move |s: &[Symbol]| {
        if salt.is_multiple_of(2) {
            if s.first() == Some(&Symbol::Digit(2)) {
                return None;
            }
            let mismatches = s.iter().zip(&target).filter(|(a, b)| a != b).count();
            Some(-(mismatches as f64) - s.len().abs_diff(target.len()) as f64)
        } else {
            let mut h = DefaultHasher::new();
            (s, salt).hash(&mut h);
            let v = h.finish();
            (!v.is_multiple_of(5) || s == target.as_slice()).then_some((v % 4) as f64)
        }
    }
}

fn criterion_8() -> Outcome {
    let b = BackgroundTheory::default();
    let mut rng = support::rng(8);
    let alphabet = [Symbol::Digit(0), Symbol::Digit(1), Symbol::Digit(2)];
    let mut instances = 0;
    let mut hard = 0;
    for i in 0..40u64 {
        let len = rng.gen_range(1..=5);
        let mut stream: Vec<Symbol> = (0..len).map(|_| alphabet[rng.gen_range(0..3)]).collect();
        stream[0] = Symbol::Digit(rng.gen_range(0..2));
        let radius = 1 + (i as usize % 2);
        let hv = synthetic_hv(stream.clone(), i);
        let opts = HvOptions {
            radius,
            cap: u64::MAX,
            samples: 0,
            seed: 0,
        };
        let got = local_maximum(&stream, &alphabet, &hv, &opts).unwrap();
        let want = support::oracle_hard_to_vary(&stream, &alphabet, radius, &hv);
        ensure(got.hard_to_vary == want, || {
            format!("synthetic #{i}: library {}, oracle {want}", got.hard_to_vary)
        })?;
        instances += 1;
        hard += want as usize;
    }
    for i in 0..20 {
        let n = rng.gen_range(2..=3);
        let m = support::random_mixture(&mut rng, n, 2, &b);
        let m = if m.hypotheses().len() > 2 {
            m.without_last().without_last()
        } else {
            m
        };
        let e = Explanation::Mixture(m);
        let train = support::random_observations(&mut rng, n, 2, 6);
        let got = is_hard_to_vary(&e, &train, &b, &HvOptions::default()).unwrap();
        let score = |s: &[Symbol]| {
            let d = Explanation::from_symbols(s, &b, None).ok()?;
            Some(virtues::accuracy(&d, &train).ok()? - virtues::k_complexity(&d, &b).ok()? as f64)
        };
        let want = support::oracle_hard_to_vary(&e.symbols(&b), &Family::Mixture.alphabet(), 1, score);
        ensure(got.hard_to_vary == want, || {
            format!("mixture #{i}: library {}, oracle {want}", got.hard_to_vary)
        })?;
        instances += 1;
        hard += want as usize;
    }
    Ok(format!("{instances} instances agree ({hard} hard to vary)"))
}

fn criterion_9() -> Outcome {
    let b = BackgroundTheory::default();
    let mut rng = support::rng(9);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(0.0..200.0);
        let a = adhocness(x, x).unwrap();
        ensure(a == 0.0, || format!("adhocness({x}, {x}) = {a}"))?;
    }

    let epicycle = Mixture::new(
        8,
        2,
        &[
            (Program::Majority, 3, 0.01),
            (Program::Parity, 1, 0.02),
            (Program::Bit(3), 1, 0.01),
        ],
        &b,
    )
    .unwrap();
    let a = virtues::mixture_adhocness(&Explanation::Mixture(epicycle), &b)
        .unwrap()
        .unwrap();
    // Tag of 6 bits, then 8 + 16 + 16 bits of fields; the unseen tag costs
    // one extra bit once half the mass goes to the tags already in use.
    let hand = 2f64.powi(-46) - 2f64.powi(-47);
    ensure(a > 0.0 && a == hand, || {
        format!("epicycle adhocness {a:e}, hand value {hand:e}")
    })?;

    let implied = Mixture::new(8, 2, &[(Program::Parity, 3, 0.01), (Program::Parity, 1, 0.2)], &b).unwrap();
    let i = virtues::mixture_adhocness(&Explanation::Mixture(implied), &b)
        .unwrap()
        .unwrap();
    ensure(i < 0.0, || format!("implied hypothesis adhocness {i:e}"))?;
    Ok(format!("epicycle {a:.3e}, implied {i:.3e}"))
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "manifest.json") {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let config = workspace_root().join("configs/default.json");
    let mut trees = Vec::new();
    let mut times = Vec::new();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_virtue-bench"))
            .args(["run", "--config"])
            .arg(&config)
            .args(["--seed", "42", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        times.push(start.elapsed().as_secs_f64());
        trees.push(read_tree(dir.path()));
    }
    ensure(!trees[0].is_empty(), || "no artifacts written".into())?;
    ensure(trees[0].keys().eq(trees[1].keys()), || {
        "the runs wrote different files".into()
    })?;
    for (path, bytes) in &trees[0] {
        ensure(&trees[1][path] == bytes, || {
            format!("{} differs between runs", path.display())
        })?;
    }
    Ok(format!(
        "{} files identical, runs took {:.1}s and {:.1}s",
        trees[0].len(),
        times[0],
        times[1]
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("likelihood decompositions", criterion_1),
        ("factorized nullity", criterion_2),
        ("mixture closed form", criterion_3),
        ("straightforward explanation", criterion_4),
        ("faithfulness, completeness, minimality", criterion_5),
        ("proof soundness", criterion_6),
        ("pareto frontier", criterion_7),
        ("hard to vary", criterion_8),
        ("adhocness", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
