//! One function per subcommand. Each reads its inputs through the resolved
//! [`RunConfig`], writes its artifacts and a manifest into the output
//! directory, and returns the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use htsbayes::inference::{
    compare_runs, cumulative_pfdr, list_summary, pfdr_list, posterior_predictive_check,
    summarize_chains, viability_range, HitReport, HitThresholds, ListMode, ListSummary,
    UnitSummary, ViabilityFlag, ViabilityRange,
};
use htsbayes::model::{PriorConfig, ScreenData, Unit};
use htsbayes::preprocess::run_pipeline;
use htsbayes::sampler::{gelman_rubin, run_chains, PosteriorDraws, SamplerConfig};
use htsbayes::simgen::{
    fdr_calibration, fdr_grid, generate, mean_fdr_deviation, method_shootout, roc, MethodResult,
    ShootoutConfig,
};

use crate::config::{usage, Manifest, RunConfig};
use crate::io::{
    load_plate_file, read_scores, read_screen, read_summaries, read_truth, write_records,
    write_screen, write_summaries, write_traces, write_truth, CorrelationRecord, FdrRecord,
    HitRecord, ListRecord, PpcRecord, RhatRecord, RocRecord, ScoreRecord, VolcanoRecord,
};

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn write_text(dir: &Path, name: &str, text: &str, m: &mut Manifest) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    m.file(name);
    Ok(())
}

fn finish(dir: &Path, m: Manifest) -> Result<Manifest> {
    m.write(dir)?;
    Ok(m)
}

// ---------------------------------------------------------------------------

pub fn preprocess(cfg: &RunConfig) -> Result<Manifest> {
    let input = cfg.input_path("input")?;
    let pcfg = cfg.preprocess()?;
    let geometry = cfg.geometry()?;
    let out = prepare_out(cfg)?;
    let plates = load_plate_file(&input, geometry)?;
    let (data, prov) = run_pipeline(&plates, &pcfg)?;

    let mut m = Manifest::new("preprocess", cfg);
    write_screen(&out.join("screen.csv"), &data)?;
    m.file("screen.csv");
    write_text(&out, "provenance.txt", &prov.to_text(), &mut m)?;
    m.count("input_wells", prov.input_wells);
    m.count("input_controls", prov.input_controls);
    m.count("deleted_controls", prov.deleted_controls.len());
    m.count("anchor_controls", prov.anchor_controls);
    m.count("evaluation_controls", prov.evaluation_controls);
    m.count("nonpositive_units", prov.nonpositive.len());
    m.count("excluded_units", prov.unit_exclusions.len());
    m.count("output_shrnas", prov.output_shrnas);
    m.count("output_controls", prov.output_controls);
    m.count("replicates", data.n_replicates());
    finish(&out, m)
}

// ---------------------------------------------------------------------------

/// R-hat of every traced scalar; `None` where undefined.
pub fn rhat_table(chains: &[PosteriorDraws]) -> Vec<(String, Option<f64>)> {
    let Some(first) = chains.first() else {
        return Vec::new();
    };
    first
        .traces
        .columns()
        .into_iter()
        .map(|(name, _)| {
            let traces: Option<Vec<&[f64]>> =
                chains.iter().map(|c| c.traces.column(&name)).collect();
            let r = traces.and_then(|t| gelman_rubin(&t).ok());
            (name, r)
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |v| v.to_string())
}

pub fn fit(cfg: &RunConfig) -> Result<Manifest> {
    let input = cfg.input_path("input")?;
    let prior = cfg.prior()?;
    let sampler = cfg.sampler()?;
    let out = prepare_out(cfg)?;
    let data = read_screen(&input)?;
    let chains = run_chains(&data, &prior, &sampler)?;
    let summaries = summarize_chains(&chains)?;

    let mut m = Manifest::new("fit", cfg);
    write_summaries(&out.join("summary.csv"), data.units(), &summaries)?;
    m.file("summary.csv");
    for c in &chains {
        let name = format!("traces_chain{}.csv", c.chain);
        write_traces(&out.join(&name), &c.traces)?;
        m.file(&name);
    }
    let rhat = rhat_table(&chains);
    let rows: Vec<RhatRecord> = rhat
        .iter()
        .map(|(p, r)| RhatRecord {
            parameter: p.clone(),
            rhat: *r,
        })
        .collect();
    write_records(&out.join("rhat.csv"), &rows)?;
    m.file("rhat.csv");

    let mut text = String::new();
    let _ = writeln!(text, "units={}", data.n_units());
    let _ = writeln!(text, "replicates={}", data.n_replicates());
    let _ = writeln!(text, "chains={}", chains.len());
    let _ = writeln!(text, "retained_per_chain={}", chains[0].retained);
    for c in &chains {
        let _ = writeln!(
            text,
            "chain={} accept_hyper_x={} accept_hyper_y={} accept_mu={} proposal_scale_x={} proposal_scale_y={}",
            c.chain,
            fmt_opt(c.acceptance.hyper_x.rate()),
            fmt_opt(c.acceptance.hyper_y.rate()),
            fmt_opt(c.acceptance.mu.rate()),
            c.proposal_scales.0,
            c.proposal_scales.1
        );
    }
    let max_rhat = rhat
        .iter()
        .filter_map(|(_, r)| *r)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        });
    let _ = writeln!(text, "max_rhat={}", fmt_opt(max_rhat));

    let snapshots: Vec<_> = chains.iter().flat_map(|c| c.snapshots.clone()).collect();
    if !snapshots.is_empty() {
        match posterior_predictive_check(&snapshots, &data, sampler.seed) {
            Ok(ppc) => {
                let rows: Vec<PpcRecord> = ppc
                    .pairs
                    .iter()
                    .enumerate()
                    .map(|(k, p)| PpcRecord {
                        draw: k,
                        realized: p.realized,
                        predictive: p.predictive,
                    })
                    .collect();
                write_records(&out.join("ppc.csv"), &rows)?;
                m.file("ppc.csv");
                let _ = writeln!(text, "ppc_p_value={}", ppc.p_value);
                let _ = writeln!(text, "ppc_draws={}", ppc.pairs.len());
                let _ = writeln!(text, "ppc_skipped={}", ppc.skipped);
            }
            Err(e) => {
                let _ = writeln!(text, "ppc=undefined ({e})");
            }
        }
    }
    write_text(&out, "fit.txt", &text, &mut m)?;
    m.count("units", data.n_units());
    m.count("chains", chains.len());
    m.count("retained_per_chain", chains[0].retained);
    finish(&out, m)
}

// ---------------------------------------------------------------------------

/// Indices of controls not consumed as normalization anchors.
pub fn evaluation_controls(units: &[Unit]) -> Vec<usize> {
    (0..units.len())
        .filter(|&i| units[i].kind.is_control() && !units[i].anchor)
        .collect()
}

fn pick<T: Copy>(xs: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| xs[i]).collect()
}

fn thresholds(cfg: &RunConfig, controls: &[UnitSummary]) -> Result<(HitThresholds, &'static str)> {
    let custom = || -> Result<HitThresholds> {
        Ok(HitThresholds {
            null_prob: cfg.get("threshold_null_prob")?,
            beta_lo: cfg.get("threshold_beta_lo")?,
            beta_hi: cfg.get("threshold_beta_hi")?,
        })
    };
    match cfg.raw("thresholds") {
        "controls" => Ok((HitThresholds::from_controls(controls)?, "controls")),
        "default" => Ok((HitThresholds::default(), "default")),
        "custom" => Ok((custom()?, "custom")),
        "auto" => Ok(match HitThresholds::from_controls(controls) {
            Ok(t) => (t, "controls"),
            Err(_) => (HitThresholds::default(), "default"),
        }),
        other => Err(usage(format!(
            "thresholds: expected auto, controls, default or custom, got {other:?}"
        ))),
    }
}

fn list_mode(cfg: &RunConfig) -> Result<Option<ListMode>> {
    let modes = [
        cfg.opt::<f64>("fix_rate")?.map(ListMode::FixRate),
        cfg.opt::<usize>("fix_size")?.map(ListMode::FixSize),
        cfg.opt::<f64>("kappa")?.map(ListMode::FixKappa),
    ];
    let set: Vec<ListMode> = modes.into_iter().flatten().collect();
    match set.as_slice() {
        [] => Ok(None),
        [m] => Ok(Some(*m)),
        _ => Err(usage("set at most one of fix_rate, fix_size and kappa")),
    }
}

fn list_summary_text(t: &ListSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "candidates={}", t.candidates);
    for r in &t.fix_size {
        let _ = writeln!(
            s,
            "fix_size size={} pfdr={} units={} genes={}",
            r.size, r.pfdr, r.units, r.genes
        );
    }
    for r in &t.fix_rate {
        let mult: Vec<String> = r
            .multiplicity
            .iter()
            .map(|(k, n)| format!("{k}:{n}"))
            .collect();
        let _ = writeln!(
            s,
            "fix_rate rate={} pfdr={} units={} genes={} multiplicity={}",
            r.rate,
            r.pfdr,
            r.units,
            r.genes,
            mult.join(",")
        );
    }
    s
}

pub fn report(cfg: &RunConfig) -> Result<Manifest> {
    let screen = cfg.input_path("screen")?;
    let summary = cfg.input_path("summary")?;
    let mode = list_mode(cfg)?;
    let sizes: Vec<usize> = cfg.list("table_sizes")?;
    let rates: Vec<f64> = cfg.list("table_rates")?;
    let out = prepare_out(cfg)?;
    let data = read_screen(&screen)?;
    let units = data.units();
    let summaries = read_summaries(&summary, units)?;

    let controls = evaluation_controls(units);
    let control_summaries = pick(&summaries, &controls);
    let (thr, thr_source) = thresholds(cfg, &control_summaries)?;
    let control_mu: Vec<f64> = control_summaries.iter().map(|s| s.mu_mean).collect();
    let (viability, viability_source) = match viability_range(&control_mu) {
        Ok(v) => (v, "controls"),
        Err(_) => (
            ViabilityRange::new(f64::NEG_INFINITY, f64::INFINITY)?,
            "unbounded",
        ),
    };

    let candidates: Vec<usize> = (0..units.len())
        .filter(|&i| !units[i].kind.is_control())
        .collect();
    if candidates.is_empty() {
        bail!("the screen holds no shRNA units");
    }
    let cand_units: Vec<Unit> = candidates.iter().map(|&i| units[i].clone()).collect();
    let cand_summaries = pick(&summaries, &candidates);
    let hits = HitReport::build(&cand_units, &cand_summaries, viability, thr)?;

    let mut m = Manifest::new("report", cfg);
    let hit_rows: Vec<HitRecord> = hits
        .rows
        .iter()
        .map(|r| HitRecord {
            rank: r.rank,
            unit: r.name.clone(),
            gene: r.gene.clone(),
            null_prob: r.summary.null_prob,
            activity_prob: r.summary.activity_prob(),
            active_beta: r.summary.active_beta,
            mu_mean: r.summary.mu_mean,
            activity: r.activity.as_str().to_string(),
            viability: r.viability.as_str().to_string(),
            cumulative_pfdr: r.cumulative_pfdr,
            hit: r.activity.is_change() && r.viability == ViabilityFlag::Normal,
        })
        .collect();
    write_records(&out.join("hits.csv"), &hit_rows)?;
    m.file("hits.csv");
    let volcano: Vec<VolcanoRecord> = cand_units
        .iter()
        .zip(&cand_summaries)
        .map(|(u, s)| VolcanoRecord {
            unit: u.name.clone(),
            active_beta: s.active_beta,
            activity_prob: s.activity_prob(),
        })
        .collect();
    write_records(&out.join("volcano.csv"), &volcano)?;
    m.file("volcano.csv");

    let all: Vec<usize> = (0..cand_units.len()).collect();
    let summary = list_summary(&cand_units, &cand_summaries, &all, &sizes, &rates)?;
    write_text(
        &out,
        "list_summary.txt",
        &list_summary_text(&summary),
        &mut m,
    )?;

    let mut text = String::new();
    let _ = writeln!(text, "candidates={}", candidates.len());
    let _ = writeln!(text, "evaluation_controls={}", controls.len());
    let _ = writeln!(
        text,
        "thresholds={thr_source} null_prob={} beta_lo={} beta_hi={}",
        thr.null_prob, thr.beta_lo, thr.beta_hi
    );
    if thr_source == "default" {
        let _ = writeln!(
            text,
            "warning=default thresholds come from one published screen and are dataset-specific"
        );
    }
    let _ = writeln!(
        text,
        "viability={viability_source} lo={} hi={}",
        viability.lo, viability.hi
    );
    let _ = writeln!(text, "hits={}", hits.hits().count());

    if let Some(mode) = mode {
        let p: Vec<f64> = cand_summaries.iter().map(|s| s.null_prob).collect();
        let e: Vec<f64> = cand_summaries
            .iter()
            .map(|s| s.active_beta.unwrap_or(f64::NAN))
            .collect();
        let list = pfdr_list(&p, Some(&e), mode)?;
        let cum = cumulative_pfdr(&p, &list.units);
        let rows: Vec<ListRecord> = list
            .units
            .iter()
            .zip(&cum)
            .enumerate()
            .map(|(k, (&i, &c))| ListRecord {
                rank: k + 1,
                unit: cand_units[i].name.clone(),
                gene: cand_units[i].kind.gene().map(str::to_string),
                null_prob: p[i],
                cumulative_pfdr: c,
            })
            .collect();
        write_records(&out.join("list.csv"), &rows)?;
        m.file("list.csv");
        let _ = writeln!(
            text,
            "list={mode:?} size={} loss={} pfdr={}",
            list.units.len(),
            list.loss,
            list.pfdr
        );
        if let Some(w) = &list.warning {
            let _ = writeln!(text, "list_warning={w}");
        }
        m.count("list_size", list.units.len());
    }
    write_text(&out, "report.txt", &text, &mut m)?;
    m.count("candidates", candidates.len());
    m.count("hits", hits.hits().count());
    finish(&out, m)
}

// ---------------------------------------------------------------------------

pub fn simulate(cfg: &RunConfig) -> Result<Manifest> {
    let scenario = cfg.scenario()?;
    let out = prepare_out(cfg)?;
    let (data, truth) = generate(&scenario)?;
    let mut m = Manifest::new("simulate", cfg);
    write_screen(&out.join("screen.csv"), &data)?;
    m.file("screen.csv");
    write_truth(&out.join("truth.csv"), data.units(), &truth)?;
    m.file("truth.csv");
    m.count("units", data.n_units());
    m.count("active", truth.gamma.iter().filter(|g| **g).count());
    m.count("replicates", data.n_replicates());
    finish(&out, m)
}

// ---------------------------------------------------------------------------

fn write_curves(
    out: &Path,
    suffix: &str,
    truth: &[bool],
    scores: &[f64],
    probabilities: bool,
    m: &mut Manifest,
) -> Result<(f64, Option<f64>)> {
    let curve = roc(truth, scores)?;
    let rows: Vec<RocRecord> = curve
        .points
        .iter()
        .map(|p| RocRecord {
            fpr: p.fpr,
            tpr: p.tpr,
        })
        .collect();
    let name = format!("roc{suffix}.csv");
    write_records(&out.join(&name), &rows)?;
    m.file(&name);
    let mut dev = None;
    if probabilities {
        let fdr = fdr_calibration(truth, scores, &fdr_grid())?;
        let rows: Vec<FdrRecord> = fdr
            .iter()
            .map(|p| FdrRecord {
                desired: p.desired,
                actual: p.actual,
                selected: p.selected,
            })
            .collect();
        let name = format!("fdr{suffix}.csv");
        write_records(&out.join(&name), &rows)?;
        m.file(&name);
        dev = Some(mean_fdr_deviation(&fdr));
    }
    Ok((curve.auc, dev))
}

pub fn evaluate(cfg: &RunConfig) -> Result<Manifest> {
    let truth_path = cfg.input_path("truth")?;
    let scores_path = cfg.input_path("scores")?;
    let probabilities = match cfg.raw("score_kind") {
        "probability" => true,
        "score" => false,
        other => {
            return Err(usage(format!(
                "score_kind: expected probability or score, got {other:?}"
            )))
        }
    };
    let out = prepare_out(cfg)?;
    let (names, truth) = read_truth(&truth_path)?;
    let by_name = read_scores(&scores_path)?;
    if by_name.len() != names.len() {
        bail!(
            "{} units in the truth file but {} scores",
            names.len(),
            by_name.len()
        );
    }
    let scores: Vec<f64> = names
        .iter()
        .map(|n| {
            by_name
                .get(n)
                .copied()
                .with_context(|| format!("no score for unit {n}"))
        })
        .collect::<Result<_>>()?;
    if probabilities {
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            bail!("score {s} is not a probability; use score_kind=score");
        }
    }
    let mut m = Manifest::new("evaluate", cfg);
    let (auc, dev) = write_curves(&out, "", &truth.gamma, &scores, probabilities, &mut m)?;
    let mut text = format!("units={}\nauc={auc}\n", names.len());
    let _ = writeln!(text, "mean_fdr_deviation={}", fmt_opt(dev));
    write_text(&out, "evaluate.txt", &text, &mut m)?;
    m.count("units", names.len());
    finish(&out, m)
}

// ---------------------------------------------------------------------------

pub fn shootout(cfg: &RunConfig) -> Result<Manifest> {
    let scenario = cfg.scenario()?;
    let config = ShootoutConfig {
        prior: cfg.prior()?,
        sampler: cfg.sampler()?,
        methods: cfg.methods()?,
        fdr_grid: fdr_grid(),
    };
    let out = prepare_out(cfg)?;
    let report = method_shootout(&scenario, &config)?;
    let mut m = Manifest::new("shootout", cfg);
    write_text(&out, "shootout.txt", &report.to_text(), &mut m)?;
    let (data, _) = generate(&scenario)?;
    for r in &report.results {
        write_method(&out, &data, &report.truth.gamma, r, &mut m)?;
        eprintln!("{}: {:.2}s", r.method, r.runtime.as_secs_f64());
    }
    m.count("units", scenario.units);
    m.count("active", scenario.active);
    m.count("methods", report.results.len());
    finish(&out, m)
}

fn write_method(
    out: &Path,
    data: &ScreenData,
    truth: &[bool],
    r: &MethodResult,
    m: &mut Manifest,
) -> Result<()> {
    let suffix = format!("_{}", r.method);
    let rows: Vec<ScoreRecord> = data
        .units()
        .iter()
        .zip(&r.scores)
        .map(|(u, s)| ScoreRecord {
            unit: u.name.clone(),
            score: *s,
        })
        .collect();
    let name = format!("scores{suffix}.csv");
    write_records(&out.join(&name), &rows)?;
    m.file(&name);
    write_curves(out, &suffix, truth, &r.scores, r.fdr.is_some(), m)?;
    Ok(())
}

// ---------------------------------------------------------------------------

fn fit_summaries(
    data: &ScreenData,
    prior: &PriorConfig,
    sampler: &SamplerConfig,
) -> Result<Vec<UnitSummary>> {
    Ok(summarize_chains(&run_chains(data, prior, sampler)?)?)
}

pub fn sensitivity(cfg: &RunConfig) -> Result<Manifest> {
    let input = cfg.input_path("input")?;
    let alt_path = cfg.input_path("prior_b")?;
    let prior_a = cfg.prior()?;
    let mut alt = cfg.clone();
    let text = std::fs::read_to_string(&alt_path)
        .with_context(|| format!("reading {}", alt_path.display()))?;
    alt.apply_text(&text)
        .with_context(|| format!("in {}", alt_path.display()))?;
    let prior_b = alt.prior()?;
    let sampler = cfg.sampler()?;
    let out = prepare_out(cfg)?;
    let data = read_screen(&input)?;

    let (a, b) = std::thread::scope(|s| {
        let ha = s.spawn(|| fit_summaries(&data, &prior_a, &sampler));
        let b = fit_summaries(&data, &prior_b, &sampler);
        (ha.join().expect("fit thread panicked"), b)
    });
    let (a, b) = (a?, b?);
    let corr = compare_runs(&a, &b)?;

    let mut m = Manifest::new("sensitivity", cfg);
    write_summaries(&out.join("summary_a.csv"), data.units(), &a)?;
    m.file("summary_a.csv");
    write_summaries(&out.join("summary_b.csv"), data.units(), &b)?;
    m.file("summary_b.csv");
    let rows = vec![
        CorrelationRecord {
            quantity: "activity_prob".into(),
            pearson: corr.activity,
            units: data.n_units(),
        },
        CorrelationRecord {
            quantity: "active_beta".into(),
            pearson: corr.effect,
            units: corr.effect_units,
        },
    ];
    write_records(&out.join("sensitivity.csv"), &rows)?;
    m.file("sensitivity.csv");
    let phi = |p: &PriorConfig| {
        p.phi()
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    };
    m.count("prior_a.phi", phi(&prior_a));
    m.count("prior_b.phi", phi(&prior_b));
    m.count("units", data.n_units());
    finish(&out, m)
}
