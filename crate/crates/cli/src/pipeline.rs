//! Stage execution: run the configured stages in order, write one artifact
//! file per result, and assemble the two reports.
//!
//! report.kv is the stable, machine-readable record: identical config and
//! seed reproduce it byte for byte. Runtimes go only to report.txt.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use inclab_core::energy::sum_multiplicities;
use inclab_core::exponents::fit_exponent;
use inclab_core::hyperplanes::{
    build_family, dyadic_histogram, select_level, HyperplaneFamily, LevelSelection,
};
use inclab_core::incidence::{
    count_incidences_rational, max_common_points, max_planes_through_point_pair,
};
use inclab_core::lattice::{build_point_set, build_point_set_with_bound, PointSet};
use inclab_core::rational::format_rat;
use inclab_core::rng::SplitMix64;
use inclab_core::sparsifier::sample_family;
use inclab_core::transforms::{
    apply_inversion_config, count_point_sphere_incidences, count_point_surface_incidences,
    dualize, rational_points, shear_map, DualConfig,
};
use sha2::{Digest, Sha256};

use crate::artifact;
use crate::config::{PipelineConfig, Stage, TChoice};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Per-stage seed: the i-th draw of the config seed's stream, where i is
/// the stage's canonical index.
pub fn stage_seed(seed: u64, stage: Stage) -> u64 {
    SplitMix64::new(seed).nth(stage.index() as u64)
}

pub struct RunReport {
    pub out: PathBuf,
    pub kv: Vec<(String, String)>,
    pub human: Vec<String>,
}

struct Emit {
    out: PathBuf,
    kv: Vec<(String, String)>,
    human: Vec<String>,
}

impl Emit {
    fn kv(&mut self, key: &str, value: impl Display) {
        self.kv.push((key.to_string(), value.to_string()));
    }

    fn artifact(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.kv.push((format!("digest.{name}"), sha256_hex(text.as_bytes())));
        Ok(())
    }

    fn human(&mut self, line: String) {
        self.human.push(line);
    }
}

#[derive(Default)]
struct State {
    ps: Option<PointSet>,
    family: Option<HyperplaneFamily>,
    selection: Option<LevelSelection>,
    dual: Option<DualConfig>,
}

impl State {
    fn ps(&self) -> &PointSet {
        self.ps.as_ref().expect("build runs first")
    }

    fn family(&self) -> &HyperplaneFamily {
        self.family.as_ref().expect("scheduler orders family before its users")
    }

    fn selection(&self) -> &LevelSelection {
        self.selection.as_ref().expect("scheduler orders select before its users")
    }

    fn dual(&self) -> &DualConfig {
        self.dual.as_ref().expect("scheduler orders dualize before invert")
    }
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;

    let mut emit = Emit {
        out: cfg.out.clone(),
        kv: Vec::new(),
        human: Vec::new(),
    };
    let canonical = cfg.canonical_text();
    for line in canonical.lines() {
        emit.kv.push((
            format!("config.{}", line.split_once('=').unwrap().0),
            line.split_once('=').unwrap().1.to_string(),
        ));
    }
    emit.kv("config.digest", sha256_hex(canonical.as_bytes()));

    let mut state = State::default();
    let total = Instant::now();
    let mut schedule = vec![Stage::Build];
    schedule.extend_from_slice(&cfg.stages);
    for stage in schedule {
        let t0 = Instant::now();
        run_stage(stage, cfg, &mut state, &mut emit)
            .with_context(|| format!("stage {stage} failed"))?;
        let dt = t0.elapsed().as_secs_f64();
        let line = emit.human.last_mut().expect("every stage reports a line");
        line.push_str(&format!(" ({dt:.3} s)"));
    }
    emit.human.push(format!("total: {:.3} s", total.elapsed().as_secs_f64()));

    let report = RunReport {
        out: emit.out,
        kv: emit.kv,
        human: emit.human,
    };
    write_reports(cfg, &report)?;
    Ok(report)
}

fn run_stage(stage: Stage, cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    match stage {
        Stage::Build => build_stage(cfg, state, emit),
        Stage::Energy => energy_stage(state, emit),
        Stage::Family => family_stage(state, emit),
        Stage::Histogram => histogram_stage(state, emit),
        Stage::Select => select_stage(cfg, state, emit),
        Stage::K2t => k2t_stage(state, emit),
        Stage::Dualize => dualize_stage(cfg, state, emit),
        Stage::Invert => invert_stage(cfg, state, emit),
        Stage::Shear => shear_stage(cfg, state, emit),
        Stage::Sparsify => sparsify_stage(cfg, state, emit),
        Stage::Fit => fit_stage(cfg, emit),
    }
}

fn build_stage(cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    let ps = match (cfg.b, cfg.n) {
        (Some(b), _) => build_point_set_with_bound(cfg.d, b)?,
        (None, Some(n)) => build_point_set(cfg.d, n)?,
        (None, None) => unreachable!("default config sets b"),
    };
    emit.kv("build.points", ps.len());
    emit.kv("build.b", ps.truncation());
    emit.kv("build.n", ps.n_parameter());
    emit.artifact("points.txt", &ps.to_text())?;
    emit.human(format!("build: |P| = {} at d={} B={}", ps.len(), cfg.d, ps.truncation()));
    state.ps = Some(ps);
    Ok(())
}

fn energy_stage(state: &mut State, emit: &mut Emit) -> Result<()> {
    let table = sum_multiplicities(state.ps());
    let energy = table.energy();
    emit.kv("energy.energy", energy);
    emit.kv("energy.distinct_sums", table.len());
    emit.artifact("sums.txt", &table.to_text())?;
    emit.human(format!("energy: E = {energy} over {} distinct sums", table.len()));
    Ok(())
}

fn family_stage(state: &mut State, emit: &mut Emit) -> Result<()> {
    let family = build_family(state.ps());
    emit.kv("family.size", family.len());
    emit.kv("family.total_mu", family.total_mu());
    emit.artifact("family.txt", &family.to_text())?;
    emit.human(format!("family: {} hyperplanes, total mu {}", family.len(), family.total_mu()));
    state.family = Some(family);
    Ok(())
}

fn histogram_stage(state: &mut State, emit: &mut Emit) -> Result<()> {
    let hist = dyadic_histogram(state.family())?;
    emit.kv("histogram.levels", hist.counts.len());
    emit.kv("histogram.total", hist.total());
    emit.kv("histogram.r_level", hist.r_level);
    emit.artifact("histogram.txt", &hist.to_text())?;
    emit.human(format!(
        "histogram: {} dyadic levels, r_level {}",
        hist.counts.len(),
        hist.r_level
    ));
    Ok(())
}

fn select_stage(cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    let sel = select_level(state.family(), &cfg.beta)?;
    emit.kv("select.k_prime", sel.k_prime);
    emit.kv("select.size", sel.subfamily.len());
    emit.kv("select.r_level", sel.r_level);
    emit.kv("select.drift", sel.drift);
    emit.artifact("selected.txt", &sel.subfamily.to_text())?;
    emit.human(format!(
        "select: level k' = {} with {} hyperplanes",
        sel.k_prime,
        sel.subfamily.len()
    ));
    state.selection = Some(sel);
    Ok(())
}

fn k2t_stage(state: &mut State, emit: &mut Emit) -> Result<()> {
    let planes = state.selection().subfamily.planes();
    let report = max_common_points(state.ps(), &planes)?;
    emit.kv("k2t.t_max", report.t_max);
    match report.witness {
        Some((i, j)) => {
            emit.kv("k2t.witness_i", i);
            emit.kv("k2t.witness_j", j);
        }
        None => emit.kv("k2t.witness", "none"),
    }
    emit.artifact("k2t.txt", &artifact::k2t_to_text(report.t_max, report.witness))?;
    emit.human(format!("k2t: t_max = {}", report.t_max));
    Ok(())
}

fn dualize_stage(cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    let points = rational_points(state.ps());
    let planes = state.selection().subfamily.planes();
    let primal = count_incidences_rational(&points, &planes);
    let dual = dualize(&points, &planes)?;
    let dual_count = count_incidences_rational(&dual.points, &dual.planes);
    emit.kv("dualize.points", dual.points.len());
    emit.kv("dualize.planes", dual.planes.len());
    emit.kv("dualize.incidences_primal", primal);
    emit.kv("dualize.incidences_dual", dual_count);
    emit.artifact("dual_points.txt", &artifact::rat_points_to_text(cfg.d, &dual.points))?;
    emit.artifact("dual_planes.txt", &artifact::rat_planes_to_text(cfg.d, &dual.planes))?;
    emit.human(format!("dualize: incidences {primal} -> {dual_count}"));
    state.dual = Some(dual);
    Ok(())
}

fn invert_stage(cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    let dual = state.dual();
    let inv = apply_inversion_config(&dual.points, &dual.planes)?;
    let incidences = count_point_sphere_incidences(&inv.points, &inv.spheres);
    let tau: Vec<String> = inv.translation.iter().map(format_rat).collect();
    emit.kv("invert.translation", tau.join(","));
    emit.kv("invert.points", inv.points.len());
    emit.kv("invert.spheres", inv.spheres.len());
    emit.kv("invert.incidences", incidences);
    emit.artifact("inverted_points.txt", &artifact::rat_points_to_text(cfg.d, &inv.points))?;
    emit.artifact("spheres.txt", &artifact::spheres_to_text(cfg.d, &inv.spheres))?;
    emit.human(format!("invert: {incidences} point-sphere incidences"));
    Ok(())
}

fn shear_stage(cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    let points = rational_points(state.ps());
    let planes = state.selection().subfamily.planes();
    let before = count_incidences_rational(&points, &planes);
    let (sheared, surfaces) = shear_map(&points, &planes, &cfg.shear)?;
    let after = count_point_surface_incidences(&sheared, &surfaces);
    emit.kv("shear.function", cfg.shear.family_tag());
    emit.kv("shear.incidences_before", before);
    emit.kv("shear.incidences_after", after);
    emit.artifact("sheared_points.txt", &artifact::rat_points_to_text(cfg.d, &sheared))?;
    emit.artifact("surfaces.txt", &artifact::surfaces_to_text(cfg.d, &surfaces, &cfg.shear))?;
    emit.human(format!("shear ({}): incidences {before} -> {after}", cfg.shear.family_tag()));
    Ok(())
}

fn sparsify_stage(cfg: &PipelineConfig, state: &mut State, emit: &mut Emit) -> Result<()> {
    let ps = state.ps();
    let selection = state.selection();
    let t = match cfg.t {
        TChoice::Fixed(t) => t,
        TChoice::Auto => {
            let planes = selection.subfamily.planes();
            max_planes_through_point_pair(ps, &planes)?.max_planes + 1
        }
    };
    let seed = stage_seed(cfg.seed, Stage::Sparsify);
    let run = sample_family(ps, &selection.subfamily, &cfg.epsilon, t, seed, cfg.max_retries)?;
    let cert = &run.certificate;
    emit.kv("sparsify.stage_seed", seed);
    emit.kv("sparsify.t", t);
    emit.kv("sparsify.p", format_rat(&cert.p));
    emit.kv("sparsify.retry_index", cert.retry_index);
    emit.kv("sparsify.retained", cert.retained_size);
    emit.kv("sparsify.incidences_before", cert.incidences_before);
    emit.kv("sparsify.incidences_after", cert.incidences_after);
    emit.kv("sparsify.max_pair_cover", cert.max_pair_cover);
    match cert.pair_threshold {
        Some(th) => emit.kv("sparsify.pair_threshold", th),
        None => emit.kv("sparsify.pair_threshold", "none"),
    }
    emit.kv("sparsify.size_window_ok", cert.size_window_ok);
    emit.kv("sparsify.pair_cover_ok", cert.pair_cover_ok);
    emit.kv("sparsify.incidence_floor_ok", cert.incidence_floor_ok);
    emit.kv("sparsify.accepted", cert.accepted);
    let indices: Vec<usize> = run.retained.iter().map(|&i| i as usize).collect();
    let thinned = selection.subfamily.subset(&indices);
    emit.artifact("certificate.txt", &cert.to_text())?;
    emit.artifact("sparsified.txt", &thinned.to_text())?;
    let verdict = if cert.accepted { "accepted" } else { "rejected" };
    emit.human(format!(
        "sparsify: kept {} of {} ({verdict} at retry {})",
        cert.retained_size, cert.family_size, cert.retry_index
    ));
    Ok(())
}

fn fit_stage(cfg: &PipelineConfig, emit: &mut Emit) -> Result<()> {
    let mut rows: Vec<(i64, u64, u128)> = Vec::new();
    for &b in &cfg.fit_bs {
        let ps = build_point_set_with_bound(cfg.d, b)?;
        let energy = sum_multiplicities(&ps).energy();
        rows.push((b, ps.len() as u64, energy));
    }
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(_, points, energy)| (points as f64, energy as f64))
        .collect();
    let fit = fit_exponent(&samples)?;
    emit.kv("fit.samples", rows.len());
    emit.kv("fit.slope", fit.slope);
    emit.kv("fit.intercept", fit.intercept);
    emit.kv("fit.residual", fit.residual);
    emit.artifact("fit.csv", &artifact::fit_csv_to_text(&rows))?;
    emit.human(format!("fit: slope {:.4} over {} sizes", fit.slope, rows.len()));
    Ok(())
}

fn write_reports(cfg: &PipelineConfig, report: &RunReport) -> Result<()> {
    let mut kv_text = String::new();
    for (k, v) in &report.kv {
        kv_text.push_str(&format!("{k}={v}\n"));
    }
    fs::write(report.out.join("report.kv"), &kv_text).context("writing report.kv")?;

    let mut txt = String::from("inclab run\n");
    let names: Vec<&str> = cfg.stages.iter().map(|s| s.name()).collect();
    txt.push_str(&format!("out: {}\n", report.out.display()));
    txt.push_str(&format!("stages: build {}\n", names.join(" ")));
    for line in &report.human {
        txt.push_str(line);
        txt.push('\n');
    }
    fs::write(report.out.join("report.txt"), &txt).context("writing report.txt")?;
    Ok(())
}

/// Value of a key in a report.kv text blob.
pub fn kv_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
}

/// Re-read an artifact and confirm its recorded digest.
pub fn verify_digest(out: &Path, kv_text: &str, name: &str) -> Result<()> {
    let bytes = fs::read(out.join(name)).with_context(|| format!("reading {name}"))?;
    let want = kv_value(kv_text, &format!("digest.{name}"))
        .ok_or_else(|| anyhow!("report.kv lacks digest.{name}"))?;
    let got = sha256_hex(&bytes);
    if got != want {
        return Err(anyhow!("digest mismatch for {name}: {got} != {want}"));
    }
    Ok(())
}
