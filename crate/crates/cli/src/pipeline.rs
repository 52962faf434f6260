use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use timescale_core::fft_band::{band_decompose, BandSpec};
use timescale_core::gam::{
    build_design, fit_pirls, select_smoothing, Design, FitReport, GamFit, ModelSpec, SmoothTerm,
};
use timescale_core::grouping::{
    complete_linkage, merge_nonidentifiable, regroup, wcorr_matrix, CutHeights, Dendrogram,
    Grouping, GroupingExport,
};
use timescale_core::series::{
    aggregate_daily, impute_causal_ma, read_panel, read_series, screen_outliers, spatial_average,
    write_panel_to, write_series_to, write_table_to, ImputationReport, OutlierReport,
    StationPanel, Step, TimeSeries,
};
use timescale_core::ssa::{decompose, embed, embed_values, Decomposition, DEFAULT_RANK_TOL};
use timescale_core::synth::{gen_harmonic_series, gen_poisson_counts};
use timescale_core::Error;

use crate::artifacts::{Artifacts, FileEntry};
use crate::config::{ColumnRef, ModelConfig, PipelineConfig, Subcommand};
use crate::error::CliError;

/// Validates the config, runs the subcommand and writes its artifacts.
pub fn run(cmd: Subcommand, cfg: &PipelineConfig) -> Result<Vec<FileEntry>, CliError> {
    cfg.validate(cmd)?;
    let mut out = Artifacts::create(&cfg.output_dir())?;
    log::info!("{} -> {}", cmd.name(), out.dir().display());
    let seed = match cmd {
        Subcommand::Preprocess => preprocess(cfg, &mut out).map(|_| None),
        Subcommand::Ssa => ssa(cfg, &mut out).map(|_| None),
        Subcommand::Fft => fft(cfg, &mut out).map(|_| None),
        Subcommand::Fit => fit(cfg, &mut out).map(|_| None),
        Subcommand::Compare => compare(cfg, &mut out).map(|_| None),
        Subcommand::Simulate => simulate(cfg, &mut out).map(Some),
    }?;
    out.finish(cmd, cfg, seed)
}

fn input_series(cfg: &PipelineConfig) -> Result<TimeSeries<f64>, CliError> {
    let path = cfg.resolve(cfg.input.as_ref().expect("validated"));
    Ok(read_series(path)?)
}

#[derive(Debug, Serialize)]
struct PreprocessReport {
    stations: Vec<String>,
    input_step: Step,
    input_rows: usize,
    availability: f64,
    days: usize,
    first_day: NaiveDate,
    missing_before_imputation: usize,
    outliers: Option<OutlierReport>,
    imputation: ImputationReport,
}

fn preprocess(cfg: &PipelineConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let p = &cfg.preprocess;
    let raw: StationPanel<f64> = read_panel(cfg.resolve(cfg.input.as_ref().expect("validated")))?;
    let daily = if raw.step() == Step::Daily {
        raw.clone()
    } else {
        let series = raw
            .series()
            .iter()
            .map(|s| aggregate_daily(s, p.availability))
            .collect::<timescale_core::Result<Vec<_>>>()?;
        StationPanel::new(series)?
    };
    let (screened, outliers) = if daily.stations() > 1 {
        let (s, r) = screen_outliers(&daily, p.remove_count)?;
        (s, Some(r))
    } else {
        (daily, None)
    };
    let mean = if screened.stations() > 1 {
        spatial_average(&screened)
    } else {
        screened.series()[0].clone()
    };
    let (filled, imputation) = impute_causal_ma(&mean, p.impute_window)?;
    if screened.stations() > 1 {
        out.with("stations_daily.csv", |w| write_panel_to(w, &screened))?;
    }
    out.with("daily.csv", |w| write_series_to(w, &filled))?;
    out.json(
        "preprocess_report.json",
        &PreprocessReport {
            stations: raw.station_ids().to_vec(),
            input_step: raw.step(),
            input_rows: raw.len(),
            availability: p.availability,
            days: filled.len(),
            first_day: filled.date(0),
            missing_before_imputation: mean.missing_count(),
            outliers,
            imputation,
        },
    )
}

#[derive(Debug, Serialize)]
struct GroupingArtifact {
    window_length: usize,
    requested_groups: usize,
    cut: CutHeights,
    dendrogram: Dendrogram,
    clustered: Vec<Vec<usize>>,
    #[serde(flatten)]
    result: GroupingExport,
}

/// Clustering, optional merging and manual edits, as configured.
pub fn group_decomposition(
    cfg: &PipelineConfig,
    dec: &Decomposition<f64>,
    p: usize,
) -> Result<(Grouping<f64>, Dendrogram), CliError> {
    let w = wcorr_matrix(dec)?;
    let dendro = complete_linkage(&w);
    let mut g = Grouping::from_groups(dec, dendro.cut(p.min(dec.rank()))?)?;
    if let Some(mode) = cfg.merge {
        g = merge_nonidentifiable(&g, dec, mode)?;
    }
    if !cfg.regroup.is_empty() {
        g = regroup(&g, dec, &cfg.regroup)?;
    }
    Ok((g, dendro))
}

fn ssa(cfg: &PipelineConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let series = input_series(cfg)?;
    let dec = decompose(&embed(&series, cfg.window_length)?, DEFAULT_RANK_TOL)?;
    log::info!("rank {} trajectory matrix", dec.rank());
    let w = wcorr_matrix(&dec)?;
    let p = cfg.group_count();
    let (g, dendro) = group_decomposition(cfg, &dec, p)?;
    let export = dec.export();

    out.json("decomposition.json", &export)?;
    out.with("wmatrix.csv", |buf| w.write_csv(buf))?;
    out.with("spectrum.csv", |buf| {
        writeln!(buf, "index,sigma,lambda,share")?;
        for (t, share) in dec.triples().iter().zip(&export.shares) {
            writeln!(buf, "{},{},{},{}", t.index, t.sigma, t.lambda(), share)?;
        }
        Ok(())
    })?;
    write_grouping(cfg, out, &series, &dec, &g, &dendro, p)
}

fn write_grouping(
    cfg: &PipelineConfig,
    out: &mut Artifacts,
    calendar: &TimeSeries<f64>,
    dec: &Decomposition<f64>,
    g: &Grouping<f64>,
    dendro: &Dendrogram,
    p: usize,
) -> Result<(), CliError> {
    let p = p.min(dec.rank());
    out.json(
        "grouping.json",
        &GroupingArtifact {
            window_length: cfg.window_length,
            requested_groups: p,
            cut: dendro.cut_heights(p),
            dendrogram: dendro.clone(),
            clustered: dendro.cut(p)?,
            result: g.export(dec)?,
        },
    )?;
    let columns: Vec<(String, Vec<f64>)> = g
        .labels()
        .iter()
        .cloned()
        .zip(g.components().iter().cloned())
        .collect();
    for (i, col) in columns.iter().enumerate() {
        out.with(&format!("component_G{}.csv", i + 1), |w| {
            write_series_to(w, &TimeSeries::new(&col.0, calendar.start(), calendar.step(), col.1.iter().copied().map(Some).collect())?)
        })?;
    }
    out.with("components.csv", |w| write_table_to(w, calendar, &columns))
}

#[derive(Debug, Serialize)]
struct BandsArtifact {
    breaks: Vec<f64>,
    n: usize,
    max_imaginary: f64,
    bands: Vec<timescale_core::fft_band::BandMetadata>,
}

fn fft(cfg: &PipelineConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let series = input_series(cfg)?;
    let x = series.complete_values()?;
    let spec = BandSpec::new(cfg.breaks.clone())?;
    let d = band_decompose(&x, &spec)?;
    let meta = d.metadata();
    let columns: Vec<(String, Vec<f64>)> = meta
        .iter()
        .zip(&d.bands)
        .map(|(m, b)| (m.label.clone(), b.series.clone()))
        .collect();
    for (label, values) in &columns {
        out.with(&format!("band_{label}.csv"), |w| write_table_to(w, &series, &[("value", values.clone())]))?;
    }
    out.with("bands.csv", |w| write_table_to(w, &series, &columns))?;
    out.json(
        "bands.json",
        &BandsArtifact { breaks: cfg.breaks.clone(), n: x.len(), max_imaginary: d.max_imaginary, bands: meta },
    )
}

/// A fitted model with the rows it used.
pub struct FittedModel {
    pub report: FitReport,
    pub fit: GamFit<f64>,
    pub design: Design<f64>,
    pub dates: Vec<NaiveDate>,
    pub counts: Vec<f64>,
}

fn column_of(cfg: &PipelineConfig, r: &ColumnRef) -> Result<BTreeMap<NaiveDate, Option<f64>>, CliError> {
    lookup_column(cfg, &r.path, r.column.as_deref(), &r.name)
}

fn lookup_column(
    cfg: &PipelineConfig,
    path: &std::path::Path,
    column: Option<&str>,
    term: &str,
) -> Result<BTreeMap<NaiveDate, Option<f64>>, CliError> {
    let panel: StationPanel<f64> = read_panel(cfg.resolve(path))?;
    if panel.step() != Step::Daily {
        return Err(Error::InvalidArgument(format!("covariate '{term}' is not daily")).into());
    }
    let ids = panel.station_ids();
    let idx = match column {
        Some(c) => ids.iter().position(|i| i == c),
        None if ids.len() == 1 => Some(0),
        None => ids.iter().position(|i| i == term),
    }
    .ok_or_else(|| {
        Error::InvalidArgument(format!(
            "no column for term '{term}' in {} (columns: {})",
            path.display(),
            ids.join(", ")
        ))
    })?;
    let s = &panel.series()[idx];
    Ok((0..s.len()).map(|i| (s.date(i), s.values()[i])).collect())
}

/// Aligns counts and covariates by date, keeps complete rows and fits.
pub fn fit_model(cfg: &PipelineConfig, m: &ModelConfig, name: &str) -> Result<FittedModel, CliError> {
    let counts = read_series::<f64>(cfg.resolve(&m.counts))?;
    if counts.step() != Step::Daily {
        return Err(Error::InvalidArgument("counts must be daily".into()).into());
    }
    let exposures = m.exposures.iter().map(|e| column_of(cfg, e)).collect::<Result<Vec<_>, _>>()?;
    let smooth_cols = m
        .smooths
        .iter()
        .map(|s| {
            s.path
                .as_ref()
                .map(|p| lookup_column(cfg, p, s.column.as_deref(), &s.name))
                .transpose()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut dates = Vec::new();
    let mut y = Vec::new();
    let mut ex: Vec<Vec<f64>> = vec![Vec::new(); exposures.len()];
    let mut sm: Vec<Vec<f64>> = vec![Vec::new(); smooth_cols.len()];
    'rows: for i in 0..counts.len() {
        let Some(yi) = counts.values()[i] else { continue };
        let date = counts.date(i);
        let mut exp_row = Vec::with_capacity(exposures.len());
        for col in &exposures {
            match col.get(&date) {
                Some(Some(v)) => exp_row.push(*v),
                _ => continue 'rows,
            }
        }
        let mut sm_row = Vec::with_capacity(smooth_cols.len());
        for col in &smooth_cols {
            match col {
                None => sm_row.push(i as f64),
                Some(c) => match c.get(&date) {
                    Some(Some(v)) => sm_row.push(*v),
                    _ => continue 'rows,
                },
            }
        }
        dates.push(date);
        y.push(yi);
        exp_row.into_iter().zip(&mut ex).for_each(|(v, c)| c.push(v));
        sm_row.into_iter().zip(&mut sm).for_each(|(v, c)| c.push(v));
    }
    log::info!("{name}: {} of {} rows complete", y.len(), counts.len());
    if y.is_empty() {
        return Err(Error::InvalidArgument(format!("model '{name}' has no complete rows")).into());
    }
    let spec = ModelSpec {
        exposures: m.exposures.iter().map(|e| e.name.clone()).zip(ex).collect(),
        weekdays: m.weekdays.then(|| dates.iter().map(|d| d.weekday()).collect()),
        smooths: m
            .smooths
            .iter()
            .zip(sm)
            .map(|(s, covariate)| SmoothTerm { name: s.name.clone(), covariate, basis_dim: s.basis_dim })
            .collect(),
        observations: Some(y.len()),
    };
    fit_spec(&spec, y, dates, name, &cfg.grid())
}

pub fn fit_spec(
    spec: &ModelSpec<f64>,
    counts: Vec<f64>,
    dates: Vec<NaiveDate>,
    name: &str,
    grid: &[f64],
) -> Result<FittedModel, CliError> {
    let design = build_design(spec)?;
    let fit = if design.smooths.is_empty() {
        fit_pirls(&design, &counts, &[])?
    } else {
        select_smoothing(&design, &counts, grid)?
    };
    Ok(FittedModel { report: FitReport::new(name, &fit, &design), fit, design, dates, counts })
}

fn write_fit(out: &mut Artifacts, prefix: &str, f: &FittedModel) -> Result<(), CliError> {
    out.json(&format!("{prefix}_report.json"), &f.report)?;
    out.bytes(&format!("{prefix}_table.txt"), f.report.table().as_bytes())?;
    out.with(&format!("{prefix}_fitted.csv"), |w| {
        writeln!(w, "date,count,fitted")?;
        for ((d, y), mu) in f.dates.iter().zip(&f.counts).zip(&f.fit.fitted) {
            writeln!(w, "{d},{y},{mu}")?;
        }
        Ok(())
    })
}

fn fit(cfg: &PipelineConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let m = cfg.model.as_ref().expect("validated");
    let f = fit_model(cfg, m, &m.label("model"))?;
    write_fit(out, "fit", &f)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ComparisonRow {
    pub rank: usize,
    pub name: String,
    pub ubre: f64,
    pub deviance: f64,
    pub dev_explained: f64,
    pub tr_r: f64,
    pub n: usize,
}

/// Rows sorted by UBRE ascending; ties keep input order.
pub fn rank_by_ubre(reports: &[FitReport]) -> Vec<ComparisonRow> {
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| reports[a].ubre.total_cmp(&reports[b].ubre));
    order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let r = &reports[i];
            ComparisonRow {
                rank: rank + 1,
                name: r.name.clone(),
                ubre: r.ubre,
                deviance: r.deviance,
                dev_explained: r.dev_explained,
                tr_r: r.tr_r,
                n: r.n,
            }
        })
        .collect()
}

fn compare(cfg: &PipelineConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for (i, m) in cfg.fits.iter().enumerate() {
        let name = m.label(&format!("fit{}", i + 1));
        let f = fit_model(cfg, m, &name)?;
        write_fit(out, &format!("fit_{name}"), &f)?;
        reports.push(f.report);
    }
    let rows = rank_by_ubre(&reports);
    out.with("comparison.csv", |w| {
        writeln!(w, "rank,name,ubre,deviance,dev_explained,tr_r,n")?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{},{},{}", r.rank, r.name, r.ubre, r.deviance, r.dev_explained, r.tr_r, r.n)?;
        }
        Ok(())
    })?;
    out.json("comparison.json", &rows)
}

pub const RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Serialize)]
pub struct HarmonicRecovery {
    pub period: f64,
    pub amplitude: f64,
    pub group: String,
    pub max_abs_error: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CoefficientRecovery {
    pub name: String,
    pub planted: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
}

#[derive(Debug, Serialize)]
pub struct RecoveryReport {
    pub seed: u64,
    pub counts_seed: u64,
    pub window_length: usize,
    pub groups: usize,
    pub tolerance: f64,
    pub harmonics: Vec<HarmonicRecovery>,
    pub coefficients: Vec<CoefficientRecovery>,
    pub pass: bool,
}

/// Seed of the count stream, derived from the single config seed.
pub fn counts_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

fn simulate(cfg: &PipelineConfig, out: &mut Artifacts) -> Result<u64, CliError> {
    let sc = cfg.effective_scenario();
    let synth = gen_harmonic_series::<f64>(&sc)?;
    let x = synth.series.complete_values()?;
    let has_trend = synth.trend.iter().any(|v| *v != 0.0);
    let p = cfg.groups.unwrap_or(sc.harmonics.len() + usize::from(has_trend));
    let dec = decompose(&embed_values(&x, cfg.window_length)?, DEFAULT_RANK_TOL)?;
    let (g, dendro) = group_decomposition(cfg, &dec, p)?;

    let mut harmonics = Vec::new();
    let mut matched = Vec::new();
    for (h, truth) in sc.harmonics.iter().zip(&synth.harmonics) {
        let (best, err) = g
            .components()
            .iter()
            .map(|c| c.iter().zip(truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one group");
        matched.push(best);
        harmonics.push(HarmonicRecovery {
            period: h.period,
            amplitude: h.amplitude,
            group: g.labels()[best].clone(),
            max_abs_error: err,
            pass: err <= RECOVERY_TOL,
        });
    }

    let mut truth_cols: Vec<(String, Vec<f64>)> = vec![("trend".into(), synth.trend.clone())];
    truth_cols.extend(synth.harmonics.iter().enumerate().map(|(i, h)| (format!("h{}", i + 1), h.clone())));
    truth_cols.push(("noise".into(), synth.noise.clone()));
    out.with("series.csv", |w| write_series_to(w, &synth.series))?;
    out.with("true_components.csv", |w| write_table_to(w, &synth.series, &truth_cols))?;
    write_grouping(cfg, out, &synth.series, &dec, &g, &dendro, p)?;

    let mut coefficients = Vec::new();
    let cseed = counts_seed(sc.seed);
    if !sc.planted_betas.is_empty() {
        let counts = gen_poisson_counts(sc.start, &synth.harmonics, &sc.planted_betas, &sc.dow_effects, sc.intercept, cseed)?;
        out.with("counts.csv", |w| write_series_to(w, &counts))?;
        let y = counts.complete_values()?;
        let dates: Vec<NaiveDate> = (0..y.len()).map(|i| counts.date(i)).collect();
        let exposures: Vec<(String, Vec<f64>)> = matched
            .iter()
            .enumerate()
            .map(|(i, &gi)| (format!("h{}", i + 1), g.components()[gi].clone()))
            .collect();
        let spec = ModelSpec {
            exposures,
            weekdays: Some(dates.iter().map(|d| d.weekday()).collect()),
            smooths: vec![SmoothTerm {
                name: "time".into(),
                covariate: (0..y.len()).map(|t| t as f64).collect(),
                basis_dim: timescale_core::gam::DEFAULT_BASIS_DIM,
            }],
            observations: None,
        };
        let f = fit_spec(&spec, y, dates, "simulated", &cfg.grid())?;
        for (i, beta) in sc.planted_betas.iter().enumerate() {
            let name = format!("h{}", i + 1);
            let c = f.fit.coefficient(&name).expect("exposure column");
            let (lower, upper) = (c.estimate - 2.0 * c.std_error, c.estimate + 2.0 * c.std_error);
            coefficients.push(CoefficientRecovery {
                name,
                planted: *beta,
                estimate: c.estimate,
                std_error: c.std_error,
                lower,
                upper,
                covered: lower <= *beta && *beta <= upper,
            });
        }
        write_fit(out, "fit", &f)?;
    }
    let pass = harmonics.iter().all(|h| h.pass) && coefficients.iter().all(|c| c.covered);
    out.json(
        "recovery.json",
        &RecoveryReport {
            seed: sc.seed,
            counts_seed: cseed,
            window_length: cfg.window_length,
            groups: p,
            tolerance: RECOVERY_TOL,
            harmonics,
            coefficients,
            pass,
        },
    )?;
    Ok(sc.seed)
}
