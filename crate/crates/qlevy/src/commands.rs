use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qlevy_core::calculus::NEGATIVE_MASS_TOL;
use qlevy_core::charfn::ZeroKind;
use qlevy_core::limits::{Criterion, RelativeCompactnessReport, StochasticCompactnessReport};
use qlevy_core::{
    certify_separation, check_convergence, check_relative_compactness, check_stochastic_compactness, conv_power,
    dominant_mass_bound, emit_curves, eventually_in_ds_probe, is_infinitely_divisible, reconstruct_law,
    triplet_multibasis, tv_distance, ConvergenceVerdict, CurveRow, DiscreteLaw, ExpSeriesParams, FamilySpectra,
    LawSequence, QuasiTriplet, SeparationParams, TrendParams, TripletParams, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{Cli, Command, Common, CurveRange, Format};
use crate::format::{fmt_f64, parse_input, parse_law, to_json, Input, LawDoc, PowerDoc, TripletDoc};

/// Exit classes: definitive success, negative verdict or hard error, undecided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Negative = 1,
    Undecided = 2,
}

/// Resolved numeric configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub triplet: TripletParams,
    pub series: ExpSeriesParams,
    pub trend: TrendParams,
}

impl Settings {
    pub fn from_common(c: &Common) -> Result<Self> {
        fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => bail!("--{name} must be positive, got {x}"),
                _ => Ok(v),
            }
        }
        let mut triplet = TripletParams::default();
        if let Some(tol) = positive("tol", c.tol)? {
            triplet.tol = tol;
        }
        for (name, n) in [("n-init", c.n_init), ("n-max", c.n_max)] {
            if let Some(n) = n {
                if n < 4 || !n.is_power_of_two() {
                    bail!("--{name} must be a power of two ≥ 4, got {n}");
                }
            }
        }
        triplet.n_init = c.n_init.or(triplet.n_init);
        triplet.n_max = c.n_max.or(triplet.n_max);
        if let Some(d) = c.max_depth {
            if d == 0 {
                bail!("--max-depth must be positive");
            }
            triplet.separation.max_depth = d;
        }
        if let Some(z) = positive("zero-tol", c.zero_tol)? {
            triplet.separation.zero_tol = z;
        }
        if let Some(g) = positive("target-gap", c.target_gap)? {
            if g >= 1.0 {
                bail!("--target-gap must lie in (0, 1), got {g}");
            }
            triplet.separation.target_gap = g;
        }
        let mut series = ExpSeriesParams::default();
        if let Some(t) = positive("series-tol", c.series_tol)? {
            series.tol = t;
        }
        let mut trend = TrendParams::default();
        if let Some(z) = positive("zero-threshold", c.zero_threshold)? {
            trend.zero_threshold = z;
        }
        if let Some(g) = positive("growth-factor", c.growth_factor)? {
            trend.growth_factor = g;
        }
        if let Some(b) = c.burn_in {
            trend.burn_in = b.max(1);
        }
        trend.tail_schedule = c.tail_schedule.clone();
        Ok(Self { triplet, series, trend })
    }

    fn separation(&self) -> SeparationParams {
        self.triplet.separation
    }
}

/// Runs one subcommand, writing its artifacts; returns the exit class.
pub fn run(cli: &Cli) -> Result<Exit> {
    let settings = Settings::from_common(&cli.common)?;
    let out = Output { path: cli.common.output.as_deref(), format: cli.common.format };
    match &cli.command {
        Command::CheckS { law } => check_s(&read_law(law)?, &settings, &out),
        Command::Triplet { law, emit_curves, range } => {
            let law = read_law(law)?;
            let t = triplet_multibasis(&law, &settings.triplet)?;
            if let Some(path) = emit_curves {
                write_file(path, &curves_csv(&curve_rows(&law, range)?))?;
            }
            out.json(&TripletDoc::from_triplet(&t))?;
            Ok(Exit::Success)
        }
        Command::Reconstruct { input } => {
            let t = read_triplet(input, &settings)?;
            let r = reconstruct_law(&t, &settings.series)?;
            #[derive(Serialize)]
            struct Doc {
                #[serde(flatten)]
                law: LawDoc,
                reconstruction: Value,
            }
            out.json(&Doc {
                law: LawDoc::from_law(&r.law),
                reconstruction: json!({
                    "series_residual": r.series_residual,
                    "clamped": r.clamped,
                    "mass_defect": r.mass_defect,
                    "residual": r.residual(),
                }),
            })?;
            Ok(Exit::Success)
        }
        Command::Power { input, s } => {
            let t = read_triplet(input, &settings)?;
            let p = conv_power(&t, *s, &settings.series)?;
            out.json(&PowerDoc::from_power(&p))?;
            Ok(Exit::Success)
        }
        Command::ClassifyId { input, id_tol } => {
            let t = read_triplet(input, &settings)?;
            let tol = id_tol.unwrap_or(NEGATIVE_MASS_TOL);
            if !(tol >= 0.0 && tol.is_finite()) {
                bail!("--id-tol must be nonnegative");
            }
            let min_lambda = t.lambdas.values().copied().fold(f64::INFINITY, f64::min);
            let negative: Vec<Value> = t
                .lambdas
                .iter()
                .filter(|(_, &w)| w < -tol)
                .map(|(u, &w)| json!({"freq": u.as_slice(), "value": w}))
                .collect();
            out.json(&json!({
                "infinitely_divisible": is_infinitely_divisible(&t, tol),
                "tolerance": tol,
                "min_lambda": if min_lambda.is_finite() { json!(min_lambda) } else { Value::Null },
                "negative_lambdas": negative,
                "tail_bound": t.tail_bound,
            }))?;
            Ok(Exit::Success)
        }
        Command::Tv { a, b } => {
            let d = tv_distance(&read_law(a)?, &read_law(b)?)?;
            out.json(&json!({ "tv": d }))?;
            Ok(Exit::Success)
        }
        Command::ConvergeCheck { limit, members, emit_trends } => {
            let seq = LawSequence::new(read_members(members)?, Some(read_law(limit)?))?;
            let spectra = family_spectra(&seq, &settings)?;
            let v = check_convergence(&seq, &spectra, &settings.trend)?;
            let table = convergence_table(&spectra, &v);
            eprint!("{}", render_table(&table));
            if let Some(path) = emit_trends {
                write_file(path, &table_csv(&table))?;
            }
            out.json_or_csv(&convergence_json(&v), &table)?;
            Ok(match v.verdict {
                Criterion::Holds { .. } => Exit::Success,
                Criterion::Fails(_) => Exit::Negative,
                Criterion::Inconclusive => Exit::Undecided,
            })
        }
        Command::CompactCheck { members, emit_trends } | Command::StochCheck { members, emit_trends } => {
            let stochastic = matches!(cli.command, Command::StochCheck { .. });
            let seq = LawSequence::new(read_members(members)?, None)?;
            let spectra = family_spectra(&seq, &settings)?;
            let probe = eventually_in_ds_probe(&seq, &settings.separation());
            let (doc, table, passes) = if stochastic {
                let r = check_stochastic_compactness(&spectra, &settings.trend)?;
                let table = compactness_table(&spectra, &r.relative, Some(&r));
                (stochastic_json(&r), table, r.passes)
            } else {
                let r = check_relative_compactness(&spectra, &settings.trend)?;
                let table = compactness_table(&spectra, &r, None);
                (relative_json(&r), table, r.passes)
            };
            let mut doc = doc;
            doc["certified_from"] = json!(probe.certified_from);
            doc["mu"] = json!(probe.mus());
            eprint!("{}", render_table(&table));
            if let Some(path) = emit_trends {
                write_file(path, &table_csv(&table))?;
            }
            out.json_or_csv(&doc, &table)?;
            Ok(if passes { Exit::Success } else { Exit::Negative })
        }
        Command::Curves { law, range } => {
            let rows = curve_rows(&read_law(law)?, range)?;
            match out.format.unwrap_or(Format::Csv) {
                Format::Csv => out.text(&curves_csv(&rows))?,
                Format::Json => out.json(&Value::Array(
                    rows.iter()
                        .map(|r| json!({"t": r.t, "re": r.re, "im": r.im, "modulus": r.modulus, "arg": r.arg}))
                        .collect(),
                ))?,
            }
            Ok(Exit::Success)
        }
    }
}

fn check_s(law: &DiscreteLaw, settings: &Settings, out: &Output) -> Result<Exit> {
    let cert = certify_separation(law, &settings.separation());
    let mut doc = json!({
        "best_inf_estimate": cert.best_inf_estimate,
        "cells": cert.cells,
        "torus_dim": cert.torus_dim,
        "independence_trusted": cert.independence_trusted,
        "dominant_mass_bound": dominant_mass_bound(law),
    });
    let exit = match &cert.verdict {
        Verdict::Certified { mu } => {
            doc["verdict"] = json!("Certified");
            doc["mu"] = json!(mu);
            Exit::Success
        }
        Verdict::ZeroFound { point, t, modulus, kind } => {
            doc["verdict"] = json!("ZeroFound");
            doc["point"] = json!(point);
            doc["t"] = json!(t);
            doc["modulus"] = json!(modulus);
            doc["kind"] = json!(match kind {
                ZeroKind::RealZero => "RealZero",
                ZeroKind::TorusInfimum => "TorusInfimum",
            });
            Exit::Negative
        }
        Verdict::Undecided { best_inf_estimate, depth } => {
            doc["verdict"] = json!("Undecided");
            doc["best_inf_estimate"] = json!(best_inf_estimate);
            doc["depth"] = json!(depth);
            Exit::Undecided
        }
    };
    out.json(&doc)?;
    Ok(exit)
}

struct Output<'a> {
    path: Option<&'a Path>,
    format: Option<Format>,
}

impl Output<'_> {
    fn text(&self, s: &str) -> Result<()> {
        match self.path {
            Some(p) => write_file(p, s),
            None => {
                print!("{s}");
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        if self.format == Some(Format::Csv) {
            bail!("this subcommand writes JSON only");
        }
        self.text(&to_json(value)?)
    }

    fn json_or_csv(&self, value: &Value, table: &Table) -> Result<()> {
        match self.format.unwrap_or(Format::Json) {
            Format::Json => self.text(&to_json(value)?),
            Format::Csv => self.text(&table_csv(table)),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_law(path: &Path) -> Result<DiscreteLaw> {
    parse_law(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

/// A triplet file is taken as is; a law file is run through extraction first.
fn read_triplet(path: &Path, settings: &Settings) -> Result<QuasiTriplet> {
    match parse_input(&read_text(path)?).with_context(|| format!("in {}", path.display()))? {
        Input::Triplet(t) => Ok(t),
        Input::Law(law) => Ok(triplet_multibasis(&law, &settings.triplet)?),
    }
}

/// Each member file holds one law or a JSON array of laws.
fn read_members(paths: &[impl AsRef<Path>]) -> Result<Vec<DiscreteLaw>> {
    let mut laws = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let text = read_text(path)?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
        let items = match value {
            Value::Array(items) => items,
            other => vec![other],
        };
        for (i, item) in items.into_iter().enumerate() {
            let law = parse_law(&item.to_string()).with_context(|| format!("in {} (entry {})", path.display(), i + 1))?;
            laws.push(law);
        }
    }
    Ok(laws)
}

fn family_spectra(seq: &LawSequence, settings: &Settings) -> Result<FamilySpectra> {
    let members = seq.laws().par_iter().map(|law| triplet_multibasis(law, &settings.triplet)).collect();
    let limit = seq.limit().map(|law| triplet_multibasis(law, &settings.triplet));
    Ok(FamilySpectra::from_results(members, limit)?)
}

fn curve_rows(law: &DiscreteLaw, range: &CurveRange) -> Result<Vec<CurveRow>> {
    let period = match law.lattice_form() {
        Some(lf) => std::f64::consts::TAU / lf.span.abs(),
        None => {
            let smallest = law.basis().alphas().iter().map(|a| a.abs()).fold(f64::INFINITY, f64::min);
            std::f64::consts::TAU / smallest
        }
    };
    let t_min = range.t_min.unwrap_or(0.0);
    let t_max = range.t_max.unwrap_or(t_min + period);
    Ok(emit_curves(law, t_min, t_max, range.samples)?)
}

fn curves_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("t,re,im,modulus,arg\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", fmt_f64(r.t), fmt_f64(r.re), fmt_f64(r.im), fmt_f64(r.modulus), fmt_f64(r.arg));
    }
    s
}

/// Per-member trend table shared by the terminal view and the CSV export.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn coords_cell(c: &qlevy_core::Coords) -> String {
    c.as_slice().iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

fn opt_cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f64)
}

fn convergence_table(spectra: &FamilySpectra, v: &ConvergenceVerdict) -> Table {
    let rows = spectra
        .members
        .iter()
        .enumerate()
        .map(|(i, t)| {
            vec![
                (i + 1).to_string(),
                coords_cell(&t.gamma_coords),
                fmt_f64(t.l1_norm()),
                fmt_f64(v.ell1_distances[i]),
                fmt_f64(v.tv_distances[i]),
            ]
        })
        .collect();
    Table { header: vec!["n", "gamma", "ell1_norm", "ell1_distance", "tv_distance"], rows }
}

fn compactness_table(
    spectra: &FamilySpectra,
    r: &RelativeCompactnessReport,
    st: Option<&StochasticCompactnessReport>,
) -> Table {
    let mut header = vec!["n", "gamma", "ell1_norm", "running_sup"];
    if st.is_some() {
        header.push("running_min");
    }
    let rows = spectra
        .members
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut row = vec![
                (i + 1).to_string(),
                coords_cell(&t.gamma_coords),
                fmt_f64(r.ell1_norms[i]),
                fmt_f64(r.running_sup[i]),
            ];
            if let Some(st) = st {
                row.push(opt_cell(st.running_min.get(i).copied()));
            }
            row
        })
        .collect();
    Table { header, rows }
}

fn table_csv(t: &Table) -> String {
    let mut s = t.header.join(",");
    s.push('\n');
    for row in &t.rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn render_table(t: &Table) -> String {
    let widths: Vec<usize> = (0..t.header.len())
        .map(|j| t.rows.iter().map(|r| r[j].len()).chain([t.header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let mut s = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ");
        s.push('\n');
        s
    };
    let mut s = line(t.header.clone());
    for row in &t.rows {
        s.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    s
}

fn criterion_json(c: &Criterion) -> Value {
    match c {
        Criterion::Holds { gamma_from } => json!({"verdict": "Holds", "gamma_from": gamma_from}),
        Criterion::Fails(reason) => json!({"verdict": "Fails", "reason": format!("{reason:?}")}),
        Criterion::Inconclusive => json!({"verdict": "Inconclusive"}),
    }
}

fn convergence_json(v: &ConvergenceVerdict) -> Value {
    let mut doc = criterion_json(&v.verdict);
    doc["gamma_stable_from"] = json!(v.gamma_stable_from);
    doc["ell1_distances"] = json!(v.ell1_distances);
    doc["tv_distances"] = json!(v.tv_distances);
    doc["trend_agreement"] = json!(v.trend_agreement);
    doc["tv_tends_to_zero"] = json!(v.tv_tends_to_zero);
    doc
}

fn relative_json(r: &RelativeCompactnessReport) -> Value {
    json!({
        "passes": r.passes,
        "gamma_values": r.gamma_values.iter().map(|c| c.as_slice().to_vec()).collect::<Vec<_>>(),
        "gammas_pass": r.gammas_pass,
        "ell1_norms": r.ell1_norms,
        "running_sup": r.running_sup,
        "sup_pass": r.sup_pass,
        "tail_schedule": r.tail_schedule,
        "tail_sups": r.tail_sups,
        "tails_pass": r.tails_pass,
    })
}

fn stochastic_json(r: &StochasticCompactnessReport) -> Value {
    json!({
        "passes": r.passes,
        "relative": relative_json(&r.relative),
        "running_min": r.running_min,
        "tail_min": r.tail_min,
        "nondegenerate_pass": r.nondegenerate_pass,
    })
}
