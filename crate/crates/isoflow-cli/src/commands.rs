//! One function per subcommand. Each validates its paths, computes, then
//! writes its artifacts.

use std::path::Path;

use isoflow::curves::{area_preserving_perturbation, Param, SampledCurve};
use isoflow::onewell;
use isoflow::series;
use isoflow::twowell::{self, MinimizeOptions, StartKind, TwoWellProblem};
use isoflow::wave;
use isoflow::{Mat2, Potential, PotentialConfig, Vec2, WellData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{num, write_json, write_rows};
use crate::CliError;

/// Outcome of a subcommand: the report is always written when requested;
/// `failure` turns the exit status into a numerical failure afterwards.
pub struct Done {
    pub failure: Option<String>,
}

impl Done {
    fn ok() -> Self {
        Done { failure: None }
    }
}

fn emit(report: Option<&Path>, value: &Value) -> Result<(), CliError> {
    if let Some(p) = report {
        write_json(p, value)?;
    }
    Ok(())
}

fn header<A: Serialize>(name: &str, seed: u64, args: &A) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("subcommand".into(), json!(name));
    m.insert("seed".into(), json!(seed));
    m.insert("inputs".into(), json!(args));
    m
}

fn write_curve(curve: &SampledCurve, path: Option<&Path>) -> Result<(), CliError> {
    if let Some(p) = path {
        curve.write_csv_file(p)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CertificateSummary {
    perturbations: usize,
    amplitude: f64,
    min_energy_excess: f64,
    max_integral_spread: f64,
    all_minimal: bool,
    all_integrals_agree: bool,
}

pub fn onewell(a: &OnewellArgs, seed: u64) -> Result<Done, CliError> {
    check_paths(&[], &[a.out.as_deref(), a.report.as_deref()])?;
    let well = WellData::axis_aligned(a.lambda1 * a.lambda1, a.lambda2 * a.lambda2)?;
    let p0 = Vec2::new(a.p0.0, a.p0.1);
    let sol = onewell::isoperimetric(&well, p0, a.area, a.nodes, None)?;
    let mut r = header("onewell", seed, a);
    let pot = Potential::quadratic(Vec2::zeros(), Mat2::new(a.lambda1 * a.lambda1, 0.0, 0.0, a.lambda2 * a.lambda2))?;
    r.insert("potential".into(), json!(PotentialConfig::describe(&pot)));
    r.insert("energy".into(), json!(sol.energy()));
    r.insert("momentum".into(), json!(sol.momentum()));
    r.insert("solution".into(), json!(sol));
    if a.certify > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut summary = CertificateSummary {
            perturbations: a.certify,
            amplitude: a.amplitude,
            min_energy_excess: f64::INFINITY,
            max_integral_spread: 0.0,
            all_minimal: true,
            all_integrals_agree: true,
        };
        for _ in 0..a.certify {
            let cand = area_preserving_perturbation(&sol.curve, a.amplitude, &mut rng);
            let rep = onewell::calibration_certificate(&sol, &cand, &pot)?;
            summary.min_energy_excess = summary.min_energy_excess.min(rep.energy_candidate - sol.l_beta);
            summary.max_integral_spread = summary.max_integral_spread.max((rep.integral_candidate - rep.integral_solution).abs());
            summary.all_minimal &= rep.minimal;
            summary.all_integrals_agree &= rep.integrals_agree;
        }
        r.insert("certificate".into(), json!(summary));
    }
    write_curve(&sol.curve, a.out.as_deref())?;
    emit(a.report.as_deref(), &Value::Object(r))?;
    Ok(Done::ok())
}

fn parse_starts(names: &[String]) -> Result<Vec<StartKind>, CliError> {
    names
        .iter()
        .map(|s| {
            let kind: StartKind = serde_json::from_value(json!(s.trim()))
                .map_err(|_| CliError::Usage(format!("unknown start '{s}' (segment, bubble, one-well-composite)")))?;
            if kind == StartKind::Supplied {
                return Err(CliError::Usage("the supplied start comes from --init".into()));
            }
            Ok(kind)
        })
        .collect()
}

pub fn twowell(a: &TwowellArgs, seed: u64) -> Result<Done, CliError> {
    check_paths(
        &[a.potential.path(), a.init.as_deref()],
        &[a.out.as_deref(), a.report.as_deref(), a.sweep_out.as_deref()],
    )?;
    if a.sweep.is_some() != a.sweep_out.is_some() {
        return Err(CliError::Usage("--sweep and --sweep-out go together".into()));
    }
    let (_, pot) = a.potential.build()?;
    let mut opts = MinimizeOptions::default();
    if let Some(starts) = &a.starts {
        opts.starts = parse_starts(starts)?;
    }
    if let Some(t) = a.tolerance {
        opts.tolerance = t;
    }
    if let Some(k) = a.rounds {
        opts.rounds = k;
    }
    let init = match &a.init {
        Some(p) => Some(SampledCurve::read_csv_file(p, Param::UniformT)?),
        None => None,
    };
    let problem = TwoWellProblem::new(pot.clone(), a.area, a.nodes, opts.clone())?;
    let result = twowell::minimize(&problem, init.as_ref())?;
    let h = &problem.hypotheses;
    let eps0 = twowell::epsilon_threshold(h.c0_lbound, h.c1_upper, h.ball_radius).ok();

    let mut r = header("twowell", seed, a);
    r.insert("potential".into(), json!(PotentialConfig::describe(&pot)));
    r.insert("options".into(), json!(opts));
    r.insert("hypotheses".into(), json!(h));
    r.insert("epsilon_threshold".into(), json!(eps0));
    r.insert("result".into(), json!(result));

    if let (Some(sweep), Some(path)) = (&a.sweep, &a.sweep_out) {
        let runs: Vec<Result<twowell::MinimizerResult, CliError>> = sweep
            .values()
            .par_iter()
            .map(|&area| {
                let p = TwoWellProblem::new(pot.clone(), area, a.nodes, opts.clone())?;
                Ok(twowell::minimize(&p, None)?)
            })
            .collect();
        let mut rows = Vec::new();
        for (area, run) in sweep.values().into_iter().zip(runs) {
            let m = run?;
            rows.push(vec![
                num(area),
                num(m.energy),
                num(m.momentum),
                num(m.multiplier),
                num(m.energy_multiplier),
                num(m.kkt_residual),
                m.bubble_count.to_string(),
                m.converged.to_string(),
            ]);
        }
        write_rows(
            path,
            &["area", "energy", "momentum", "multiplier", "energy_multiplier", "kkt_residual", "bubble_count", "converged"],
            &rows,
        )?;
    }

    let failure = (!result.converged)
        .then(|| format!("minimizer did not converge: kkt residual {:.3e}", result.kkt_residual));
    r.insert("status".into(), json!(if failure.is_some() { "not-converged" } else { "ok" }));
    write_curve(&result.curve, a.out.as_deref())?;
    emit(a.report.as_deref(), &Value::Object(r))?;
    Ok(Done { failure })
}

pub fn wave(a: &WaveArgs, seed: u64) -> Result<Done, CliError> {
    check_paths(&[Some(a.curve.as_path()), a.potential.path()], &[a.out.as_deref(), a.report.as_deref()])?;
    let (_, pot) = a.potential.build()?;
    let curve = SampledCurve::read_csv_file(&a.curve, Param::UniformT)?;
    let profile = wave::to_profile(&curve, &pot)?;
    let energy = curve.energy(&pot);
    let spectra = (0..pot.wells().len())
        .map(|i| wave::speed_spectrum(&pot.well_data(i)?, profile.nu))
        .collect::<isoflow::Result<Vec<_>>>()?;
    let limits = wave::speed_limits(&pot)?;
    let conserved = wave::conserved_checks(&profile, profile.nu, &pot);
    let second = if a.eigen_grid > 0 {
        Some(wave::second_variation_spectrum(&profile, &pot, a.eigen_grid)?)
    } else {
        None
    };

    let mut r = header("wave", seed, a);
    r.insert("potential".into(), json!(PotentialConfig::describe(&pot)));
    r.insert("curve_energy".into(), json!(energy));
    r.insert("curve_momentum".into(), json!(curve.momentum()));
    r.insert("sqrt2_energy".into(), json!(2f64.sqrt() * energy));
    r.insert("profile".into(), json!(profile));
    r.insert("well_spectra".into(), json!(spectra));
    r.insert("speed_limits".into(), json!(limits));
    r.insert("conserved".into(), json!(conserved));
    r.insert("second_variation".into(), json!(second));
    if let Some(p) = &a.out {
        profile.write_csv_file(p)?;
    }
    emit(a.report.as_deref(), &Value::Object(r))?;
    Ok(Done::ok())
}

pub fn spectrum(a: &SpectrumArgs, seed: u64) -> Result<Done, CliError> {
    check_paths(&[], &[a.out.as_deref(), a.report.as_deref()])?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut previous = None;
    for nu in a.nu.values() {
        let s = wave::spectrum_for_rates(a.lambda1, a.lambda2, nu)?;
        let transition = previous.is_some_and(|p| p != s.regime);
        previous = Some(s.regime);
        let mut row = vec![num(nu), s.regime.as_str().to_string()];
        for m in &s.eigenvalues {
            row.push(num(m.re));
            row.push(num(m.im));
        }
        row.push(num(s.closed_form_residual));
        row.push(transition.to_string());
        rows.push(row);
        entries.push(s);
    }
    let (l1, l2) = (a.lambda1, a.lambda2);
    let mut r = header("spectrum", seed, a);
    r.insert("real_decay_limit".into(), json!(2.0 * (l1 - l2) * (l1 - l2)));
    r.insert("admissible_limit".into(), json!(2.0 * (l1 + l2) * (l1 + l2)));
    r.insert("rows".into(), json!(entries));
    if let Some(p) = &a.out {
        write_rows(
            p,
            &[
                "nu", "regime", "re_mu1", "im_mu1", "re_mu2", "im_mu2", "re_mu3", "im_mu3", "re_mu4", "im_mu4",
                "closed_form_residual", "transition",
            ],
            &rows,
        )?;
    }
    emit(a.report.as_deref(), &Value::Object(r))?;
    Ok(Done::ok())
}

pub fn series(a: &SeriesArgs, seed: u64) -> Result<Done, CliError> {
    check_paths(&[a.potential.path()], &[a.out.as_deref(), a.report.as_deref()])?;
    let (_, pot) = a.potential.build()?;
    let g = series::gbeta_for_well(&pot, a.well, a.beta, a.degree)?;
    let mut table = serde_json::Map::new();
    for term in &g.terms {
        let mut coeffs = serde_json::Map::new();
        for (k, c) in term.coeffs.iter().enumerate() {
            coeffs.insert(format!("{},{}", term.degree - k, k), json!(c));
        }
        table.insert(term.degree.to_string(), Value::Object(coeffs));
    }
    let residual = series::residual_report(&pot, &g, a.radius, a.ring);
    let mut r = header("series", seed, a);
    r.insert("potential".into(), json!(PotentialConfig::describe(&pot)));
    r.insert("lambda1".into(), json!(g.lambda1));
    r.insert("lambda2".into(), json!(g.lambda2));
    r.insert("residual".into(), json!(residual));
    if let Some(p) = &a.out {
        write_json(p, &Value::Object(table))?;
    }
    emit(a.report.as_deref(), &Value::Object(r))?;
    Ok(Done::ok())
}

pub fn nonexist(a: &NonexistArgs, seed: u64) -> Result<Done, CliError> {
    check_paths(&[], &[a.out.as_deref(), a.report.as_deref()])?;
    if a.jmax == 0 {
        return Err(CliError::Usage("--jmax must be at least 1".into()));
    }
    let runs = (1..=a.jmax)
        .into_par_iter()
        .map(|j| onewell::nonexistence_sequence(a.q, a.area, j).map(|(c, e)| (j, e, c.momentum())))
        .collect::<isoflow::Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|(j, e, m)| vec![j.to_string(), num(*e), num(onewell::nonexistence_closed_form(a.q, a.area, *j)), num(*m)])
        .collect();
    let decreasing = runs.windows(2).all(|w| w[1].1 < w[0].1);
    let mut r = header("nonexist", seed, a);
    r.insert("segment_energy".into(), json!(1.0 / (1.0 + a.q)));
    r.insert("last_energy".into(), json!(runs.last().map(|x| x.1)));
    r.insert("strictly_decreasing".into(), json!(decreasing));
    if let Some(p) = &a.out {
        write_rows(p, &["j", "energy", "closed_form", "momentum"], &rows)?;
    }
    emit(a.report.as_deref(), &Value::Object(r))?;
    Ok(Done::ok())
}

fn detect_kind(header: &csv::StringRecord) -> Option<&'static str> {
    let cols: Vec<&str> = header.iter().collect();
    match cols.as_slice() {
        ["param", "x", "y", ..] => Some("curve"),
        ["nu", "regime", ..] => Some("regimes"),
        ["y", "u1", "u2", ..] => Some("profile"),
        ["area", "energy", ..] => Some("sweep"),
        _ => None,
    }
}

fn column(header: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Usage(format!("artifact has no '{name}' column")))
}

fn cell(rec: &csv::StringRecord, i: usize) -> Result<f64, CliError> {
    let s = rec.get(i).unwrap_or("");
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse::<f64>().map_err(|e| CliError::Usage(format!("bad number '{s}': {e}")))
}

pub fn plotdata(a: &PlotdataArgs, _seed: u64) -> Result<Done, CliError> {
    let pot_path = a.potential.as_ref().and_then(|p| p.path());
    check_paths(&[Some(a.input.as_path()), pot_path], &[Some(a.out.as_path())])?;
    let mut rd = csv::Reader::from_path(&a.input).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.input.display())))?;
    let head = rd.headers().map_err(|e| CliError::Usage(format!("bad artifact header: {e}")))?.clone();
    let kind = match &a.kind {
        Some(k) => k.as_str(),
        None => detect_kind(&head).ok_or_else(|| CliError::Usage("cannot tell the artifact kind; pass --kind".into()))?,
    };
    let records = rd
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("bad artifact row: {e}")))?;
    let mut rows = Vec::new();
    let out_header: Vec<&str> = match kind {
        "curve" => {
            let (cp, cx, cy) = (column(&head, "param")?, column(&head, "x")?, column(&head, "y")?);
            let center = a.center.unwrap_or(Point(0.0, 0.0));
            // unwrapped polar angle, so spirals read as monotone traces
            let mut last: Option<f64> = None;
            for rec in &records {
                let (x, y) = (cell(rec, cx)?, cell(rec, cy)?);
                let (dx, dy) = (x - center.0, y - center.1);
                let raw = dy.atan2(dx);
                let theta = match last {
                    None => raw,
                    Some(prev) => {
                        let mut d = raw - prev;
                        d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                        prev + d
                    }
                };
                if dx != 0.0 || dy != 0.0 {
                    last = Some(theta);
                }
                rows.push(vec![num(cell(rec, cp)?), num(x), num(y), num(dx.hypot(dy)), num(theta)]);
            }
            vec!["param", "x", "y", "r", "theta"]
        }
        "regimes" => {
            let cn = column(&head, "nu")?;
            for rec in &records {
                for k in 1..=4 {
                    let re = cell(rec, column(&head, &format!("re_mu{k}"))?)?;
                    let im = cell(rec, column(&head, &format!("im_mu{k}"))?)?;
                    rows.push(vec![num(cell(rec, cn)?), k.to_string(), num(re), num(im)]);
                }
            }
            vec!["nu", "index", "re_mu", "im_mu"]
        }
        "profile" => {
            let src = a
                .potential
                .as_ref()
                .ok_or_else(|| CliError::Usage("profiles need --potential for the equipartition column".into()))?;
            let (_, pot) = src.build()?;
            let idx: Vec<usize> = ["y", "u1", "u2", "du1", "du2"].iter().map(|c| column(&head, c)).collect::<Result<_, _>>()?;
            for rec in &records {
                let v: Vec<f64> = idx.iter().map(|&i| cell(rec, i)).collect::<Result<_, _>>()?;
                let w = pot.value(Vec2::new(v[1], v[2]));
                let equip = 0.5 * (v[3] * v[3] + v[4] * v[4]) - w;
                rows.push(vec![num(v[0]), num(v[1]), num(v[2]), num(equip)]);
            }
            vec!["y", "u1", "u2", "equip_residual"]
        }
        "sweep" => {
            let (ca, cm, ce) = (column(&head, "area")?, column(&head, "multiplier")?, column(&head, "energy")?);
            for rec in &records {
                rows.push(vec![num(cell(rec, ca)?), num(cell(rec, cm)?), num(cell(rec, ce)?)]);
            }
            vec!["area", "nu", "energy"]
        }
        other => return Err(CliError::Usage(format!("unknown artifact kind '{other}' (curve, regimes, profile, sweep)"))),
    };
    write_rows(&a.out, &out_header, &rows)?;
    Ok(Done::ok())
}
