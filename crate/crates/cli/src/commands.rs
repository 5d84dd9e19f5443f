use std::path::Path;

use dirframe::em::{axial_angle, fit_watson_mixture_em, EmOptions};
use dirframe::frames::{
    fntf_defect_r2, frame_bounds, gradient_tighten, harmonic_angles, harmonic_fntf_r2, is_fntf, potential_report,
    FrameBounds, TightenOptions,
};
use dirframe::order::{local_order_field, rod_order};
use dirframe::uniformity::{run_test, uniform_sample, TestMethod, TestResult};
use dirframe::watson::{mode_widths, sample_mixture, sample_watson, WatsonMixture, WatsonParams};
use dirframe::{DiscreteMeasure, SampleSet, SymMatrix, UnitVector};
use serde_json::{json, Value};

use crate::args::{
    CheckArgs, FitArgs, FrameCommand, HarmonicArgs, InputArgs, Method, Model, OrderArgs, SampleFormat, SynthArgs,
    TestArgs, TightenArgs,
};
use crate::error::{usage, CliResult};
use crate::io::{field_csv, read_rods, read_sample, sample_csv, write_file};
use crate::report::RunReport;

/// What a command produced: the report, plus a CSV destined for stdout.
pub struct Output {
    pub report: RunReport,
    pub stdout_csv: Option<String>,
}

impl From<RunReport> for Output {
    fn from(report: RunReport) -> Self {
        Self {
            report,
            stdout_csv: None,
        }
    }
}

/// Converts angles at the output boundary.
#[derive(Clone, Copy)]
struct Units {
    degrees: bool,
}

impl Units {
    fn out(self, radians: f64) -> f64 {
        if self.degrees {
            radians.to_degrees()
        } else {
            radians
        }
    }

    fn input(self, value: f64) -> f64 {
        if self.degrees {
            value.to_radians()
        } else {
            value
        }
    }

    fn name(self) -> &'static str {
        if self.degrees {
            "degrees"
        } else {
            "radians"
        }
    }
}

fn path_value(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn matrix_value(m: &SymMatrix) -> Value {
    let rows: Vec<Vec<f64>> = (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m[(i, j)]).collect())
        .collect();
    json!(rows)
}

fn bounds_value(b: &FrameBounds) -> Value {
    json!({
        "lower": b.lower,
        "upper": b.upper,
        "is_frame": b.is_frame(),
        "is_tight": b.is_tight(),
    })
}

pub fn synth(a: &SynthArgs, degrees: bool) -> CliResult<Output> {
    let units = Units { degrees };
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let (sample, params) = match a.model {
        Model::Uniform => (uniform_sample(a.n, a.dim, a.seed, 0)?, json!({ "dim": a.dim })),
        Model::Watson => {
            let kappa = a.kappa.ok_or_else(|| usage("watson needs --kappa"))?;
            let director = match (&a.angle, &a.director) {
                (Some(t), None) => UnitVector::from_angle(units.input(*t)),
                (None, Some(c)) => UnitVector::new(c.clone())?,
                (None, None) if a.dim >= 2 => UnitVector::basis(a.dim, 0)?,
                _ => return Err(usage("give at most one of --angle and --director")),
            };
            let params = json!({ "kappa": kappa, "director": director.coords() });
            (
                sample_watson(&WatsonParams::new(director, kappa)?, a.n, a.seed)?,
                params,
            )
        }
        Model::Mixture => {
            let angles = a.angles.as_ref().ok_or_else(|| usage("mixture needs --angles"))?;
            let k = angles.len();
            let kappas = match (&a.kappas, a.kappa) {
                (Some(ks), None) if ks.len() == k => ks.clone(),
                (None, Some(kappa)) => vec![kappa; k],
                _ => return Err(usage("mixture needs --kappa or one --kappas entry per angle")),
            };
            let weights = match &a.weights {
                None => vec![1.0 / k as f64; k],
                Some(w) if w.len() == k && w.iter().all(|x| x.is_finite() && *x >= 0.0) => {
                    let total: f64 = w.iter().sum();
                    if total <= 0.0 {
                        return Err(usage("--weights must have a positive sum"));
                    }
                    w.iter().map(|x| x / total).collect()
                }
                _ => return Err(usage("--weights needs one nonnegative entry per angle")),
            };
            let directors = angles.iter().map(|&t| UnitVector::from_angle(units.input(t))).collect();
            let mix = WatsonMixture::new(directors, kappas.clone(), weights.clone())?;
            let params = json!({ "angles": angles, "kappas": kappas, "weights": weights });
            (sample_mixture(&mix, a.n, a.seed)?, params)
        }
        Model::FntfMixture => {
            let k = a.components.ok_or_else(|| usage("fntf-mixture needs --components"))?;
            let kappa = a.kappa.ok_or_else(|| usage("fntf-mixture needs --kappa"))?;
            let mix = WatsonMixture::equal_weights(harmonic_fntf_r2(k)?, kappa)?;
            (
                sample_mixture(&mix, a.n, a.seed)?,
                json!({ "components": k, "kappa": kappa }),
            )
        }
    };
    let theta = a.format == SampleFormat::Theta;
    if theta && sample.dim() != 2 {
        return Err(usage("--format theta needs planar data"));
    }
    let csv = sample_csv(&sample, theta, degrees);
    let model = match a.model {
        Model::Uniform => "uniform",
        Model::Watson => "watson",
        Model::Mixture => "mixture",
        Model::FntfMixture => "fntf-mixture",
    };
    let format = if theta { "theta" } else { "vectors" };
    let inputs = json!({
        "model": model,
        "n": a.n,
        "params": params,
        "format": format,
        "angle_unit": units.name(),
        "out": a.out.as_deref().map_or(Value::Null, path_value),
    });
    let results = json!({ "rows": sample.len(), "dim": sample.dim() });
    let report = RunReport::new("synth", inputs, results, Some(a.seed));
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            Ok(report.into())
        }
        None => Ok(Output {
            report,
            stdout_csv: Some(csv),
        }),
    }
}

fn test_value(r: &TestResult, level: f64) -> Value {
    json!({
        "method": r.method.name(),
        "statistic": r.statistic,
        "df": r.df,
        "p_value": r.p_value,
        "n": r.n,
        "reject": r.rejects(level),
    })
}

pub fn test(a: &TestArgs, degrees: bool) -> CliResult<Output> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(usage("--level must lie in (0, 1)"));
    }
    let table = read_sample(&a.input, degrees)?;
    let methods: Vec<TestMethod> = match a.method {
        Method::Rayleigh => vec![TestMethod::Rayleigh],
        Method::ModifiedRayleigh => vec![TestMethod::ModifiedRayleigh],
        Method::Bingham => vec![TestMethod::Bingham],
        Method::All => TestMethod::ALL.to_vec(),
    };
    let tests: Vec<Value> = methods
        .iter()
        .map(|&m| test_value(&run_test(m, &table.sample), a.level))
        .collect();
    let inputs = json!({
        "in": path_value(&a.input),
        "method": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "level": a.level,
    });
    let results = json!({ "n": table.sample.len(), "dim": table.sample.dim(), "tests": tests });
    Ok(RunReport::new("test", inputs, results, None).into())
}

pub fn frame(cmd: &FrameCommand, degrees: bool) -> CliResult<Output> {
    let units = Units { degrees };
    match cmd {
        FrameCommand::Bounds(InputArgs { input }) => {
            let s = read_sample(input, degrees)?.sample;
            let b = frame_bounds(s.points())?;
            let results = json!({ "n": s.len(), "dim": s.dim(), "bounds": bounds_value(&b) });
            Ok(RunReport::new("frame bounds", json!({ "in": path_value(input) }), results, None).into())
        }
        FrameCommand::Check(CheckArgs { input, tol }) => {
            let s = read_sample(input, degrees)?.sample;
            let b = frame_bounds(s.points())?;
            let results = json!({
                "n": s.len(),
                "dim": s.dim(),
                "is_fntf": is_fntf(s.points(), *tol)?,
                "tight_bound": s.len() as f64 / s.dim() as f64,
                "bounds": bounds_value(&b),
            });
            let inputs = json!({ "in": path_value(input), "tol": tol });
            Ok(RunReport::new("frame check", inputs, results, None).into())
        }
        FrameCommand::Harmonic(HarmonicArgs { n, out }) => {
            let angles = harmonic_angles(*n)?;
            let defect = fntf_defect_r2(&angles)?;
            let b = frame_bounds(&harmonic_fntf_r2(*n)?)?;
            if let Some(path) = out {
                let s = SampleSet::from_angles(&angles)?;
                write_file(path, &sample_csv(&s, true, degrees))?;
            }
            let results = json!({
                "angles": angles.iter().map(|&t| units.out(t)).collect::<Vec<_>>(),
                "defect": defect,
                "bounds": bounds_value(&b),
            });
            let inputs = json!({
                "n": n,
                "angle_unit": units.name(),
                "out": out.as_deref().map_or(Value::Null, path_value),
            });
            Ok(RunReport::new("frame harmonic", inputs, results, None).into())
        }
        FrameCommand::Tighten(t) => tighten(t, degrees),
        FrameCommand::Potential(InputArgs { input }) => {
            let s = read_sample(input, degrees)?.sample;
            let p = potential_report(&DiscreteMeasure::counting(&s));
            let results = json!({
                "n": s.len(),
                "dim": s.dim(),
                "frame_potential": p.frame_potential,
                "riesz_potential": p.riesz_potential,
                "fractional_potential": p.fractional,
                "moment_deviation": p.moment_deviation,
                "minimum": 1.0 / s.dim() as f64,
            });
            Ok(RunReport::new("frame potential", json!({ "in": path_value(input) }), results, None).into())
        }
    }
}

fn tighten(a: &TightenArgs, degrees: bool) -> CliResult<Output> {
    let table = read_sample(&a.input, degrees)?;
    let s = &table.sample;
    let mut opts = TightenOptions::for_count(s.len());
    opts.tol = a.tol;
    opts.max_steps = a.max_steps;
    opts.seed = a.seed;
    if let Some(step) = a.step_size {
        opts.step_size = step;
    }
    let outcome = gradient_tighten(s.points(), opts)?;
    let tightened = SampleSet::new(outcome.vectors.clone())?;
    if let Some(path) = &a.out {
        let theta = table.header == ["theta"];
        write_file(path, &sample_csv(&tightened, theta, degrees))?;
    }
    let final_potential = *outcome.trace.last().expect("trace holds the start value");
    let results = json!({
        "n": s.len(),
        "dim": s.dim(),
        "target": 1.0 / s.dim() as f64,
        "final_potential": final_potential,
        "trace": outcome.trace,
        "converged": outcome.converged,
        "steps": outcome.steps,
        "saddle_nudges": outcome.saddle_nudges,
        "bounds": bounds_value(&frame_bounds(&outcome.vectors)?),
    });
    let inputs = json!({
        "in": path_value(&a.input),
        "tol": a.tol,
        "max_steps": a.max_steps,
        "step_size": opts.step_size,
        "out": a.out.as_deref().map_or(Value::Null, path_value),
    });
    Ok(RunReport::new("frame tighten", inputs, results, Some(a.seed)).into())
}

pub fn order(a: &OrderArgs, degrees: bool) -> CliResult<Output> {
    let units = Units { degrees };
    let rods = read_rods(&a.input, degrees)?;
    let global = rod_order(&rods)?;
    let mut results = json!({
        "n": rods.len(),
        "order_parameter": global.order_parameter,
        "director_angle": global.director_angle().map(|t| units.out(t)),
        "q2": matrix_value(&global.q2),
        "field": null,
    });
    if a.field_out.is_some() && a.radius.is_none() {
        return Err(usage("--field-out needs --radius"));
    }
    if let Some(radius) = a.radius {
        let cell = a.cell_size.unwrap_or(radius);
        let field = local_order_field(&rods, radius, cell, a.min_count)?;
        if let Some(path) = &a.field_out {
            write_file(path, &field_csv(&field, degrees))?;
        }
        let cells: Vec<Value> = field
            .cells
            .iter()
            .map(|c| {
                json!({
                    "cx": c.center[0],
                    "cy": c.center[1],
                    "count": c.count,
                    "lambda": c.order_parameter,
                    "director_angle": c.director_angle.map(|t| units.out(t)),
                })
            })
            .collect();
        results["field"] = json!({ "nx": field.nx, "ny": field.ny, "cells": cells });
    }
    let inputs = json!({
        "in": path_value(&a.input),
        "radius": a.radius,
        "cell_size": a.radius.map(|r| a.cell_size.unwrap_or(r)),
        "min_count": a.min_count,
        "angle_unit": units.name(),
        "field_out": a.field_out.as_deref().map_or(Value::Null, path_value),
    });
    Ok(RunReport::new("order", inputs, results, None).into())
}

pub fn fit(a: &FitArgs, degrees: bool) -> CliResult<Output> {
    let units = Units { degrees };
    let s = read_sample(&a.input, degrees)?.sample;
    let opts = EmOptions {
        components: a.components,
        shared_kappa: a.shared_kappa,
        equal_weights: a.equal_weights,
        max_iters: a.max_iters,
        tol: a.tol,
        seed: a.seed,
    };
    let fit = fit_watson_mixture_em(&s, &opts)?;
    let mix = &fit.mixture;
    let widths: Vec<Option<f64>> = mode_widths(mix)?
        .iter()
        .map(|w| w.width.map(|x| units.out(x)))
        .collect();
    let results = json!({
        "n": s.len(),
        "directors": mix.directors().iter().map(|z| units.out(axial_angle(z))).collect::<Vec<_>>(),
        "kappas": mix.kappas(),
        "shared_kappa": mix.shared_kappa(),
        "weights": mix.weights(),
        "widths": widths,
        "log_likelihood": fit.log_likelihood,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "near_uniform": fit.near_uniform,
        "kappa_capped": fit.kappa_capped,
        "reinitialized_at": fit.reinitialized_at,
    });
    let inputs = json!({
        "in": path_value(&a.input),
        "components": a.components,
        "shared_kappa": a.shared_kappa,
        "equal_weights": a.equal_weights,
        "max_iters": a.max_iters,
        "tol": a.tol,
        "angle_unit": units.name(),
    });
    Ok(RunReport::new("fit", inputs, results, Some(a.seed)).into())
}
