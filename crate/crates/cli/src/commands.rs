use std::f64::consts::PI;
use std::path::Path;

use diracep::ep_analysis::{
    default_radii, default_rays, degenerate_energy, fit_cone_at, sheets_at,
};
use diracep::models::{BlockStackSpec, StackKind};
use diracep::sweep::{hybrid_sweep, Grid2, GridAxis};
use diracep::{
    classify_degeneracy, puiseux_diagnostic, verify_isospectral, AnalysisConfig,
    BandPairSelector, Complex64, DegeneracyLabel, HamiltonianFamily, Model, ParamPoint,
    TwoBandVariant,
};
use serde_json::{Map, Value};

use crate::args::{
    AxisArgs, BandPairArg, BandsArgs, ClassifyArgs, Cli, ConeArgs, Format, IsospectralArgs,
    ModelId, ModelParamsArgs, PuiseuxArgs, RadiiArgs, RangeSpec,
};
use crate::error::{CliError, EXIT_UNRESOLVED};
use crate::output::{emit, fmt_f64, render_csv, render_json, to_json_value, write_atomic};

pub fn build_model(id: ModelId, p: &ModelParamsArgs) -> Result<Model, CliError> {
    let v0 = p.v0;
    let stack = |kind| -> Result<Model, CliError> {
        Ok(Model::Stack {
            v0,
            spec: BlockStackSpec::new(p.shifts.clone(), kind)?,
        })
    };
    Ok(match id {
        ModelId::H3 => Model::H3 { v0 },
        ModelId::HaPrime => Model::HaPrime { v0 },
        ModelId::HbPrime => Model::HbPrime { v0 },
        ModelId::HaDoublePrime => Model::HaDoublePrime { v0 },
        ModelId::ImagCone => Model::ImagCone,
        ModelId::Bloch => Model::Bloch {
            v0,
            trunc_m: p.trunc,
        },
        ModelId::StackA => stack(StackKind::A)?,
        ModelId::StackB => stack(StackKind::B)?,
        ModelId::TwoBandFirst => Model::TwoBand {
            variant: TwoBandVariant::FirstOrder,
        },
        ModelId::TwoBandSecond => Model::TwoBand {
            variant: TwoBandVariant::SecondOrder,
        },
        ModelId::TwoBandHermitian => Model::TwoBand {
            variant: TwoBandVariant::Hermitian,
        },
    })
}

/// Option stem used for an axis name on the command line.
fn axis_flag(name: &str) -> &'static str {
    match name {
        "tau" => "tau",
        "k" => "k",
        "g" => "g",
        "delta_3" => "delta3",
        _ => "delta",
    }
}

fn axis_values(axes: &AxisArgs, flag: &str) -> (Option<f64>, Option<RangeSpec>) {
    match flag {
        "tau" => (axes.tau, axes.tau_range),
        "k" => (axes.k, axes.k_range),
        "g" => (axes.g, axes.g_range),
        "delta3" => (axes.delta3, axes.delta3_range),
        _ => (axes.delta, axes.delta_range),
    }
}

/// Resolves the grid for `names`; unset axes fall back to `default`.
fn resolve_grid(
    axes: &AxisArgs,
    names: [&str; 2],
    default: impl Fn(&str) -> Option<GridAxis>,
) -> Result<Grid2, CliError> {
    let flags = [axis_flag(names[0]), axis_flag(names[1])];
    for other in ["tau", "k", "g", "delta", "delta3"] {
        let (v, r) = axis_values(axes, other);
        if !flags.contains(&other) && (v.is_some() || r.is_some()) {
            return Err(CliError::Config(format!(
                "--{other} does not apply to a model with axes {} and {}",
                names[0], names[1]
            )));
        }
    }
    let mut out = Vec::with_capacity(2);
    for (name, flag) in names.iter().zip(flags) {
        let axis = match axis_values(axes, flag) {
            (_, Some(r)) => GridAxis::new(r.min, r.max, r.count)?,
            (Some(v), None) => {
                if !v.is_finite() {
                    return Err(CliError::Config(format!("--{flag} must be finite")));
                }
                GridAxis::fixed(v)
            }
            (None, None) => default(name).ok_or_else(|| {
                CliError::Config(format!("axis {name} needs --{flag} or --{flag}-range"))
            })?,
        };
        out.push(axis);
    }
    Ok(Grid2::new(out[0], out[1]))
}

/// Parses `name=value,name=value` against the model's axis names.
pub fn parse_point(s: &str, names: [&str; 2]) -> Result<ParamPoint, CliError> {
    let mut point = [None, None];
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("point entry {part:?} is not name=value")))?;
        let key = key.trim();
        let slot = names
            .iter()
            .position(|n| *n == key || axis_flag(n) == key)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown point key {key:?}; expected {} and {}",
                    names[0], names[1]
                ))
            })?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("bad value for {key}: {e}")))?;
        if !v.is_finite() || point[slot].replace(v).is_some() {
            return Err(CliError::Config(format!("bad or repeated value for {key}")));
        }
    }
    match point {
        [Some(a), Some(b)] => Ok([a, b]),
        _ => Err(CliError::Config(format!(
            "point needs both {} and {}",
            names[0], names[1]
        ))),
    }
}

fn selector(b: BandPairArg) -> BandPairSelector {
    match b {
        BandPairArg::Lowest => BandPairSelector::Lowest,
        BandPairArg::Index(i) => BandPairSelector::Index(i),
        BandPairArg::Nearest(re, im) => BandPairSelector::Nearest(Complex64::new(re, im)),
    }
}

fn radii(r: &RadiiArgs) -> Result<Vec<f64>, CliError> {
    if !(r.rmin > 0.0 && r.rmin < r.rmax && r.rmax.is_finite()) {
        return Err(CliError::Config(format!(
            "need 0 < rmin < rmax, got {} and {}",
            r.rmin, r.rmax
        )));
    }
    Ok(default_radii(r.rmin, r.rmax, r.radii_count))
}

fn analysis_config(cli: &Cli, band_pair: BandPairArg) -> AnalysisConfig {
    AnalysisConfig {
        degeneracy_tol: cli.global.tol_degeneracy,
        rank_tol: cli.global.tol_rank,
        band_pair: selector(band_pair),
        ..AnalysisConfig::default()
    }
}

/// Config echo: every option that affects the data, plus the seedless marker.
fn config_echo(cli: &Cli) -> Result<Value, CliError> {
    let mut m = Map::new();
    m.insert("command".into(), to_json_value(&cli.command)?);
    m.insert("global".into(), to_json_value(&cli.global)?);
    m.insert("seedless".into(), Value::Bool(true));
    m.insert(
        "tool".into(),
        Value::String(format!("diracep {}", env!("CARGO_PKG_VERSION"))),
    );
    Ok(Value::Object(m))
}

fn json_doc(cli: &Cli, key: &str, body: Value) -> Result<Vec<u8>, CliError> {
    let mut m = Map::new();
    m.insert("config".into(), config_echo(cli)?);
    m.insert(key.into(), body);
    render_json(&Value::Object(m))
}

fn json_only(cli: &Cli, what: &str) -> Result<(), CliError> {
    if cli.global.format == Format::Csv {
        return Err(CliError::Config(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn out_path(cli: &Cli) -> Option<&Path> {
    cli.global.out.as_deref()
}

pub fn cmd_bands(cli: &Cli, args: &BandsArgs) -> Result<i32, CliError> {
    let family = build_model(args.model.model, &args.model.params)?;
    let names = family.axis_names();
    let grid = resolve_grid(&args.axes, names, |name| match name {
        "tau" => Some(GridAxis::fixed(1.0)),
        _ => Some(GridAxis::fixed(0.0)),
    })?;
    let swept: Vec<usize> = [grid.axis0, grid.axis1]
        .iter()
        .enumerate()
        .filter(|(_, a)| a.count >= 2)
        .map(|(i, _)| i)
        .collect();
    if swept.is_empty() {
        return Err(CliError::Config("bands needs at least one swept axis".into()));
    }
    let sweep = hybrid_sweep(&family, &grid)?;
    let bytes = match cli.global.format {
        Format::Json => json_doc(cli, "bands", to_json_value(&sweep)?)?,
        Format::Csv => {
            let v = [grid.axis0.values(), grid.axis1.values()];
            let cols = grid.axis1.count;
            let mut header = vec!["param1"];
            if swept.len() == 2 {
                header.push("param2");
            }
            header.extend(["band", "re_omega", "im_omega"]);
            let mut rows = Vec::with_capacity(sweep.point_count() * sweep.band_count());
            for idx in 0..sweep.point_count() {
                let p = [v[0][idx / cols], v[1][idx % cols]];
                for (b, band) in sweep.bands.iter().enumerate() {
                    let mut row: Vec<String> = swept.iter().map(|&a| fmt_f64(p[a])).collect();
                    row.push(b.to_string());
                    row.push(fmt_f64(band[idx].re));
                    row.push(fmt_f64(band[idx].im));
                    rows.push(row);
                }
            }
            render_csv(&header, &rows)?
        }
    };
    emit(out_path(cli), &bytes)?;
    if cli.global.gnuplot_stub {
        if let (Format::Csv, Some(out)) = (cli.global.format, out_path(cli)) {
            write_atomic(&out.with_extension("gp"), gnuplot_stub(out, swept.len()).as_bytes())?;
        }
    }
    Ok(0)
}

fn gnuplot_stub(csv: &Path, dims: usize) -> String {
    let name = csv.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let plot = if dims == 2 {
        format!("splot '{name}' using 1:2:4 with points pt 7 ps 0.3 title 'Re omega'")
    } else {
        format!("plot '{name}' using 1:3 with points pt 7 ps 0.3 title 'Re omega'")
    };
    format!("set datafile separator ','\nset key autotitle columnhead\n{plot}\n")
}

pub fn cmd_classify(cli: &Cli, args: &ClassifyArgs) -> Result<i32, CliError> {
    json_only(cli, "classify")?;
    let family = build_model(args.model.model, &args.model.params)?;
    let point = parse_point(&args.point.point, family.axis_names())?;
    let radii = radii(&args.radii)?;
    let config = AnalysisConfig {
        probe_radius: args.probe_radius,
        ray_count: args.radii.rays,
        max_radius: args.radii.rmax,
        radii,
        ..analysis_config(cli, args.point.band_pair)
    };
    let report = classify_degeneracy(&family, point, &config)?;
    emit(out_path(cli), &json_doc(cli, "report", to_json_value(&report)?)?)?;
    Ok(if report.label == DegeneracyLabel::Unresolved {
        EXIT_UNRESOLVED
    } else {
        0
    })
}

pub fn cmd_cone(cli: &Cli, args: &ConeArgs) -> Result<i32, CliError> {
    let family = build_model(args.model.model, &args.model.params)?;
    let point = parse_point(&args.point.point, family.axis_names())?;
    let radii = radii(&args.radii)?;
    let rays: Vec<[f64; 2]> = if args.direction.is_empty() {
        default_rays(args.radii.rays)
    } else {
        args.direction.iter().map(|d| d.0).collect()
    };
    let (omega0, _) = degenerate_energy(
        &family,
        point,
        selector(args.point.band_pair),
        cli.global.tol_degeneracy,
    )?;
    let fit = fit_cone_at(&family, point, omega0, &rays, &radii)?;
    let bytes = match cli.global.format {
        Format::Json => json_doc(cli, "cone", to_json_value(&fit)?)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, ray) in fit.rays.iter().enumerate() {
                for (r, pair) in fit.radii.iter().zip(&ray.sheets) {
                    for (s, w) in pair.iter().enumerate() {
                        rows.push(vec![
                            i.to_string(),
                            fmt_f64(*r),
                            fmt_f64(point[0] + r * ray.direction[0]),
                            fmt_f64(point[1] + r * ray.direction[1]),
                            ["upper", "lower"][s].to_string(),
                            fmt_f64(w.re),
                            fmt_f64(w.im),
                        ]);
                    }
                }
            }
            render_csv(
                &["ray", "radius", "param1", "param2", "sheet", "re_omega", "im_omega"],
                &rows,
            )?
        }
    };
    emit(out_path(cli), &bytes)?;
    if let Some(path) = &args.sections {
        let rows = cross_sections(&family, point, omega0, args)?;
        let bytes = render_csv(&["plane", "angle", "param1", "param2", "re_omega"], &rows)?;
        write_atomic(path, &bytes)?;
    }
    Ok(0)
}

/// Curves where the upper (lower) sheet meets the plane
/// `w = w0 - s (p1 - p1_0) + d` (`- d`), found by bisection along rays.
fn cross_sections<F: HamiltonianFamily>(
    family: &F,
    point: ParamPoint,
    omega0: Complex64,
    args: &ConeArgs,
) -> Result<Vec<Vec<String>>, CliError> {
    let (s, d) = (args.plane_slope, args.plane_offset);
    if !(d > 0.0 && d.is_finite() && s.is_finite()) || args.section_angles == 0 {
        return Err(CliError::Config(
            "cross-sections need a finite slope, positive offset and angles".into(),
        ));
    }
    let mut rows = Vec::new();
    for (plane, sign, sheet) in [("upper", 1.0, 0usize), ("lower", -1.0, 1usize)] {
        for i in 0..args.section_angles {
            let th = 2.0 * PI * i as f64 / args.section_angles as f64;
            let u = [th.cos(), th.sin()];
            let at = |r: f64| [point[0] + r * u[0], point[1] + r * u[1]];
            let f = |r: f64| -> Result<f64, CliError> {
                let w = sheets_at(family, at(r), omega0)?[sheet].re;
                Ok(sign * (w - (omega0.re - s * r * u[0] + sign * d)))
            };
            // f(0) = -d; grow the bracket until the sheet crosses the plane
            let (mut lo, mut hi) = (0.0, d / 64.0);
            while f(hi)? < 0.0 {
                lo = hi;
                hi *= 2.0;
                if hi > 1.0 {
                    break;
                }
            }
            if hi > 1.0 {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            let p = at(r);
            rows.push(vec![
                plane.to_string(),
                fmt_f64(th),
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(omega0.re - s * r * u[0] + sign * d),
            ]);
        }
    }
    Ok(rows)
}

pub fn cmd_isospectral(cli: &Cli, args: &IsospectralArgs) -> Result<i32, CliError> {
    json_only(cli, "isospectral")?;
    let a = build_model(args.model_a, &args.params)?;
    let b = build_model(args.model_b, &args.params)?;
    let grid = resolve_grid(&args.axes, a.axis_names(), |name| match name {
        "tau" => GridAxis::new(0.0, 2.0, 101).ok(),
        "k" => GridAxis::new(-0.5, 0.5, 101).ok(),
        _ => None,
    })?;
    let config = analysis_config(cli, BandPairArg::Lowest);
    let report = verify_isospectral(&a, &b, &grid, args.tol, &config)?;
    emit(out_path(cli), &json_doc(cli, "report", to_json_value(&report)?)?)?;
    Ok(0)
}

pub fn cmd_puiseux(cli: &Cli, args: &PuiseuxArgs) -> Result<i32, CliError> {
    json_only(cli, "puiseux")?;
    let family = build_model(args.model.model, &args.model.params)?;
    let point = parse_point(&args.point.point, family.axis_names())?;
    let fit = puiseux_diagnostic(&family, point, selector(args.point.band_pair), args.direction.0)?;
    emit(out_path(cli), &json_doc(cli, "diagnostic", to_json_value(&fit)?)?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_use_axis_names() {
        assert_eq!(parse_point("tau=1,k=-0.5", ["tau", "k"]).unwrap(), [1.0, -0.5]);
        assert_eq!(parse_point("k=0, tau=2", ["tau", "k"]).unwrap(), [2.0, 0.0]);
        assert_eq!(
            parse_point("delta=0.1,delta3=0", ["delta_minus", "delta_3"]).unwrap(),
            [0.1, 0.0]
        );
        assert!(parse_point("tau=1", ["tau", "k"]).is_err());
        assert!(parse_point("tau=1,q=0", ["tau", "k"]).is_err());
        assert!(parse_point("tau=1,tau=2", ["tau", "k"]).is_err());
    }
}
