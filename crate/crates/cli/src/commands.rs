use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use vemstab::experiments::{
    inspect_element, projector_report, run_hourglass, run_mms, tau_table, write_csv, write_outputs,
    HourglassConfig, MmsConfig, OutputFormats, RunReport, TauShape,
};
use vemstab::{
    DiffusionTensor, Execution, P0Choice, Point, Polygon, Quad, SolveOptions, TauPolicy,
};

use crate::error::CliError;
use crate::options::{
    ElementOpts, Format, HourglassOpts, KappaArg, MmsOpts, ProjectOpts, Style, TauOpts, Vertices,
};

pub fn read_vertices(
    inline: Option<Vertices>,
    file: Option<&Path>,
) -> Result<Vec<[f64; 2]>, CliError> {
    match (inline, file) {
        (Some(v), _) => Ok(v.0),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::from(vemstab::Error::from(e)).context(path.display().to_string())
            })?;
            if text.trim_start().starts_with('[') {
                return serde_json::from_str(&text)
                    .map_err(|e| CliError::parse(format!("{}: {e}", path.display())));
            }
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    let nums: Vec<f64> = l
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse()
                                .map_err(|_| CliError::parse(format!("bad coordinate `{s}`")))
                        })
                        .collect::<Result<_, _>>()?;
                    match nums[..] {
                        [x, y] => Ok([x, y]),
                        _ => Err(CliError::parse(format!(
                            "expected two coordinates per line, got `{l}`"
                        ))),
                    }
                })
                .collect()
        }
        (None, None) => Err(CliError::usage("give --vertices or --vertices-file")),
    }
}

fn policies_or_default(tau: Option<Vec<crate::options::PolicyArg>>) -> Vec<TauPolicy> {
    match tau {
        Some(list) => list.into_iter().map(|p| p.0).collect(),
        None => vec![
            TauPolicy::VemTrace,
            TauPolicy::FemQuadrature { order: 2 },
            TauPolicy::RectangleClosed,
            TauPolicy::ParallelogramClosed,
        ],
    }
}

pub fn element(opts: ElementOpts, out: &mut dyn Write) -> Result<(), CliError> {
    let coords = read_vertices(opts.vertices, opts.vertices_file.as_deref())?;
    let pts: Vec<Point> = coords.iter().map(|c| Point::new(c[0], c[1])).collect();
    let quad = Quad::from_polygon(Polygon::new(pts)?)?;
    let kappa = opts
        .kappa
        .map(|k| k.0)
        .unwrap_or_else(DiffusionTensor::identity);
    let report = inspect_element(&quad, &kappa, &policies_or_default(opts.tau))?;
    match opts.style.unwrap_or(Style::Text) {
        Style::Text => write!(out, "{report}")?,
        Style::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).map_err(vemstab::Error::from)?
        )?,
    }
    Ok(())
}

pub fn project(opts: ProjectOpts, out: &mut dyn Write) -> Result<(), CliError> {
    let coords = read_vertices(opts.vertices, opts.vertices_file.as_deref())?;
    let poly = Polygon::new(coords.iter().map(|c| Point::new(c[0], c[1])).collect())?;
    let choice = opts.p0.map(|p| p.0).unwrap_or(P0Choice::VertexMean);
    let report = projector_report(&poly, choice)?;
    match opts.style.unwrap_or(Style::Text) {
        Style::Text => {
            if poly.was_reoriented() {
                writeln!(out, "note: clockwise input was reversed")?;
            }
            write!(out, "{report}")?
        }
        Style::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).map_err(vemstab::Error::from)?
        )?,
    }
    Ok(())
}

fn parse_rect(s: &str) -> Result<TauShape, CliError> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::usage(format!("rectangle `{s}` must look like `2x0.5`")))?;
    let num = |t: &str| {
        vemstab::vem::parse_number(t).ok_or_else(|| CliError::usage(format!("bad length `{t}`")))
    };
    Ok(TauShape::Rectangle {
        a: num(a)?,
        b: num(b)?,
    })
}

fn parse_para(s: &str) -> Result<TauShape, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| {
            vemstab::vem::parse_number(t).ok_or_else(|| CliError::usage(format!("bad value `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, deg] => Ok(TauShape::Parallelogram {
            a,
            b,
            theta: deg.to_radians(),
        }),
        _ => Err(CliError::usage(format!(
            "parallelogram `{s}` must look like `a,b,degrees`"
        ))),
    }
}

pub fn tau(opts: TauOpts, out: &mut dyn Write) -> Result<(), CliError> {
    let explicit = opts.rect.is_some() || opts.para.is_some();
    let mut shapes = Vec::new();
    for r in opts.rect.unwrap_or_default() {
        shapes.push(parse_rect(&r)?);
    }
    for p in opts.para.unwrap_or_default() {
        shapes.push(parse_para(&p)?);
    }
    if !explicit {
        shapes = vec![
            TauShape::Rectangle { a: 1.0, b: 1.0 },
            TauShape::Rectangle { a: 2.0, b: 1.0 },
            TauShape::Rectangle { a: 1.0, b: 4.0 },
            TauShape::Parallelogram {
                a: 1.0,
                b: 1.0,
                theta: PI / 3.0,
            },
            TauShape::Parallelogram {
                a: 2.0,
                b: 1.0,
                theta: PI / 4.0,
            },
            TauShape::Parallelogram {
                a: 1.0,
                b: 1.5,
                theta: 2.0 * PI / 3.0,
            },
        ];
    }
    let kappas: Vec<DiffusionTensor> = match opts.kappa {
        Some(list) => list.into_iter().map(|k: KappaArg| k.0).collect(),
        None => vec![
            DiffusionTensor::identity(),
            DiffusionTensor::new(10.0, 0.0, 2.0)?,
            DiffusionTensor::new(3.0, 1.0, 2.0)?,
        ],
    };
    let rows = tau_table(&shapes, &kappas)?;
    let write = |w: &mut dyn Write| -> Result<(), CliError> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &rows {
            wr.serialize(r).map_err(vemstab::Error::from)?;
        }
        wr.flush()?;
        Ok(())
    };
    match opts.out {
        Some(path) => {
            let mut f = fs::File::create(&path).map_err(|e| {
                CliError::from(vemstab::Error::from(e)).context(path.display().to_string())
            })?;
            write(&mut f)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => write(out)?,
    }
    Ok(())
}

fn formats(list: Option<Vec<Format>>) -> OutputFormats {
    match list {
        Some(list) => OutputFormats {
            csv: list.contains(&Format::Csv),
            vtk: list.contains(&Format::Vtk),
        },
        None => OutputFormats::default(),
    }
}

fn emit(
    report: &RunReport,
    dir: Option<&Path>,
    stem: &str,
    fmt: OutputFormats,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut table = Vec::new();
    write_csv(&report.rows, &mut table)?;
    out.write_all(&table)?;
    if let Some(dir) = dir {
        let written = write_outputs(report, dir, stem, fmt)?;
        eprintln!("wrote {} files to {}", written.len(), dir.display());
    }
    Ok(())
}

fn solve_options(tol: Option<f64>) -> Result<SolveOptions, CliError> {
    let mut opts = SolveOptions::default();
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::usage(format!("tolerance {t} must lie in (0, 1)")));
        }
        opts.tol = t;
    }
    Ok(opts)
}

pub fn hourglass(
    opts: HourglassOpts,
    exec: Execution,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let d = HourglassConfig::default();
    let config = HourglassConfig {
        sizes: opts.sizes.unwrap_or(d.sizes),
        taus: opts
            .taus
            .map(|t| t.into_iter().map(|n| n.0).collect())
            .unwrap_or(d.taus),
        amplitude: opts.amplitude.map_or(d.amplitude, |n| n.0),
        margin: opts.margin.map_or(d.margin, |n| n.0),
        reference_size: opts.reference_size.unwrap_or(d.reference_size),
        include_fem: !opts.no_fem.unwrap_or(false),
        solve: solve_options(opts.tol)?,
    };
    let report = run_hourglass(&config, exec)?;
    emit(
        &report,
        opts.out.as_deref(),
        "hourglass",
        formats(opts.format),
        out,
    )
}

pub fn mms(opts: MmsOpts, exec: Execution, out: &mut dyn Write) -> Result<(), CliError> {
    let d = MmsConfig::default();
    let config = MmsConfig {
        sizes: opts.sizes.unwrap_or(d.sizes),
        perturb: opts.perturb.map_or(d.perturb, |n| n.0),
        seed: opts.seed.unwrap_or(d.seed),
        schemes: opts
            .schemes
            .map(|s| s.into_iter().map(|s| s.0).collect())
            .unwrap_or(d.schemes),
        solve: solve_options(opts.tol)?,
    };
    let report = run_mms(&config, exec)?;
    emit(
        &report,
        opts.out.as_deref(),
        "mms",
        formats(opts.format),
        out,
    )
}
