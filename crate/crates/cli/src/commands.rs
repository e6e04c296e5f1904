use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use memdecay_core::decay_bounds::{
    banded_inverse_certificate_with, wiener_inverse_certificate_with, InverseContext, Verification,
};
use memdecay_core::{
    class_report, diagonal_profile, generate, integral_wiener_norm, invert, neumann_inverse,
    piece_norms, read_comments, read_matrix_market, verify_banded, verify_wiener,
    write_matrix_file, write_matrix_market_with_comments, ComplexMatrix, Error, GeneratorSpec,
    NeumannOptions, NormMode, Topology,
};

use crate::args::{
    AnalyzeArgs, BoundArgs, GenerateArgs, InvertArgs, MatrixArgs, Method, VerifyArgs,
};
use crate::exit::{self, CliError};
use crate::report::{
    write_profile_csv, AnalysisReport, Certificates, MatrixMeta, Norms, ProfileEntry,
    VerificationReport,
};

type CliResult<T> = std::result::Result<T, CliError>;

const SEED_TAG: &str = "seed:";

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

struct Loaded {
    matrix: ComplexMatrix,
    seed: Option<u64>,
}

fn load_matrix(path: &Path) -> CliResult<Loaded> {
    let bytes = read_file(path)?;
    let matrix = read_matrix_market(BufReader::new(bytes.as_slice()))?;
    let seed = read_comments(bytes.as_slice())?
        .iter()
        .find_map(|c| c.strip_prefix(SEED_TAG).and_then(|s| s.trim().parse().ok()));
    Ok(Loaded { matrix, seed })
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

pub fn run_generate(args: &GenerateArgs) -> CliResult<u8> {
    let bytes = read_file(&args.spec)?;
    let spec: GeneratorSpec = serde_json::from_slice(&bytes).map_err(|source| CliError::Json {
        path: args.spec.display().to_string(),
        source,
    })?;
    let (a, topo) = generate(&spec)?;
    let comments = vec![
        format!("generated by memdecay {}", env!("CARGO_PKG_VERSION")),
        format!(
            "kind: {}",
            serde_json::to_string(&spec.kind).expect("kind serializes")
        ),
        format!("topology: {}", topo.kind),
        format!("{SEED_TAG} {}", spec.seed),
    ];
    let mut f = BufWriter::new(File::create(&args.out)?);
    write_matrix_market_with_comments(&mut f, &a, &comments)?;
    Ok(0)
}

struct Session {
    report: AnalysisReport,
    matrix: ComplexMatrix,
    topo: Topology,
    mode: NormMode,
    scale: usize,
}

fn analyze_matrix(args: &MatrixArgs, integral_step: Option<f64>) -> CliResult<Session> {
    let loaded = load_matrix(&args.matrix)?;
    let a = loaded.matrix;
    let m = a.require_square()?;
    let topo = Topology {
        kind: args.topology.into(),
        size: m,
    };
    let mode: NormMode = args.norm.into();
    let scales: Vec<usize> = args.scales.iter().map(|&s| s as usize).collect();
    for &s in &scales {
        topo.check_window(s)?;
    }
    let class = class_report(&a, &topo, mode, &scales, args.sobolev_m)?;
    let profile = diagonal_profile(&a, &topo)?;
    let (lo, hi) = topo.offset_range();
    let entries = (lo..=hi)
        .map(|k| ProfileEntry {
            k,
            d_k: profile.get(k),
            piece_norm: class.piece_norms.get(&k).copied().unwrap_or(0.0),
        })
        .collect();
    let integral_wiener = integral_step
        .map(|h| integral_wiener_norm(&a, &topo, mode, h))
        .transpose()?;
    let report = AnalysisReport {
        matrix_meta: MatrixMeta {
            path: args.matrix.display().to_string(),
            size: m,
            topology: topo.kind,
            bandwidth: profile.bandwidth(),
            seed: loaded.seed,
        },
        norms: Norms {
            operator: class.operator_norm,
            wiener_1_1: class.wiener_1_1,
            wiener_1_n: class.wiener_1_n,
            integral_wiener,
            beurling: class.beurling,
            sobolev: class.sobolev,
        },
        profile: entries,
        fit: class.fit,
        classification: class.classification,
        certificates: None,
        verification: None,
        warnings: Vec::new(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        wall_time_ms: 0,
    };
    Ok(Session {
        report,
        matrix: a,
        topo,
        mode,
        scale: scales.first().copied().unwrap_or(1),
    })
}

fn finish(mut report: AnalysisReport, started: Instant, out: Option<&Path>) -> CliResult<()> {
    report.wall_time_ms = started.elapsed().as_millis() as u64;
    write_json(&report, out)
}

pub fn run_analyze(args: &AnalyzeArgs) -> CliResult<u8> {
    let started = Instant::now();
    if !(args.quad_step > 0.0 && args.quad_step <= 0.5) {
        return Err(CliError::Usage(format!(
            "--quad-step must lie in (0, 0.5], got {}",
            args.quad_step
        )));
    }
    let s = analyze_matrix(&args.matrix, Some(args.quad_step))?;
    if let Some(csv) = &args.profile_csv {
        write_profile_csv(
            BufWriter::new(File::create(csv)?),
            &s.report.profile,
            |_| None,
            |_| None,
        )?;
    }
    finish(s.report, started, args.matrix.out.as_deref())?;
    Ok(0)
}

struct Certified {
    session: Session,
    ctx: InverseContext,
    exit_code: u8,
}

fn certify(args: &MatrixArgs) -> CliResult<Certified> {
    let mut session = analyze_matrix(args, None)?;
    let ctx = InverseContext::new(&session.matrix, &session.topo, session.mode)?;
    if ctx.inverse.ill_conditioned {
        session.report.warnings.push(format!(
            "ill-conditioned inverse: residual {:e}, condition number {:e}",
            ctx.inverse.residual,
            ctx.kappa()
        ));
    }
    let mut certs = Certificates::default();
    let mut exit_code = 0;
    match banded_inverse_certificate_with(&ctx, session.scale) {
        Ok(c) => certs.banded = Some(c),
        Err(e @ Error::EmptyDomain { .. }) => {
            exit_code = exit::EMPTY_DOMAIN;
            certs.banded_omitted = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    match wiener_inverse_certificate_with(&ctx, &session.matrix) {
        Ok(c) => certs.wiener = Some(c),
        Err(e @ Error::WindowTooWide { .. }) => certs.wiener_omitted = Some(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    session.report.certificates = Some(certs);
    Ok(Certified {
        session,
        ctx,
        exit_code,
    })
}

pub fn run_bound(args: &BoundArgs) -> CliResult<u8> {
    let started = Instant::now();
    let c = certify(&args.matrix)?;
    finish(c.session.report, started, args.matrix.out.as_deref())?;
    Ok(c.exit_code)
}

pub fn run_verify(args: &VerifyArgs) -> CliResult<u8> {
    let started = Instant::now();
    let Certified {
        mut session,
        ctx,
        exit_code,
    } = certify(&args.matrix)?;
    let certs = session.report.certificates.clone().unwrap_or_default();
    let b = ctx.b();
    let (topo, mode) = (session.topo, session.mode);

    let mut total = Verification::default();
    let banded = match &certs.banded {
        Some(cert) => {
            let (v, _) = verify_banded(cert, b, &topo, mode)?;
            total.merge(&v);
            Some(v)
        }
        None => None,
    };
    let (wiener, wiener_measured) = match &certs.wiener {
        Some(cert) => {
            let (v, m) = verify_wiener(cert, b, &topo, mode)?;
            total.merge(&v);
            (Some(v), Some(m))
        }
        None => (None, None),
    };
    let inverse_pieces = piece_norms(b, &topo, session.scale, mode)?;
    let unit_pieces = if session.scale == 1 {
        inverse_pieces.clone()
    } else {
        piece_norms(b, &topo, 1, mode)?
    };
    session.report.verification = Some(VerificationReport {
        checked: total.checked,
        max_relative_violation: total.max_relative_violation,
        passed: total.passed,
        banded,
        wiener,
        wiener_measured,
        inverse_piece_norms: inverse_pieces,
    });

    if let Some(csv) = &args.csv {
        let bound = |k: i64| {
            certs
                .banded
                .as_ref()
                .filter(|c| c.scale == 1)
                .and_then(|c| c.bound(k))
        };
        let measured = |k: i64| unit_pieces.get(&k).copied();
        write_profile_csv(
            BufWriter::new(File::create(csv)?),
            &session.report.profile,
            bound,
            measured,
        )?;
    }
    let passed = total.passed;
    finish(session.report, started, args.matrix.out.as_deref())?;
    Ok(if exit_code != 0 {
        exit_code
    } else if passed {
        0
    } else {
        exit::VERIFICATION_FAILED
    })
}

pub fn run_invert(args: &InvertArgs) -> CliResult<u8> {
    if !(args.tol > 0.0) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {}",
            args.tol
        )));
    }
    let a = load_matrix(&args.matrix)?.matrix;
    let m = a.require_square()?;
    let topo = Topology {
        kind: args.topology.into(),
        size: m,
    };
    match args.method {
        Method::Direct => {
            let inv = invert(&a)?;
            if inv.ill_conditioned {
                log::warn!("inverse is ill-conditioned (residual {:e})", inv.residual);
            }
            write_matrix_file(&args.out, &inv.matrix)?;
            if let Some(t) = &args.trace {
                write_json(
                    &serde_json::json!({ "method": "direct", "residual": inv.residual, "ill_conditioned": inv.ill_conditioned }),
                    Some(t),
                )?;
            }
            Ok(0)
        }
        Method::Neumann => {
            let opts = NeumannOptions {
                scale: args.scale,
                tol: args.tol,
                max_iter: args.max_iter,
                mode: args.norm.into(),
            };
            let r = neumann_inverse(&a, &topo, &opts)?;
            write_matrix_file(&args.out, &r.matrix)?;
            if let Some(t) = &args.trace {
                write_json(&r.trace, Some(t))?;
            }
            match r.ensure_converged() {
                Ok(_) => Ok(0),
                Err(e) => {
                    eprintln!("memdecay: {e}");
                    Ok(exit::core_code(&e))
                }
            }
        }
    }
}
