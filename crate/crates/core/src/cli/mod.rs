//! Command-line front end: `certify`, `solve`, `gallery` and `export`.

pub mod document;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use document::{load_instance, DocumentError, InstanceDocument};
pub use report::ReportDocument;

use crate::certify::{certify_instance, CertificateReport, CertifyError, Check, CheckStatus};
use crate::gallery::{self, GalleryEntry};
use crate::model::{Element, ProblemInstance};
use crate::solve::{
    descent_check, orbit_confinement_check, order_limit_check, picard_solve, uniqueness_cross_check,
};
use report::{CertificateSection, GallerySection, InstanceEcho, Point, SolveSection};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// A gallery run matches its expected fixed point within this many
/// multiples of `tol`: the stopping rule bounds the step, not the
/// distance to the limit.
pub const EXPECTED_MATCH_FACTOR: f64 = 10.0;

#[derive(Debug, Parser)]
#[command(
    name = "pmfix",
    version,
    about = "Fixed points of weak contractions on ordered partial metric spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Override the instance seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the number of sampled points.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Override the convergence tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Override the iteration budget
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Leave the iteration trace out of the report.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every hypothesis of the existence theorem on an instance file.
    Certify { file: PathBuf },
    /// Certify, then iterate from x0 and from any extra starts.
    Solve {
        file: PathBuf,
        /// Extra start point (an index for finite carriers); repeatable.
        #[arg(long = "start", allow_negative_numbers = true)]
        starts: Vec<f64>,
    },
    /// `list` the built-in instances, or run one by name.
    Gallery { name: String },
    /// Write a built-in instance as an instance file.
    Export { name: String, file: PathBuf },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, instance: &mut ProblemInstance) {
        if let Some(seed) = self.seed {
            instance.seed = seed;
        }
        if let Some(samples) = self.samples {
            instance.sample_count = samples;
        }
        if let Some(tol) = self.tol {
            instance.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            instance.max_iter = max_iter;
        }
    }
}

fn show(e: &Element) -> String {
    match e {
        Element::Index(i) => format!("#{i}"),
        Element::Scalar(v) => report::format_num(*v),
    }
}

fn certificate_verdict(cert: &CertificateReport) -> String {
    let failed: Vec<&str> = cert
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        "all hypotheses hold on the checked cases".to_string()
    } else if cert.hypotheses_hold() {
        format!(
            "hypotheses hold; uniqueness not guaranteed ({} failed)",
            failed.join(", ")
        )
    } else {
        format!("violations in {}", failed.join(", "))
    }
}

/// Runs every certifier. Exit 1 when a hypothesis of the existence
/// theorem fails; a failed comparability check alone does not count.
pub fn run_certify(instance: &ProblemInstance) -> Result<(ReportDocument, i32), CertifyError> {
    let cert = certify_instance(instance)?;
    let code = if cert.hypotheses_hold() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    let verdict = format!(
        "{}: {}",
        if code == EXIT_OK { "PASS" } else { "FAIL" },
        certificate_verdict(&cert)
    );
    let doc = ReportDocument {
        command: "certify",
        instance: InstanceEcho::new(instance),
        certificate: CertificateSection::from(&cert),
        solve: None,
        gallery: None,
        verdict,
    };
    Ok((doc, code))
}

/// Certifies, then solves from `x0` and cross-checks `starts`. Refuses to
/// iterate only when `x0 <= f(x0)` fails.
pub fn run_solve(
    instance: &ProblemInstance,
    starts: &[Element],
    quiet: bool,
) -> Result<(ReportDocument, i32), CertifyError> {
    let cert = certify_instance(instance)?;
    let mut doc = ReportDocument {
        command: "solve",
        instance: InstanceEcho::new(instance),
        certificate: CertificateSection::from(&cert),
        solve: None,
        gallery: None,
        verdict: String::new(),
    };
    let x0_ok = cert
        .check(Check::InitialBelowImage.name())
        .is_none_or(|c| c.status != CheckStatus::Fail);
    if !x0_ok {
        doc.verdict = format!(
            "FAIL: x0 = {} is not below its image; not iterating",
            show(&instance.x0)
        );
        return Ok((doc, EXIT_VIOLATION));
    }

    let res = picard_solve(instance)?;
    let psi = instance.effective_psi()?;
    let mut diagnostics = vec![descent_check(
        &instance.space,
        &res.trace,
        &psi,
        instance.eps_ax,
    )];
    diagnostics.push(orbit_confinement_check(
        &instance.space,
        &res.trace,
        &psi,
        instance.confinement_eps,
        instance.eps_ax,
    )?);
    if let Some(u) = res.fixed_point {
        diagnostics.extend(order_limit_check(
            &instance.space,
            &res.trace,
            &instance.order,
            &u,
            instance.eps_ax,
        ));
    }
    let uniqueness = if starts.is_empty() {
        None
    } else {
        let mut all = vec![instance.x0];
        all.extend_from_slice(starts);
        Some(uniqueness_cross_check(instance, &all)?)
    };

    let unique_failed = uniqueness
        .as_ref()
        .is_some_and(|u| u.check.status == CheckStatus::Fail);
    let (code, verdict) = match (res.fixed_point, res.trace.status) {
        (Some(u), _) if unique_failed => (
            EXIT_VIOLATION,
            format!("FAIL: fixed point {} found but starts disagree", show(&u)),
        ),
        (Some(u), _) => (
            EXIT_OK,
            format!(
                "PASS: fixed point u = {} after {} iterations, p(u,fu) = {}, p(u,u) = {}",
                show(&u),
                res.trace.iterations_used,
                report::format_num(res.residual),
                report::format_num(res.self_distance_at_u)
            ),
        ),
        (None, status) => (
            EXIT_NONCONVERGENCE,
            format!(
                "NO CONVERGENCE: {} after {} iterations",
                status.as_str(),
                res.trace.iterations_used
            ),
        ),
    };
    let verdict = if code == EXIT_OK && !cert.hypotheses_hold() {
        format!("{verdict} (certificate reports violations)")
    } else {
        verdict
    };
    doc.solve = Some(SolveSection::new(
        &res,
        &diagnostics,
        uniqueness.as_ref(),
        quiet,
    ));
    doc.verdict = verdict;
    Ok((doc, code))
}

/// Certifies and solves a gallery entry and compares with its expected
/// fixed point.
pub fn run_gallery_entry(
    entry: &GalleryEntry,
    quiet: bool,
) -> Result<(ReportDocument, i32), CertifyError> {
    let instance = &entry.instance;
    let (mut doc, solve_code) = run_solve(instance, &[], quiet)?;
    let found = doc.solve.as_ref().and_then(|s| s.u).map(|p| p.0);
    let matched = entry.expected.map(|e| {
        found.is_some_and(|u| {
            let slack = EXPECTED_MATCH_FACTOR * instance.tol;
            u.same(&e.fixed_point, slack)
                && instance
                    .space
                    .self_distance(&u)
                    .is_ok_and(|s| (s - e.self_distance).abs() <= slack)
        })
    });
    let cert_ok = doc.certificate.hypotheses_hold;
    let code = if !cert_ok {
        EXIT_VIOLATION
    } else if solve_code != EXIT_OK {
        solve_code
    } else if matched == Some(false) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    };
    match matched {
        Some(true) => doc.verdict = format!("{}; expected fixed point matched", doc.verdict),
        Some(false) => {
            doc.verdict = format!("FAIL: expected fixed point not matched; {}", doc.verdict)
        }
        None => {}
    }
    if !cert_ok && !doc.verdict.starts_with("FAIL") {
        doc.verdict = format!("FAIL: {}; {}", certificate_verdict_of(&doc), doc.verdict);
    }
    doc.command = "gallery";
    doc.gallery = Some(GallerySection {
        name: entry.name.clone(),
        notes: entry.notes.clone(),
        expected: entry.expected.map(|e| Point(e.fixed_point)),
        matched,
    });
    Ok((doc, code))
}

fn certificate_verdict_of(doc: &ReportDocument) -> String {
    let failed: Vec<&str> = doc
        .certificate
        .checks
        .iter()
        .filter(|c| c.status == "fail")
        .map(|c| c.name.as_str())
        .collect();
    format!("violations in {}", failed.join(", "))
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, code: i32, message: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "error: {message}");
        code
    }

    fn emit(&mut self, doc: &ReportDocument, path: Option<&Path>, code: i32) -> i32 {
        let text = doc.to_json();
        if let Some(path) = path {
            if let Err(e) = std::fs::write(path, &text) {
                return self.fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display()));
            }
        }
        let _ = self.out.write_all(text.as_bytes());
        code
    }
}

fn prepare(instance: &mut ProblemInstance, overrides: &Overrides) -> Result<(), String> {
    overrides.apply(instance);
    instance.validate().map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut io = Io { out, err };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = io.err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = io.out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        tol: cli.tol,
        max_iter: cli.max_iter,
    };
    let report_path = cli.report.as_deref();

    match cli.command {
        Command::Certify { file } => {
            let mut instance = match load_instance(&file) {
                Ok(i) => i,
                Err(e) => return io.fail(EXIT_USAGE, format!("{}: {e}", file.display())),
            };
            if let Err(e) = prepare(&mut instance, &overrides) {
                return io.fail(EXIT_USAGE, e);
            }
            match run_certify(&instance) {
                Ok((doc, code)) => io.emit(&doc, report_path, code),
                Err(e) => io.fail(EXIT_VIOLATION, e),
            }
        }
        Command::Solve { file, starts } => {
            let mut instance = match load_instance(&file) {
                Ok(i) => i,
                Err(e) => return io.fail(EXIT_USAGE, format!("{}: {e}", file.display())),
            };
            if let Err(e) = prepare(&mut instance, &overrides) {
                return io.fail(EXIT_USAGE, e);
            }
            let mut extra = Vec::with_capacity(starts.len());
            for v in starts {
                match document::element_from_number(&instance.space, v) {
                    Ok(e) => extra.push(e),
                    Err(e) => return io.fail(EXIT_USAGE, format!("--start {v}: {e}")),
                }
            }
            match run_solve(&instance, &extra, cli.quiet) {
                Ok((doc, code)) => io.emit(&doc, report_path, code),
                Err(e) => io.fail(EXIT_VIOLATION, e),
            }
        }
        Command::Gallery { name } if name == "list" => {
            for n in gallery::names() {
                let entry = gallery::by_name(n).expect("listed entries exist");
                let _ = writeln!(io.out, "{n}\t{}", entry.notes);
            }
            let _ = writeln!(
                io.out,
                "random-<n>-<seed>\tseeded finite instance with 1 <= n <= {}",
                gallery::MAX_RANDOM_SIZE
            );
            EXIT_OK
        }
        Command::Gallery { name } => {
            let Some(mut entry) = gallery::by_name(&name) else {
                return io.fail(
                    EXIT_USAGE,
                    format!("unknown gallery entry `{name}` (try `gallery list`)"),
                );
            };
            if let Err(e) = prepare(&mut entry.instance, &overrides) {
                return io.fail(EXIT_USAGE, e);
            }
            match run_gallery_entry(&entry, cli.quiet) {
                Ok((doc, code)) => io.emit(&doc, report_path, code),
                Err(e) => io.fail(EXIT_VIOLATION, e),
            }
        }
        Command::Export { name, file } => {
            let Some(mut entry) = gallery::by_name(&name) else {
                return io.fail(
                    EXIT_USAGE,
                    format!("unknown gallery entry `{name}` (try `gallery list`)"),
                );
            };
            if let Err(e) = prepare(&mut entry.instance, &overrides) {
                return io.fail(EXIT_USAGE, e);
            }
            let text = InstanceDocument::from_instance(&entry.instance).to_json();
            if let Err(e) = std::fs::write(&file, text) {
                return io.fail(EXIT_USAGE, format!("cannot write {}: {e}", file.display()));
            }
            EXIT_OK
        }
    }
}
