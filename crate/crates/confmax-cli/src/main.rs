//! `confmax` — construct, verify, and tabulate conference matrices with
//! maximum excess. Exit codes: 0 success, 1 attainment failure on valid
//! input, 2 bad parameter, 3 internal certification failure, 4 I/O or parse
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use confmax::chars::{epsilon_delta, jacobi_sum, Character};
use confmax::confmat::{excess, excess_bound, row_sum_spectrum, verify_conference};
use confmax::gf::{build_tower_budget, Ambient, DEFAULT_MAX_Q};
use confmax::report::{
    admissible_q, construct_with_budget, matrix_from_text, matrix_to_text, PipelineError,
};
use confmax::twoint::{enumerate_admissible_pairs, m_of_q};

const EXIT_OK: u8 = 0;
const EXIT_NOT_ATTAINED: u8 = 1;
const EXIT_BAD_PARAMETER: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "confmax", version, about = "Conference matrices with maximum excess")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct the order-(q+1) conference matrix with maximum excess.
    Construct {
        /// Field order; must be a prime power 4m² + 1 with p ≡ 1 (mod 4).
        #[arg(long)]
        q: u64,
        /// Output base path; writes `<out>.matrix.txt` and `<out>.report.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Which files to write.
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
        /// Audit mode: list every admissible (h, ℓ) pair before constructing.
        #[arg(long)]
        enumerate_pairs: bool,
        /// Enumeration cap (default from CONFMAX_BUDGET or 65536).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Verify a matrix file: conference property, excess, bound attainment.
    Verify {
        /// Matrix file in the plain text format.
        file: PathBuf,
    },
    /// One construction per admissible q = 4m² + 1 with m ≤ max-m.
    Table {
        #[arg(long)]
        max_m: u64,
        /// Enumeration cap (default from CONFMAX_BUDGET or 65536).
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Matrix,
    Report,
    Both,
}

fn resolve_budget(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("CONFMAX_BUDGET")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_MAX_Q)
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe, like other Unix filters.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Construct { q, out, format, enumerate_pairs, budget } => {
            cmd_construct(q, out, format, enumerate_pairs, resolve_budget(budget))
        }
        Cmd::Verify { file } => cmd_verify(&file),
        Cmd::Table { max_m, budget } => cmd_table(max_m, resolve_budget(budget)),
    };
    ExitCode::from(code)
}

fn pipeline_exit(err: &PipelineError) -> u8 {
    match err {
        PipelineError::BadParameter(_) => EXIT_BAD_PARAMETER,
        _ => EXIT_CERTIFICATION,
    }
}

fn cmd_construct(
    q: u64,
    out: Option<PathBuf>,
    format: Format,
    enumerate_pairs: bool,
    budget: u64,
) -> u8 {
    if enumerate_pairs {
        if let Err(code) = print_admissible_pairs(q, budget) {
            return code;
        }
    }
    let construction = match construct_with_budget(q, budget) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("confmax: {e}");
            return pipeline_exit(&e);
        }
    };
    let base = out.unwrap_or_else(|| PathBuf::from(format!("confmax-q{q}")));
    let write = |suffix: &str, contents: &str| -> Result<PathBuf, u8> {
        let path = PathBuf::from(format!("{}.{suffix}", base.display()));
        std::fs::write(&path, contents).map_err(|e| {
            eprintln!("confmax: cannot write {}: {e}", path.display());
            EXIT_IO
        })?;
        Ok(path)
    };
    let report = &construction.report;
    println!(
        "q = {q}: conference matrix of order {}, excess {} = bound {}{}",
        report.n,
        report.excess,
        report.bound.0,
        if report.bound.1 == 1 { String::new() } else { format!("/{}", report.bound.1) },
    );
    if format == Format::Matrix || format == Format::Both {
        match write("matrix.txt", &matrix_to_text(&construction.matrix)) {
            Ok(path) => println!("wrote {}", path.display()),
            Err(code) => return code,
        }
    }
    if format == Format::Report || format == Format::Both {
        match write("report.txt", &report.render()) {
            Ok(path) => println!("wrote {}", path.display()),
            Err(code) => return code,
        }
    }
    EXIT_OK
}

fn print_admissible_pairs(q: u64, budget: u64) -> Result<(), u8> {
    let (p, r, m) = admissible_q(q).map_err(|e| {
        eprintln!("confmax: {e}");
        pipeline_exit(&e)
    })?;
    let fail = |e: &dyn std::fmt::Display| -> u8 {
        eprintln!("confmax: {e}");
        EXIT_CERTIFICATION
    };
    let tower = build_tower_budget(p, r, budget).map_err(|e| fail(&e))?;
    let j = jacobi_sum(
        &tower,
        &Character::quadratic(Ambient::Sub),
        &Character::quartic(Ambient::Sub),
    )
    .map_err(|e| fail(&e))?;
    let (eps, delta) = epsilon_delta(j, m).map_err(|e| fail(&e))?;
    let pairs = enumerate_admissible_pairs(&tower, eps, delta).map_err(|e| fail(&e))?;
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    let _ = writeln!(
        out,
        "admissible pairs for q = {q} (epsilon = {eps}, delta = {delta}): {}",
        pairs.len()
    );
    for (h, ell) in pairs {
        let _ = writeln!(out, "h={h} ell={ell}");
    }
    let _ = out.flush();
    Ok(())
}

fn cmd_verify(file: &Path) -> u8 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("confmax: cannot read {}: {e}", file.display());
            return EXIT_IO;
        }
    };
    let matrix = match matrix_from_text(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("confmax: {}: {e}", file.display());
            return EXIT_IO;
        }
    };
    let n = matrix.n();
    println!("order: {n}");
    let check = verify_conference(&matrix);
    if check.ok {
        println!("conference check: PASS");
    } else if let Some(g) = check.first_gram_failure {
        println!(
            "conference check: FAIL (rows {} and {}: dot = {}, expected {})",
            g.i, g.j, g.got, g.expected
        );
    } else if let Some(i) = check.first_diagonal_failure {
        println!("conference check: FAIL (nonzero diagonal at row {i})");
    } else {
        println!("conference check: FAIL (entries outside {{-1, 0, 1}})");
    }
    let e = excess(&matrix);
    println!("excess: {e}");
    let attained = match excess_bound(n) {
        Ok(b) => {
            let bound_str = if b.den == 1 {
                b.num.to_string()
            } else {
                format!("{}/{}", b.num, b.den)
            };
            println!("bound: {bound_str} (k = {})", b.k);
            b.attained_by(e)
        }
        Err(err) => {
            println!("bound: undefined ({err})");
            false
        }
    };
    let spectrum = row_sum_spectrum(&matrix)
        .into_iter()
        .map(|(v, c)| format!("{v}:{c}"))
        .collect::<Vec<_>>()
        .join(" ");
    println!("row sums: {spectrum}");
    let verdict = check.ok && attained;
    println!("attainment: {}", if attained { "PASS" } else { "FAIL" });
    if verdict {
        EXIT_OK
    } else {
        EXIT_NOT_ATTAINED
    }
}

fn cmd_table(max_m: u64, budget: u64) -> u8 {
    println!(
        "{:>6} {:>4} {:>6} {:>6} {:>6} {:>6} {:>4} {:>8} {:>8}  verdict",
        "q", "m", "|D|", "alpha", "beta", "n", "k", "bound", "excess"
    );
    for m in 1..=max_m {
        let q = 4 * m * m + 1;
        if q > budget {
            break;
        }
        if admissible_q(q).is_err() {
            continue; // not a prime power with p ≡ 1 (mod 4)
        }
        debug_assert_eq!(m_of_q(q), Some(m));
        match construct_with_budget(q, budget) {
            Ok(c) => {
                let r = &c.report;
                let verdict = if r.checks.all() { "PASS" } else { "FAIL" };
                println!(
                    "{:>6} {:>4} {:>6} {:>6} {:>6} {:>6} {:>4} {:>8} {:>8}  {verdict}",
                    q,
                    m,
                    r.d.len(),
                    r.alpha,
                    r.beta,
                    r.n,
                    r.k,
                    r.bound.0,
                    r.excess,
                );
            }
            Err(e) => {
                eprintln!("confmax: q = {q}: {e}");
                return pipeline_exit(&e);
            }
        }
    }
    EXIT_OK
}
