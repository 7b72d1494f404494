//! End-to-end pipeline and the external file formats: the construction
//! report (fixed-key-order text, see docs/report.schema.txt) and the plain
//! matrix format (first line n, then n rows of space-separated −1/0/1).

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::chars::{epsilon_delta, jacobi_sum, Character, CharsError};
use crate::confmat::{
    excess, maximize_excess, row_sum_spectrum, verify_conference, ConfmatError, SignedMatrix,
};
use crate::gf::{build_tower_budget, Ambient, GfError, DEFAULT_MAX_Q};
use crate::twoint::{
    build_d, d_membership, dual_sets, find_admissible_pair, m_of_q, predict_profile,
    qr_design_blocks, TwoIntError,
};

pub const REPORT_FORMAT: &str = "confmax-report-1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Chars(#[from] CharsError),
    #[error(transparent)]
    TwoInt(#[from] TwoIntError),
    #[error(transparent)]
    Confmat(#[from] ConfmatError),
}

/// Validates q = p^r = 4m² + 1 with p ≡ 1 (mod 4) prime; returns (p, r, m).
pub fn admissible_q(q: u64) -> Result<(u64, u32, u64), PipelineError> {
    let m = m_of_q(q).ok_or_else(|| {
        PipelineError::BadParameter(format!(
            "q = {q} is not of the form 4m² + 1 (the construction hypothesis)"
        ))
    })?;
    let factors = crate::gf::factorize(q);
    if factors.len() != 1 {
        return Err(PipelineError::BadParameter(format!(
            "q = {q} is not a prime power (the construction hypothesis)"
        )));
    }
    let (p, r) = factors[0];
    if p % 4 != 1 {
        return Err(PipelineError::BadParameter(format!(
            "q = {q} = {p}^{r} has p ≢ 1 (mod 4) (the construction hypothesis)"
        )));
    }
    Ok((p, r, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportChecks {
    pub conference: bool,
    pub two_intersection: bool,
    pub profile_prediction: bool,
    pub dual_identity: bool,
    pub excess_attained: bool,
}

impl ReportChecks {
    pub fn all(&self) -> bool {
        self.conference
            && self.two_intersection
            && self.profile_prediction
            && self.dual_identity
            && self.excess_attained
    }
}

/// The certified output of one construction; every field is recomputable
/// from (q, version) and the report renders byte-identically apart from the
/// trailing timing lines.
#[derive(Debug, Clone)]
pub struct ConstructionReport {
    pub q: u64,
    pub p: u64,
    pub r: u32,
    pub m: u64,
    pub modulus: Vec<u64>,
    pub omega: Vec<u64>,
    pub jacobi: (i64, i64),
    pub epsilon: i8,
    pub delta: i8,
    pub h: u8,
    pub ell: u64,
    pub alpha: u64,
    pub beta: u64,
    /// Element encodings (Σ cᵢ pⁱ over the coefficients), sorted ascending.
    pub d: Vec<u64>,
    pub d_alpha_perp: Vec<u64>,
    pub d_beta_perp: Vec<u64>,
    pub n: u64,
    pub k: u64,
    pub bound: (u64, u64),
    pub excess: i64,
    pub row_sums: Vec<(i64, u64)>,
    pub checks: ReportChecks,
    pub timings_ms: Vec<(String, f64)>,
}

#[derive(Debug)]
pub struct Construction {
    pub report: ConstructionReport,
    pub matrix: SignedMatrix,
}

struct StageClock {
    start: Instant,
    timings: Vec<(String, f64)>,
}

impl StageClock {
    fn new() -> Self {
        StageClock { start: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, stage: &str) {
        let elapsed = self.start.elapsed().as_secs_f64() * 1e3;
        self.timings.push((stage.to_string(), elapsed));
        self.start = Instant::now();
    }
}

pub fn construct(q: u64) -> Result<Construction, PipelineError> {
    construct_with_budget(q, DEFAULT_MAX_Q)
}

pub fn construct_with_budget(q: u64, max_q: u64) -> Result<Construction, PipelineError> {
    let (p, r, m) = admissible_q(q)?;
    let mut clock = StageClock::new();

    let tower = build_tower_budget(p, r, max_q)?;
    clock.lap("tower");

    let eta = Character::quadratic(Ambient::Sub);
    let chi4 = Character::quartic(Ambient::Sub);
    let j = jacobi_sum(&tower, &eta, &chi4)?;
    let (eps, delta) = epsilon_delta(j, m)?;
    clock.lap("jacobi");

    let pair = find_admissible_pair(&tower, eps, delta)?;
    clock.lap("pair_search");

    let design = qr_design_blocks(&tower)?;
    clock.lap("design");

    let d = build_d(&tower, &pair, &design)?;
    let two_intersection = d.j as u64 == 2 * m * m - m + 1
        && d.alpha as u64 == m * m - m
        && d.beta as u64 == m * m;
    clock.lap("build_d");

    let (alpha_perp, beta_perp) = dual_sets(&d, &design)?;
    let ed = (eps * delta) as i64;
    let h_minus = (pair.h as i64 - ed).rem_euclid(4) as u8;
    let h_plus = (pair.h as i64 + ed).rem_euclid(4) as u8;
    let dual_identity = alpha_perp == d_membership(&tower, pair.ell, h_minus)?
        && beta_perp == d_membership(&tower, pair.ell, h_plus)?;
    let mut profile_prediction = true;
    {
        let mut mask = vec![false; design.v];
        for &pt in &d.elements {
            mask[pt] = true;
        }
        for (pos, s) in tower.subfield().elements.iter().enumerate() {
            let predicted = predict_profile(&tower, &pair, s)?;
            let counted = design.blocks[pos].iter().filter(|&&pt| mask[pt]).count() as u64;
            if predicted != counted {
                profile_prediction = false;
                break;
            }
        }
    }
    clock.lap("duals");

    let (matrix, cert) = maximize_excess(&tower, &d, &alpha_perp)?;
    clock.lap("matrix");

    // Independent re-verification of what maximize_excess already enforced.
    let conference = verify_conference(&matrix).ok;
    let excess_attained = cert.attained() && excess(&matrix) == cert.excess;
    clock.lap("verify");

    let checks = ReportChecks {
        conference,
        two_intersection,
        profile_prediction,
        dual_identity,
        excess_attained,
    };
    if !checks.all() {
        return Err(PipelineError::Certification(format!("checks failed: {checks:?}")));
    }

    let sub = tower.subfield();
    let to_indices = |positions: &[usize]| -> Vec<u64> {
        positions.iter().map(|&pos| sub.index_at(pos)).collect()
    };
    let spectrum = row_sum_spectrum(&matrix);
    let report = ConstructionReport {
        q,
        p,
        r,
        m,
        modulus: tower.spec().modulus().to_vec(),
        omega: tower.omega().coeffs.clone(),
        jacobi: (j.a, j.b),
        epsilon: eps,
        delta,
        h: pair.h,
        ell: pair.ell,
        alpha: d.alpha as u64,
        beta: d.beta as u64,
        d: to_indices(&d.elements),
        d_alpha_perp: to_indices(&alpha_perp),
        d_beta_perp: to_indices(&beta_perp),
        n: matrix.n() as u64,
        k: cert.k,
        bound: (cert.bound_num, cert.bound_den),
        excess: cert.excess,
        row_sums: spectrum.into_iter().collect(),
        checks,
        timings_ms: clock.timings,
    };
    Ok(Construction { report, matrix })
}

fn join_u64(values: &[u64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

impl ConstructionReport {
    /// Renders the fixed-key-order report document. Everything above the
    /// timing block is deterministic for a given (q, version).
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format = {REPORT_FORMAT}");
        let _ = writeln!(s, "q = {}", self.q);
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "r = {}", self.r);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "modulus = {}", join_u64(&self.modulus));
        let _ = writeln!(s, "omega = {}", join_u64(&self.omega));
        let _ = writeln!(s, "jacobi = {} {}", self.jacobi.0, self.jacobi.1);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "ell = {}", self.ell);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "d = {}", join_u64(&self.d));
        let _ = writeln!(s, "d_alpha_perp = {}", join_u64(&self.d_alpha_perp));
        let _ = writeln!(s, "d_beta_perp = {}", join_u64(&self.d_beta_perp));
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "bound = {} {}", self.bound.0, self.bound.1);
        let _ = writeln!(s, "excess = {}", self.excess);
        let row_sums = self
            .row_sums
            .iter()
            .map(|(v, c)| format!("{v}:{c}"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(s, "row_sums = {row_sums}");
        let _ = writeln!(s, "check_conference = {}", pass_fail(self.checks.conference));
        let _ = writeln!(s, "check_two_intersection = {}", pass_fail(self.checks.two_intersection));
        let _ = writeln!(
            s,
            "check_profile_prediction = {}",
            pass_fail(self.checks.profile_prediction)
        );
        let _ = writeln!(s, "check_dual_identity = {}", pass_fail(self.checks.dual_identity));
        let _ = writeln!(s, "check_excess_attained = {}", pass_fail(self.checks.excess_attained));
        for (stage, ms) in &self.timings_ms {
            let _ = writeln!(s, "timing_{stage}_ms = {ms:.3}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ReportParseError> {
        let mut map = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| ReportParseError(format!("line {}: expected `key = value`", i + 1)))?;
            map.push((key.to_string(), value.to_string()));
        }
        let get = |key: &str| -> Result<String, ReportParseError> {
            map.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| ReportParseError(format!("missing key `{key}`")))
        };
        let parse_one = |key: &str| -> Result<i64, ReportParseError> {
            get(key)?
                .parse()
                .map_err(|_| ReportParseError(format!("key `{key}` is not an integer")))
        };
        let parse_list = |key: &str| -> Result<Vec<u64>, ReportParseError> {
            let v = get(key)?;
            v.split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| ReportParseError(format!("key `{key}` has a bad entry `{t}`")))
                })
                .collect()
        };
        if get("format")? != REPORT_FORMAT {
            return Err(ReportParseError(format!(
                "unknown format `{}`",
                get("format")?
            )));
        }
        let jacobi_raw = get("jacobi")?;
        let jacobi: Vec<i64> = jacobi_raw
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| ReportParseError("bad jacobi".into())))
            .collect::<Result<_, _>>()?;
        if jacobi.len() != 2 {
            return Err(ReportParseError("jacobi must have two components".into()));
        }
        let bound = parse_list("bound")?;
        if bound.len() != 2 {
            return Err(ReportParseError("bound must have two components".into()));
        }
        let mut row_sums = Vec::new();
        for tok in get("row_sums")?.split_whitespace() {
            let (v, c) = tok
                .split_once(':')
                .ok_or_else(|| ReportParseError(format!("bad row-sum entry `{tok}`")))?;
            row_sums.push((
                v.parse().map_err(|_| ReportParseError("bad row-sum value".into()))?,
                c.parse().map_err(|_| ReportParseError("bad row-sum count".into()))?,
            ));
        }
        let check = |key: &str| -> Result<bool, ReportParseError> {
            match get(key)?.as_str() {
                "pass" => Ok(true),
                "fail" => Ok(false),
                other => Err(ReportParseError(format!("key `{key}` has bad verdict `{other}`"))),
            }
        };
        let timings_ms = map
            .iter()
            .filter_map(|(k, v)| {
                let stage = k.strip_prefix("timing_")?.strip_suffix("_ms")?;
                Some((stage.to_string(), v.parse().ok()?))
            })
            .collect();
        Ok(ConstructionReport {
            q: parse_one("q")? as u64,
            p: parse_one("p")? as u64,
            r: parse_one("r")? as u32,
            m: parse_one("m")? as u64,
            modulus: parse_list("modulus")?,
            omega: parse_list("omega")?,
            jacobi: (jacobi[0], jacobi[1]),
            epsilon: parse_one("epsilon")? as i8,
            delta: parse_one("delta")? as i8,
            h: parse_one("h")? as u8,
            ell: parse_one("ell")? as u64,
            alpha: parse_one("alpha")? as u64,
            beta: parse_one("beta")? as u64,
            d: parse_list("d")?,
            d_alpha_perp: parse_list("d_alpha_perp")?,
            d_beta_perp: parse_list("d_beta_perp")?,
            n: parse_one("n")? as u64,
            k: parse_one("k")? as u64,
            bound: (bound[0], bound[1]),
            excess: parse_one("excess")?,
            row_sums,
            checks: ReportChecks {
                conference: check("check_conference")?,
                two_intersection: check("check_two_intersection")?,
                profile_prediction: check("check_profile_prediction")?,
                dual_identity: check("check_dual_identity")?,
                excess_attained: check("check_excess_attained")?,
            },
            timings_ms,
        })
    }

    /// Internal-consistency check of a report against its matrix: sizes,
    /// excess, bound arithmetic, and the row-sum histogram must all agree.
    pub fn consistent_with(&self, matrix: &SignedMatrix) -> Result<(), String> {
        if matrix.n() as u64 != self.n {
            return Err(format!("matrix order {} ≠ n {}", matrix.n(), self.n));
        }
        if excess(matrix) != self.excess {
            return Err("excess mismatch".into());
        }
        let spectrum: Vec<(i64, u64)> = row_sum_spectrum(matrix).into_iter().collect();
        if spectrum != self.row_sums {
            return Err("row-sum histogram mismatch".into());
        }
        if self.d.len() as u64 != 2 * self.m * self.m - self.m + 1 {
            return Err("|D| mismatch".into());
        }
        let eb = crate::confmat::excess_bound(self.n as usize).map_err(|e| e.to_string())?;
        if (eb.num, eb.den) != self.bound || eb.k != self.k {
            return Err("bound mismatch".into());
        }
        if !eb.attained_by(self.excess) {
            return Err("reported excess does not attain the bound".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("report parse error: {0}")]
pub struct ReportParseError(pub String);

// ---------------------------------------------------------------------------
// Matrix text format.
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct MatrixParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// First line: the order n. Then n lines of n space-separated entries from
/// {−1, 0, 1}. Trailing newline required, no comments.
pub fn matrix_to_text(w: &SignedMatrix) -> String {
    let n = w.n();
    let mut s = String::with_capacity(n * (2 * n + 1) + 8);
    let _ = writeln!(s, "{n}");
    for i in 0..n {
        let row = w
            .row(i)
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(s, "{row}");
    }
    s
}

pub fn matrix_from_text(text: &str) -> Result<SignedMatrix, MatrixParseError> {
    let err = |line: usize, col: usize, msg: &str| MatrixParseError {
        line,
        col,
        msg: msg.to_string(),
    };
    if !text.ends_with('\n') {
        let lines = text.lines().count().max(1);
        return Err(err(lines, 1, "missing trailing newline"));
    }
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| err(1, 1, "empty file"))?;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| err(1, 1, "expected the matrix order"))?;
    if n == 0 {
        return Err(err(1, 1, "order must be positive"));
    }
    let mut entries = Vec::with_capacity(n * n);
    let mut rows_seen = 0;
    for (i, line) in lines {
        if rows_seen == n {
            return Err(err(i + 1, 1, "unexpected content after the last row"));
        }
        let mut count = 0;
        let mut col = 0;
        let bytes = line.as_bytes();
        let mut t = 0;
        while t < bytes.len() {
            if bytes[t] == b' ' {
                t += 1;
                continue;
            }
            col = t + 1;
            let start = t;
            while t < bytes.len() && bytes[t] != b' ' {
                t += 1;
            }
            let tok = &line[start..t];
            let v: i8 = match tok {
                "-1" => -1,
                "0" => 0,
                "1" => 1,
                _ => return Err(err(i + 1, col, &format!("bad entry `{tok}`"))),
            };
            entries.push(v);
            count += 1;
        }
        if count != n {
            return Err(err(i + 1, col.max(1), &format!("row has {count} entries, expected {n}")));
        }
        rows_seen += 1;
    }
    if rows_seen != n {
        return Err(err(rows_seen + 2, 1, &format!("file ended after {rows_seen} of {n} rows")));
    }
    Ok(SignedMatrix::from_entries(n, entries))
}
