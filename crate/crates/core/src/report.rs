//! Canonical output documents: deterministic JSON and trajectory CSV.
//!
//! Every number a document carries is either an exact rational (emitted
//! as decimal strings, with a power of π where one applies) or an `f64`
//! printed with 17 significant digits. Serialization is fully
//! deterministic — struct fields emit in declaration order and floats
//! always use the same fixed-precision form — so identical inputs yield
//! byte-identical output.

use std::fmt::Write as FmtWrite;
use std::io;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::divisor_analysis::{DivisorReport, TailCase, TailCertificate};
use crate::dynamics::Trajectory;
use crate::index_sets::{IndexTuple, TupleClass};
use crate::kam_check::{
    jacobian, jacobian_det, omega0, omega_star_bounds, AssumptionReport, FrequencyModel,
};
use crate::normal_form::{GParts, HamiltonianPoly, Monomial, NormalFormCoeff, NormalFormProjection};
use crate::spectral_core::Mode;
use crate::{Error, Result};

// ---------------------------------------------------------------------
// Canonical JSON
// ---------------------------------------------------------------------

/// Pretty formatter whose floats are always `{:.16e}` (17 significant
/// digits), making float output independent of value-dependent
/// shortest-representation choices.
struct CanonicalFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl CanonicalFormatter<'_> {
    fn new() -> Self {
        CanonicalFormatter { inner: PrettyFormatter::new() }
    }
}

impl Formatter for CanonicalFormatter<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{:.16e}", value as f64)
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serialize a document to deterministic, human-readable JSON (trailing
/// newline included).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::with_capacity(1 << 12);
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Verification(format!("report serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Verification(format!("non-UTF-8 report: {e}")))
}

// ---------------------------------------------------------------------
// Exact values
// ---------------------------------------------------------------------

/// An exact rational, carried as decimal strings so no precision is
/// lost in transit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl RationalRepr {
    pub fn new(r: &BigRational) -> Self {
        RationalRepr { num: r.numer().to_string(), den: r.denom().to_string() }
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        let num: BigInt = self
            .num
            .parse()
            .map_err(|e| Error::Parse(format!("bad rational numerator '{}': {e}", self.num)))?;
        let den: BigInt = self
            .den
            .parse()
            .map_err(|e| Error::Parse(format!("bad rational denominator '{}': {e}", self.den)))?;
        if den == BigInt::from(0) {
            return Err(Error::Parse("rational denominator is zero".into()));
        }
        Ok(BigRational::new(num, den))
    }
}

/// An exact value of the form (num/den)·π^pi_pow, with its f64 image.
#[derive(Debug, Clone, Serialize)]
pub struct ExactValueDoc {
    pub num: String,
    pub den: String,
    pub pi_pow: i32,
    pub value: f64,
}

impl ExactValueDoc {
    pub fn from_parts(rat: &BigRational, pi_pow: i32) -> Self {
        let coeff = NormalFormCoeff { rat: rat.clone(), pi_pow };
        ExactValueDoc {
            num: rat.numer().to_string(),
            den: rat.denom().to_string(),
            pi_pow,
            value: coeff.value(),
        }
    }

    pub fn from_coeff(c: &NormalFormCoeff) -> Self {
        Self::from_parts(&c.rat, c.pi_pow)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    NormalFormCoeff { rat: r.clone(), pi_pow: 0 }.value()
}

// ---------------------------------------------------------------------
// Divisor survey documents
// ---------------------------------------------------------------------

pub fn class_label(c: TupleClass) -> &'static str {
    use TupleClass::*;
    match c {
        Delta0 => "delta0",
        Delta1 => "delta1",
        Delta2 => "delta2",
        Delta3 => "delta3",
        Delta0Prime => "delta0_prime",
        Delta1Prime => "delta1_prime",
        Delta2Prime => "delta2_prime",
        Delta0DoublePrime => "delta0_double_prime",
        Delta1DoublePrime => "delta1_double_prime",
    }
}

fn tuple_entries(t: &IndexTuple) -> Vec<Mode> {
    t.entries().to_vec()
}

#[derive(Debug, Clone, Serialize)]
pub struct DivisorSurveyDoc {
    pub order: usize,
    pub labels: Vec<String>,
    pub n1: Mode,
    pub n2: Mode,
    pub j_max: usize,
    pub tuples_checked: u64,
    pub zero_divisors_found: usize,
    pub zero_divisor_tuples: Vec<Vec<Mode>>,
    pub min_abs_divisor: Option<RationalRepr>,
    pub min_abs_divisor_value: Option<f64>,
    pub witness: Option<Vec<Mode>>,
    pub case_i1_matched: u64,
    pub case_i1_violations: usize,
}

impl DivisorSurveyDoc {
    pub fn new(r: &DivisorReport) -> Self {
        DivisorSurveyDoc {
            order: r.order,
            labels: r.labels.iter().map(|&c| class_label(c).to_string()).collect(),
            n1: r.s.n1(),
            n2: r.s.n2(),
            j_max: r.j_max,
            tuples_checked: r.tuples_checked,
            zero_divisors_found: r.zero_divisor_tuples.len(),
            zero_divisor_tuples: r.zero_divisor_tuples.iter().map(tuple_entries).collect(),
            min_abs_divisor: r.min_abs_divisor.as_ref().map(RationalRepr::new),
            min_abs_divisor_value: r.min_abs_divisor.as_ref().map(rational_to_f64),
            witness: r.witness.as_ref().map(tuple_entries),
            case_i1_matched: r.case_i1_matched,
            case_i1_violations: r.case_i1_violations.len(),
        }
    }
}

pub fn tail_case_label(c: TailCase) -> &'static str {
    match c {
        TailCase::DeterminedEntry => "determined_entry",
        TailCase::OneFreeOut => "one_free_out",
        TailCase::BothFreeOut => "both_free_out",
        TailCase::ConstantDivisor => "constant_divisor",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCheckDoc {
    pub sigma: Vec<Mode>,
    pub case: String,
    pub margin: RationalRepr,
    pub margin_value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCertificateDoc {
    pub order: usize,
    pub j_max: usize,
    pub all_hold: bool,
    pub checks: Vec<TailCheckDoc>,
}

impl TailCertificateDoc {
    pub fn new(c: &TailCertificate) -> Self {
        TailCertificateDoc {
            order: c.order,
            j_max: c.j_max,
            all_hold: c.all_hold,
            checks: c
                .checks
                .iter()
                .map(|ch| TailCheckDoc {
                    sigma: ch.sigma.clone(),
                    case: tail_case_label(ch.case).to_string(),
                    margin: RationalRepr::new(&ch.margin),
                    margin_value: rational_to_f64(&ch.margin),
                    holds: ch.holds,
                })
                .collect(),
        }
    }
}

/// The `divisors` subcommand document: window survey plus (order 6
/// only) the analytic tail certificate.
#[derive(Debug, Clone, Serialize)]
pub struct DivisorsDoc {
    pub survey: DivisorSurveyDoc,
    pub tail: Option<TailCertificateDoc>,
}

// ---------------------------------------------------------------------
// Normal-form document
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ActionCoeffDoc {
    /// Which action monomial the coefficient multiplies: a₁ |z_{n₁}|⁶,
    /// b₁ |z_{n₁}|⁴|z_{n₂}|², b₂ |z_{n₁}|²|z_{n₂}|⁴, a₂ |z_{n₂}|⁶.
    pub label: String,
    pub exact: ExactValueDoc,
}

/// The `normalform` subcommand document.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormDoc {
    pub n1: Mode,
    pub n2: Mode,
    pub j_max: usize,
    pub g_bar_terms: usize,
    pub g_tilde_terms: usize,
    pub g_hat_terms: Option<usize>,
    pub f6_terms: usize,
    pub homological_residual_terms: usize,
    pub homological_residual_is_zero: bool,
    pub g_bar_action_coeffs: Vec<ActionCoeffDoc>,
    /// R̄ ladder base coefficients R₀..R₅ (ξ₁^{5−j}ξ₂^{j} weights).
    pub r_ladder: Vec<ExactValueDoc>,
    /// T̄ ladder base coefficients T₀..T₇ (ξ₁^{7−j}ξ₂^{j} weights).
    pub t_ladder: Vec<ExactValueDoc>,
}

fn action_coeff_doc(g_bar: &HamiltonianPoly, label: &str, pairs: &[(Mode, u8)]) -> Result<ActionCoeffDoc> {
    let mono = Monomial::from_pairs(pairs);
    let c = g_bar
        .get(&mono)
        .ok_or_else(|| Error::Verification(format!("missing pairing coefficient {label}")))?;
    let (rat, pi_pow) = c.as_real_pi()?;
    Ok(ActionCoeffDoc { label: label.to_string(), exact: ExactValueDoc::from_parts(&rat, pi_pow) })
}

pub fn normal_form_doc(
    parts: &GParts,
    f6: &HamiltonianPoly,
    residual_terms: usize,
    rbar: &NormalFormProjection,
    tbar: &NormalFormProjection,
) -> Result<NormalFormDoc> {
    let s = parts.g_bar.s;
    let (n1, n2) = (s.n1(), s.n2());
    let g_bar_action_coeffs = vec![
        action_coeff_doc(&parts.g_bar, "a1", &[(n1, 3), (-n1, 3)])?,
        action_coeff_doc(&parts.g_bar, "b1", &[(n1, 2), (-n1, 2), (n2, 1), (-n2, 1)])?,
        action_coeff_doc(&parts.g_bar, "b2", &[(n1, 1), (-n1, 1), (n2, 2), (-n2, 2)])?,
        action_coeff_doc(&parts.g_bar, "a2", &[(n2, 3), (-n2, 3)])?,
    ];
    Ok(NormalFormDoc {
        n1,
        n2,
        j_max: parts.g_bar.j_max,
        g_bar_terms: parts.g_bar.len(),
        g_tilde_terms: parts.g_tilde.len(),
        g_hat_terms: parts.g_hat.as_ref().map(|g| g.len()),
        f6_terms: f6.len(),
        homological_residual_terms: residual_terms,
        homological_residual_is_zero: residual_terms == 0,
        g_bar_action_coeffs,
        r_ladder: rbar.coeffs.iter().map(ExactValueDoc::from_coeff).collect(),
        t_ladder: tbar.coeffs.iter().map(ExactValueDoc::from_coeff).collect(),
    })
}

// ---------------------------------------------------------------------
// Frequency-map document
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct FreqMapSample {
    pub xi: [f64; 2],
    pub omega0: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
}

/// The `freqmap` subcommand document.
#[derive(Debug, Clone, Serialize)]
pub struct FreqMapDoc {
    pub n1: Mode,
    pub n2: Mode,
    pub epsilon: f64,
    /// The parameter window O* = [√ε, 4√ε]² as (lo, hi).
    pub omega_star: [f64; 2],
    pub model: FrequencyModel,
    /// Corners and center of O*.
    pub samples: Vec<FreqMapSample>,
    pub assumptions: AssumptionReport,
}

pub fn freq_map_doc(
    model: &FrequencyModel,
    epsilon: f64,
    assumptions: &AssumptionReport,
) -> Result<FreqMapDoc> {
    let (lo, hi) = omega_star_bounds(epsilon);
    let mid = 0.5 * (lo + hi);
    let mut samples = Vec::with_capacity(5);
    for xi in [[lo, lo], [lo, hi], [hi, lo], [hi, hi], [mid, mid]] {
        samples.push(FreqMapSample {
            xi,
            omega0: omega0(model, xi),
            jacobian: jacobian(model, xi)?,
            det: jacobian_det(model, xi)?,
        });
    }
    Ok(FreqMapDoc {
        n1: model.n1,
        n2: model.n2,
        epsilon,
        omega_star: [lo, hi],
        model: model.clone(),
        samples,
        assumptions: assumptions.clone(),
    })
}

// ---------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------

pub const TRAJECTORY_CSV_HEADER: &str = "t,re_z1,im_z1,re_z2,im_z2,h,e1";

/// Write the sampled tangential series as CSV (same 17-significant-digit
/// float form as the JSON documents).
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let n = traj.times.len();
    let mut out = String::with_capacity(32 + n * 7 * 26);
    out.push_str(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for k in 0..n {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            traj.times[k],
            traj.z1[k].re,
            traj.z1[k].im,
            traj.z2[k].re,
            traj.z2[k].im,
            traj.h[k],
            traj.e1[k],
        );
    }
    out
}

/// A trajectory read back from CSV: the analysis-facing subset of
/// [`Trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrajectory {
    pub times: Vec<f64>,
    pub z1: Vec<Complex64>,
    pub z2: Vec<Complex64>,
    pub h: Vec<f64>,
    pub e1: Vec<f64>,
    pub sample_dt: f64,
}

/// Strict CSV reader for trajectory files. Requires the exact header,
/// exactly seven finite decimal fields per row, at least two rows, and
/// a uniform, positive sampling step. Malformed input of any shape
/// yields [`Error::Parse`]; this function never panics.
pub fn parse_trajectory_csv(text: &str) -> Result<ParsedTrajectory> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty trajectory file".into()))?
        .trim_end_matches('\r');
    if header != TRAJECTORY_CSV_HEADER {
        return Err(Error::Parse(format!(
            "bad trajectory header: expected '{TRAJECTORY_CSV_HEADER}', got '{header}'"
        )));
    }
    let mut times = Vec::new();
    let mut z1 = Vec::new();
    let mut z2 = Vec::new();
    let mut h = Vec::new();
    let mut e1 = Vec::new();
    for (idx, raw) in lines.enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let row = idx + 2; // 1-based, after the header
        let mut vals = [0.0f64; 7];
        let mut fields = line.split(',');
        for slot in vals.iter_mut() {
            let field = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("row {row}: expected 7 fields")))?;
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Parse(format!("row {row}: '{}' is not a number", field.trim()))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {row}: non-finite value {v}")));
            }
            *slot = v;
        }
        if fields.next().is_some() {
            return Err(Error::Parse(format!("row {row}: more than 7 fields")));
        }
        times.push(vals[0]);
        z1.push(Complex64::new(vals[1], vals[2]));
        z2.push(Complex64::new(vals[3], vals[4]));
        h.push(vals[5]);
        e1.push(vals[6]);
    }
    if times.len() < 2 {
        return Err(Error::Parse(format!(
            "trajectory needs at least 2 samples, got {}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parse(format!("non-positive sampling step {dt}")));
    }
    for k in 1..times.len() {
        let step = times[k] - times[k - 1];
        let tol = 1e-9 * dt + 1e-12 * times[k].abs();
        if (step - dt).abs() > tol {
            return Err(Error::Parse(format!(
                "non-uniform sampling at row {}: step {step} vs {dt}",
                k + 2
            )));
        }
    }
    Ok(ParsedTrajectory { times, z1, z2, h, e1, sample_dt: dt })
}

// ---------------------------------------------------------------------
// Simulation / analysis documents
// ---------------------------------------------------------------------

/// The `simulate` subcommand document (the full series goes to CSV).
#[derive(Debug, Clone, Serialize)]
pub struct SimulateDoc {
    pub n_samples: usize,
    pub sample_dt: f64,
    pub t_final: f64,
    pub h_initial: f64,
    pub h_final: f64,
    pub h_drift: f64,
    pub e1_initial: f64,
    pub e1_final: f64,
    pub e1_drift: f64,
    pub max_reality_defect: f64,
}

impl SimulateDoc {
    pub fn new(traj: &Trajectory) -> Self {
        let first = |v: &[f64]| v.first().copied().unwrap_or(f64::NAN);
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        SimulateDoc {
            n_samples: traj.times.len(),
            sample_dt: traj.sample_dt,
            t_final: last(&traj.times),
            h_initial: first(&traj.h),
            h_final: last(&traj.h),
            h_drift: traj.h_drift,
            e1_initial: first(&traj.e1),
            e1_final: last(&traj.e1),
            e1_drift: traj.e1_drift,
            max_reality_defect: traj.max_reality_defect,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToneDoc {
    /// Angular frequency ν in the convention signal ≈ Σ A e^{−iνt}.
    pub frequency: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzePredictionDoc {
    pub lambda: [f64; 2],
    /// ω⁰(ξ) with the R̄/T̄ ladders zeroed.
    pub omega_quadratic: [f64; 2],
    /// ω⁰(ξ) with the full ladders.
    pub omega_full: [f64; 2],
    pub measured: [f64; 2],
    pub shift_measured: [f64; 2],
    pub shift_predicted: [f64; 2],
    pub rel_shift_error: [f64; 2],
}

/// The `analyze` subcommand document.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeDoc {
    pub n_samples: usize,
    pub sample_dt: f64,
    pub tones_z1: Vec<ToneDoc>,
    pub tones_z2: Vec<ToneDoc>,
    pub prediction: Option<AnalyzePredictionDoc>,
}
