//! Attraction/repulsion map over `(M₁, M₂, M₃)`: classification, the
//! `Ψ = 0` border in `M₃` and tabulated sweeps.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::quadrature::QuadratureSpec;
use crate::retarded::{psi, PsiBreakdown, RetardedError};

/// Labels with `|Ψ|/error` below this are [`Label::Indeterminate`].
pub const MARGIN_THRESHOLD: f64 = 3.0;

/// Default log-spaced scan range for `M₃`.
pub const DEFAULT_M3_RANGE: (f64, f64) = (0.05, 10.0);

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error(transparent)]
    Retarded(#[from] RetardedError),
    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("psi at bracket end M3 = {m3} is indeterminate (margin {margin:.3})")]
    IndeterminateEnd { m3: f64, margin: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    Attractive,
    Repulsive,
    Indeterminate,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Attractive => "Attractive",
            Label::Repulsive => "Repulsive",
            Label::Indeterminate => "Indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub psi_value: f64,
    /// `|Ψ|/error_estimate`
    pub margin: f64,
}

impl Classification {
    pub fn from_breakdown(b: &PsiBreakdown) -> Self {
        let margin = if b.psi == 0.0 {
            0.0
        } else if b.error_estimate > 0.0 {
            b.psi.abs() / b.error_estimate
        } else {
            f64::INFINITY
        };
        let label = if margin < MARGIN_THRESHOLD {
            Label::Indeterminate
        } else if b.psi > 0.0 {
            Label::Attractive
        } else {
            Label::Repulsive
        };
        Classification {
            label,
            psi_value: b.psi,
            margin,
        }
    }
}

pub fn classify(
    m1: f64,
    m2: f64,
    m3: f64,
    spec: &QuadratureSpec,
) -> Result<Classification, AtlasError> {
    Ok(Classification::from_breakdown(&psi(m1, m2, m3, spec)?))
}

/// True when `ε₃ₓ` and `ε₃z` both lie strictly between `ε₁` and `ε₂`.
pub fn guaranteed_repulsive(eps1: f64, eps2: f64, eps3x: f64, eps3z: f64) -> bool {
    let between = |lo: f64, hi: f64| lo < eps3x && eps3x < hi && lo < eps3z && eps3z < hi;
    between(eps1, eps2) || between(eps2, eps1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BorderPoint {
    pub m1: f64,
    pub m2: f64,
    pub m3_star: f64,
    /// Half-width of the final bracket around `m3_star`.
    pub bracket_width: f64,
    pub psi_at_star: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorderOptions {
    /// Stop once the bracket half-width is at most this.
    pub width_tol: f64,
    /// ...and `|Ψ(m3_star)|` is at most this.
    pub psi_tol: f64,
    pub max_iterations: u32,
}

impl Default for BorderOptions {
    fn default() -> Self {
        BorderOptions {
            width_tol: 1e-6,
            psi_tol: 1e-7,
            max_iterations: 200,
        }
    }
}

/// Bisection on `M₃ ↦ Ψ(M₁, M₂, M₃)` inside `bracket`.
pub fn border_m3(
    m1: f64,
    m2: f64,
    bracket: (f64, f64),
    spec: &QuadratureSpec,
    opts: &BorderOptions,
) -> Result<BorderPoint, AtlasError> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    if !(lo > 0.0 && hi.is_finite() && lo < hi) {
        return Err(AtlasError::InvalidGrid(format!("bad bracket [{lo}, {hi}]")));
    }
    let f_lo = classify(m1, m2, lo, spec)?;
    let f_hi = classify(m1, m2, hi, spec)?;
    for (m3, c) in [(lo, f_lo), (hi, f_hi)] {
        if c.margin < MARGIN_THRESHOLD {
            return Err(AtlasError::IndeterminateEnd {
                m3,
                margin: c.margin,
            });
        }
    }
    if f_lo.psi_value.signum() == f_hi.psi_value.signum() {
        return Err(AtlasError::NoSignChange { lo, hi });
    }
    let lo_sign = f_lo.psi_value.signum();
    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    let mut psi_mid = psi(m1, m2, mid, spec)?.psi;
    while iterations < opts.max_iterations {
        let width = 0.5 * (hi - lo);
        if (width <= opts.width_tol && psi_mid.abs() <= opts.psi_tol) || psi_mid == 0.0 {
            break;
        }
        if psi_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == mid || next <= lo || next >= hi {
            break;
        }
        mid = next;
        psi_mid = psi(m1, m2, mid, spec)?.psi;
        iterations += 1;
    }
    Ok(BorderPoint {
        m1,
        m2,
        m3_star: mid,
        bracket_width: 0.5 * (hi - lo),
        psi_at_star: psi_mid,
        iterations,
    })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, AtlasError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite() && n >= 2) {
        return Err(AtlasError::InvalidGrid(format!(
            "log grid needs 0 < lo < hi and n >= 2, got [{lo}, {hi}], n = {n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + step * i as f64).exp(),
        })
        .collect())
}

/// Adjacent grid points with definite, opposite-signed `Ψ`.
pub fn sign_change_brackets(
    m1: f64,
    m2: f64,
    grid: &[f64],
    spec: &QuadratureSpec,
    execution: Execution,
) -> Result<Vec<(f64, f64)>, AtlasError> {
    let inner = spec.with_execution(Execution::Sequential);
    let labels = execution.map(grid, |&m3| classify(m1, m2, m3, &inner));
    let labels: Vec<Classification> = labels.into_iter().collect::<Result<_, _>>()?;
    let definite: Vec<(f64, f64)> = grid
        .iter()
        .zip(&labels)
        .filter(|(_, c)| c.label != Label::Indeterminate)
        .map(|(&m3, c)| (m3, c.psi_value))
        .collect();
    Ok(definite
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0))
        .collect())
}

/// All `Ψ = 0` crossings in `M₃` found by scanning `range` with `n`
/// log-spaced points, widening the range by a decade on each side (up to
/// `[1e-4, 1e4]`) while no crossing is seen.
pub fn border_scan(
    m1: f64,
    m2: f64,
    range: (f64, f64),
    n: usize,
    spec: &QuadratureSpec,
    opts: &BorderOptions,
    execution: Execution,
) -> Result<Vec<BorderPoint>, AtlasError> {
    let (mut lo, mut hi) = range;
    loop {
        let grid = log_grid(lo, hi, n)?;
        let brackets = sign_change_brackets(m1, m2, &grid, spec, execution)?;
        if !brackets.is_empty() || (lo <= 1e-4 && hi >= 1e4) {
            let points = execution.map(&brackets, |&b| {
                border_m3(m1, m2, b, &spec.with_execution(Execution::Sequential), opts)
            });
            return points.into_iter().collect();
        }
        lo = (lo / 10.0).max(1e-4);
        hi = (hi * 10.0).min(1e4);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub psi: Option<f64>,
    pub psi1: Option<f64>,
    pub psi2: Option<f64>,
    /// `Attractive`, `Repulsive`, `Indeterminate` or `Failed`.
    pub label: String,
    pub error_estimate: Option<f64>,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<(), AtlasError> {
    if grid.is_empty() {
        return Err(AtlasError::InvalidGrid(format!("{name} grid is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(AtlasError::InvalidGrid(format!("{name} grid contains {v}")));
    }
    Ok(())
}

/// Row-major (`M₂` outer, `M₃` inner) table of `Ψ` and its parts. A row
/// whose evaluation fails is labelled `Failed` and the sweep continues.
pub fn sweep(
    m1: f64,
    m2_grid: &[f64],
    m3_grid: &[f64],
    spec: &QuadratureSpec,
    execution: Execution,
) -> Result<SweepResult, AtlasError> {
    check_grid("M1", &[m1])?;
    check_grid("M2", m2_grid)?;
    check_grid("M3", m3_grid)?;
    let inner = spec.with_execution(Execution::Sequential);
    let tuples: Vec<(f64, f64)> = m2_grid
        .iter()
        .flat_map(|&m2| m3_grid.iter().map(move |&m3| (m2, m3)))
        .collect();
    let rows = execution.map(&tuples, |&(m2, m3)| match psi(m1, m2, m3, &inner) {
        Ok(b) => SweepRow {
            m1,
            m2,
            m3,
            psi: Some(b.psi),
            psi1: Some(b.psi1),
            psi2: Some(b.psi2),
            label: Classification::from_breakdown(&b)
                .label
                .as_str()
                .to_string(),
            error_estimate: Some(b.error_estimate),
            error: None,
        },
        Err(e) => SweepRow {
            m1,
            m2,
            m3,
            psi: None,
            psi1: None,
            psi2: None,
            label: "Failed".to_string(),
            error_estimate: None,
            error: Some(e.to_string()),
        },
    });
    Ok(SweepResult { rows })
}

pub const SWEEP_UNITS: &str = "m1,m2,m3,psi,psi1,psi2,error_estimate are dimensionless";

/// CSV with a leading `# units:` comment line.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<(), AtlasError> {
    writeln!(out, "# units: {SWEEP_UNITS}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in &result.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: &'a SweepRow,
    units: &'static str,
}

/// JSON array of row objects, each with a `units` field.
pub fn write_sweep_json<W: Write>(result: &SweepResult, mut out: W) -> Result<(), AtlasError> {
    let rows: Vec<JsonRow> = result
        .rows
        .iter()
        .map(|row| JsonRow {
            row,
            units: "dimensionless",
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(1.5, 0.8, 1.0, &spec()).unwrap().label,
            Label::Repulsive
        );
        assert_eq!(
            classify(1.5, 1.1, 1.0, &spec()).unwrap().label,
            Label::Attractive
        );
        let c = classify(1.0, 1.0, 1.0, &spec()).unwrap();
        assert_eq!(c.label, Label::Indeterminate);
        assert_eq!(c.margin, 0.0);
    }

    #[test]
    fn guaranteed_repulsive_examples() {
        assert!(guaranteed_repulsive(3.0, 1.6, 2.0, 2.5));
        assert!(guaranteed_repulsive(1.6, 3.0, 2.0, 2.5));
        assert!(!guaranteed_repulsive(3.0, 1.6, 2.0, 5.0));
        assert!(!guaranteed_repulsive(2.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn same_sign_bracket_is_rejected() {
        let err = border_m3(1.5, 0.8, (0.9, 1.4), &spec(), &BorderOptions::default()).unwrap_err();
        assert!(err.to_string().contains("no sign change in bracket"));
    }

    #[test]
    fn border_point_brackets_a_root() {
        let pts = border_scan(
            1.5,
            0.8,
            DEFAULT_M3_RANGE,
            40,
            &spec(),
            &BorderOptions::default(),
            Execution::default(),
        )
        .unwrap();
        assert!(pts.iter().any(|b| b.m3_star < 0.8));
        assert!(pts.iter().any(|b| b.m3_star > 1.5));
        for b in &pts {
            assert!(b.bracket_width <= 1e-6);
            assert!(b.psi_at_star.abs() <= 1e-7);
            let below = classify(1.5, 0.8, b.m3_star - 2.0 * b.bracket_width, &spec()).unwrap();
            let above = classify(1.5, 0.8, b.m3_star + 2.0 * b.bracket_width, &spec()).unwrap();
            assert!(below.psi_value * above.psi_value < 0.0, "{b:?}");
        }
    }

    #[test]
    fn border_roots_match_grid_oracle() {
        let opts = BorderOptions::default();
        let cases = [
            (0.8, (0.3, 0.79), 0.563_769_214_1),
            (0.8, (1.6, 4.0), 2.543_881_570_5),
            (0.8, (1e-3, 1e-2), 0.005_408_753_2),
            (1.1, (1.15, 1.6), 1.282_517_519_6),
            (1.1, (1.6, 4.0), 2.421_444_782_6),
        ];
        for (m2, bracket, want) in cases {
            let b = border_m3(1.5, m2, bracket, &spec(), &opts).unwrap();
            assert!((b.m3_star - want).abs() <= 2e-6, "{b:?} vs {want}");
        }
    }

    #[test]
    fn sweep_rows_are_row_major_and_psi1_is_flat() {
        let m3 = log_grid(0.1, 5.0, 7).unwrap();
        let r = sweep(1.5, &[0.8, 1.1], &m3, &spec(), Execution::default()).unwrap();
        assert_eq!(r.rows.len(), 14);
        assert_eq!((r.rows[0].m2, r.rows[0].m3), (0.8, 0.1));
        assert_eq!((r.rows[7].m2, r.rows[7].m3), (1.1, 0.1));
        let first = r.rows[0].psi1;
        assert!(r.rows[..7].iter().all(|row| row.psi1 == first));
    }

    #[test]
    fn sweep_marks_failed_rows() {
        let r = sweep(1.5, &[0.8], &[1.0], &spec(), Execution::Sequential).unwrap();
        assert_eq!(r.failed(), 0);
        assert!(sweep(1.5, &[0.8], &[-1.0], &spec(), Execution::Sequential).is_err());
    }

    #[test]
    fn writers_carry_units() {
        let r = sweep(1.5, &[0.8], &[1.0, 2.0], &spec(), Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# units:"));
        assert_eq!(
            lines.next().unwrap(),
            "m1,m2,m3,psi,psi1,psi2,label,error_estimate"
        );
        let mut buf = Vec::new();
        write_sweep_json(&r, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["units"], "dimensionless");
        assert_eq!(v[0]["label"], "Repulsive");
    }

    #[test]
    fn log_grid_endpoints_exact() {
        let g = log_grid(0.05, 10.0, 11).unwrap();
        assert_eq!(g[0], 0.05);
        assert_eq!(g[10], 10.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(log_grid(1.0, 1.0, 3).is_err());
    }
}
