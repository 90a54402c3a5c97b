//! Adiabatic running times for split searches.
//!
//! The schedule-optimal time satisfies
//!
//! ```text
//! εT = ∫₀¹ ds |ḟg - ġf| · sqrt( Σ_i (N_i - 1) / N_i² · ω_i⁻⁶ )
//! ```
//!
//! with `ω_i` the block gaps from [`crate::spectral::subsystem_gap`]. For the
//! linear schedule and `m` equal blocks the integral has the closed form
//! `sqrt(m (2^{n/m} - 1))`, which the tests use as an independent oracle.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interp::{hermite, segment};
use crate::problem::{Precision, Schedule, Splitting};
use crate::quadrature::integrate;
use crate::spectral::{gap_minimum, subsystem_gap};

/// Largest `n` accepted by [`reproduce_table`].
pub const MAX_TABLE_QUBITS: usize = 64;

const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedForm,
    MaxStructured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTimeResult {
    pub splitting: Splitting,
    /// ε·T, independent of ε.
    pub eps_t: f64,
    pub alpha: f64,
    /// `f64::INFINITY` when `m = 1`.
    #[serde(serialize_with = "serialize_exponent")]
    pub beta: f64,
    pub method: Method,
}

impl RunTimeResult {
    fn new(splitting: Splitting, eps_t: f64, method: Method) -> Result<Self> {
        let (alpha, beta) = scaling_coefficients(eps_t, splitting.n(), splitting.m())?;
        Ok(Self {
            splitting,
            eps_t,
            alpha,
            beta,
            method,
        })
    }

    pub fn total_time(&self, epsilon: f64) -> f64 {
        self.eps_t / epsilon
    }

    pub fn row(&self) -> TableRow {
        TableRow {
            m: self.splitting.m(),
            n_per_m: self.splitting.n() as f64 / self.splitting.m() as f64,
            eps_t: self.eps_t,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

fn serialize_exponent<S: Serializer>(value: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_infinite() {
        ser.serialize_str("inf")
    } else {
        ser.serialize_f64(*value)
    }
}

/// Integrand of the running-time integral (without the `1/ε`).
pub fn eps_t_density(splitting: &Splitting, schedule: &Schedule, s: f64) -> Result<f64> {
    let (f, g) = schedule.eval(s);
    if f == 0.0 && g == 0.0 {
        return Err(Error::SingularSchedule { s });
    }
    let (df, dg) = schedule.derivative(s);
    let mut sum = 0.0;
    for dim in splitting.block_dims() {
        let w = subsystem_gap(dim, f, g)?;
        sum += (dim - 1.0) / (dim * dim) / w.powi(6);
    }
    Ok((df * g - dg * f).abs() * sum.sqrt())
}

fn breakpoints(splitting: &Splitting, schedule: &Schedule) -> Result<Vec<f64>> {
    let mut pts = schedule.knots();
    pts.push(gap_minimum(splitting, schedule)?.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

fn integrate_density(
    splitting: &Splitting,
    schedule: &Schedule,
    pts: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let density = |s: f64| eps_t_density(splitting, schedule, s).unwrap_or(f64::NAN);
    Ok(integrate(density, pts, rel_tol, 0.0, MAX_PANELS)?.value)
}

/// Schedule-optimal `εT` by adaptive quadrature, for any splitting.
pub fn running_time_integral(
    splitting: &Splitting,
    schedule: &Schedule,
    precision: &Precision,
) -> Result<RunTimeResult> {
    precision.validate()?;
    let pts = breakpoints(splitting, schedule)?;
    let eps_t = integrate_density(splitting, schedule, &pts, precision.quad_tol)?;
    RunTimeResult::new(splitting.clone(), eps_t, Method::Quadrature)
}

/// `sqrt(m (2^{n/m} - 1))`: the equal-split, linear-schedule value.
pub fn closed_form_eps_t(n: usize, m: usize) -> Result<f64> {
    let split = Splitting::equal(n, m)?;
    let dim = split.block_dims()[0];
    Ok((m as f64 * (dim - 1.0)).sqrt())
}

/// `εT = sqrt(n)` for `n` one-qubit clauses.
pub fn max_structured_time(n: usize) -> Result<RunTimeResult> {
    let split = Splitting::maximal(n)?;
    RunTimeResult::new(split, (n as f64).sqrt(), Method::MaxStructured)
}

/// Exponents defined by `εT = (sqrt(m)·sqrt(2^{n/m}))^α = (sqrt(m))^β`.
/// `β` is infinite for `m = 1`.
pub fn scaling_coefficients(eps_t: f64, n: usize, m: usize) -> Result<(f64, f64)> {
    if !(eps_t > 0.0) {
        return Err(Error::Domain(format!(
            "eps_T must be positive, got {eps_t}"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::Domain("n and m must be positive".into()));
    }
    let ln_m = (m as f64).ln();
    let alpha = 2.0 * eps_t.ln() / (ln_m + n as f64 / m as f64 * std::f64::consts::LN_2);
    let beta = if m == 1 {
        f64::INFINITY
    } else {
        2.0 * eps_t.ln() / ln_m
    };
    Ok((alpha, beta))
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// One row per divisor `m` of `n`, computed by quadrature with the linear schedule.
pub fn reproduce_table(n: usize, precision: &Precision) -> Result<Vec<RunTimeResult>> {
    if n == 0 || n > MAX_TABLE_QUBITS {
        return Err(Error::Domain(format!(
            "table needs 1 <= n <= {MAX_TABLE_QUBITS}, got {n}"
        )));
    }
    let linear = Schedule::linear();
    divisors(n)
        .into_par_iter()
        .map(|m| running_time_integral(&Splitting::equal(n, m)?, &linear, precision))
        .collect()
}

/// Row of a running-time table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub m: usize,
    pub n_per_m: f64,
    #[serde(rename = "eps_T")]
    pub eps_t: f64,
    pub alpha: f64,
    #[serde(serialize_with = "serialize_exponent")]
    pub beta: f64,
}

/// Rounds half away from zero to `digits` decimals.
pub fn round_half_away(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

fn fmt_exponent(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{:.4}", round_half_away(x, 4))
    }
}

fn fmt_n_per_m(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as u64)
    } else {
        format!("{x}")
    }
}

/// Display table: `eps_T` to 2 decimals, exponents to 4.
pub fn table_csv(rows: &[RunTimeResult]) -> String {
    let mut out = String::from("m,n_per_m,eps_T,alpha,beta\n");
    for r in rows.iter().map(RunTimeResult::row) {
        writeln!(
            out,
            "{},{},{:.2},{},{}",
            r.m,
            fmt_n_per_m(r.n_per_m),
            round_half_away(r.eps_t, 2),
            fmt_exponent(r.alpha),
            fmt_exponent(r.beta)
        )
        .unwrap();
    }
    out
}

/// Unrounded rows as a JSON array.
pub fn table_json(rows: &[RunTimeResult]) -> String {
    let rows: Vec<TableRow> = rows.iter().map(RunTimeResult::row).collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
}

/// Time reparameterization `s(t)` that saturates the adiabaticity bound at
/// every instant. Stored as `t(s)` on a node grid with exact slopes
/// `dt/ds`, interpolated by cubic Hermite segments.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSchedule {
    base: Schedule,
    splitting: Splitting,
    epsilon: f64,
    s_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
    dtds: Vec<f64>,
}

const REFINE_PASSES: usize = 4;

/// Builds the saturated schedule on at least `grid` nodes. Segments carrying
/// more than `T / grid` of the total time are subdivided.
pub fn optimal_schedule(
    splitting: &Splitting,
    base: &Schedule,
    precision: &Precision,
    grid: usize,
) -> Result<OptimalSchedule> {
    precision.validate()?;
    if grid < 100 {
        return Err(Error::Domain(format!(
            "schedule grid must be at least 100, got {grid}"
        )));
    }
    let eps = precision.epsilon;
    let mut s_nodes: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    s_nodes.extend(breakpoints(splitting, base)?);
    s_nodes.sort_by(f64::total_cmp);
    s_nodes.dedup();

    let segment_eps_t =
        |a: f64, b: f64| integrate_density(splitting, base, &[a, b], precision.quad_tol);

    let mut pieces: Vec<f64> = s_nodes
        .windows(2)
        .map(|w| segment_eps_t(w[0], w[1]))
        .collect::<Result<_>>()?;

    for _ in 0..REFINE_PASSES {
        let total: f64 = pieces.iter().sum();
        let target = total / grid as f64;
        if pieces.iter().all(|&p| p <= 1.5 * target) {
            break;
        }
        let mut next_nodes = vec![s_nodes[0]];
        let mut next_pieces = Vec::with_capacity(pieces.len());
        for (k, &piece) in pieces.iter().enumerate() {
            let (a, b) = (s_nodes[k], s_nodes[k + 1]);
            let parts = (piece / target).ceil().max(1.0) as usize;
            if parts == 1 {
                next_nodes.push(b);
                next_pieces.push(piece);
                continue;
            }
            for j in 1..=parts {
                let lo = a + (b - a) * (j - 1) as f64 / parts as f64;
                let hi = if j == parts {
                    b
                } else {
                    a + (b - a) * j as f64 / parts as f64
                };
                next_nodes.push(hi);
                next_pieces.push(segment_eps_t(lo, hi)?);
            }
        }
        s_nodes = next_nodes;
        pieces = next_pieces;
    }

    let mut t_nodes = Vec::with_capacity(s_nodes.len());
    let mut acc = 0.0;
    t_nodes.push(0.0);
    for p in &pieces {
        acc += p / eps;
        t_nodes.push(acc);
    }
    let dtds = s_nodes
        .iter()
        .map(|&s| eps_t_density(splitting, base, s).map(|d| d / eps))
        .collect::<Result<Vec<_>>>()?;

    Ok(OptimalSchedule {
        base: base.clone(),
        splitting: splitting.clone(),
        epsilon: eps,
        s_nodes,
        t_nodes,
        dtds,
    })
}

impl OptimalSchedule {
    pub fn total_time(&self) -> f64 {
        *self.t_nodes.last().expect("non-empty")
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &Schedule {
        &self.base
    }

    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    pub fn len(&self) -> usize {
        self.s_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_nodes.is_empty()
    }

    /// `(s, t, dt/ds)` at every node.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.s_nodes
            .iter()
            .zip(&self.t_nodes)
            .zip(&self.dtds)
            .map(|((&s, &t), &d)| (s, t, d))
    }

    fn eval_t(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let k = segment(&self.s_nodes, s);
        hermite(
            self.s_nodes[k],
            self.s_nodes[k + 1],
            self.t_nodes[k],
            self.t_nodes[k + 1],
            self.dtds[k],
            self.dtds[k + 1],
            s,
        )
    }

    pub fn t_at(&self, s: f64) -> f64 {
        self.eval_t(s).0
    }

    /// Inverse of [`t_at`](Self::t_at).
    pub fn s_at(&self, t: f64) -> f64 {
        let total = self.total_time();
        if t <= 0.0 {
            return 0.0;
        }
        if t >= total {
            return 1.0;
        }
        let k = segment(&self.t_nodes, t);
        let (mut lo, mut hi) = (self.s_nodes[k], self.s_nodes[k + 1]);
        let (t_lo, t_hi) = (self.t_nodes[k], self.t_nodes[k + 1]);
        if t_hi <= t_lo {
            return lo;
        }
        let mut s = lo + (hi - lo) * (t - t_lo) / (t_hi - t_lo);
        for _ in 0..100 {
            let (v, d) = self.eval_t(s);
            let r = v - t;
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            if r.abs() <= 1e-15 * total.max(1.0) || hi - lo <= 1e-16 {
                break;
            }
            let newton = s - r / d;
            s = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        s
    }

    /// `ds/dt` at the node-grid point reached at time `t`.
    pub fn ds_dt_at(&self, t: f64) -> f64 {
        self.ds_dt_at_s(self.s_at(t))
    }

    pub fn ds_dt_at_s(&self, s: f64) -> f64 {
        1.0 / self.eval_t(s).1
    }

    /// CSV with columns `t, s, ds_dt` at every node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,ds_dt\n");
        for (s, t, d) in self.nodes() {
            writeln!(out, "{t},{s},{}", 1.0 / d).unwrap();
        }
        out
    }
}
