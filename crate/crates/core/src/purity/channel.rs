//! Kraus channels, filtering operations and their JSON form.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::spectra::json::{matrix_from_rows, rows_from_matrix, JsonRows};
use crate::spectra::{c, eigh_matrix, matrix_fn_raw, CMat, HermitianOperator, MatrixFunction};

/// Slack on `Σ Aᵢ†Aᵢ ≤ 𝕀` and on trace preservation.
pub const KRAUS_TOL: f64 = 1e-9;
/// Slack on the spectrum of filter operators.
pub const FILTER_TOL: f64 = 1e-10;

/// Completely positive, trace non-increasing map `ρ ↦ Σ Aᵢ ρ Aᵢ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    elements: Vec<CMat>,
    in_dim: usize,
    out_dim: usize,
    trace_preserving: bool,
}

impl KrausChannel {
    /// Validates shapes and `Σ Aᵢ†Aᵢ ≤ 𝕀 + KRAUS_TOL`; trace preservation
    /// is detected, not requested.
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::param("a channel needs at least one Kraus element"));
        };
        let (out_dim, in_dim) = first.shape();
        if let Some((i, a)) = elements
            .iter()
            .enumerate()
            .find(|(_, a)| a.shape() != (out_dim, in_dim))
        {
            return Err(Error::shape(format!(
                "Kraus element {i} is {}x{}, expected {out_dim}x{in_dim}",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut sum = CMat::zeros(in_dim, in_dim);
        for a in &elements {
            sum += a.adjoint() * a;
        }
        let s = eigh_matrix(&crate::spectra::symmetrize(&sum))?;
        if s.max() > 1.0 + KRAUS_TOL {
            return Err(Error::param(format!(
                "Kraus elements increase trace: largest eigenvalue of sum A^dag A is {:.12}",
                s.max()
            )));
        }
        let trace_preserving = (sum - CMat::identity(in_dim, in_dim)).camax() <= KRAUS_TOL;
        Ok(Self {
            elements,
            in_dim,
            out_dim,
            trace_preserving,
        })
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![CMat::identity(d, d)]).expect("identity is a channel")
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::shape(format!(
                "channel input is {}-dimensional, got {}x{}",
                self.in_dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut out = CMat::zeros(self.out_dim, self.out_dim);
        for a in &self.elements {
            out += a * rho * a.adjoint();
        }
        Ok(out)
    }

    /// `Σ Aᵢ†Aᵢ`.
    pub fn effect(&self) -> CMat {
        let mut sum = CMat::zeros(self.in_dim, self.in_dim);
        for a in &self.elements {
            sum += a.adjoint() * a;
        }
        sum
    }

    /// `Λ₁ ⊠ Λ₂` with Kraus elements `Aᵢ ⊗ Bⱼ` (first factor most significant).
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut elements = Vec::with_capacity(self.elements.len() * other.elements.len());
        for a in &self.elements {
            for b in &other.elements {
                elements.push(a.kronecker(b));
            }
        }
        KrausChannel {
            elements,
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(ChannelPayload {
            kraus: self.elements.iter().map(rows_from_matrix).collect(),
            in_dim: self.in_dim,
            out_dim: self.out_dim,
        })
        .expect("channel serializes")
    }

    /// Accepts `{"kraus": [...], "in_dim": n, "out_dim": m}` where each
    /// element is either a bare row list or an object with a `matrix` field.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let dim = |field: &str| -> Result<usize> {
            v.get(field)
                .ok_or_else(|| Error::schema(field, "missing"))?
                .as_u64()
                .map(|d| d as usize)
                .ok_or_else(|| Error::schema(field, "expected a non-negative integer"))
        };
        let (in_dim, out_dim) = (dim("in_dim")?, dim("out_dim")?);
        let list = v
            .get("kraus")
            .ok_or_else(|| Error::schema("kraus", "missing"))?
            .as_array()
            .ok_or_else(|| Error::schema("kraus", "expected an array of matrices"))?;
        let mut elements = Vec::with_capacity(list.len());
        for (i, item) in list.iter().enumerate() {
            let field = format!("kraus[{i}]");
            let rows_v = item.get("matrix").unwrap_or(item);
            let rows: JsonRows = serde_json::from_value(rows_v.clone())
                .map_err(|e| Error::schema(field.clone(), e.to_string()))?;
            let m = matrix_from_rows(&rows, &field)?;
            if m.shape() != (out_dim, in_dim) {
                return Err(Error::schema(
                    field,
                    format!(
                        "element is {}x{}, expected {out_dim}x{in_dim}",
                        m.nrows(),
                        m.ncols()
                    ),
                ));
            }
            elements.push(m);
        }
        Self::new(elements).map_err(|e| Error::schema("kraus", e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelPayload {
    kraus: Vec<JsonRows>,
    in_dim: usize,
    out_dim: usize,
}

/// `ρ ↦ Tr_A[M^{p/2} ρ M^{p/2}]` with `0 ≤ M ≤ 𝕀` and `0 < p < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOp {
    m: HermitianOperator,
    exponent_p: f64,
}

pub(crate) fn require_unit_interval(h: &CMat, what: &str) -> Result<()> {
    let s = eigh_matrix(h)?;
    if s.min() < -FILTER_TOL || s.max() > 1.0 + FILTER_TOL {
        return Err(Error::domain(format!(
            "{what}: spectrum [{:.6e}, {:.12}] not inside [0, 1]",
            s.min(),
            s.max()
        )));
    }
    Ok(())
}

impl FilterOp {
    pub fn new(m: HermitianOperator, exponent_p: f64) -> Result<Self> {
        m.dims().require_single("filter operation")?;
        if !(exponent_p > 0.0 && exponent_p < 1.0) {
            return Err(Error::domain(format!(
                "filter exponent p = {exponent_p} must lie in (0, 1)"
            )));
        }
        require_unit_interval(m.matrix(), "filter operator")?;
        Ok(Self { m, exponent_p })
    }

    pub fn m(&self) -> &HermitianOperator {
        &self.m
    }

    pub fn exponent_p(&self) -> f64 {
        self.exponent_p
    }

    /// `1/(1−p)`.
    pub fn conjugate_index(&self) -> f64 {
        1.0 / (1.0 - self.exponent_p)
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        let k = matrix_fn_raw(
            self.m.matrix(),
            MatrixFunction::Power(self.exponent_p / 2.0),
        )?;
        block_row_channel(&k, self.m.dims().dim_a, self.m.dims().dim_b)
    }
}

/// Kraus elements `(⟨a| ⊗ 𝕀_B) K`, one per basis vector of `H_A`; zero
/// blocks are kept so the element count is always `dA`.
pub(crate) fn block_row_channel(k: &CMat, dim_a: usize, dim_b: usize) -> Result<KrausChannel> {
    let elements = (0..dim_a)
        .map(|a| k.rows(a * dim_b, dim_b).into_owned())
        .collect();
    KrausChannel::new(elements)
}

/// Kraus form of `ρ ↦ Tr_A[M^{p/2} ρ M^{p/2}]`.
pub fn filter_channel(m: &HermitianOperator, p: f64) -> Result<KrausChannel> {
    FilterOp::new(m.clone(), p)?.channel()
}

/// `ρ ↦ (Tr[ρ]𝕀 − ρᵀ)/(d−1)` with Kraus elements
/// `(|i⟩⟨j| − |j⟩⟨i|)/√(d−1)`, `i < j`.
pub fn werner_holevo_channel(d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::param(format!(
            "Werner-Holevo channel needs d >= 2, got {d}"
        )));
    }
    let s = 1.0 / ((d - 1) as f64).sqrt();
    let mut elements = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut a = CMat::zeros(d, d);
            a[(i, j)] = c(s, 0.0);
            a[(j, i)] = c(-s, 0.0);
            elements.push(a);
        }
    }
    KrausChannel::new(elements)
}

/// Things that define a channel for the purity routines.
pub trait ToChannel {
    fn to_channel(&self) -> Result<KrausChannel>;
}

impl ToChannel for KrausChannel {
    fn to_channel(&self) -> Result<KrausChannel> {
        Ok(self.clone())
    }
}

impl ToChannel for FilterOp {
    fn to_channel(&self) -> Result<KrausChannel> {
        self.channel()
    }
}
