use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::numeric::{MultiPoly, C64};

/// Affine chart coordinates `(a, b)` of one `p`-plane
/// `{x_i = Σ_j a_i^j y_j + b_i}` in `ℂ^{n+p}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartRepr", into = "ChartRepr")]
pub struct PlaneChart {
    n: usize,
    p: usize,
    a: Vec<Vec<C64>>,
    b: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct ChartRepr {
    n: usize,
    p: usize,
    a: Vec<Vec<C64>>,
    b: Vec<C64>,
}

impl TryFrom<ChartRepr> for PlaneChart {
    type Error = GeometryError;
    fn try_from(r: ChartRepr) -> Result<Self, Self::Error> {
        let chart = PlaneChart::new(r.a, r.b)?;
        if chart.n != r.n || chart.p != r.p {
            return Err(GeometryError::DimensionMismatch(format!(
                "declared (n, p) = ({}, {}) but matrices give ({}, {})",
                r.n, r.p, chart.n, chart.p
            )));
        }
        Ok(chart)
    }
}

impl From<PlaneChart> for ChartRepr {
    fn from(c: PlaneChart) -> Self {
        ChartRepr {
            n: c.n,
            p: c.p,
            a: c.a,
            b: c.b,
        }
    }
}

impl PlaneChart {
    /// `a` is `n × p` (row `i` holds `a_i^1 … a_i^p`), `b` has length `n`.
    pub fn new(a: Vec<Vec<C64>>, b: Vec<C64>) -> Result<Self, GeometryError> {
        let n = b.len();
        if n == 0 || a.len() != n {
            return Err(GeometryError::DimensionMismatch(format!(
                "a has {} rows, b has {} entries",
                a.len(),
                n
            )));
        }
        let p = a[0].len();
        if p == 0 || a.iter().any(|row| row.len() != p) {
            return Err(GeometryError::DimensionMismatch("ragged or empty a matrix".into()));
        }
        Ok(PlaneChart { n, p, a, b })
    }

    /// The plane `x = b` (all `a` zero): the fiber of the base projection.
    pub fn vertical(p: usize, b: Vec<C64>) -> Self {
        let n = b.len();
        PlaneChart {
            n,
            p,
            a: vec![vec![C64::new(0.0, 0.0); p]; n],
            b,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn a(&self, i: usize, j: usize) -> C64 {
        self.a[i][j]
    }

    pub fn b(&self, i: usize) -> C64 {
        self.b[i]
    }

    pub fn is_vertical(&self) -> bool {
        self.a.iter().flatten().all(|&z| z == C64::new(0.0, 0.0))
    }

    /// Number of chart parameters, `n (p + 1)`.
    pub fn param_count(n: usize, p: usize) -> usize {
        n * (p + 1)
    }

    /// Index of parameter `a_i^j` (`j < p`) or `b_i` (`j == p`) in the flat
    /// parameter vector, which is ordered slot by slot:
    /// `(a_1^1, …, a_1^p, b_1, a_2^1, …, b_n)`.
    pub fn param_index(p: usize, i: usize, j: usize) -> usize {
        i * (p + 1) + j
    }

    pub fn params(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(Self::param_count(self.n, self.p));
        for i in 0..self.n {
            out.extend_from_slice(&self.a[i]);
            out.push(self.b[i]);
        }
        out
    }

    pub fn from_params(n: usize, p: usize, params: &[C64]) -> Result<Self, GeometryError> {
        if params.len() != Self::param_count(n, p) {
            return Err(GeometryError::DimensionMismatch(format!(
                "expected {} chart parameters, got {}",
                Self::param_count(n, p),
                params.len()
            )));
        }
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for i in 0..n {
            let slot = &params[i * (p + 1)..(i + 1) * (p + 1)];
            a.push(slot[..p].to_vec());
            b.push(slot[p]);
        }
        PlaneChart::new(a, b)
    }

    /// The plane equations `l_i` as polynomials over `vars = (x…, y…)`.
    pub fn plane_equations(&self, vars: &[String]) -> Vec<MultiPoly> {
        (0..self.n)
            .map(|i| {
                let mut terms = Vec::with_capacity(self.p + 2);
                let mut e = vec![0u32; vars.len()];
                e[i] = 1;
                terms.push((e, C64::new(1.0, 0.0)));
                for j in 0..self.p {
                    let mut e = vec![0u32; vars.len()];
                    e[self.n + j] = 1;
                    terms.push((e, -self.a[i][j]));
                }
                terms.push((vec![0u32; vars.len()], -self.b[i]));
                MultiPoly::from_terms(vars, terms)
            })
            .collect()
    }

    /// `x_i = Σ_j a_i^j y_j + b_i` as a polynomial over `vars`.
    pub fn base_coordinate(&self, vars: &[String], i: usize) -> MultiPoly {
        let mut terms = Vec::with_capacity(self.p + 1);
        for j in 0..self.p {
            let mut e = vec![0u32; vars.len()];
            e[self.n + j] = 1;
            terms.push((e, self.a[i][j]));
        }
        terms.push((vec![0u32; vars.len()], self.b[i]));
        MultiPoly::from_terms(vars, terms)
    }
}
