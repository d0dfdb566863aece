//! JSON schemas for geometry, results, solver problems, and settings.
//!
//! Matrices are row-major nested arrays; all numbers are IEEE-754 doubles.

use mvee_core::geometry::{Ellipsoid, Polytope, QuadSet};
use mvee_core::mve::Certificate;
use mvee_core::sdp::{self, ProblemParts, Settings};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub fn mat_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

pub fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, String> {
    if rows.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("{what}: ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipsoidJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl From<&Ellipsoid> for EllipsoidJson {
    fn from(e: &Ellipsoid) -> Self {
        EllipsoidJson { a: mat_to_rows(e.a()), b: e.b().as_slice().to_vec() }
    }
}

impl EllipsoidJson {
    pub fn to_ellipsoid(&self) -> Result<Ellipsoid, String> {
        let a = rows_to_mat(&self.a, "A")?;
        let b = DVector::from_row_slice(&self.b);
        Ellipsoid::new(a, b).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadJson {
    #[serde(rename = "Q")]
    pub q_mat: Vec<Vec<f64>>,
    pub q: Vec<f64>,
}

/// Polytope `{Sx <= t}`, optionally with quadratic rows (a quad set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetJson {
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quads: Vec<QuadJson>,
    /// Interior witness, required when quadratic rows are present and the
    /// polytope part alone cannot provide one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl SetJson {
    pub fn from_polytope(p: &Polytope) -> Self {
        SetJson { s: mat_to_rows(p.s()), t: p.t().as_slice().to_vec(), quads: Vec::new(), witness: None }
    }

    pub fn dim(&self) -> usize {
        if !self.s.is_empty() {
            self.s[0].len()
        } else if let Some(q) = self.quads.first() {
            q.q.len()
        } else {
            0
        }
    }

    pub fn to_polytope(&self) -> Result<Polytope, String> {
        let k = self.dim();
        let s = if self.s.is_empty() {
            DMatrix::zeros(0, k)
        } else {
            rows_to_mat(&self.s, "S")?
        };
        let t = DVector::from_row_slice(&self.t);
        Polytope::new(s, t).map_err(|e| e.to_string())
    }

    pub fn to_quadset(&self) -> Result<QuadSet, String> {
        let base = self.to_polytope()?;
        let mut quads = Vec::with_capacity(self.quads.len());
        for q in &self.quads {
            quads.push((rows_to_mat(&q.q_mat, "Q")?, DVector::from_row_slice(&q.q)));
        }
        let witness = match &self.witness {
            Some(w) => DVector::from_row_slice(w),
            None => {
                // fall back to the polytope's interior, then the first
                // quadratic row's center
                let vertexed = base.clone().with_vertices().ok();
                match vertexed.as_ref().and_then(|p| p.interior_point()) {
                    Some(c) => c,
                    None => {
                        let (qm, qv) = quads
                            .first()
                            .ok_or_else(|| "quad set needs a witness".to_string())?;
                        let qs = 0.5 * (qm + qm.transpose());
                        -(qs.cholesky().ok_or_else(|| "witness underdetermined".to_string())?
                            .solve(qv))
                    }
                }
            }
        };
        QuadSet::new(base, quads, witness).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(rename = "N")]
    pub n: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    pub g: Vec<f64>,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa: Vec<Vec<f64>>,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            n: mat_to_rows(&c.n),
            f: mat_to_rows(&c.f),
            g: c.g.as_slice().to_vec(),
            h: c.h,
            lambda: c.lambda.clone(),
            alpha: c
                .alpha
                .iter()
                .map(|row| row.iter().map(|v| v.as_slice().to_vec()).collect())
                .collect(),
            kappa: c.kappa.clone(),
        }
    }
}

/// Output of a single circumscription solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MveResultJson {
    pub method: String,
    pub ellipsoid: EllipsoidJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    /// -log det(A) at the solution.
    pub objective: f64,
    pub volume: f64,
    pub radius: f64,
    pub wall_time_ms: f64,
}

/// Flat solver settings (all fields optional; unset fields keep defaults).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SettingsJson {
    pub mu0: Option<f64>,
    pub mu_min: Option<f64>,
    pub mu_factor: Option<f64>,
    pub newton_tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub max_newton_stage: Option<usize>,
    pub feas_tol: Option<f64>,
    pub stall_tol: Option<f64>,
    pub big_m: Option<f64>,
    pub omega_pad: Option<f64>,
}

impl SettingsJson {
    pub fn apply(&self, base: Settings) -> Settings {
        let mut s = base;
        if let Some(v) = self.mu0 {
            s.mu0 = v;
        }
        if let Some(v) = self.mu_min {
            s.mu_min = v;
        }
        if let Some(v) = self.mu_factor {
            s.mu_factor = v;
        }
        if let Some(v) = self.newton_tol {
            s.newton_tol = v;
        }
        if let Some(v) = self.max_newton {
            s.max_newton = v;
        }
        if let Some(v) = self.max_newton_stage {
            s.max_newton_stage = v;
        }
        if let Some(v) = self.feas_tol {
            s.feas_tol = v;
        }
        if let Some(v) = self.stall_tol {
            s.stall_tol = v;
        }
        if let Some(v) = self.big_m {
            s.big_m = v;
        }
        if let Some(v) = self.omega_pad {
            s.omega_pad = v;
        }
        s
    }
}

// --- declarative solver problems, for golden tests ---

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpVarJson {
    pub name: String,
    /// "sym" | "vec" | "scalar"
    pub kind: String,
    #[serde(default)]
    pub dim: usize,
    #[serde(default)]
    pub nonneg: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpBlockJson {
    pub dim: usize,
    #[serde(default)]
    pub from_soc: bool,
    /// [row, col, value] with col <= row
    pub constant: Vec<(usize, usize, f64)>,
    /// slot -> entry list
    pub coeffs: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpProblemJson {
    pub vars: Vec<SdpVarJson>,
    pub blocks: Vec<SdpBlockJson>,
    #[serde(default)]
    pub ineqs: Vec<(Vec<(usize, f64)>, f64)>,
    #[serde(default)]
    pub eqs: Vec<(Vec<(usize, f64)>, f64)>,
    #[serde(default)]
    pub logdet: Vec<usize>,
    #[serde(default)]
    pub cost: Vec<(usize, f64)>,
    #[serde(default)]
    pub cost_offset: f64,
}

impl SdpProblemJson {
    pub fn from_problem(p: &sdp::SdpProblem) -> Self {
        let parts = p.to_parts();
        SdpProblemJson {
            vars: parts
                .vars
                .iter()
                .map(|v| {
                    let (kind, dim) = match v.kind {
                        sdp::VarKind::SymMatrix { dim } => ("sym", dim),
                        sdp::VarKind::Vector { dim } => ("vec", dim),
                        sdp::VarKind::Scalar => ("scalar", 0),
                    };
                    SdpVarJson {
                        name: v.name.clone(),
                        kind: kind.to_string(),
                        dim,
                        nonneg: v.nonneg,
                    }
                })
                .collect(),
            blocks: parts
                .blocks
                .iter()
                .map(|b| SdpBlockJson {
                    dim: b.dim,
                    from_soc: b.from_soc,
                    constant: b.constant.clone(),
                    coeffs: b.coeffs.clone(),
                })
                .collect(),
            ineqs: parts.ineqs.clone(),
            eqs: parts.eqs.clone(),
            logdet: parts.logdet.clone(),
            cost: parts.cost.clone(),
            cost_offset: parts.cost_offset,
        }
    }

    pub fn to_problem(&self) -> Result<sdp::SdpProblem, String> {
        let vars = self
            .vars
            .iter()
            .map(|v| {
                let kind = match v.kind.as_str() {
                    "sym" => sdp::VarKind::SymMatrix { dim: v.dim },
                    "vec" => sdp::VarKind::Vector { dim: v.dim },
                    "scalar" => sdp::VarKind::Scalar,
                    other => return Err(format!("unknown variable kind {other:?}")),
                };
                Ok(sdp::VarPart { name: v.name.clone(), kind, nonneg: v.nonneg })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let parts = ProblemParts {
            vars,
            blocks: self
                .blocks
                .iter()
                .map(|b| sdp::BlockPart {
                    dim: b.dim,
                    from_soc: b.from_soc,
                    constant: b.constant.clone(),
                    coeffs: b.coeffs.clone(),
                })
                .collect(),
            ineqs: self.ineqs.clone(),
            eqs: self.eqs.clone(),
            logdet: self.logdet.clone(),
            cost: self.cost.clone(),
            cost_offset: self.cost_offset,
        };
        sdp::SdpProblem::from_parts(&parts).map_err(|e| e.to_string())
    }
}
