//! Declarative dense log-det semidefinite programming.
//!
//! Models problems of the form
//!
//! ```text
//!   minimize  -sum_v log det X_v  +  c^T vars
//!   subject to
//!     affine PSD blocks        B_k(vars) >= 0
//!     second-order-cone rows   ||u(vars)|| <= w(vars)   (arrow embedding)
//!     linear (in)equalities, elementwise-nonnegative variables
//! ```
//!
//! and solves them with a path-following barrier method ([`solve`]). SOC
//! rows are embedded as arrow PSD blocks `[[w I, u],[u^T, w]]`. Linear
//! equalities are eliminated by null-space substitution before the Newton
//! loop. Every solve carries an automatic big-M phase-I shift: an internal
//! nonnegative scalar added to all constraint slacks, penalized in the
//! objective, so any warm start may be used.

mod solve;

pub use solve::solve;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::DMatrix;

use crate::fp;
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub enum SdpError {
    DimensionMismatch { context: &'static str, expected: usize, got: usize },
    ObjectiveSetTwice,
    ObjectiveUnset,
    NotSymMatrixVar,
    EqualitiesInconsistent,
    WarmStartLength { expected: usize, got: usize },
    LogDetNotPositive(String),
}

impl fmt::Display for SdpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SdpError::DimensionMismatch { context, expected, got } => {
                write!(f, "{context}: dimension mismatch (expected {expected}, got {got})")
            }
            SdpError::ObjectiveSetTwice => write!(f, "objective set twice"),
            SdpError::ObjectiveUnset => write!(f, "objective unset"),
            SdpError::NotSymMatrixVar => write!(f, "log-det objective needs a symmetric matrix variable"),
            SdpError::EqualitiesInconsistent => write!(f, "linear equalities are inconsistent"),
            SdpError::WarmStartLength { expected, got } => {
                write!(f, "warm start has {got} slots, problem has {expected}")
            }
            SdpError::LogDetNotPositive(name) => {
                write!(f, "log-det variable {name} is not positive definite at the start point")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SdpError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    SymMatrix { dim: usize },
    Vector { dim: usize },
    Scalar,
}

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub name: String,
    pub kind: VarKind,
    pub offset: usize,
    pub len: usize,
    pub nonneg: bool,
}

/// Handle to a registered variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef(pub(crate) usize);

/// Handle to a PSD block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRef(pub(crate) usize);

/// Affine scalar expression over flattened variable slots.
#[derive(Debug, Clone, Default)]
pub struct AffineExpr {
    pub(crate) terms: Vec<(usize, f64)>,
    pub(crate) constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        AffineExpr { terms: Vec::new(), constant: c }
    }

    pub fn plus(mut self, other: &AffineExpr) -> Self {
        self.constant += other.constant;
        self.terms.extend(other.terms.iter().copied());
        self
    }

    pub fn minus(mut self, other: &AffineExpr) -> Self {
        self.constant -= other.constant;
        self.terms.extend(other.terms.iter().map(|&(s, c)| (s, -c)));
        self
    }

    pub fn scaled(mut self, f: f64) -> Self {
        self.constant *= f;
        for t in &mut self.terms {
            t.1 *= f;
        }
        self
    }

    pub fn add_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub(crate) fn eval(&self, v: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(s, c)| c * v[s]).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub dim: usize,
    pub c0: DMatrix<f64>,
    /// slot -> dense symmetric coefficient matrix
    pub coeffs: Vec<(usize, DMatrix<f64>)>,
    /// SOC rows are tagged for reporting
    pub from_soc: bool,
}

impl Block {
    pub(crate) fn eval(&self, v: &[f64], shift: f64) -> DMatrix<f64> {
        let mut m = self.c0.clone();
        for (slot, c) in &self.coeffs {
            let x = v[*slot];
            if x != 0.0 {
                m.zip_apply(c, |mi, ci| *mi += x * ci);
            }
        }
        for i in 0..self.dim {
            m[(i, i)] += shift;
        }
        m
    }

    fn coeff_mut(&mut self, slot: usize) -> &mut DMatrix<f64> {
        if let Some(pos) = self.coeffs.iter().position(|(s, _)| *s == slot) {
            return &mut self.coeffs[pos].1;
        }
        self.coeffs.push((slot, DMatrix::zeros(self.dim, self.dim)));
        let last = self.coeffs.len() - 1;
        &mut self.coeffs[last].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    MaxIterations,
    NumericallyDegenerate,
    InfeasibleDetected,
}

/// Feasibility and stationarity diagnostics for a candidate solution.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Smallest eigenvalue per PSD block (SOC arrows included).
    pub block_min_eig: Vec<f64>,
    /// Minimum over `block_min_eig`.
    pub min_eig: f64,
    /// Largest violation among linear equalities, inequalities and
    /// nonnegative slots.
    pub max_lin_violation: f64,
    /// Barrier-free KKT stationarity proxy (analytic, finite-difference
    /// cross-checked).
    pub stationarity: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    /// User objective: log-det terms plus linear cost, phase-I penalty
    /// excluded.
    pub objective: f64,
    pub values: Vec<f64>,
    pub residuals: ResidualReport,
    pub newton_iters: usize,
    /// Final phase-I shift (0 up to solver tolerance when feasible).
    pub omega: f64,
    /// Objective change over the last barrier stage.
    pub last_stage_delta: f64,
}

/// Solver settings; a flat bundle so the CLI can override any field.
#[derive(Debug, Clone)]
pub struct Settings {
    /// Initial barrier weight.
    pub mu0: f64,
    /// Final barrier weight; stages shrink `mu` by `mu_factor` until here.
    pub mu_min: f64,
    pub mu_factor: f64,
    /// Newton decrement threshold ( lambda^2 / 2 ) per stage.
    pub newton_tol: f64,
    /// Global Newton iteration budget.
    pub max_newton: usize,
    /// Per-stage Newton iteration budget.
    pub max_newton_stage: usize,
    /// Primal feasibility tolerance (min eigenvalue / linear violation).
    pub feas_tol: f64,
    /// Relative objective stall threshold across stages.
    pub stall_tol: f64,
    /// Phase-I penalty weight.
    pub big_m: f64,
    /// Interior pad added to the initial phase-I shift.
    pub omega_pad: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            mu0: 1.0,
            mu_min: 1e-10,
            mu_factor: 0.1,
            newton_tol: 1e-9,
            max_newton: 1200,
            max_newton_stage: 90,
            feas_tol: 1e-7,
            stall_tol: 1e-8,
            big_m: 1e6,
            omega_pad: 1e-3,
        }
    }
}

/// Declarative model under construction; freeze by calling [`solve`].
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub(crate) vars: Vec<VarDef>,
    pub(crate) n_slots: usize,
    pub(crate) blocks: Vec<Block>,
    /// expr >= 0
    pub(crate) ineqs: Vec<AffineExpr>,
    /// expr == 0
    pub(crate) eqs: Vec<AffineExpr>,
    pub(crate) logdet: Vec<usize>,
    pub(crate) cost: Vec<(usize, f64)>,
    pub(crate) cost_offset: f64,
    logdet_set: bool,
}

impl SdpProblem {
    pub fn new() -> Self {
        SdpProblem::default()
    }

    fn push_var(&mut self, name: &str, kind: VarKind, nonneg: bool) -> VarRef {
        let len = match kind {
            VarKind::SymMatrix { dim } => dim * (dim + 1) / 2,
            VarKind::Vector { dim } => dim,
            VarKind::Scalar => 1,
        };
        self.vars.push(VarDef {
            name: String::from(name),
            kind,
            offset: self.n_slots,
            len,
            nonneg,
        });
        self.n_slots += len;
        VarRef(self.vars.len() - 1)
    }

    pub fn sym_matrix_var(&mut self, name: &str, dim: usize) -> VarRef {
        self.push_var(name, VarKind::SymMatrix { dim }, false)
    }

    /// Symmetric matrix variable with every entry constrained nonnegative
    /// (elementwise log barriers).
    pub fn sym_matrix_var_nonneg(&mut self, name: &str, dim: usize) -> VarRef {
        self.push_var(name, VarKind::SymMatrix { dim }, true)
    }

    pub fn vector_var(&mut self, name: &str, dim: usize) -> VarRef {
        self.push_var(name, VarKind::Vector { dim }, false)
    }

    pub fn vector_var_nonneg(&mut self, name: &str, dim: usize) -> VarRef {
        self.push_var(name, VarKind::Vector { dim }, true)
    }

    pub fn scalar_var(&mut self, name: &str) -> VarRef {
        self.push_var(name, VarKind::Scalar, false)
    }

    pub fn scalar_var_nonneg(&mut self, name: &str) -> VarRef {
        self.push_var(name, VarKind::Scalar, true)
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn var_kind(&self, v: VarRef) -> VarKind {
        self.vars[v.0].kind
    }

    /// Slot of symmetric-matrix entry (i, j); (i, j) and (j, i) share it.
    pub fn slot_sym(&self, v: VarRef, i: usize, j: usize) -> usize {
        let d = &self.vars[v.0];
        let dim = match d.kind {
            VarKind::SymMatrix { dim } => dim,
            _ => panic!("slot_sym on non-matrix variable"),
        };
        assert!(i < dim && j < dim);
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        d.offset + i * (i + 1) / 2 + j
    }

    pub fn slot_vec(&self, v: VarRef, i: usize) -> usize {
        let d = &self.vars[v.0];
        match d.kind {
            VarKind::Vector { dim } => assert!(i < dim),
            _ => panic!("slot_vec on non-vector variable"),
        }
        d.offset + i
    }

    pub fn slot_scalar(&self, v: VarRef) -> usize {
        let d = &self.vars[v.0];
        assert!(matches!(d.kind, VarKind::Scalar));
        d.offset
    }

    pub fn expr_sym(&self, v: VarRef, i: usize, j: usize) -> AffineExpr {
        AffineExpr { terms: alloc::vec![(self.slot_sym(v, i, j), 1.0)], constant: 0.0 }
    }

    pub fn expr_vec(&self, v: VarRef, i: usize) -> AffineExpr {
        AffineExpr { terms: alloc::vec![(self.slot_vec(v, i), 1.0)], constant: 0.0 }
    }

    pub fn expr_scalar(&self, v: VarRef) -> AffineExpr {
        AffineExpr { terms: alloc::vec![(self.slot_scalar(v), 1.0)], constant: 0.0 }
    }

    pub fn new_psd_block(&mut self, dim: usize) -> BlockRef {
        self.blocks.push(Block {
            dim,
            c0: DMatrix::zeros(dim, dim),
            coeffs: Vec::new(),
            from_soc: false,
        });
        BlockRef(self.blocks.len() - 1)
    }

    /// Add `coef` to the block constant at (r, c), mirrored to (c, r).
    pub fn block_const(&mut self, b: BlockRef, r: usize, c: usize, coef: f64) {
        let blk = &mut self.blocks[b.0];
        blk.c0[(r, c)] += coef;
        if r != c {
            blk.c0[(c, r)] += coef;
        }
    }

    /// Add `coef * slot` to the block entry at (r, c), mirrored to (c, r).
    pub fn block_slot(&mut self, b: BlockRef, r: usize, c: usize, slot: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let blk = &mut self.blocks[b.0];
        let m = blk.coeff_mut(slot);
        m[(r, c)] += coef;
        if r != c {
            m[(c, r)] += coef;
        }
    }

    /// Place an affine expression at block entry (r, c) (mirrored).
    pub fn block_affine(&mut self, b: BlockRef, r: usize, c: usize, e: &AffineExpr) {
        if e.constant != 0.0 {
            self.block_const(b, r, c, e.constant);
        }
        let terms = e.terms.clone();
        for (slot, coef) in terms {
            self.block_slot(b, r, c, slot, coef);
        }
    }

    /// `||u|| <= w` as the arrow block `[[w I, u],[u^T, w]] >= 0`.
    pub fn add_soc(&mut self, u: &[AffineExpr], w: &AffineExpr) -> BlockRef {
        let m = u.len();
        let b = self.new_psd_block(m + 1);
        for (i, ui) in u.iter().enumerate() {
            self.block_affine(b, i, m, ui);
        }
        for i in 0..=m {
            self.block_affine(b, i, i, w);
        }
        self.blocks[b.0].from_soc = true;
        b
    }

    /// expr >= 0.
    pub fn add_ineq(&mut self, e: AffineExpr) {
        self.ineqs.push(e);
    }

    /// expr == 0.
    pub fn add_eq(&mut self, e: AffineExpr) {
        self.eqs.push(e);
    }

    /// Register `-log det(X)` in the objective; errors if set twice for the
    /// same variable or if `X` is not a symmetric matrix variable.
    pub fn set_logdet_objective(&mut self, v: VarRef) -> Result<(), SdpError> {
        if !matches!(self.vars[v.0].kind, VarKind::SymMatrix { .. }) {
            return Err(SdpError::NotSymMatrixVar);
        }
        if self.logdet.contains(&v.0) || self.logdet_set {
            return Err(SdpError::ObjectiveSetTwice);
        }
        self.logdet.push(v.0);
        self.logdet_set = true;
        Ok(())
    }

    /// Additional log-det terms (for multi-term objectives).
    pub fn add_logdet_term(&mut self, v: VarRef) -> Result<(), SdpError> {
        if !matches!(self.vars[v.0].kind, VarKind::SymMatrix { .. }) {
            return Err(SdpError::NotSymMatrixVar);
        }
        if self.logdet.contains(&v.0) {
            return Err(SdpError::ObjectiveSetTwice);
        }
        self.logdet.push(v.0);
        Ok(())
    }

    /// Add a linear cost term.
    pub fn add_cost(&mut self, e: &AffineExpr) {
        self.cost_offset += e.constant;
        for &(slot, coef) in &e.terms {
            self.cost.push((slot, coef));
        }
    }

    pub fn has_objective(&self) -> bool {
        !self.logdet.is_empty() || !self.cost.is_empty()
    }

    /// Read a symmetric matrix variable out of a slot vector.
    pub fn value_sym(&self, values: &[f64], v: VarRef) -> DMatrix<f64> {
        let dim = match self.vars[v.0].kind {
            VarKind::SymMatrix { dim } => dim,
            _ => panic!("value_sym on non-matrix variable"),
        };
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let x = values[self.slot_sym(v, i, j)];
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    pub fn value_vec(&self, values: &[f64], v: VarRef) -> nalgebra::DVector<f64> {
        let dim = match self.vars[v.0].kind {
            VarKind::Vector { dim } => dim,
            _ => panic!("value_vec on non-vector variable"),
        };
        nalgebra::DVector::from_fn(dim, |i, _| values[self.slot_vec(v, i)])
    }

    pub fn value_scalar(&self, values: &[f64], v: VarRef) -> f64 {
        values[self.slot_scalar(v)]
    }

    /// User objective at a slot vector (`None` if a log-det variable is not
    /// positive definite there).
    pub fn objective_at(&self, values: &[f64]) -> Option<f64> {
        let mut obj = self.cost_offset;
        for &(s, c) in &self.cost {
            obj += c * values[s];
        }
        for &vid in &self.logdet {
            let m = self.value_sym(values, VarRef(vid));
            obj -= linalg::logdet_pd(&m)?;
        }
        Some(obj)
    }

    /// Pure feasibility/stationarity report for a candidate point.
    pub fn residuals(&self, values: &[f64]) -> ResidualReport {
        self.residuals_with_mu(values, 0.0, 0.0)
    }

    /// Flat description of the frozen model, for serialization.
    pub fn to_parts(&self) -> ProblemParts {
        let vars = self
            .vars
            .iter()
            .map(|v| VarPart {
                name: v.name.clone(),
                kind: v.kind,
                nonneg: v.nonneg,
            })
            .collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| BlockPart {
                dim: b.dim,
                from_soc: b.from_soc,
                constant: lower_entries(&b.c0),
                coeffs: b.coeffs.iter().map(|(s, m)| (*s, lower_entries(m))).collect(),
            })
            .collect();
        let lin = |e: &AffineExpr| (e.terms.clone(), e.constant);
        ProblemParts {
            vars,
            blocks,
            ineqs: self.ineqs.iter().map(lin).collect(),
            eqs: self.eqs.iter().map(lin).collect(),
            logdet: self.logdet.clone(),
            cost: self.cost.clone(),
            cost_offset: self.cost_offset,
        }
    }

    /// Rebuild a model from its flat description; inverse of [`to_parts`].
    ///
    /// [`to_parts`]: SdpProblem::to_parts
    pub fn from_parts(parts: &ProblemParts) -> Result<SdpProblem, SdpError> {
        let mut p = SdpProblem::new();
        for v in &parts.vars {
            match (v.kind, v.nonneg) {
                (VarKind::SymMatrix { dim }, false) => {
                    p.sym_matrix_var(&v.name, dim);
                }
                (VarKind::SymMatrix { dim }, true) => {
                    p.sym_matrix_var_nonneg(&v.name, dim);
                }
                (VarKind::Vector { dim }, false) => {
                    p.vector_var(&v.name, dim);
                }
                (VarKind::Vector { dim }, true) => {
                    p.vector_var_nonneg(&v.name, dim);
                }
                (VarKind::Scalar, false) => {
                    p.scalar_var(&v.name);
                }
                (VarKind::Scalar, true) => {
                    p.scalar_var_nonneg(&v.name);
                }
            }
        }
        for b in &parts.blocks {
            let br = p.new_psd_block(b.dim);
            for &(r, c, v) in &b.constant {
                if r >= b.dim || c > r {
                    return Err(SdpError::DimensionMismatch {
                        context: "block constant entry",
                        expected: b.dim,
                        got: r.max(c),
                    });
                }
                p.block_const(br, r, c, v);
            }
            for (slot, entries) in &b.coeffs {
                if *slot >= p.n_slots {
                    return Err(SdpError::DimensionMismatch {
                        context: "block coefficient slot",
                        expected: p.n_slots,
                        got: *slot,
                    });
                }
                for &(r, c, v) in entries {
                    p.block_slot(br, r, c, *slot, v);
                }
            }
            p.blocks[br.0].from_soc = b.from_soc;
        }
        for (terms, constant) in &parts.ineqs {
            p.add_ineq(AffineExpr { terms: terms.clone(), constant: *constant });
        }
        for (terms, constant) in &parts.eqs {
            p.add_eq(AffineExpr { terms: terms.clone(), constant: *constant });
        }
        for &vid in &parts.logdet {
            if vid >= p.vars.len() {
                return Err(SdpError::NotSymMatrixVar);
            }
            p.add_logdet_term(VarRef(vid))?;
        }
        p.logdet_set = !parts.logdet.is_empty();
        p.cost = parts.cost.clone();
        p.cost_offset = parts.cost_offset;
        Ok(p)
    }

    pub(crate) fn residuals_with_mu(&self, values: &[f64], mu: f64, omega: f64) -> ResidualReport {
        let mut block_min_eig = Vec::with_capacity(self.blocks.len());
        for blk in &self.blocks {
            let m = blk.eval(values, 0.0);
            block_min_eig.push(linalg::min_eig(&m));
        }
        let min_eig = block_min_eig.iter().copied().fold(f64::INFINITY, f64::min);
        let mut viol: f64 = 0.0;
        for e in &self.eqs {
            viol = viol.max(fp::abs(e.eval(values)));
        }
        for e in &self.ineqs {
            viol = viol.max(-e.eval(values));
        }
        for vd in &self.vars {
            if vd.nonneg {
                for s in vd.offset..vd.offset + vd.len {
                    viol = viol.max(-values[s]);
                }
            }
        }
        let stationarity = if mu > 0.0 {
            solve::stationarity_residual(self, values, mu, omega)
        } else {
            f64::NAN
        };
        ResidualReport { block_min_eig, min_eig, max_lin_violation: viol, stationarity }
    }
}

/// Lower-triangle entries (row >= col) of a symmetric matrix, zeros
/// dropped.
fn lower_entries(m: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..=r {
            if m[(r, c)] != 0.0 {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

/// Serializable flat view of a model; see [`SdpProblem::to_parts`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParts {
    pub vars: Vec<VarPart>,
    pub blocks: Vec<BlockPart>,
    pub ineqs: Vec<(Vec<(usize, f64)>, f64)>,
    pub eqs: Vec<(Vec<(usize, f64)>, f64)>,
    pub logdet: Vec<usize>,
    pub cost: Vec<(usize, f64)>,
    pub cost_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarPart {
    pub name: String,
    pub kind: VarKind,
    pub nonneg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockPart {
    pub dim: usize,
    pub from_soc: bool,
    /// (row, col<=row, value)
    pub constant: Vec<(usize, usize, f64)>,
    pub coeffs: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn parts_round_trip_solves_identically() {
        let mut p = SdpProblem::new();
        let a = p.sym_matrix_var("A", 2);
        p.set_logdet_objective(a).unwrap();
        let blk = p.new_psd_block(2);
        for i in 0..2 {
            for j in 0..=i {
                p.block_affine(blk, i, j, &p.expr_sym(a, i, j).scaled(-1.0));
            }
            p.block_const(blk, i, i, 2.0 + i as f64);
        }
        let q = SdpProblem::from_parts(&p.to_parts()).unwrap();
        let s_orig = solve(&p, &Settings::default(), None).unwrap();
        let s_rt = solve(&q, &Settings::default(), None).unwrap();
        assert_eq!(s_orig.values, s_rt.values);
        assert_eq!(p.to_parts(), q.to_parts());
    }

    #[test]
    fn builder_accumulates_blocks() {
        // model shape of the polytope restriction for the unit square:
        // log-det A (2x2), b, nonneg 4x4 N, symmetric F, vector g, scalar h,
        // two PSD blocks.
        let mut p = SdpProblem::new();
        let a = p.sym_matrix_var("A", 2);
        let _b = p.vector_var("b", 2);
        let n = p.sym_matrix_var_nonneg("N", 4);
        let f = p.sym_matrix_var("F", 2);
        let _g = p.vector_var("g", 2);
        let h = p.scalar_var("h");
        p.set_logdet_objective(a).unwrap();
        let b1 = p.new_psd_block(3);
        p.block_affine(b1, 0, 0, &p.expr_sym(f, 0, 0).scaled(-1.0));
        p.block_affine(b1, 2, 2, &p.expr_scalar(h).scaled(-1.0).add_const(1.0));
        p.block_affine(b1, 0, 1, &p.expr_sym(n, 0, 1).scaled(-0.5));
        let b2 = p.new_psd_block(5);
        p.block_const(b2, 4, 4, 1.0);
        assert_eq!(p.blocks.len(), 2);
        assert_eq!(p.n_slots, 3 + 2 + 10 + 3 + 2 + 1);
        assert!(p.has_objective());
    }

    #[test]
    fn soc_embeds_as_arrow() {
        let mut p = SdpProblem::new();
        let lam = p.vector_var("lam", 3);
        let rho = p.scalar_var("rho");
        let u: Vec<AffineExpr> = (0..3).map(|i| p.expr_vec(lam, i)).collect();
        let w = p.expr_scalar(rho);
        let b = p.add_soc(&u, &w);
        assert_eq!(p.blocks[b.0].dim, 4);
        assert!(p.blocks[b.0].from_soc);
        // evaluate at lam = (1,2,3), rho = 7 and check arrow layout
        let vals = vec![1.0, 2.0, 3.0, 7.0];
        let m = p.blocks[b.0].eval(&vals, 0.0);
        assert_eq!(m[(0, 3)], 1.0);
        assert_eq!(m[(2, 3)], 3.0);
        assert_eq!(m[(1, 1)], 7.0);
        assert_eq!(m[(3, 3)], 7.0);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn objective_twice_rejected() {
        let mut p = SdpProblem::new();
        let a = p.sym_matrix_var("A", 2);
        p.set_logdet_objective(a).unwrap();
        assert_eq!(p.set_logdet_objective(a).unwrap_err(), SdpError::ObjectiveSetTwice);
    }
}
