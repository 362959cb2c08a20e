//! The convex space of semantics-preserving schedules.
//!
//! For every schedule row l and dependence polyhedron D the legality
//! condition is
//!
//! `Theta^S_l(y) - Theta^R_l(x) >= delta_l - sum_{c<l} delta_c * (K*n + K)`
//!
//! over all (x, y) in D, with per-dependence 0/1 satisfaction variables
//! summing to one. The universally quantified condition is linearized with
//! the affine form of the Farkas lemma: an affine function is nonnegative
//! over a (non-empty) polyhedron iff it is a nonnegative combination of the
//! polyhedron's rows plus a nonnegative constant. Rather than carrying the
//! multipliers into the solved system, the multiplier cone is projected once
//! per dependence (Fourier-Motzkin on the coefficient-matching equalities),
//! yielding constraints over schedule coefficients only. The projection is
//! exact: it preserves the theta/beta/delta solution set.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::dependence::DependencePolyhedron;
use crate::ilp::{rat, IlpSystem, LinExpr, Rat, Rel, VarId, VarKind};
use crate::scop::{Schedule, Scop};

/// Handles for every schedule variable in the system.
#[derive(Clone, Debug)]
pub struct VarLayout {
    /// `theta[stmt][k][col]`: iterator coefficient of odd row 2k+1.
    pub theta: Vec<Vec<Vec<VarId>>>,
    /// `theta_const[stmt][k]`: constant (shift) column of odd row 2k+1.
    pub theta_const: Vec<Vec<VarId>>,
    /// `beta[stmt][k]`: scalar value of even row 2k.
    pub beta: Vec<Vec<VarId>>,
    /// `delta[dep][row]`: satisfaction variable, rows 0..2*Dloop.
    pub delta: Vec<Vec<VarId>>,
    pub coeff_window: (i64, i64),
}

impl VarLayout {
    /// Read solved schedules out of an assignment.
    pub fn extract_schedules(
        &self,
        scop: &Scop,
        a: &crate::ilp::Assignment,
    ) -> Vec<Schedule> {
        scop.statements
            .iter()
            .map(|s| {
                let linear = self.theta[s.id]
                    .iter()
                    .map(|row| row.iter().map(|v| a.get_i64(*v)).collect())
                    .collect();
                let consts = self.theta_const[s.id].iter().map(|v| a.get_i64(*v)).collect();
                let beta = self.beta[s.id].iter().map(|v| a.get_i64(*v)).collect();
                Schedule {
                    statement: s.id,
                    rows: scop.schedule_rows(),
                    linear,
                    consts,
                    beta,
                }
            })
            .collect()
    }

    /// Claimed satisfaction row per dependence.
    pub fn extract_delta_rows(&self, a: &crate::ilp::Assignment) -> Vec<usize> {
        self.delta
            .iter()
            .map(|rows| {
                rows.iter()
                    .position(|v| a.get_i64(*v) == 1)
                    .expect("exactly one delta per dependence")
            })
            .collect()
    }
}

/// Create theta/beta/delta variables and the per-dependence exclusivity row.
pub fn build_layout(
    scop: &Scop,
    deps: &[DependencePolyhedron],
    coeff_window: (i64, i64),
    sys: &mut IlpSystem,
) -> VarLayout {
    let dloop = scop.dloop;
    let n_s = scop.n_statements() as i64;
    let mut theta = Vec::new();
    let mut theta_const = Vec::new();
    let mut beta = Vec::new();
    for s in &scop.statements {
        let mut rows = Vec::new();
        let mut consts = Vec::new();
        for k in 0..dloop {
            let row_idx = 2 * k + 1;
            let mut cols = Vec::new();
            for c in 0..s.dim() {
                let name = format!("theta_s{}_r{}_c{}", s.id, row_idx, c);
                cols.push(sys.int_var(&name, coeff_window.0, coeff_window.1).unwrap());
            }
            rows.push(cols);
            // Shift column: fixed at zero unless an idiom widens it.
            let name = format!("theta_s{}_r{}_const", s.id, row_idx);
            consts.push(sys.int_var(&name, 0, 0).unwrap());
        }
        theta.push(rows);
        theta_const.push(consts);
        let mut betas = Vec::new();
        for k in 0..=dloop {
            let name = format!("beta_s{}_r{}", s.id, 2 * k);
            betas.push(sys.int_var(&name, 0, n_s).unwrap());
        }
        beta.push(betas);
    }
    let mut delta = Vec::new();
    for (d_idx, _d) in deps.iter().enumerate() {
        let mut rows = Vec::new();
        let mut sum = LinExpr::new();
        for r in 0..scop.schedule_rows() {
            let name = format!("delta_d{d_idx}_r{r}");
            let v = sys.int_var(&name, 0, 1).unwrap();
            sum.add_term(v, rat(1));
            rows.push(v);
        }
        sys.add_constraint_labeled(sum, Rel::Eq, rat(1), Some(format!("delta_sum_d{d_idx}")));
        delta.push(rows);
    }
    VarLayout { theta, theta_const, beta, delta, coeff_window }
}

// ---------------------------------------------------------------------------
// Farkas machinery
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct FmRow {
    v: Vec<Rat>,
    eq: bool,
}

fn normalize(row: &mut FmRow) {
    // Scale to integers and divide by the gcd; equalities get a canonical sign.
    let mut lcm = BigInt::one();
    for x in &row.v {
        if !x.is_zero() {
            lcm = lcm.lcm(x.denom());
        }
    }
    let scale = BigRational::from_integer(lcm);
    let mut gcd = BigInt::zero();
    for x in row.v.iter_mut() {
        *x *= &scale;
        gcd = gcd.gcd(&x.numer().clone());
    }
    if !gcd.is_zero() && !gcd.is_one() {
        let g = BigRational::from_integer(gcd);
        for x in row.v.iter_mut() {
            *x /= &g;
        }
    }
    if row.eq {
        if let Some(first) = row.v.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in row.v.iter_mut() {
                    *x = -x.clone();
                }
            }
        }
    }
}

fn row_key(row: &FmRow) -> (bool, Vec<String>) {
    (row.eq, row.v.iter().map(|x| x.to_string()).collect())
}

/// Fourier-Motzkin elimination of the leading `n_elim` columns from a
/// homogeneous system of rows (mixture of `>= 0` and `= 0`).
fn fm_eliminate(mut rows: Vec<FmRow>, n_elim: usize) -> Vec<FmRow> {
    let mut remaining: Vec<usize> = (0..n_elim).collect();
    while let Some(pos) = pick_column(&rows, &remaining) {
        let col = remaining.remove(pos);
        // Prefer Gaussian substitution through an equality row.
        if let Some(p) = rows.iter().position(|r| r.eq && !r.v[col].is_zero()) {
            let pivot = rows.swap_remove(p);
            let pc = pivot.v[col].clone();
            for r in rows.iter_mut() {
                if !r.v[col].is_zero() {
                    let f = -&r.v[col] / &pc;
                    for (a, b) in r.v.iter_mut().zip(pivot.v.iter()) {
                        *a += &f * b;
                    }
                }
            }
        } else {
            let mut pos_rows = Vec::new();
            let mut neg_rows = Vec::new();
            let mut zero_rows = Vec::new();
            for r in rows.into_iter() {
                if r.v[col].is_zero() {
                    zero_rows.push(r);
                } else if r.v[col].is_positive() {
                    pos_rows.push(r);
                } else {
                    neg_rows.push(r);
                }
            }
            let mut new_rows = zero_rows;
            for p in &pos_rows {
                for n in &neg_rows {
                    let fp = -n.v[col].clone();
                    let fn_ = p.v[col].clone();
                    let mut v = Vec::with_capacity(p.v.len());
                    for (a, b) in p.v.iter().zip(n.v.iter()) {
                        v.push(a * &fp + b * &fn_);
                    }
                    new_rows.push(FmRow { v, eq: false });
                }
            }
            rows = new_rows;
        }
        // Normalize, drop trivial rows, dedupe.
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(rows.len());
        for mut r in rows.into_iter() {
            normalize(&mut r);
            if r.v.iter().all(|x| x.is_zero()) {
                continue;
            }
            if seen.insert(row_key(&r)) {
                out.push(r);
            }
        }
        rows = out;
    }
    rows
}

fn pick_column(rows: &[FmRow], remaining: &[usize]) -> Option<usize> {
    if remaining.is_empty() {
        return None;
    }
    // Cheapest column first: fewest non-zero occurrences, ties by index.
    let mut best: Option<(usize, usize)> = None;
    for (i, &col) in remaining.iter().enumerate() {
        let count = rows.iter().filter(|r| !r.v[col].is_zero()).count();
        if best.map(|(_, c)| count < c).unwrap_or(true) {
            best = Some((i, count));
        }
    }
    best.map(|(i, _)| i)
}

/// H-representation of the cone of affine functions (as coefficient vectors
/// over `x ++ y ++ params ++ 1`) that are certifiably nonnegative over the
/// relation: `phi = lambda_0 + sum lambda_k row_k`, `lambda >= 0`.
#[derive(Clone, Debug)]
pub struct DepCone {
    pub width: usize,
    /// Rows over coefficient space: `h . c >= 0`.
    pub ge: Vec<Vec<Rat>>,
    /// Rows over coefficient space: `h . c = 0`.
    pub eq: Vec<Vec<Rat>>,
}

pub fn farkas_cone(relation_rows: &[crate::dependence::RelRow], width: usize) -> DepCone {
    // Split equalities into inequality pairs so multipliers stay nonnegative.
    let mut ineqs: Vec<Vec<i64>> = Vec::new();
    for r in relation_rows {
        ineqs.push(r.coeffs.clone());
        if r.eq {
            ineqs.push(r.coeffs.iter().map(|c| -c).collect());
        }
    }
    let m = ineqs.len();
    let n_lambda = m + 1; // lambda_0 is the constant-function multiplier
    let total = n_lambda + width;
    let mut rows: Vec<FmRow> = Vec::new();
    // Coefficient matching: c_v = lambda_0 * [v == const] + sum lambda_k row_k[v].
    for v in 0..width {
        let mut r = vec![Rat::zero(); total];
        if v == width - 1 {
            r[0] = rat(-1); // lambda_0 contributes to the constant only
        }
        for (k, row) in ineqs.iter().enumerate() {
            r[1 + k] = rat(-row[v]);
        }
        r[n_lambda + v] = rat(1);
        rows.push(FmRow { v: r, eq: true });
    }
    // lambda >= 0.
    for k in 0..n_lambda {
        let mut r = vec![Rat::zero(); total];
        r[k] = rat(1);
        rows.push(FmRow { v: r, eq: false });
    }
    let projected = fm_eliminate(rows, n_lambda);
    let mut ge = Vec::new();
    let mut eq = Vec::new();
    for r in projected {
        let c = r.v[n_lambda..].to_vec();
        if r.eq {
            eq.push(c);
        } else {
            ge.push(c);
        }
    }
    DepCone { width, ge, eq }
}

/// Test-facing Farkas certification: build the coefficient-matching system
/// with explicit multiplier variables for a concrete affine expression.
/// `expr` and the relation rows live over the same `cols ++ 1` layout.
pub fn farkas_certify(
    expr: &[i64],
    relation_rows: &[crate::dependence::RelRow],
) -> (IlpSystem, Vec<VarId>) {
    let width = expr.len();
    let mut ineqs: Vec<Vec<i64>> = Vec::new();
    for r in relation_rows {
        ineqs.push(r.coeffs.clone());
        if r.eq {
            ineqs.push(r.coeffs.iter().map(|c| -c).collect());
        }
    }
    let mut sys = IlpSystem::new();
    let mut lambdas = Vec::new();
    let l0 = sys.add_variable("lambda_0", VarKind::Rational, Some(rat(0)), None).unwrap();
    lambdas.push(l0);
    for k in 0..ineqs.len() {
        let v = sys
            .add_variable(&format!("lambda_{}", k + 1), VarKind::Rational, Some(rat(0)), None)
            .unwrap();
        lambdas.push(v);
    }
    for v in 0..width {
        let mut e = LinExpr::new();
        if v == width - 1 {
            e.add_term(l0, rat(1));
        }
        for (k, row) in ineqs.iter().enumerate() {
            e.add_term(lambdas[k + 1], rat(row[v]));
        }
        sys.add_constraint(e, Rel::Eq, rat(expr[v]));
    }
    (sys, lambdas)
}

/// Symbolic affine expression over relation coordinates: one linear form in
/// system variables per coordinate.
pub struct SymbolicAffine {
    pub coords: Vec<LinExpr>,
}

/// Emit `expr >= 0 over the relation` through a projected Farkas cone,
/// deduplicating rows globally via `seen`.
pub fn emit_nonneg_over(
    cone: &DepCone,
    expr: &SymbolicAffine,
    sys: &mut IlpSystem,
    seen: &mut std::collections::BTreeSet<String>,
    label: &str,
) {
    debug_assert_eq!(cone.width, expr.coords.len());
    for (rows, rel) in [(&cone.ge, Rel::Ge), (&cone.eq, Rel::Eq)] {
        for h in rows.iter() {
            let mut e = LinExpr::new();
            for (hv, coord) in h.iter().zip(&expr.coords) {
                if !hv.is_zero() {
                    e.add_scaled(coord, hv);
                }
            }
            let konst = std::mem::replace(&mut e.constant, Rat::zero());
            if e.is_empty() {
                let holds = match rel {
                    Rel::Ge => konst >= Rat::zero(),
                    Rel::Eq => konst.is_zero(),
                    Rel::Le => unreachable!(),
                };
                if !holds {
                    // Unsatisfiable row: record an explicitly infeasible
                    // constraint so the solver reports it.
                    sys.add_constraint_labeled(
                        LinExpr::new(),
                        Rel::Ge,
                        rat(1),
                        Some(format!("{label}:contradiction")),
                    );
                }
                continue;
            }
            let key = format!("{:?}|{:?}|{}", e.terms, rel, konst);
            if seen.insert(key) {
                sys.add_constraint_labeled(e, rel, -konst, Some(label.to_string()));
            }
        }
    }
}

/// Build the Eq. 1 legality constraints of one dependence into the system.
pub fn emit_legality(
    scop: &Scop,
    dep: &DependencePolyhedron,
    dep_idx: usize,
    layout: &VarLayout,
    sys: &mut IlpSystem,
    k_relax: i64,
    cone: &DepCone,
    seen: &mut std::collections::BTreeSet<String>,
) {
    let nx = dep.src_dim(scop);
    let ny = dep.tgt_dim(scop);
    let np = scop.parameters.len();
    let width = nx + ny + np + 1;
    for l in 0..scop.schedule_rows() {
        // E_l = Theta^S_l(y) - Theta^R_l(x) - delta_l + sum_{c<l} delta_c * (K*n + K)
        let mut coords = vec![LinExpr::new(); width];
        if l % 2 == 0 {
            let k = l / 2;
            coords[width - 1].add_term(layout.beta[dep.target][k], rat(1));
            coords[width - 1].add_term(layout.beta[dep.source][k], rat(-1));
        } else {
            let k = l / 2;
            for (j, v) in layout.theta[dep.source][k].iter().enumerate() {
                coords[j].add_term(*v, rat(-1));
            }
            for (j, v) in layout.theta[dep.target][k].iter().enumerate() {
                coords[nx + j].add_term(*v, rat(1));
            }
            coords[width - 1].add_term(layout.theta_const[dep.target][k], rat(1));
            coords[width - 1].add_term(layout.theta_const[dep.source][k], rat(-1));
        }
        coords[width - 1].add_term(layout.delta[dep_idx][l], rat(-1));
        for c in 0..l {
            let dv = layout.delta[dep_idx][c];
            for p in 0..np {
                coords[nx + ny + p].add_term(dv, rat(k_relax));
            }
            coords[width - 1].add_term(dv, rat(k_relax));
        }
        emit_nonneg_over(
            cone,
            &SymbolicAffine { coords },
            sys,
            seen,
            &format!("legal_d{dep_idx}_r{l}"),
        );
    }
}

/// Build layout plus all legality constraints; returns the layout and the
/// per-dependence cones (reused by idioms needing extra certified rows).
pub fn build_legal_space(
    scop: &Scop,
    deps: &[DependencePolyhedron],
    coeff_window: (i64, i64),
    k_relax: i64,
    sys: &mut IlpSystem,
) -> (VarLayout, Vec<DepCone>) {
    let layout = build_layout(scop, deps, coeff_window, sys);
    let mut seen = std::collections::BTreeSet::new();
    let mut cones = Vec::with_capacity(deps.len());
    for (idx, dep) in deps.iter().enumerate() {
        let nx = dep.src_dim(scop);
        let ny = dep.tgt_dim(scop);
        let width = nx + ny + scop.parameters.len() + 1;
        let cone = farkas_cone(&dep.relation, width);
        emit_legality(scop, dep, idx, &layout, sys, k_relax, &cone, &mut seen);
        cones.push(cone);
    }
    (layout, cones)
}

/// The satisfaction row the identity schedule claims for a dependence:
/// the linear row of the carried split, or the scalar row at the textual
/// divergence level.
pub fn identity_claim_row(dep: &DependencePolyhedron) -> usize {
    if dep.textual() {
        2 * dep.common
    } else {
        2 * dep.depth + 1
    }
}

/// Pin the layout variables to the identity schedules (textual betas, unit
/// rows, identity delta claims). Used by feasibility tests.
pub fn pin_identity(
    scop: &Scop,
    deps: &[DependencePolyhedron],
    layout: &VarLayout,
    sys: &mut IlpSystem,
) {
    for s in &scop.statements {
        let ident = crate::scop::identity_schedule(s, scop.dloop, scop.n_statements());
        for k in 0..scop.dloop {
            for (j, v) in layout.theta[s.id][k].iter().enumerate() {
                sys.add_constraint(LinExpr::var(*v), Rel::Eq, rat(ident.linear[k][j]));
            }
            sys.add_constraint(LinExpr::var(layout.theta_const[s.id][k]), Rel::Eq, rat(0));
        }
        for (k, v) in layout.beta[s.id].iter().enumerate() {
            sys.add_constraint(LinExpr::var(*v), Rel::Eq, rat(ident.beta[k]));
        }
    }
    for (idx, dep) in deps.iter().enumerate() {
        let claim = identity_claim_row(dep);
        sys.add_constraint(LinExpr::var(layout.delta[idx][claim]), Rel::Eq, rat(1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::{compute_dependences, RelRow, LEGALITY_KINDS};
    use crate::ilp::Feasibility;
    use crate::scop::parse_scop;
    use std::fs;

    fn load(name: &str) -> Scop {
        let path = format!("{}/../../corpus/{name}.scop", env!("CARGO_MANIFEST_DIR"));
        parse_scop(&fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn layout_counts_gemm() {
        let scop = load("gemm");
        let deps = compute_dependences(&scop, &LEGALITY_KINDS, scop.default_param_min());
        let mut sys = IlpSystem::new();
        let layout = build_layout(&scop, &deps, (-1, 3), &mut sys);
        // 3 odd rows x 3 iterator coefficients, plus one shift per row.
        assert_eq!(layout.theta[0].iter().map(|r| r.len()).sum::<usize>(), 9);
        assert_eq!(layout.theta_const[0].len(), 3);
        assert_eq!(layout.beta[0].len(), 4);
        assert_eq!(deps.len(), 3);
        for rows in &layout.delta {
            assert_eq!(rows.len(), 7);
        }
    }

    #[test]
    fn layout_fdtd_column_counts() {
        let scop = load("fdtd2d");
        let deps = compute_dependences(&scop, &LEGALITY_KINDS, scop.default_param_min());
        let mut sys = IlpSystem::new();
        let layout = build_layout(&scop, &deps, (-1, 3), &mut sys);
        // Statement R has two iterator columns per linear row.
        assert_eq!(layout.theta[0][0].len(), 2);
        assert_eq!(layout.theta[1][0].len(), 3);
    }

    #[test]
    fn empty_dep_set_no_delta() {
        let doc = "\
polyvocab-scop v1
scop solo
param N
statement 0
  iters i
  domain i >= 0
  domain N - i - 1 >= 0
  access write X [1]
";
        let scop = parse_scop(doc).unwrap();
        let mut sys = IlpSystem::new();
        let layout = build_layout(&scop, &[], (-1, 3), &mut sys);
        assert!(layout.delta.is_empty());
        assert!(sys.constraints.is_empty());
    }

    #[test]
    fn farkas_certify_examples() {
        let cols = 1usize; // single variable x, width 2 with constant
        // expr = x over {x >= 0}: lambda_0 = 0, lambda_1 = 1 feasible.
        let rows = vec![RelRow { coeffs: vec![1, 0], eq: false }];
        let (sys, _l) = farkas_certify(&[1, 0], &rows);
        assert!(matches!(sys.check_feasible(), Feasibility::Feasible(_)));
        // expr = x + 1 over {x >= 0}: lambda_0 = 1, lambda_1 = 1.
        let (sys, l) = farkas_certify(&[1, 1], &rows);
        match sys.check_feasible() {
            Feasibility::Feasible(a) => {
                assert_eq!(a.get(l[0]), &rat(1));
                assert_eq!(a.get(l[1]), &rat(1));
            }
            _ => panic!("expected feasible"),
        }
        // expr = -x over {x >= 0, 5 - x >= 0}: infeasible; -x + 5 works.
        let rows2 = vec![
            RelRow { coeffs: vec![1, 0], eq: false },
            RelRow { coeffs: vec![-1, 5], eq: false },
        ];
        let (sys, _) = farkas_certify(&[-1, 0], &rows2);
        assert!(matches!(sys.check_feasible(), Feasibility::Infeasible));
        let (sys, _) = farkas_certify(&[-1, 5], &rows2);
        assert!(matches!(sys.check_feasible(), Feasibility::Feasible(_)));
        let _ = cols;
    }

    #[test]
    fn cone_certifies_basic_facts() {
        // Relation {x >= 0, 5 - x >= 0} over width 2 (x, 1).
        let rows = vec![
            RelRow { coeffs: vec![1, 0], eq: false },
            RelRow { coeffs: vec![-1, 5], eq: false },
        ];
        let cone = farkas_cone(&rows, 2);
        let member = |c: &[i64]| -> bool {
            cone.ge.iter().all(|h| {
                let v: Rat = h.iter().zip(c).map(|(a, b)| a * &rat(*b)).sum();
                v >= Rat::zero()
            }) && cone.eq.iter().all(|h| {
                let v: Rat = h.iter().zip(c).map(|(a, b)| a * &rat(*b)).sum();
                v.is_zero()
            })
        };
        assert!(member(&[1, 0])); // x >= 0
        assert!(member(&[-1, 5])); // 5 - x >= 0
        assert!(member(&[0, 1])); // 1 >= 0
        assert!(member(&[1, 3])); // x + 3 >= 0
        assert!(!member(&[-1, 0])); // -x >= 0 does not hold over [0,5]
        assert!(!member(&[0, -1])); // -1 >= 0 never holds
    }

    #[test]
    fn identity_is_feasible_for_corpus() {
        for name in [
            "gemm",
            "fdtd2d",
            "jacobi1d",
            "jacobi2d",
            "seidel2d",
            "atax",
            "bicg",
            "mvt",
            "gemver",
            "lu",
            "cholesky_like",
            "twomm",
            "threemm",
            "doitgen",
        ] {
            let scop = load(name);
            let deps = compute_dependences(&scop, &LEGALITY_KINDS, scop.default_param_min());
            let mut sys = IlpSystem::new();
            let (layout, _cones) = build_legal_space(&scop, &deps, (-1, 3), 10, &mut sys);
            pin_identity(&scop, &deps, &layout, &mut sys);
            match sys.check_feasible() {
                Feasibility::Feasible(_) => {}
                Feasibility::Infeasible => panic!("{name}: identity should be feasible"),
            }
        }
    }

    #[test]
    fn uniform_shift_dep_rows() {
        // Uniform dependence y = x + 1 over a 1-D loop: with theta row = 1,
        // delta at row 1 is feasible; carrying nothing is not.
        let doc = "\
polyvocab-scop v1
scop shift
param N
statement 0
  iters i
  domain i >= 0
  domain N - i - 1 >= 0
  access write X [1]
  access read X [1] offsets [-1]
";
        let scop = parse_scop(doc).unwrap();
        let deps = compute_dependences(&scop, &LEGALITY_KINDS, scop.default_param_min());
        assert_eq!(deps.len(), 1);
        let mut sys = IlpSystem::new();
        let (layout, _) = build_legal_space(&scop, &deps, (-1, 3), 10, &mut sys);
        pin_identity(&scop, &deps, &layout, &mut sys);
        assert!(matches!(sys.check_feasible(), Feasibility::Feasible(_)));
        // Reversal (theta = -1) with the same claim must be infeasible.
        let mut sys2 = IlpSystem::new();
        let (layout2, _) = build_legal_space(&scop, &deps, (-1, 3), 10, &mut sys2);
        sys2.add_constraint(LinExpr::var(layout2.theta[0][0][0]), Rel::Eq, rat(-1));
        sys2.add_constraint(LinExpr::var(layout2.delta[0][1]), Rel::Eq, rat(1));
        assert!(matches!(sys2.check_feasible(), Feasibility::Infeasible));
    }

    #[test]
    fn soundness_randomized_points() {
        // Any feasible point of the legal space must pass the verifier's
        // order check (injectivity aside) at small parameter values.
        use crate::ilp::{Position, Sense};
        for name in ["gemm", "jacobi1d", "atax"] {
            let scop = load(name);
            let deps = compute_dependences(&scop, &LEGALITY_KINDS, scop.default_param_min());
            let mut state = 0xC0FFEEu64;
            for trial in 0..4 {
                let mut sys = IlpSystem::new();
                let (layout, _) = build_legal_space(&scop, &deps, (-1, 2), 10, &mut sys);
                let mut obj = LinExpr::new();
                for s in &scop.statements {
                    for k in 0..scop.dloop {
                        for v in &layout.theta[s.id][k] {
                            state ^= state << 13;
                            state ^= state >> 7;
                            state ^= state << 17;
                            let c = (state % 7) as i64 - 3;
                            obj.add_term(*v, rat(c));
                        }
                    }
                }
                sys.push_objective(obj, Sense::Min, Position::Trailing, "random").unwrap();
                let sol = sys.solve_lex().unwrap();
                let schedules = layout.extract_schedules(&scop, &sol.assignment);
                for p in [3i64, 5] {
                    let params = vec![p; scop.parameters.len()];
                    let v = crate::verifier::check_legality(&scop, &schedules, &params, false, 3)
                        .unwrap();
                    assert!(
                        v.violations.is_empty(),
                        "{name} trial {trial}: order violated at params {p}"
                    );
                }
            }
        }
    }
}
