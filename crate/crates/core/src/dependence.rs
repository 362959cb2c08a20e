//! Depth-split dependence polyhedra, the statement SCC graph, stencil
//! dependence classes, and the SCoP metrics consumed by the classifier.
//!
//! Dependences are memory-based: for every ordered access pair on the same
//! array and every original-order split (prefix-equal depth with strict
//! ordering at that depth, plus the all-equal split when the source precedes
//! the target textually) we emit the polyhedron
//! `{ x in D_R, y in D_S, F_R(x) = F_S(y), order split }` and filter empty
//! relations exactly at the configured minimum parameter values.

use serde::Serialize;

use crate::ilp::{rat, Feasibility, IlpSystem, LinExpr, Rat, Rel, Sense, VarKind};
use crate::scop::{AccessKind, Schedule, Scop};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, PartialOrd, Ord)]
pub enum DepKind {
    Raw,
    War,
    Waw,
    Rar,
}

pub const LEGALITY_KINDS: [DepKind; 3] = [DepKind::Raw, DepKind::War, DepKind::Waw];
pub const ALL_KINDS: [DepKind; 4] = [DepKind::Raw, DepKind::War, DepKind::Waw, DepKind::Rar];

/// One affine row of a dependence relation over `x ++ y ++ params ++ 1`:
/// `coeffs . v >= 0`, or `== 0` when `eq` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelRow {
    pub coeffs: Vec<i64>,
    pub eq: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DependencePolyhedron {
    pub source: usize,
    pub target: usize,
    pub kind: DepKind,
    pub array: String,
    pub src_access: usize,
    pub tgt_access: usize,
    /// Split level: `< common` means loop-carried at that shared loop;
    /// `== common` is the all-equal (textual order) split.
    pub depth: usize,
    /// Shared loops between source and target in the original nesting.
    pub common: usize,
    pub is_self: bool,
    pub is_flow: bool,
    pub relation: Vec<RelRow>,
}

impl DependencePolyhedron {
    pub fn textual(&self) -> bool {
        self.depth == self.common
    }

    pub fn src_dim(&self, scop: &Scop) -> usize {
        scop.statements[self.source].dim()
    }

    pub fn tgt_dim(&self, scop: &Scop) -> usize {
        scop.statements[self.target].dim()
    }

    /// Does the relation hold for a concrete instance pair?
    pub fn holds(&self, scop: &Scop, x: &[i64], y: &[i64], params: &[i64]) -> bool {
        let nx = self.src_dim(scop);
        let ny = self.tgt_dim(scop);
        for row in &self.relation {
            let mut v = row.coeffs[nx + ny + params.len()];
            for (k, c) in row.coeffs[..nx].iter().enumerate() {
                v += c * x[k];
            }
            for (k, c) in row.coeffs[nx..nx + ny].iter().enumerate() {
                v += c * y[k];
            }
            for (k, c) in row.coeffs[nx + ny..nx + ny + params.len()].iter().enumerate() {
                v += c * params[k];
            }
            let ok = if row.eq { v == 0 } else { v >= 0 };
            if !ok {
                return false;
            }
        }
        true
    }
}

fn build_relation(
    scop: &Scop,
    src: usize,
    tgt: usize,
    src_access: usize,
    tgt_access: usize,
    depth: usize,
    param_min: i64,
) -> Vec<RelRow> {
    let r = &scop.statements[src];
    let s = &scop.statements[tgt];
    let (nx, ny, np) = (r.dim(), s.dim(), scop.parameters.len());
    let width = nx + ny + np + 1;
    let mut rows = Vec::new();
    // x in D_R
    for drow in &r.domain {
        let mut c = vec![0i64; width];
        c[..nx].copy_from_slice(&drow[..nx]);
        c[nx + ny..nx + ny + np].copy_from_slice(&drow[nx..nx + np]);
        c[width - 1] = drow[nx + np];
        rows.push(RelRow { coeffs: c, eq: false });
    }
    // y in D_S
    for drow in &s.domain {
        let mut c = vec![0i64; width];
        c[nx..nx + ny].copy_from_slice(&drow[..ny]);
        c[nx + ny..nx + ny + np].copy_from_slice(&drow[ny..ny + np]);
        c[width - 1] = drow[ny + np];
        rows.push(RelRow { coeffs: c, eq: false });
    }
    // F_R(x) = F_S(y), dimension by dimension.
    let fa = &r.accesses[src_access];
    let fb = &s.accesses[tgt_access];
    for d in 0..fa.dim() {
        let mut c = vec![0i64; width];
        c[..nx].copy_from_slice(&fa.matrix[d]);
        for (k, v) in fb.matrix[d].iter().enumerate() {
            c[nx + k] -= v;
        }
        for k in 0..np {
            c[nx + ny + k] = fa.param_part[d][k] - fb.param_part[d][k];
        }
        c[width - 1] = fa.offsets[d] - fb.offsets[d];
        rows.push(RelRow { coeffs: c, eq: true });
    }
    // Order split over the shared loops.
    for j in 0..depth {
        let mut c = vec![0i64; width];
        c[j] = 1;
        c[nx + j] = -1;
        rows.push(RelRow { coeffs: c, eq: true });
    }
    let common = scop.common_loops(src, tgt);
    if depth < common {
        let mut c = vec![0i64; width];
        c[nx + depth] = 1;
        c[depth] = -1;
        c[width - 1] = -1; // y_depth - x_depth - 1 >= 0
        rows.push(RelRow { coeffs: c, eq: false });
    }
    // Parameter context: configured minimum plus user context rows.
    for k in 0..np {
        let mut c = vec![0i64; width];
        c[nx + ny + k] = 1;
        c[width - 1] = -param_min;
        rows.push(RelRow { coeffs: c, eq: false });
    }
    for ctx in &scop.context {
        let mut c = vec![0i64; width];
        c[nx + ny..nx + ny + np].copy_from_slice(&ctx[..np]);
        c[width - 1] = ctx[np];
        rows.push(RelRow { coeffs: c, eq: false });
    }
    rows
}

/// Exact integer emptiness test with parameters fixed at `param_min`.
fn relation_nonempty(scop: &Scop, dep: &DependencePolyhedron, param_min: i64) -> bool {
    let nx = dep.src_dim(scop);
    let ny = dep.tgt_dim(scop);
    let np = scop.parameters.len();
    let mut sys = IlpSystem::new();
    let box_bound = 8 * (param_min + 2);
    let mut ids = Vec::new();
    for k in 0..nx {
        ids.push(sys.int_var(&format!("x{k}"), -box_bound, box_bound).unwrap());
    }
    for k in 0..ny {
        ids.push(sys.int_var(&format!("y{k}"), -box_bound, box_bound).unwrap());
    }
    for k in 0..np {
        ids.push(sys.int_var(&format!("n{k}"), param_min, param_min).unwrap());
    }
    for row in &dep.relation {
        let mut e = LinExpr::new();
        for (k, &c) in row.coeffs[..nx + ny + np].iter().enumerate() {
            if c != 0 {
                e.add_term(ids[k], rat(c));
            }
        }
        let rhs = rat(-row.coeffs[nx + ny + np]);
        sys.add_constraint(e, if row.eq { Rel::Eq } else { Rel::Ge }, rhs);
    }
    matches!(sys.check_feasible(), Feasibility::Feasible(_))
}

pub fn kind_of(a: AccessKind, b: AccessKind) -> DepKind {
    match (a, b) {
        (AccessKind::Write, AccessKind::Read) => DepKind::Raw,
        (AccessKind::Read, AccessKind::Write) => DepKind::War,
        (AccessKind::Write, AccessKind::Write) => DepKind::Waw,
        (AccessKind::Read, AccessKind::Read) => DepKind::Rar,
    }
}

/// Build all non-empty depth-split dependence polyhedra for the requested
/// kinds, sorted by (source, target, array, kind, accesses, depth).
pub fn compute_dependences(
    scop: &Scop,
    kinds: &[DepKind],
    param_min: i64,
) -> Vec<DependencePolyhedron> {
    let mut out = Vec::new();
    let n = scop.n_statements();
    for src in 0..n {
        for tgt in 0..n {
            let common = scop.common_loops(src, tgt);
            let r = &scop.statements[src];
            let s = &scop.statements[tgt];
            for (ai, fa) in r.accesses.iter().enumerate() {
                for (bi, fb) in s.accesses.iter().enumerate() {
                    if fa.array != fb.array {
                        continue;
                    }
                    let kind = kind_of(fa.kind, fb.kind);
                    if !kinds.contains(&kind) {
                        continue;
                    }
                    let max_depth = if src == tgt || src < tgt { common + 1 } else { common };
                    for depth in 0..max_depth {
                        if depth == common && src == tgt {
                            break; // same instance: atomic, no dependence
                        }
                        let relation =
                            build_relation(scop, src, tgt, ai, bi, depth, param_min);
                        let dep = DependencePolyhedron {
                            source: src,
                            target: tgt,
                            kind,
                            array: fa.array.clone(),
                            src_access: ai,
                            tgt_access: bi,
                            depth,
                            common,
                            is_self: src == tgt,
                            is_flow: kind == DepKind::Raw,
                            relation,
                        };
                        if relation_nonempty(scop, &dep, param_min) {
                            out.push(dep);
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (a.source, a.target, &a.array, a.kind, a.src_access, a.tgt_access, a.depth).cmp(&(
            b.source,
            b.target,
            &b.array,
            b.kind,
            b.src_access,
            b.tgt_access,
            b.depth,
        ))
    });
    out
}

/// Strongly connected components of the statement dependence graph, numbered
/// deterministically by least statement id.
#[derive(Clone, Debug, Serialize)]
pub struct SccGraph {
    pub component: Vec<usize>,
    pub n_components: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SccGraph {
    pub fn same_component(&self, a: usize, b: usize) -> bool {
        self.component[a] == self.component[b]
    }

    /// Statement ids per component, ordered by component id.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_components];
        for (stmt, c) in self.component.iter().enumerate() {
            out[*c].push(stmt);
        }
        out
    }
}

pub fn build_scc(scop: &Scop, deps: &[DependencePolyhedron]) -> SccGraph {
    let n = scop.n_statements();
    let mut adj = vec![Vec::new(); n];
    for d in deps {
        if d.source != d.target && !adj[d.source].contains(&d.target) {
            adj[d.source].push(d.target);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    // Iterative Tarjan.
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut comp_raw = vec![usize::MAX; n];
    let mut n_comp = 0usize;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *ei < adj[v].len() {
                let w = adj[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp_raw[w] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
                call.pop();
                if let Some(&mut (parent, _)) = call.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    // Renumber components by least statement id.
    let mut min_stmt = vec![usize::MAX; n_comp];
    for (stmt, c) in comp_raw.iter().enumerate() {
        min_stmt[*c] = min_stmt[*c].min(stmt);
    }
    let mut order: Vec<usize> = (0..n_comp).collect();
    order.sort_by_key(|c| min_stmt[*c]);
    let mut renumber = vec![0usize; n_comp];
    for (new_id, old_id) in order.iter().enumerate() {
        renumber[*old_id] = new_id;
    }
    let component: Vec<usize> = comp_raw.iter().map(|c| renumber[*c]).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for d in deps {
        let (a, b) = (component[d.source], component[d.target]);
        if a != b && !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    edges.sort_unstable();
    SccGraph { component, n_components: n_comp, edges }
}

/// Stencil dependence classes following the satisfaction-placement scheme:
/// non-self forward/backward by textual order, self split on statement count.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum StencilClass {
    /// Non-self forward dependence: source textually before target.
    Nsfd,
    /// Non-self backward dependence.
    Nsbd,
    /// Self dependence in a multi-statement SCoP.
    Sdn,
    /// Self dependence in a single-statement SCoP.
    Sd1,
}

pub fn stencil_class(dep: &DependencePolyhedron, n_statements: usize) -> StencilClass {
    if dep.is_self {
        if n_statements == 1 {
            StencilClass::Sd1
        } else {
            StencilClass::Sdn
        }
    } else if dep.source < dep.target {
        StencilClass::Nsfd
    } else {
        StencilClass::Nsbd
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScopMetrics {
    /// Flow (RAW) dependence polyhedra; the classifier's dependence count.
    pub n_dep: usize,
    /// All dependence polyhedra handed in, any kind.
    pub n_dep_total: usize,
    pub dim_theta: usize,
    /// Statements carrying at least one self-dependence.
    pub n_self_dep: usize,
    /// Self-dependence polyhedra (reported alongside the statement count).
    pub n_self_dep_polyhedra: usize,
    pub n_scc: usize,
    pub is_stencil: bool,
    pub n_statements: usize,
}

pub fn metrics(scop: &Scop, deps: &[DependencePolyhedron], sccs: &SccGraph) -> ScopMetrics {
    let mut self_stmts = std::collections::BTreeSet::new();
    let mut self_polyhedra = 0usize;
    for d in deps {
        if d.is_self {
            self_stmts.insert(d.source);
            self_polyhedra += 1;
        }
    }
    // A statement reads a stencil when some array is read through >= 2
    // access functions with identical matrices and differing offsets.
    let mut stencil_stmts = 0usize;
    for s in &scop.statements {
        let mut groups: std::collections::BTreeMap<(String, Vec<Vec<i64>>), Vec<Vec<i64>>> =
            std::collections::BTreeMap::new();
        for a in &s.accesses {
            if a.kind == AccessKind::Read {
                groups
                    .entry((a.array.clone(), a.matrix.clone()))
                    .or_default()
                    .push(a.offsets.clone());
            }
        }
        let qualifies = groups.values().any(|offs| {
            let mut distinct = offs.clone();
            distinct.sort();
            distinct.dedup();
            distinct.len() >= 2
        });
        if qualifies {
            stencil_stmts += 1;
        }
    }
    ScopMetrics {
        n_dep: deps.iter().filter(|d| d.is_flow).count(),
        n_dep_total: deps.len(),
        dim_theta: scop.schedule_rows(),
        n_self_dep: self_stmts.len(),
        n_self_dep_polyhedra: self_polyhedra,
        n_scc: sccs.n_components,
        is_stencil: 2 * stencil_stmts >= scop.n_statements(),
        n_statements: scop.n_statements(),
    }
}

/// Linear form of the timestamp-row difference `Theta^S_row(y) - Theta^R_row(x)`
/// over the relation columns `x ++ y ++ params ++ 1`, with rational values.
pub fn row_diff_form(
    dep: &DependencePolyhedron,
    scop: &Scop,
    src_sched: &Schedule,
    tgt_sched: &Schedule,
    row: usize,
) -> (Vec<Rat>, Rat) {
    let nx = dep.src_dim(scop);
    let ny = dep.tgt_dim(scop);
    let np = scop.parameters.len();
    let mut coeffs = vec![rat(0); nx + ny + np];
    let konst;
    if row % 2 == 0 {
        konst = rat(tgt_sched.beta[row / 2] - src_sched.beta[row / 2]);
    } else {
        let k = row / 2;
        for (j, c) in src_sched.linear[k].iter().enumerate() {
            coeffs[j] = rat(-c);
        }
        for (j, c) in tgt_sched.linear[k].iter().enumerate() {
            coeffs[nx + j] = rat(*c);
        }
        konst = rat(tgt_sched.consts[k] - src_sched.consts[k]);
    }
    (coeffs, konst)
}

/// Is the dependence carried at `row` under the given schedules: does some
/// instance pair agree on all rows before `row` and differ at `row`?
/// Decided on the rational relaxation of the relation (conservative).
pub fn dep_carried_at_row(
    scop: &Scop,
    dep: &DependencePolyhedron,
    schedules: &[Schedule],
    row: usize,
) -> bool {
    let src_sched = &schedules[dep.source];
    let tgt_sched = &schedules[dep.target];
    let nx = dep.src_dim(scop);
    let ny = dep.tgt_dim(scop);
    let np = scop.parameters.len();
    let build = |strict_positive: bool| -> IlpSystem {
        let mut sys = IlpSystem::new();
        let mut ids = Vec::new();
        for k in 0..nx {
            ids.push(sys.add_variable(&format!("x{k}"), VarKind::Rational, None, None).unwrap());
        }
        for k in 0..ny {
            ids.push(sys.add_variable(&format!("y{k}"), VarKind::Rational, None, None).unwrap());
        }
        for k in 0..np {
            ids.push(sys.add_variable(&format!("n{k}"), VarKind::Rational, None, None).unwrap());
        }
        for relrow in &dep.relation {
            let mut e = LinExpr::new();
            for (k, &c) in relrow.coeffs[..nx + ny + np].iter().enumerate() {
                if c != 0 {
                    e.add_term(ids[k], rat(c));
                }
            }
            let rhs = rat(-relrow.coeffs[nx + ny + np]);
            sys.add_constraint(e, if relrow.eq { Rel::Eq } else { Rel::Ge }, rhs);
        }
        for r in 0..row {
            let (coeffs, konst) = row_diff_form(dep, scop, src_sched, tgt_sched, r);
            let mut e = LinExpr::new();
            for (k, c) in coeffs.iter().enumerate() {
                e.add_term(ids[k], c.clone());
            }
            sys.add_constraint(e, Rel::Eq, -konst);
        }
        let (coeffs, konst) = row_diff_form(dep, scop, src_sched, tgt_sched, row);
        let mut e = LinExpr::new();
        for (k, c) in coeffs.iter().enumerate() {
            e.add_term(ids[k], c.clone());
        }
        if strict_positive {
            sys.add_constraint(e, Rel::Ge, rat(1) - konst);
        } else {
            sys.add_constraint(e, Rel::Le, rat(-1) - konst);
        }
        sys
    };
    matches!(build(true).check_feasible(), Feasibility::Feasible(_))
        || matches!(build(false).check_feasible(), Feasibility::Feasible(_))
}

/// Semantic per-statement parallelism map: `pi[stmt][row]` is true when no
/// dependence touching the statement is carried at that row. Sound with
/// respect to the verifier's parallelism check.
pub fn semantic_pi(
    scop: &Scop,
    deps: &[DependencePolyhedron],
    schedules: &[Schedule],
) -> Vec<Vec<bool>> {
    let rows = scop.schedule_rows();
    let mut pi = vec![vec![true; rows]; scop.n_statements()];
    for dep in deps {
        for row in 0..rows {
            if dep_carried_at_row(scop, dep, schedules, row) {
                pi[dep.source][row] = false;
                pi[dep.target][row] = false;
            }
        }
    }
    pi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scop::{identity_schedule, parse_scop};
    use std::fs;

    fn load(name: &str) -> Scop {
        let path = format!("{}/../../corpus/{name}.scop", env!("CARGO_MANIFEST_DIR"));
        parse_scop(&fs::read_to_string(path).unwrap()).unwrap()
    }

    fn legality_deps(scop: &Scop) -> Vec<DependencePolyhedron> {
        compute_dependences(scop, &LEGALITY_KINDS, scop.default_param_min())
    }

    #[test]
    fn gemm_self_raw_at_depth_two() {
        let scop = load("gemm");
        let deps = legality_deps(&scop);
        let raws: Vec<_> = deps.iter().filter(|d| d.kind == DepKind::Raw).collect();
        assert_eq!(raws.len(), 1);
        assert!(raws[0].is_self);
        assert_eq!(raws[0].depth, 2);
        assert_eq!(raws[0].array, "C");
        // WAR and WAW on C at the same depth.
        assert_eq!(deps.len(), 3);
    }

    #[test]
    fn fdtd_hz_flow_backward() {
        let scop = load("fdtd2d");
        let deps = legality_deps(&scop);
        // U (statement 3) writes hz, S (statement 1) reads it across time.
        let u_to_s: Vec<_> = deps
            .iter()
            .filter(|d| d.source == 3 && d.target == 1 && d.kind == DepKind::Raw)
            .collect();
        assert!(!u_to_s.is_empty());
        for d in &u_to_s {
            assert!(d.is_flow && !d.is_self);
            assert_eq!(d.depth, 0); // carried by the shared time loop
            assert_eq!(stencil_class(d, scop.n_statements()), StencilClass::Nsbd);
        }
        // R -> U on ey is forward.
        let r_to_u: Vec<_> =
            deps.iter().filter(|d| d.source == 0 && d.target == 3 && d.is_flow).collect();
        assert!(!r_to_u.is_empty());
        for d in &r_to_u {
            assert_eq!(stencil_class(d, scop.n_statements()), StencilClass::Nsfd);
        }
    }

    #[test]
    fn disjoint_arrays_no_deps() {
        let doc = "\
polyvocab-scop v1
scop twonests
param N
statement 0
  iters i
  domain i >= 0
  domain N - i - 1 >= 0
  access write X [1]
statement 1
  iters j
  domain j >= 0
  domain N - j - 1 >= 0
  access write Y [1]
";
        let scop = parse_scop(doc).unwrap();
        let deps = legality_deps(&scop);
        assert!(deps.is_empty());
        let sccs = build_scc(&scop, &deps);
        assert_eq!(sccs.n_components, 2);
        assert!(sccs.edges.is_empty());
        let m = metrics(&scop, &deps, &sccs);
        assert_eq!(m.n_dep, 0);
        assert_eq!(m.n_scc, 2);
    }

    #[test]
    fn gemm_scc_and_metrics() {
        let scop = load("gemm");
        let deps = legality_deps(&scop);
        let sccs = build_scc(&scop, &deps);
        assert_eq!(sccs.n_components, 1);
        let m = metrics(&scop, &deps, &sccs);
        assert!(!m.is_stencil);
        assert_eq!(m.n_scc, 1);
        assert_eq!(m.n_self_dep, 1);
        assert_eq!(m.dim_theta, 7);
    }

    #[test]
    fn fdtd_one_scc_and_stencil() {
        let scop = load("fdtd2d");
        let deps = legality_deps(&scop);
        let sccs = build_scc(&scop, &deps);
        assert_eq!(sccs.n_components, 1, "R,S,T,U are mutually cyclic through ey/ex/hz");
        let m = metrics(&scop, &deps, &sccs);
        assert!(m.is_stencil);
        assert!(m.n_dep <= 3 * m.dim_theta, "flow count {} must stay under 21", m.n_dep);
    }

    #[test]
    fn jacobi1d_single_statement_class() {
        let scop = load("seidel2d");
        let deps = legality_deps(&scop);
        for d in &deps {
            assert_eq!(stencil_class(d, scop.n_statements()), StencilClass::Sd1);
        }
    }

    #[test]
    fn cholesky_like_has_two_self_dep_statements_one_scc() {
        let scop = load("cholesky_like");
        let deps = legality_deps(&scop);
        let sccs = build_scc(&scop, &deps);
        let m = metrics(&scop, &deps, &sccs);
        assert_eq!(m.n_scc, 1);
        assert_eq!(m.n_self_dep, 2);
        assert!(m.n_self_dep > m.n_scc);
        assert!(!m.is_stencil);
    }

    #[test]
    fn carried_rows_identity_gemm() {
        let scop = load("gemm");
        let deps = legality_deps(&scop);
        let scheds: Vec<_> = scop
            .statements
            .iter()
            .map(|s| identity_schedule(s, scop.dloop, scop.n_statements()))
            .collect();
        for d in &deps {
            assert!(!dep_carried_at_row(&scop, d, &scheds, 1));
            assert!(!dep_carried_at_row(&scop, d, &scheds, 3));
            assert!(dep_carried_at_row(&scop, d, &scheds, 5));
        }
        let pi = semantic_pi(&scop, &deps, &scheds);
        assert!(pi[0][1] && pi[0][3] && !pi[0][5]);
    }
}
