//! Exact bounded-variable primal simplex over big rationals.
//!
//! Two-phase method with explicit artificial variables and Bland's rule
//! (lowest eligible index enters, lowest basic index leaves on ties), which
//! guarantees termination without cycling. Rows are kept sparse; the basis
//! column of each row has coefficient one and appears in no other row.

use num::{BigRational, One, Signed, Zero};
use std::time::Instant;

use super::{Rat, Rel};

/// One normalized constraint row: `coeffs . x REL rhs`.
#[derive(Clone, Debug)]
pub struct NormRow {
    pub coeffs: Vec<(usize, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { values: Vec<Rat>, objective: Rat },
    Infeasible,
    Unbounded,
    TimedOut,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ColState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    AtZero,
}

/// Sparse row: strictly increasing column indices, no explicit zeros.
type Row = Vec<(usize, Rat)>;

fn row_get(row: &Row, col: usize) -> Option<&Rat> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// `dst += factor * src`, keeping sparsity and order.
fn row_axpy(dst: &Row, factor: &Rat, src: &Row) -> Row {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < dst.len() || j < src.len() {
        match (dst.get(i), src.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) => {
                if ci < cj {
                    out.push((*ci, vi.clone()));
                    i += 1;
                } else if cj < ci {
                    let v = vj * factor;
                    if !v.is_zero() {
                        out.push((*cj, v));
                    }
                    j += 1;
                } else {
                    let v = vi + &(vj * factor);
                    if !v.is_zero() {
                        out.push((*ci, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some((ci, vi)), None) => {
                out.push((*ci, vi.clone()));
                i += 1;
            }
            (None, Some((cj, vj))) => {
                let v = vj * factor;
                if !v.is_zero() {
                    out.push((*cj, v));
                }
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn row_scale(row: &mut Row, factor: &Rat) {
    for (_, v) in row.iter_mut() {
        *v *= factor;
    }
}

pub struct Simplex {
    /// Structural variable count (columns `0..n_struct`).
    n_struct: usize,
    lo: Vec<Option<Rat>>,
    hi: Vec<Option<Rat>>,
    rows: Vec<Row>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    cost: Row,
    deadline: Option<Instant>,
    pivot_limit: u64,
}

impl Simplex {
    /// Build the tableau. `objective` is a dense minimization vector over the
    /// structural variables.
    pub fn new(
        n_struct: usize,
        lo_in: &[Option<Rat>],
        hi_in: &[Option<Rat>],
        norm_rows: &[NormRow],
        deadline: Option<Instant>,
    ) -> Self {
        let m = norm_rows.len();
        let mut lo = lo_in.to_vec();
        let mut hi = hi_in.to_vec();
        let mut rows: Vec<Row> = Vec::with_capacity(m);
        let mut rhs: Vec<Rat> = Vec::with_capacity(m);
        // One slack column per row; relation decides its bounds.
        for (k, r) in norm_rows.iter().enumerate() {
            let slack = n_struct + k;
            let mut row: Row = r.coeffs.clone();
            row.sort_by_key(|e| e.0);
            row.push((slack, Rat::one()));
            rows.push(row);
            rhs.push(r.rhs.clone());
            match r.rel {
                Rel::Le => {
                    lo.push(Some(Rat::zero()));
                    hi.push(None);
                }
                Rel::Ge => {
                    lo.push(None);
                    hi.push(Some(Rat::zero()));
                }
                Rel::Eq => {
                    lo.push(Some(Rat::zero()));
                    hi.push(Some(Rat::zero()));
                }
            }
        }
        let n_total = n_struct + m;
        let mut state = vec![ColState::AtZero; n_total];
        #[allow(clippy::needless_range_loop)]
        for j in 0..n_total {
            state[j] = match (&lo[j], &hi[j]) {
                (Some(_), _) => ColState::AtLower,
                (None, Some(_)) => ColState::AtUpper,
                (None, None) => ColState::AtZero,
            };
        }
        Simplex {
            n_struct,
            lo,
            hi,
            rows,
            rhs,
            basis: Vec::new(),
            state,
            cost: Vec::new(),
            deadline,
            pivot_limit: 2_000_000,
        }
    }

    fn nb_value(&self, col: usize) -> Rat {
        match self.state[col] {
            ColState::AtLower => self.lo[col].clone().unwrap(),
            ColState::AtUpper => self.hi[col].clone().unwrap(),
            ColState::AtZero => Rat::zero(),
            ColState::Basic(_) => unreachable!("nb_value on basic column"),
        }
    }

    /// Value of the basic variable of row `i` from its tableau row.
    fn basic_value(&self, i: usize) -> Rat {
        let b = self.basis[i];
        let mut v = self.rhs[i].clone();
        for (c, a) in &self.rows[i] {
            if *c == b {
                continue;
            }
            let nbv = self.nb_value(*c);
            if !nbv.is_zero() {
                v -= a * &nbv;
            }
        }
        v
    }

    fn value_of(&self, col: usize) -> Rat {
        match self.state[col] {
            ColState::Basic(i) => self.basic_value(i),
            _ => self.nb_value(col),
        }
    }

    /// Run both phases. Returns the outcome for the given structural
    /// objective (dense, minimization).
    pub fn solve(&mut self, objective: &[Rat]) -> LpOutcome {
        let m = self.rows.len();
        let n_total = self.n_struct + m;
        // Choose the initial basis: slack if its implied value is in range,
        // otherwise an artificial column patched in with unit coefficient.
        let mut artificials: Vec<usize> = Vec::new();
        self.basis = Vec::with_capacity(m);
        for i in 0..m {
            let slack = self.n_struct + i;
            // Implied slack value with every structural nonbasic at its bound.
            let mut resid = self.rhs[i].clone();
            for (c, a) in &self.rows[i] {
                if *c == slack {
                    continue;
                }
                let v = self.nb_value(*c);
                if !v.is_zero() {
                    resid -= a * &v;
                }
            }
            let fits = match (&self.lo[slack], &self.hi[slack]) {
                (Some(l), Some(h)) => &resid >= l && &resid <= h,
                (Some(l), None) => &resid >= l,
                (None, Some(h)) => &resid <= h,
                (None, None) => true,
            };
            if fits {
                self.basis.push(slack);
                self.state[slack] = ColState::Basic(i);
            } else {
                // Clamp the slack to its nearest bound and let an artificial
                // absorb the (signed) residual violation.
                let clamped = match (&self.lo[slack], &self.hi[slack]) {
                    (Some(l), _) if &resid < l => l.clone(),
                    (_, Some(h)) if &resid > h => h.clone(),
                    _ => unreachable!(),
                };
                self.state[slack] = if Some(&clamped) == self.lo[slack].as_ref() {
                    ColState::AtLower
                } else {
                    ColState::AtUpper
                };
                let viol = &resid - &clamped;
                let art = n_total + artificials.len();
                // Keep the basis coefficient at +1: negate the row when the
                // violation is negative so the artificial's value is |viol|.
                if viol.is_negative() {
                    for (_, v) in self.rows[i].iter_mut() {
                        *v = -v.clone();
                    }
                    self.rhs[i] = -self.rhs[i].clone();
                }
                self.rows[i].push((art, Rat::one()));
                self.rows[i].sort_by_key(|e| e.0);
                self.lo.push(Some(Rat::zero()));
                self.hi.push(None);
                self.state.push(ColState::Basic(i));
                self.basis.push(art);
                artificials.push(art);
            }
        }

        if !artificials.is_empty() {
            // Phase 1: minimize the sum of artificials.
            let mut phase1 = vec![Rat::zero(); self.lo.len()];
            for &a in &artificials {
                phase1[a] = Rat::one();
            }
            self.rebuild_cost(&phase1);
            match self.optimize() {
                LpOutcome::TimedOut => return LpOutcome::TimedOut,
                LpOutcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
                _ => {}
            }
            let infeas: Rat = artificials.iter().map(|&a| self.value_of(a)).sum();
            if !infeas.is_zero() {
                return LpOutcome::Infeasible;
            }
            // Pin artificials to zero so they never re-enter.
            for &a in &artificials {
                self.hi[a] = Some(Rat::zero());
            }
        }

        let mut full_obj = vec![Rat::zero(); self.lo.len()];
        full_obj[..objective.len()].clone_from_slice(objective);
        self.rebuild_cost(&full_obj);
        let out = self.optimize();
        match out {
            LpOutcome::TimedOut => LpOutcome::TimedOut,
            LpOutcome::Unbounded => LpOutcome::Unbounded,
            _ => {
                let mut values = Vec::with_capacity(self.n_struct);
                for j in 0..self.n_struct {
                    values.push(self.value_of(j));
                }
                let objective = values
                    .iter()
                    .zip(objective.iter())
                    .map(|(v, c)| v * c)
                    .fold(Rat::zero(), |a, b| a + b);
                LpOutcome::Optimal { values, objective }
            }
        }
    }

    /// Reduced-cost row for cost vector `c`: `c - c_B . B^{-1} A`.
    fn rebuild_cost(&mut self, c: &[Rat]) {
        let mut cost: Row = c
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (j, v.clone()))
            .collect();
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            let cb = match row_get(&cost, b) {
                Some(v) => v.clone(),
                None => continue,
            };
            if cb.is_zero() {
                continue;
            }
            let f = -cb;
            cost = row_axpy(&cost, &f, &self.rows[i]);
        }
        self.cost = cost;
    }

    fn optimize(&mut self) -> LpOutcome {
        let mut pivots: u64 = 0;
        loop {
            pivots += 1;
            if pivots > self.pivot_limit {
                // With Bland's rule this should be unreachable; treat as a
                // timeout so callers fail loudly rather than loop forever.
                return LpOutcome::TimedOut;
            }
            if pivots % 256 == 0 {
                if let Some(d) = self.deadline {
                    if Instant::now() >= d {
                        return LpOutcome::TimedOut;
                    }
                }
            }
            // Bland: lowest eligible nonbasic index enters.
            let mut entering: Option<(usize, i32)> = None;
            for (col, d) in &self.cost {
                let dir = match self.state[*col] {
                    ColState::Basic(_) => continue,
                    ColState::AtLower => {
                        if d.is_negative() {
                            1
                        } else {
                            continue;
                        }
                    }
                    ColState::AtUpper => {
                        if d.is_positive() {
                            -1
                        } else {
                            continue;
                        }
                    }
                    ColState::AtZero => {
                        if d.is_negative() {
                            1
                        } else if d.is_positive() {
                            -1
                        } else {
                            continue;
                        }
                    }
                };
                entering = Some((*col, dir));
                break;
            }
            let Some((q, dir)) = entering else {
                return LpOutcome::Optimal { values: Vec::new(), objective: Rat::zero() };
            };
            let dir_rat = rat_i(dir);

            // Ratio test: how far can x_q move in direction `dir`?
            // Candidate limits come from basic variables hitting a bound and
            // from x_q reaching its own opposite bound.
            let mut best_t: Option<Rat> = match (&self.lo[q], &self.hi[q]) {
                (Some(l), Some(h)) => Some(h - l),
                _ => None,
            };
            // (row, which bound the leaving variable hits)
            let mut best_row: Option<(usize, bool)> = None; // bool: leaves at lower
            for i in 0..self.rows.len() {
                let Some(alpha) = row_get(&self.rows[i], q) else { continue };
                if alpha.is_zero() {
                    continue;
                }
                let delta = alpha * &dir_rat; // d x_basic = -delta * t
                let xb = self.basic_value(i);
                let b = self.basis[i];
                let (limit, at_lower) = if delta.is_positive() {
                    match &self.lo[b] {
                        Some(l) => ((&xb - l) / &delta, true),
                        None => continue,
                    }
                } else {
                    match &self.hi[b] {
                        Some(h) => ((&xb - h) / &delta, false),
                        None => continue,
                    }
                };
                debug_assert!(!limit.is_negative(), "basic variable out of bounds");
                let better = match &best_t {
                    None => true,
                    Some(t) => {
                        limit < *t
                            || (limit == *t
                                && match best_row {
                                    None => false,
                                    Some((r, _)) => self.basis[i] < self.basis[r],
                                })
                    }
                };
                if better {
                    best_t = Some(limit.clone());
                    best_row = Some((i, at_lower));
                }
            }

            let Some(t) = best_t else {
                return LpOutcome::Unbounded;
            };
            match best_row {
                None => {
                    // Bound flip: the entering variable runs to its other bound.
                    debug_assert!(!t.is_negative());
                    self.state[q] = match self.state[q] {
                        ColState::AtLower => ColState::AtUpper,
                        ColState::AtUpper => ColState::AtLower,
                        // A free variable can only be limited by a row.
                        _ => unreachable!("flip on non-bounded state"),
                    };
                }
                Some((r, at_lower)) => {
                    self.pivot(r, q, at_lower);
                }
            }
        }
    }

    /// Pivot column `q` into row `r`; the leaving variable rests at the bound
    /// it hit (`at_lower`).
    fn pivot(&mut self, r: usize, q: usize, at_lower: bool) {
        let leaving = self.basis[r];
        let alpha = row_get(&self.rows[r], q).cloned().expect("pivot on zero entry");
        let inv = Rat::one() / &alpha;
        row_scale(&mut self.rows[r], &inv);
        self.rhs[r] *= &inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let Some(c) = row_get(&self.rows[i], q).cloned() else { continue };
            if c.is_zero() {
                continue;
            }
            let f = -c;
            self.rows[i] = row_axpy(&self.rows[i], &f, &pivot_row);
            self.rhs[i] += &f * &pivot_rhs;
        }
        if let Some(c) = row_get(&self.cost, q).cloned() {
            if !c.is_zero() {
                let f = -c;
                self.cost = row_axpy(&self.cost, &f, &pivot_row);
            }
        }
        self.basis[r] = q;
        self.state[q] = ColState::Basic(r);
        self.state[leaving] = if at_lower { ColState::AtLower } else { ColState::AtUpper };
    }
}

fn rat_i(v: i32) -> Rat {
    BigRational::from_integer(v.into())
}

/// Solve `min objective . x` subject to normalized rows and bounds.
pub fn lp_solve(
    n_struct: usize,
    lo: &[Option<Rat>],
    hi: &[Option<Rat>],
    rows: &[NormRow],
    objective: &[Rat],
    deadline: Option<Instant>,
) -> LpOutcome {
    // Reject empty boxes up front; the tableau assumes lo <= hi.
    for j in 0..n_struct {
        if let (Some(l), Some(h)) = (&lo[j], &hi[j]) {
            if l > h {
                return LpOutcome::Infeasible;
            }
        }
    }
    let mut s = Simplex::new(n_struct, lo, hi, rows, deadline);
    s.solve(objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::rat;

    fn bounds(v: &[(i64, i64)]) -> (Vec<Option<Rat>>, Vec<Option<Rat>>) {
        (
            v.iter().map(|(l, _)| Some(rat(*l))).collect(),
            v.iter().map(|(_, h)| Some(rat(*h))).collect(),
        )
    }

    #[test]
    fn simple_lp() {
        // min -x - y s.t. x + y <= 3, x,y in [0, 2] -> optimum -3.
        let (lo, hi) = bounds(&[(0, 2), (0, 2)]);
        let rows = vec![NormRow {
            coeffs: vec![(0, rat(1)), (1, rat(1))],
            rel: Rel::Le,
            rhs: rat(3),
        }];
        match lp_solve(2, &lo, &hi, &rows, &[rat(-1), rat(-1)], None) {
            LpOutcome::Optimal { objective, .. } => assert_eq!(objective, rat(-3)),
            o => panic!("unexpected outcome {o:?}"),
        }
    }

    #[test]
    fn infeasible_lp() {
        // x >= 1 and x <= 0.
        let (lo, hi) = (vec![None], vec![None]);
        let rows = vec![
            NormRow { coeffs: vec![(0, rat(1))], rel: Rel::Ge, rhs: rat(1) },
            NormRow { coeffs: vec![(0, rat(1))], rel: Rel::Le, rhs: rat(0) },
        ];
        assert_eq!(lp_solve(1, &lo, &hi, &rows, &[rat(0)], None), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_lp() {
        let (lo, hi) = (vec![Some(rat(0))], vec![None]);
        let rows = vec![];
        assert_eq!(lp_solve(1, &lo, &hi, &rows, &[rat(-1)], None), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_rows() {
        // min x s.t. 2x + y = 4, y in [0,1], x free -> x = 3/2 at y=1.
        let lo = vec![None, Some(rat(0))];
        let hi = vec![None, Some(rat(1))];
        let rows = vec![NormRow {
            coeffs: vec![(0, rat(2)), (1, rat(1))],
            rel: Rel::Eq,
            rhs: rat(4),
        }];
        match lp_solve(2, &lo, &hi, &rows, &[rat(1), rat(0)], None) {
            LpOutcome::Optimal { values, .. } => {
                assert_eq!(values[0], Rat::new(3.into(), 2.into()));
                assert_eq!(values[1], rat(1));
            }
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn negative_lower_bounds() {
        // min x + y s.t. x + y >= -3, x,y in [-2, 2] -> -3 (on the face).
        let (lo, hi) = bounds(&[(-2, 2), (-2, 2)]);
        let rows = vec![NormRow {
            coeffs: vec![(0, rat(1)), (1, rat(1))],
            rel: Rel::Ge,
            rhs: rat(-3),
        }];
        match lp_solve(2, &lo, &hi, &rows, &[rat(1), rat(1)], None) {
            LpOutcome::Optimal { objective, .. } => assert_eq!(objective, rat(-3)),
            o => panic!("unexpected {o:?}"),
        }
    }
}
