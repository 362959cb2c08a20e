//! Branch and bound over the exact LP relaxation, plus the lexicographic
//! solve-and-pin driver.
//!
//! Branching is deterministic: the fractional integer variable with the
//! lowest index is selected, and the down branch is explored before the up
//! branch. Interval propagation tightens integer bounds at every node.

use std::time::Instant;

use num::{BigRational, One, Signed, Zero};

use super::simplex::{lp_solve, LpOutcome, NormRow};
use super::{Assignment, IlpError, IlpSystem, LinExpr, Rat, Rel, Sense, VarKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Assignment),
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct LexSolution {
    pub assignment: Assignment,
    /// Objective value per level, in stack order.
    pub level_values: Vec<(String, Rat)>,
    /// Levels where the time budget expired and the incumbent was used.
    pub timed_out_levels: Vec<String>,
}

enum MilpOutcome {
    Optimal(Vec<Rat>, Rat),
    Infeasible,
    Unbounded,
    TimedOut(Option<(Vec<Rat>, Rat)>),
}

struct MilpProblem<'a> {
    n: usize,
    kinds: &'a [VarKind],
    rows: Vec<NormRow>,
}

/// Interval propagation: repeatedly tighten variable bounds from row
/// activities. Integer bounds are rounded inward. Returns false when a bound
/// pair becomes empty.
fn propagate(
    p: &MilpProblem,
    lo: &mut [Option<Rat>],
    hi: &mut [Option<Rat>],
    max_passes: usize,
) -> bool {
    for _ in 0..max_passes {
        let mut changed = false;
        for row in &p.rows {
            // Minimum and maximum activity of the row, None = unbounded.
            let mut min_act = Some(Rat::zero());
            let mut max_act = Some(Rat::zero());
            for (j, c) in &row.coeffs {
                let (tmin, tmax) = if c.is_positive() {
                    (
                        lo[*j].as_ref().map(|b| b * c),
                        hi[*j].as_ref().map(|b| b * c),
                    )
                } else {
                    (
                        hi[*j].as_ref().map(|b| b * c),
                        lo[*j].as_ref().map(|b| b * c),
                    )
                };
                min_act = match (min_act, tmin) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
                max_act = match (max_act, tmax) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
            }
            // Quick infeasibility: activity range cannot reach rhs.
            match row.rel {
                Rel::Le => {
                    if let Some(m) = &min_act {
                        if *m > row.rhs {
                            return false;
                        }
                    }
                }
                Rel::Ge => {
                    if let Some(m) = &max_act {
                        if *m < row.rhs {
                            return false;
                        }
                    }
                }
                Rel::Eq => {
                    if let Some(m) = &min_act {
                        if *m > row.rhs {
                            return false;
                        }
                    }
                    if let Some(m) = &max_act {
                        if *m < row.rhs {
                            return false;
                        }
                    }
                }
            }
            for (j, c) in &row.coeffs {
                // Residual activity bounds excluding term j.
                let term_min;
                let term_max;
                if c.is_positive() {
                    term_min = lo[*j].as_ref().map(|b| b * c);
                    term_max = hi[*j].as_ref().map(|b| b * c);
                } else {
                    term_min = hi[*j].as_ref().map(|b| b * c);
                    term_max = lo[*j].as_ref().map(|b| b * c);
                }
                let rest_min = match (&min_act, &term_min) {
                    (Some(a), Some(t)) => Some(a - t),
                    _ => None,
                };
                let rest_max = match (&max_act, &term_max) {
                    (Some(a), Some(t)) => Some(a - t),
                    _ => None,
                };
                // c*x_j <= rhs - rest_min (for Le/Eq); c*x_j >= rhs - rest_max (for Ge/Eq).
                let mut new_hi_c: Option<Rat> = None; // upper bound on c*x_j
                let mut new_lo_c: Option<Rat> = None; // lower bound on c*x_j
                match row.rel {
                    Rel::Le => {
                        if let Some(rm) = &rest_min {
                            new_hi_c = Some(&row.rhs - rm);
                        }
                    }
                    Rel::Ge => {
                        if let Some(rm) = &rest_max {
                            new_lo_c = Some(&row.rhs - rm);
                        }
                    }
                    Rel::Eq => {
                        if let Some(rm) = &rest_min {
                            new_hi_c = Some(&row.rhs - rm);
                        }
                        if let Some(rm) = &rest_max {
                            new_lo_c = Some(&row.rhs - rm);
                        }
                    }
                }
                // Translate to bounds on x_j.
                let (mut cand_lo, mut cand_hi): (Option<Rat>, Option<Rat>) = (None, None);
                if c.is_positive() {
                    if let Some(h) = new_hi_c {
                        cand_hi = Some(h / c);
                    }
                    if let Some(l) = new_lo_c {
                        cand_lo = Some(l / c);
                    }
                } else {
                    if let Some(h) = new_hi_c {
                        cand_lo = Some(h / c);
                    }
                    if let Some(l) = new_lo_c {
                        cand_hi = Some(l / c);
                    }
                }
                if p.kinds[*j] == VarKind::Integer {
                    cand_lo = cand_lo.map(|r| r.ceil());
                    cand_hi = cand_hi.map(|r| r.floor());
                }
                if let Some(l) = cand_lo {
                    let tighter = match &lo[*j] {
                        None => true,
                        Some(cur) => l > *cur,
                    };
                    if tighter {
                        lo[*j] = Some(l);
                        changed = true;
                    }
                }
                if let Some(h) = cand_hi {
                    let tighter = match &hi[*j] {
                        None => true,
                        Some(cur) => h < *cur,
                    };
                    if tighter {
                        hi[*j] = Some(h);
                        changed = true;
                    }
                }
                if let (Some(l), Some(h)) = (&lo[*j], &hi[*j]) {
                    if l > h {
                        return false;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

fn solve_milp(
    p: &MilpProblem,
    lo0: Vec<Option<Rat>>,
    hi0: Vec<Option<Rat>>,
    objective: &[Rat],
    deadline: Option<Instant>,
) -> MilpOutcome {
    // Integral objective values allow a ceil-sharpened bound prune.
    let obj_integral = objective
        .iter()
        .enumerate()
        .all(|(j, c)| c.is_zero() || (c.is_integer() && p.kinds[j] == VarKind::Integer));

    let mut incumbent: Option<(Vec<Rat>, Rat)> = None;
    let mut stack: Vec<(Vec<Option<Rat>>, Vec<Option<Rat>>, usize)> = vec![(lo0, hi0, 0)];
    while let Some((mut lo, mut hi, depth)) = stack.pop() {
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return MilpOutcome::TimedOut(incumbent);
            }
        }
        let passes = if depth == 0 { 16 } else { 4 };
        if !propagate(p, &mut lo, &mut hi, passes) {
            continue;
        }
        let outcome = lp_solve(p.n, &lo, &hi, &p.rows, objective, deadline);
        let (values, obj) = match outcome {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return MilpOutcome::Unbounded,
            LpOutcome::TimedOut => return MilpOutcome::TimedOut(incumbent),
            LpOutcome::Optimal { values, objective } => (values, objective),
        };
        if let Some((_, best)) = &incumbent {
            let pruned = if obj_integral {
                // obj can only load to integer values >= ceil(lp bound).
                obj.ceil() >= *best
            } else {
                obj >= *best
            };
            if pruned {
                continue;
            }
        }
        // Find the lowest-index fractional integer variable.
        let mut frac: Option<(usize, Rat)> = None;
        for j in 0..p.n {
            if p.kinds[j] == VarKind::Integer && !values[j].is_integer() {
                frac = Some((j, values[j].clone()));
                break;
            }
        }
        match frac {
            None => {
                let better = match &incumbent {
                    None => true,
                    Some((_, best)) => obj < *best,
                };
                if better {
                    incumbent = Some((values, obj));
                }
            }
            Some((j, v)) => {
                let fl = v.floor();
                // Push up first so the down branch is explored first.
                let mut lo_up = lo.clone();
                let hi_up = hi.clone();
                let up = &fl + BigRational::one();
                lo_up[j] = Some(match &lo[j] {
                    Some(cur) if *cur > up => cur.clone(),
                    _ => up,
                });
                stack.push((lo_up, hi_up, depth + 1));
                let lo_dn = lo;
                let mut hi_dn = hi;
                hi_dn[j] = Some(match &hi_dn[j] {
                    Some(cur) if *cur < fl => cur.clone(),
                    _ => fl,
                });
                stack.push((lo_dn, hi_dn, depth + 1));
            }
        }
    }
    match incumbent {
        Some((vals, obj)) => MilpOutcome::Optimal(vals, obj),
        None => MilpOutcome::Infeasible,
    }
}

impl IlpSystem {
    fn norm_rows(&self) -> Vec<NormRow> {
        self.constraints
            .iter()
            .map(|c| NormRow {
                coeffs: c.expr.terms.iter().map(|(v, r)| (v.0, r.clone())).collect(),
                rel: c.rel,
                rhs: c.rhs.clone(),
            })
            .collect()
    }

    fn bound_vectors(&self) -> (Vec<Option<Rat>>, Vec<Option<Rat>>) {
        (
            self.vars.iter().map(|v| v.lo.clone()).collect(),
            self.vars.iter().map(|v| v.hi.clone()).collect(),
        )
    }

    fn kinds(&self) -> Vec<VarKind> {
        self.vars.iter().map(|v| v.kind).collect()
    }

    /// Exact feasibility: LP first, then branch and bound on integer
    /// variables. Returns a witness assignment when feasible.
    pub fn check_feasible(&self) -> Feasibility {
        let kinds = self.kinds();
        let p = MilpProblem { n: self.vars.len(), kinds: &kinds, rows: self.norm_rows() };
        let (lo, hi) = self.bound_vectors();
        let zero_obj = vec![Rat::zero(); p.n];
        match solve_milp(&p, lo, hi, &zero_obj, None) {
            MilpOutcome::Optimal(vals, _) => Feasibility::Feasible(Assignment { values: vals }),
            _ => Feasibility::Infeasible,
        }
    }

    /// Sequential lexicographic optimization: optimize objective 1, pin its
    /// optimum as an equality, optimize objective 2 under it, and so on.
    /// With an empty stack this is a pure feasibility solve.
    pub fn solve_lex(&mut self) -> Result<LexSolution, IlpError> {
        let kinds = self.kinds();
        let mut rows = self.norm_rows();
        let (lo, hi) = self.bound_vectors();
        let n = self.vars.len();
        let mut level_values = Vec::new();
        let mut timed_out = Vec::new();
        let mut last_assignment: Option<Vec<Rat>> = None;

        let levels: Vec<(String, LinExpr, Sense)> = if self.objectives.is_empty() {
            vec![("feasibility".to_string(), LinExpr::new(), Sense::Min)]
        } else {
            self.objectives
                .iter()
                .map(|o| (o.name.clone(), o.expr.clone(), o.sense))
                .collect()
        };

        for (name, expr, sense) in levels {
            let mut dense = vec![Rat::zero(); n];
            for (v, c) in &expr.terms {
                dense[v.0] = match sense {
                    Sense::Min => c.clone(),
                    Sense::Max => -c.clone(),
                };
            }
            let deadline = self.time_budget.map(|b| Instant::now() + b);
            let p = MilpProblem { n, kinds: &kinds, rows: rows.clone() };
            let outcome = solve_milp(&p, lo.clone(), hi.clone(), &dense, deadline);
            let (vals, _) = match outcome {
                MilpOutcome::Infeasible => {
                    let at = if level_values.is_empty() {
                        "base system".to_string()
                    } else {
                        format!("objective level `{name}`")
                    };
                    return Err(IlpError::Infeasible(at));
                }
                MilpOutcome::Unbounded => return Err(IlpError::Unbounded(name)),
                MilpOutcome::TimedOut(best) => match best {
                    Some(b) => {
                        timed_out.push(name.clone());
                        b
                    }
                    None => return Err(IlpError::Timeout(name)),
                },
                MilpOutcome::Optimal(vals, obj) => (vals, obj),
            };
            // Report and pin the user-facing objective value (sense restored).
            let user_value = expr.eval(&vals);
            level_values.push((name, user_value.clone()));
            rows.push(NormRow {
                coeffs: expr.terms.iter().map(|(v, c)| (v.0, c.clone())).collect(),
                rel: Rel::Eq,
                rhs: &user_value - &expr.constant,
            });
            last_assignment = Some(vals);
        }
        let assignment = Assignment { values: last_assignment.expect("at least one level") };
        self.assignment = Some(assignment.clone());
        Ok(LexSolution { assignment, level_values, timed_out_levels: timed_out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{rat, Position, VarId};

    #[test]
    fn lex_min_then_max() {
        // min x, then max y over {0<=x,y<=2, x+y>=1} -> x=0, y=2.
        let mut sys = IlpSystem::new();
        let x = sys.int_var("x", 0, 2).unwrap();
        let y = sys.int_var("y", 0, 2).unwrap();
        let mut e = LinExpr::var(x);
        e.add_term(y, rat(1));
        sys.add_constraint(e, Rel::Ge, rat(1));
        sys.push_objective(LinExpr::var(x), Sense::Min, Position::Trailing, "min x").unwrap();
        sys.push_objective(LinExpr::var(y), Sense::Max, Position::Trailing, "max y").unwrap();
        let sol = sys.solve_lex().unwrap();
        assert_eq!(sol.assignment.get_i64(x), 0);
        assert_eq!(sol.assignment.get_i64(y), 2);
        assert_eq!(sol.level_values[0].1, rat(0));
        assert_eq!(sol.level_values[1].1, rat(2));
    }

    #[test]
    fn milp_grid_example() {
        // min 3a+2b over integers a,b in [0,5], a+b >= 4 -> a=0, b=4, value 8.
        let mut sys = IlpSystem::new();
        let a = sys.int_var("a", 0, 5).unwrap();
        let b = sys.int_var("b", 0, 5).unwrap();
        let mut e = LinExpr::var(a);
        e.add_term(b, rat(1));
        sys.add_constraint(e, Rel::Ge, rat(4));
        let mut obj = LinExpr::new();
        obj.add_term(a, rat(3));
        obj.add_term(b, rat(2));
        sys.push_objective(obj, Sense::Min, Position::Trailing, "cost").unwrap();
        let sol = sys.solve_lex().unwrap();
        assert_eq!(sol.level_values[0].1, rat(8));
        assert_eq!(sol.assignment.get_i64(a), 0);
        assert_eq!(sol.assignment.get_i64(b), 4);
    }

    #[test]
    fn parity_infeasible() {
        // x integer in [0,1], 2x = 1 -> infeasible.
        let mut sys = IlpSystem::new();
        let x = sys.int_var("x", 0, 1).unwrap();
        let mut e = LinExpr::new();
        e.add_term(x, rat(2));
        sys.add_constraint(e, Rel::Eq, rat(1));
        assert_eq!(sys.check_feasible(), Feasibility::Infeasible);
        assert!(sys.solve_lex().is_err());
    }

    #[test]
    fn feasible_witness() {
        // x integer in [0,10], 3x = 6 -> feasible with x = 2.
        let mut sys = IlpSystem::new();
        let x = sys.int_var("x", 0, 10).unwrap();
        let mut e = LinExpr::new();
        e.add_term(x, rat(3));
        sys.add_constraint(e, Rel::Eq, rat(6));
        match sys.check_feasible() {
            Feasibility::Feasible(a) => assert_eq!(a.get_i64(x), 2),
            Feasibility::Infeasible => panic!("should be feasible"),
        }
    }

    #[test]
    fn pin_and_continue_soundness() {
        // Three levels; earlier optima must not drift.
        let mut sys = IlpSystem::new();
        let x = sys.int_var("x", 0, 3).unwrap();
        let y = sys.int_var("y", 0, 3).unwrap();
        let z = sys.int_var("z", 0, 3).unwrap();
        let mut e = LinExpr::var(x);
        e.add_term(y, rat(1));
        e.add_term(z, rat(1));
        sys.add_constraint(e, Rel::Ge, rat(4));
        sys.push_objective(LinExpr::var(x), Sense::Min, Position::Trailing, "l1").unwrap();
        sys.push_objective(LinExpr::var(y), Sense::Min, Position::Trailing, "l2").unwrap();
        sys.push_objective(LinExpr::var(z), Sense::Max, Position::Trailing, "l3").unwrap();
        let sol = sys.solve_lex().unwrap();
        assert_eq!(sol.level_values[0].1, rat(0));
        assert_eq!(sol.level_values[1].1, rat(1));
        assert_eq!(sol.level_values[2].1, rat(3));
        assert_eq!(sol.assignment.get_i64(x), 0);
        assert_eq!(sol.assignment.get_i64(y), 1);
        assert_eq!(sol.assignment.get_i64(z), 3);
    }

    /// Brute-force lexicographic reference for small all-integer systems.
    fn brute_lex(sys: &IlpSystem) -> Option<Vec<Rat>> {
        let n = sys.vars.len();
        let mut ranges = Vec::new();
        for v in &sys.vars {
            let lo = v.lo.as_ref().unwrap().to_integer();
            let hi = v.hi.as_ref().unwrap().to_integer();
            let lo = i64::try_from(lo).unwrap();
            let hi = i64::try_from(hi).unwrap();
            ranges.push((lo, hi));
        }
        let mut best: Option<(Vec<Rat>, Vec<Rat>)> = None; // (objective vector, point)
        let mut point = vec![0i64; n];
        fn rec(
            sys: &IlpSystem,
            ranges: &[(i64, i64)],
            point: &mut Vec<i64>,
            d: usize,
            best: &mut Option<(Vec<Rat>, Vec<Rat>)>,
        ) {
            if d == ranges.len() {
                let vals: Vec<Rat> = point.iter().map(|v| rat(*v)).collect();
                for c in &sys.constraints {
                    let lhs = c.expr.eval(&vals);
                    let ok = match c.rel {
                        Rel::Le => lhs <= c.rhs,
                        Rel::Eq => lhs == c.rhs,
                        Rel::Ge => lhs >= c.rhs,
                    };
                    if !ok {
                        return;
                    }
                }
                let mut key = Vec::new();
                for o in &sys.objectives {
                    let v = o.expr.eval(&vals);
                    key.push(match o.sense {
                        Sense::Min => v,
                        Sense::Max => -v,
                    });
                }
                match best {
                    None => *best = Some((key, vals)),
                    Some((bk, _)) if key < *bk => *best = Some((key, vals)),
                    _ => {}
                }
                return;
            }
            for v in ranges[d].0..=ranges[d].1 {
                point[d] = v;
                rec(sys, ranges, point, d + 1, best);
            }
        }
        rec(sys, &ranges, &mut point, 0, &mut best);
        best.map(|(key, _)| key)
    }

    #[test]
    fn randomized_exactness_vs_grid() {
        // Deterministic xorshift; compares the lexicographic value vector
        // against exhaustive enumeration on small boxes.
        let mut state: u64 = 0x9E3779B97F4A7C15;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for case in 0..60 {
            let n = 2 + (next() % 4) as usize; // 2..5 vars
            let mut sys = IlpSystem::new();
            let mut ids = Vec::new();
            for j in 0..n {
                let lo = (next() % 3) as i64 - 1;
                let hi = lo + (next() % 5) as i64;
                ids.push(sys.int_var(&format!("v{j}"), lo, hi).unwrap());
            }
            let m = 1 + (next() % 3) as usize;
            for _ in 0..m {
                let mut e = LinExpr::new();
                for &id in &ids {
                    let c = (next() % 7) as i64 - 3;
                    e.add_term(id, rat(c));
                }
                let rel = match next() % 3 {
                    0 => Rel::Le,
                    1 => Rel::Ge,
                    _ => Rel::Eq,
                };
                let rhs = (next() % 9) as i64 - 4;
                sys.add_constraint(e, rel, rat(rhs));
            }
            let k = 1 + (next() % 2) as usize;
            for lev in 0..k {
                let mut e = LinExpr::new();
                for &id in &ids {
                    let c = (next() % 5) as i64 - 2;
                    e.add_term(id, rat(c));
                }
                let sense = if next() % 2 == 0 { Sense::Min } else { Sense::Max };
                sys.push_objective(e, sense, Position::Trailing, &format!("o{lev}")).unwrap();
            }
            let brute = brute_lex(&sys);
            let solved = sys.clone().solve_lex();
            match (brute, solved) {
                (None, Err(_)) => {}
                (Some(key), Ok(sol)) => {
                    let got: Vec<Rat> = sol
                        .level_values
                        .iter()
                        .zip(sys.objectives.iter())
                        .map(|((_, v), o)| match o.sense {
                            Sense::Min => v.clone(),
                            Sense::Max => -v.clone(),
                        })
                        .collect();
                    assert_eq!(got, key, "case {case}: lex value vector mismatch");
                }
                (b, s) => panic!("case {case}: feasibility disagreement brute={b:?} solver={s:?}"),
            }
        }
    }

    #[test]
    fn unknown_variable_in_objective() {
        let mut sys = IlpSystem::new();
        sys.int_var("x", 0, 1).unwrap();
        let bogus = LinExpr::var(VarId(7));
        assert!(sys.push_objective(bogus, Sense::Min, Position::Trailing, "bad").is_err());
    }
}
