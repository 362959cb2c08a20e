//! Exact mixed-integer linear programming with an ordered objective stack.
//!
//! All arithmetic is arbitrary-precision rational: a solved assignment
//! satisfies every constraint exactly, with no tolerances. Lexicographic
//! optimization is realized by sequential solve-and-pin: each objective is
//! optimized, its optimum added back as an equality, and the next level
//! solved under it.

mod simplex;
mod solve;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

pub use solve::{Feasibility, LexSolution};

/// Exact rational scalar used throughout the solver.
pub type Rat = BigRational;

/// Convenience constructor for small integer rationals.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarKind {
    Integer,
    Rational,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sense {
    Min,
    Max,
}

/// Where a new objective lands in the stack.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Position {
    Leading,
    Trailing,
}

/// Handle to a system variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct VarId(pub usize);

#[derive(Error, Debug)]
pub enum IlpError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("integer variable `{0}` must have finite bounds")]
    UnboundedInteger(String),
    #[error("variable `{0}` has lower bound above upper bound")]
    EmptyBounds(String),
    #[error("expression references unknown variable id {0}")]
    UnknownVariable(usize),
    #[error("system infeasible at {0}")]
    Infeasible(String),
    #[error("objective `{0}` unbounded: internal contract violation (all variables must be bounded)")]
    Unbounded(String),
    #[error("time budget exceeded at objective level `{0}` with no incumbent")]
    Timeout(String),
    #[error("pivot limit exceeded; solver made no progress")]
    PivotLimit,
}

/// Linear expression over system variables plus a constant.
///
/// Terms are kept in a sorted map so equality and printing are canonical.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: BTreeMap<VarId, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        Self { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        let mut e = Self::new();
        e.add_term(v, Rat::one());
        e
    }

    pub fn add_term(&mut self, v: VarId, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_const(&mut self, c: Rat) {
        self.constant += c;
    }

    pub fn add_scaled(&mut self, other: &LinExpr, factor: &Rat) {
        if factor.is_zero() {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, c * factor);
        }
        self.constant += &other.constant * factor;
    }

    pub fn scaled(&self, factor: &Rat) -> LinExpr {
        let mut e = LinExpr::new();
        e.add_scaled(self, factor);
        e
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.add_scaled(other, &Rat::one());
        e
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate under a total assignment.
    pub fn eval(&self, values: &[Rat]) -> Rat {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * &values[v.0];
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct VarDef {
    pub name: String,
    pub kind: VarKind,
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
    pub rhs: Rat,
    pub label: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Objective {
    pub name: String,
    pub expr: LinExpr,
    pub sense: Sense,
}

/// A solved variable assignment, indexed by `VarId`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<Rat>,
}

impl Assignment {
    pub fn get(&self, v: VarId) -> &Rat {
        &self.values[v.0]
    }

    /// Integer value of a variable known to be integral.
    pub fn get_i64(&self, v: VarId) -> i64 {
        let r = &self.values[v.0];
        debug_assert!(r.is_integer());
        let t = r.to_integer();
        i64::try_from(t).expect("assignment value out of i64 range")
    }
}

/// A mixed-integer system with an ordered objective stack.
#[derive(Clone, Debug, Default)]
pub struct IlpSystem {
    pub vars: Vec<VarDef>,
    pub constraints: Vec<Constraint>,
    pub objectives: Vec<Objective>,
    pub assignment: Option<Assignment>,
    names: BTreeMap<String, VarId>,
    /// Per-level time budget for branch and bound; `None` means unlimited.
    pub time_budget: Option<Duration>,
}

impl IlpSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn add_variable(
        &mut self,
        name: &str,
        kind: VarKind,
        lo: Option<Rat>,
        hi: Option<Rat>,
    ) -> Result<VarId, IlpError> {
        if self.names.contains_key(name) {
            return Err(IlpError::DuplicateVariable(name.to_string()));
        }
        if kind == VarKind::Integer && (lo.is_none() || hi.is_none()) {
            return Err(IlpError::UnboundedInteger(name.to_string()));
        }
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return Err(IlpError::EmptyBounds(name.to_string()));
            }
        }
        let id = VarId(self.vars.len());
        self.vars.push(VarDef { name: name.to_string(), kind, lo, hi });
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    /// Convenience: bounded integer variable.
    pub fn int_var(&mut self, name: &str, lo: i64, hi: i64) -> Result<VarId, IlpError> {
        self.add_variable(name, VarKind::Integer, Some(rat(lo)), Some(rat(hi)))
    }

    pub fn set_bounds(&mut self, v: VarId, lo: Option<Rat>, hi: Option<Rat>) {
        self.vars[v.0].lo = lo;
        self.vars[v.0].hi = hi;
    }

    fn check_expr(&self, expr: &LinExpr) -> Result<(), IlpError> {
        for v in expr.terms.keys() {
            if v.0 >= self.vars.len() {
                return Err(IlpError::UnknownVariable(v.0));
            }
        }
        Ok(())
    }

    pub fn add_constraint(&mut self, expr: LinExpr, rel: Rel, rhs: Rat) {
        self.add_constraint_labeled(expr, rel, rhs, None);
    }

    pub fn add_constraint_labeled(
        &mut self,
        mut expr: LinExpr,
        rel: Rel,
        rhs: Rat,
        label: Option<String>,
    ) {
        // Fold the expression constant into the right-hand side.
        let rhs = rhs - std::mem::replace(&mut expr.constant, Rat::zero());
        self.constraints.push(Constraint { expr, rel, rhs, label });
    }

    pub fn push_objective(
        &mut self,
        expr: LinExpr,
        sense: Sense,
        position: Position,
        name: &str,
    ) -> Result<(), IlpError> {
        self.check_expr(&expr)?;
        let obj = Objective { name: name.to_string(), expr, sense };
        match position {
            Position::Leading => self.objectives.insert(0, obj),
            Position::Trailing => self.objectives.push(obj),
        }
        Ok(())
    }

    /// Deterministic LP-style text dump for external cross-checking.
    pub fn dump_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ polyvocab ilp dump\n");
        for (i, o) in self.objectives.iter().enumerate() {
            let sense = match o.sense {
                Sense::Min => "minimize",
                Sense::Max => "maximize",
            };
            let _ = writeln!(out, "{} L{} ({}): {}", sense, i, o.name, self.expr_text(&o.expr));
        }
        out.push_str("subject to\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let rel = match c.rel {
                Rel::Le => "<=",
                Rel::Eq => "=",
                Rel::Ge => ">=",
            };
            let label = c.label.as_deref().unwrap_or("");
            let _ = writeln!(out, "  c{}: {} {} {}  {}", i, self.expr_text(&c.expr), rel, c.rhs, label);
        }
        out.push_str("bounds\n");
        for (i, v) in self.vars.iter().enumerate() {
            let lo = v.lo.as_ref().map(|r| r.to_string()).unwrap_or_else(|| "-inf".into());
            let hi = v.hi.as_ref().map(|r| r.to_string()).unwrap_or_else(|| "+inf".into());
            let kind = match v.kind {
                VarKind::Integer => "int",
                VarKind::Rational => "rat",
            };
            let _ = writeln!(out, "  x{} {} [{}, {}] {}", i, v.name, lo, hi, kind);
        }
        out
    }

    fn expr_text(&self, e: &LinExpr) -> String {
        let mut s = String::new();
        let mut first = true;
        for (v, c) in &e.terms {
            if first {
                if c.is_negative() {
                    s.push_str("- ");
                }
                first = false;
            } else if c.is_negative() {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            let a = c.abs();
            if a.is_one() {
                let _ = write!(s, "{}", self.vars[v.0].name);
            } else {
                let _ = write!(s, "{} {}", a, self.vars[v.0].name);
            }
        }
        if !e.constant.is_zero() || first {
            if first {
                let _ = write!(s, "{}", e.constant);
            } else {
                let _ = write!(s, " + {}", e.constant);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut sys = IlpSystem::new();
        sys.int_var("x", 0, 1).unwrap();
        assert!(matches!(sys.int_var("x", 0, 1), Err(IlpError::DuplicateVariable(_))));
    }

    #[test]
    fn unbounded_integer_rejected() {
        let mut sys = IlpSystem::new();
        let err = sys.add_variable("z", VarKind::Integer, Some(rat(0)), None);
        assert!(matches!(err, Err(IlpError::UnboundedInteger(_))));
        // Farkas-style nonnegative rational is fine.
        sys.add_variable("lambda_7", VarKind::Rational, Some(rat(0)), None).unwrap();
    }

    #[test]
    fn objective_positions() {
        let mut sys = IlpSystem::new();
        let x = sys.int_var("x", 0, 1).unwrap();
        let y = sys.int_var("y", 0, 1).unwrap();
        sys.push_objective(LinExpr::var(x), Sense::Min, Position::Leading, "so.coeff")
            .unwrap();
        sys.push_objective(LinExpr::var(y), Sense::Min, Position::Trailing, "so.cost")
            .unwrap();
        sys.push_objective(LinExpr::var(y), Sense::Min, Position::Leading, "opir.q_prog")
            .unwrap();
        let names: Vec<_> = sys.objectives.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, vec!["opir.q_prog", "so.coeff", "so.cost"]);
    }

    #[test]
    fn expr_arith() {
        let mut e = LinExpr::new();
        e.add_term(VarId(0), rat(2));
        e.add_term(VarId(0), rat(-2));
        assert!(e.is_empty());
        e.add_term(VarId(1), rat(3));
        e.add_const(rat(4));
        let vals = vec![rat(0), rat(5)];
        assert_eq!(e.eval(&vals), rat(19));
    }
}
