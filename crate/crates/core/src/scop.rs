//! Domain model for static-control programs and the external text format.
//!
//! A SCoP is a list of statements with affine iteration domains and affine
//! array accesses. Loop structure is reconstructed from iterator names:
//! consecutive statements sharing an iterator-name prefix share those loops,
//! which yields each statement's syntactic position vector (its beta path).
//! Schedules use the 2d+1 representation: d+1 scalar rows interleaved with
//! d linear rows, where d is the maximum loop depth.

use serde::Serialize;
use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ScopError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("statement {stmt}: access to `{array}` has {got} columns, expected dim(S) = {want}")]
    DimensionMismatch { stmt: usize, array: String, got: usize, want: usize },
    #[error("duplicate statement id {0}")]
    DuplicateStatement(usize),
    #[error("statement {stmt}: domain is empty at parameters = {params}")]
    EmptyDomain { stmt: usize, params: i64 },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum AccessKind {
    Read,
    Write,
}

/// Affine map from iteration vectors to array subscripts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccessFunction {
    pub array: String,
    pub kind: AccessKind,
    /// dim(F) rows over the statement's iterators.
    pub matrix: Vec<Vec<i64>>,
    /// Constant part, one entry per array dimension.
    pub offsets: Vec<i64>,
    /// dim(F) rows over the SCoP parameters.
    pub param_part: Vec<Vec<i64>>,
}

impl AccessFunction {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// Does iterator column `col` appear anywhere in the map?
    pub fn uses_iterator(&self, col: usize) -> bool {
        self.matrix.iter().any(|row| row[col] != 0)
    }

    /// Does iterator column `col` appear in the fastest-varying (last) row?
    pub fn in_fvd(&self, col: usize) -> bool {
        self.matrix.last().map(|row| row[col] != 0).unwrap_or(false)
    }
}

/// One statement: iterators, affine domain (rows are `>= 0` over iterators
/// ++ parameters ++ constant), and its accesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Statement {
    pub id: usize,
    pub iterators: Vec<String>,
    pub domain: Vec<Vec<i64>>,
    pub accesses: Vec<AccessFunction>,
    pub text: Option<String>,
    /// Syntactic position path: dim(S)+1 entries.
    pub beta: Vec<i64>,
}

impl Statement {
    pub fn dim(&self) -> usize {
        self.iterators.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scop {
    pub name: String,
    pub parameters: Vec<String>,
    /// Affine inequalities over parameters ++ constant, `>= 0`.
    pub context: Vec<Vec<i64>>,
    pub statements: Vec<Statement>,
    /// Max loop depth over statements.
    pub dloop: usize,
}

impl Scop {
    pub fn n_statements(&self) -> usize {
        self.statements.len()
    }

    /// Number of schedule rows: 2*Dloop + 1.
    pub fn schedule_rows(&self) -> usize {
        2 * self.dloop + 1
    }

    /// Smallest parameter value used for emptiness tests: 2*Dloop + 2.
    pub fn default_param_min(&self) -> i64 {
        2 * self.dloop as i64 + 2
    }

    /// Number of loops two statements share in the source nesting, derived
    /// from their beta paths.
    pub fn common_loops(&self, r: usize, s: usize) -> usize {
        let a = &self.statements[r].beta;
        let b = &self.statements[s].beta;
        let lim = a.len().min(b.len());
        for k in 0..lim {
            if a[k] != b[k] {
                return k.min(a.len() - 1).min(b.len() - 1);
            }
        }
        // One path would be a prefix of the other; parsing forbids this for
        // distinct statements, and a statement shares all loops with itself.
        (a.len() - 1).min(b.len() - 1)
    }
}

/// 2d+1 schedule of one statement. Row 2k is the scalar `beta[k]`; row 2k+1
/// applies `linear[k]` to the iterators plus the shift `consts[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub statement: usize,
    pub rows: usize,
    pub linear: Vec<Vec<i64>>,
    pub consts: Vec<i64>,
    pub beta: Vec<i64>,
}

impl Schedule {
    /// Timestamp of an iteration vector.
    pub fn timestamp(&self, point: &[i64]) -> Vec<i64> {
        let d = self.linear.len();
        let mut out = Vec::with_capacity(2 * d + 1);
        for k in 0..d {
            out.push(self.beta[k]);
            let mut v = self.consts[k];
            for (c, x) in self.linear[k].iter().zip(point) {
                v += c * x;
            }
            out.push(v);
        }
        out.push(self.beta[d]);
        out
    }
}

/// Identity schedule: odd row 2k+1 selects iterator k, even rows carry the
/// statement's syntactic position vector, rows beyond 2*dim(S) are zero.
pub fn identity_schedule(s: &Statement, dloop: usize, _n_s: usize) -> Schedule {
    let dim = s.dim();
    let mut linear = Vec::with_capacity(dloop);
    for k in 0..dloop {
        let mut row = vec![0i64; dim];
        if k < dim {
            row[k] = 1;
        }
        linear.push(row);
    }
    let mut beta = vec![0i64; dloop + 1];
    beta[..s.beta.len()].copy_from_slice(&s.beta);
    Schedule { statement: s.id, rows: 2 * dloop + 1, linear, consts: vec![0; dloop], beta }
}

/// Evaluate an access function at an iteration point.
pub fn access_eval(
    f: &AccessFunction,
    point: &[i64],
    params: &[i64],
) -> Result<Vec<i64>, ScopError> {
    if f.matrix.first().map(|r| r.len()).unwrap_or(0) != point.len() {
        return Err(ScopError::Invalid(format!(
            "access to `{}`: point has {} coordinates, matrix has {} columns",
            f.array,
            point.len(),
            f.matrix.first().map(|r| r.len()).unwrap_or(0)
        )));
    }
    let mut out = Vec::with_capacity(f.dim());
    for i in 0..f.dim() {
        let mut v = f.offsets[i];
        for (c, x) in f.matrix[i].iter().zip(point) {
            v += c * x;
        }
        for (c, n) in f.param_part[i].iter().zip(params) {
            v += c * n;
        }
        out.push(v);
    }
    Ok(out)
}

/// Target machine description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MachineModel {
    pub name: String,
    pub cores: u32,
    pub opv: u32,
    pub n_vec_reg: u32,
}

impl MachineModel {
    pub fn skx() -> Self {
        MachineModel { name: "skx".into(), cores: 10, opv: 8, n_vec_reg: 32 }
    }

    /// Skew-aggressiveness predicate: cores < 2 * OPV.
    pub fn multi_skew(&self) -> bool {
        self.cores < 2 * self.opv
    }

    pub fn parse(text: &str) -> Result<Self, ScopError> {
        let mut m = MachineModel { name: String::new(), cores: 0, opv: 0, n_vec_reg: 32 };
        for (ln, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() || line == "polyvocab-machine v1" {
                continue;
            }
            let (key, val) = line.split_once(char::is_whitespace).ok_or_else(|| {
                ScopError::Syntax { line: ln + 1, msg: format!("expected `key value`, got `{line}`") }
            })?;
            let val = val.trim();
            match key {
                "name" => m.name = val.to_string(),
                "cores" => m.cores = parse_u32(ln + 1, val)?,
                "opv" => m.opv = parse_u32(ln + 1, val)?,
                "n_vec_reg" => m.n_vec_reg = parse_u32(ln + 1, val)?,
                other => {
                    return Err(ScopError::Syntax {
                        line: ln + 1,
                        msg: format!("unknown machine field `{other}`"),
                    })
                }
            }
        }
        if m.cores == 0 || m.opv == 0 || m.n_vec_reg == 0 {
            return Err(ScopError::Invalid("machine model fields must be >= 1".into()));
        }
        Ok(m)
    }

    pub fn serialize(&self) -> String {
        format!(
            "polyvocab-machine v1\nname {}\ncores {}\nopv {}\nn_vec_reg {}\n",
            self.name, self.cores, self.opv, self.n_vec_reg
        )
    }
}

fn parse_u32(line: usize, s: &str) -> Result<u32, ScopError> {
    s.parse().map_err(|_| ScopError::Syntax { line, msg: format!("expected integer, got `{s}`") })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

// ---------------------------------------------------------------------------
// Affine expression text
// ---------------------------------------------------------------------------

struct AffineParser<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    line: usize,
}

#[derive(PartialEq, Debug, Clone, Copy)]
enum Tok<'a> {
    Int(i64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Rel(&'a str),
}

fn tokenize(line_no: usize, s: &str) -> Result<Vec<Tok<'_>>, ScopError> {
    let mut toks = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && (b[i] as char).is_ascii_digit() {
                i += 1;
            }
            let v: i64 = s[start..i].parse().map_err(|_| ScopError::Syntax {
                line: line_no,
                msg: format!("integer overflow in `{}`", &s[start..i]),
            })?;
            toks.push(Tok::Int(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            toks.push(Tok::Ident(&s[start..i]));
        } else {
            match c {
                '+' => {
                    toks.push(Tok::Plus);
                    i += 1;
                }
                '-' => {
                    toks.push(Tok::Minus);
                    i += 1;
                }
                '*' => {
                    toks.push(Tok::Star);
                    i += 1;
                }
                '>' | '<' | '=' => {
                    if i + 1 < b.len() && b[i + 1] == b'=' {
                        toks.push(Tok::Rel(&s[i..i + 2]));
                        i += 2;
                    } else {
                        toks.push(Tok::Rel(&s[i..i + 1]));
                        i += 1;
                    }
                }
                other => {
                    return Err(ScopError::Syntax {
                        line: line_no,
                        msg: format!("unexpected character `{other}` at column {}", i + 1),
                    })
                }
            }
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone, PartialEq)]
enum Relation {
    Ge,
    Le,
    Eq,
    Gt,
    Lt,
}

impl<'a> AffineParser<'a> {
    fn new(line: usize, s: &'a str) -> Result<Self, ScopError> {
        Ok(AffineParser { toks: tokenize(line, s)?, pos: 0, line })
    }

    fn err(&self, msg: &str) -> ScopError {
        ScopError::Syntax { line: self.line, msg: format!("{msg} (token {})", self.pos + 1) }
    }

    /// side := term (('+'|'-') term)*, term := int ['*' ident] | ident
    fn parse_side(&mut self, cols: &[String]) -> Result<(Vec<i64>, i64), ScopError> {
        let mut coeffs = vec![0i64; cols.len()];
        let mut constant = 0i64;
        let mut sign = 1i64;
        let mut expect_term = true;
        loop {
            match self.toks.get(self.pos) {
                Some(Tok::Plus) if !expect_term => {
                    sign = 1;
                    self.pos += 1;
                    expect_term = true;
                }
                Some(Tok::Minus) => {
                    if expect_term {
                        sign = -sign;
                    } else {
                        sign = -1;
                        expect_term = true;
                    }
                    self.pos += 1;
                }
                Some(Tok::Int(v)) if expect_term => {
                    let v = *v;
                    self.pos += 1;
                    if matches!(self.toks.get(self.pos), Some(Tok::Star)) {
                        self.pos += 1;
                        let Some(Tok::Ident(name)) = self.toks.get(self.pos) else {
                            return Err(self.err("expected identifier after `*`"));
                        };
                        let col = cols
                            .iter()
                            .position(|c| c == name)
                            .ok_or_else(|| self.err(&format!("unknown name `{name}`")))?;
                        coeffs[col] += sign * v;
                        self.pos += 1;
                    } else {
                        constant += sign * v;
                    }
                    sign = 1;
                    expect_term = false;
                }
                Some(Tok::Ident(name)) if expect_term => {
                    let col = cols
                        .iter()
                        .position(|c| c == name)
                        .ok_or_else(|| self.err(&format!("unknown name `{name}`")))?;
                    coeffs[col] += sign;
                    self.pos += 1;
                    sign = 1;
                    expect_term = false;
                }
                _ => {
                    if expect_term {
                        return Err(self.err("expected a term"));
                    }
                    return Ok((coeffs, constant));
                }
            }
        }
    }

    fn parse_relation(&mut self) -> Option<Relation> {
        match self.toks.get(self.pos) {
            Some(Tok::Rel(r)) => {
                let rel = match *r {
                    ">=" => Relation::Ge,
                    "<=" => Relation::Le,
                    "=" | "==" => Relation::Eq,
                    ">" => Relation::Gt,
                    "<" => Relation::Lt,
                    _ => return None,
                };
                self.pos += 1;
                Some(rel)
            }
            _ => None,
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }
}

/// Parse an affine relation into `>= 0` rows over `cols ++ [1]`.
/// A bare expression means `expr >= 0`. Strict relations tighten by 1.
pub fn parse_affine_ineq(
    line: usize,
    text: &str,
    cols: &[String],
) -> Result<Vec<Vec<i64>>, ScopError> {
    let mut p = AffineParser::new(line, text)?;
    let (lhs, lc) = p.parse_side(cols)?;
    let rel = p.parse_relation();
    let (row, relation) = match rel {
        None => {
            if !p.at_end() {
                return Err(p.err("trailing tokens"));
            }
            let mut row = lhs;
            row.push(lc);
            (row, Relation::Ge)
        }
        Some(r) => {
            let (rhs, rc) = p.parse_side(cols)?;
            if !p.at_end() {
                return Err(p.err("trailing tokens"));
            }
            let mut row: Vec<i64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            row.push(lc - rc);
            (row, r)
        }
    };
    let negate = |mut r: Vec<i64>| -> Vec<i64> {
        for v in r.iter_mut() {
            *v = -*v;
        }
        r
    };
    Ok(match relation {
        Relation::Ge => vec![row],
        Relation::Gt => {
            let mut r = row;
            *r.last_mut().unwrap() -= 1;
            vec![r]
        }
        Relation::Le => vec![negate(row)],
        Relation::Lt => {
            let mut r = negate(row);
            *r.last_mut().unwrap() -= 1;
            vec![r]
        }
        Relation::Eq => vec![row.clone(), negate(row)],
    })
}

/// Canonical text of a `>= 0` row over named columns.
pub fn affine_row_text(row: &[i64], cols: &[String]) -> String {
    let mut s = String::new();
    let mut first = true;
    for (i, c) in row[..cols.len()].iter().enumerate() {
        if *c == 0 {
            continue;
        }
        push_term(&mut s, &mut first, *c, Some(&cols[i]));
    }
    let konst = row[cols.len()];
    if konst != 0 || first {
        push_term(&mut s, &mut first, konst, None);
    }
    s.push_str(" >= 0");
    s
}

fn push_term(s: &mut String, first: &mut bool, c: i64, name: Option<&str>) {
    if *first {
        if c < 0 {
            s.push_str("- ");
        }
        *first = false;
    } else if c < 0 {
        s.push_str(" - ");
    } else {
        s.push_str(" + ");
    }
    let a = c.unsigned_abs();
    match name {
        Some(n) => {
            if a == 1 {
                s.push_str(n);
            } else {
                s.push_str(&format!("{a}*{n}"));
            }
        }
        None => s.push_str(&a.to_string()),
    }
}

// ---------------------------------------------------------------------------
// SCoP document
// ---------------------------------------------------------------------------

pub fn parse_scop(text: &str) -> Result<Scop, ScopError> {
    let mut name = String::new();
    let mut parameters: Vec<String> = Vec::new();
    let mut context_lines: Vec<(usize, String)> = Vec::new();
    struct RawStmt {
        line: usize,
        id: usize,
        iters: Vec<String>,
        domain_lines: Vec<(usize, String)>,
        access_lines: Vec<(usize, String)>,
        text: Option<String>,
    }
    let mut stmts: Vec<RawStmt> = Vec::new();
    let mut saw_header = false;

    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "polyvocab-scop v1" {
                return Err(ScopError::Syntax {
                    line: ln,
                    msg: "expected header `polyvocab-scop v1`".into(),
                });
            }
            saw_header = true;
            continue;
        }
        let (key, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match key {
            "scop" => name = rest.to_string(),
            "param" => {
                for p in rest.split_whitespace() {
                    if parameters.iter().any(|q| q == p) {
                        return Err(ScopError::Syntax {
                            line: ln,
                            msg: format!("duplicate parameter `{p}`"),
                        });
                    }
                    parameters.push(p.to_string());
                }
            }
            "context" => context_lines.push((ln, rest.to_string())),
            "statement" => {
                let id: usize = rest.parse().map_err(|_| ScopError::Syntax {
                    line: ln,
                    msg: format!("expected statement id, got `{rest}`"),
                })?;
                if stmts.iter().any(|s| s.id == id) {
                    return Err(ScopError::DuplicateStatement(id));
                }
                stmts.push(RawStmt {
                    line: ln,
                    id,
                    iters: Vec::new(),
                    domain_lines: Vec::new(),
                    access_lines: Vec::new(),
                    text: None,
                });
            }
            "iters" | "domain" | "access" | "text" => {
                let Some(cur) = stmts.last_mut() else {
                    return Err(ScopError::Syntax {
                        line: ln,
                        msg: format!("`{key}` outside a statement block"),
                    });
                };
                match key {
                    "iters" => cur.iters = rest.split_whitespace().map(str::to_string).collect(),
                    "domain" => cur.domain_lines.push((ln, rest.to_string())),
                    "access" => cur.access_lines.push((ln, rest.to_string())),
                    "text" => cur.text = Some(rest.to_string()),
                    _ => unreachable!(),
                }
            }
            other => {
                return Err(ScopError::Syntax {
                    line: ln,
                    msg: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    if !saw_header {
        return Err(ScopError::Syntax { line: 1, msg: "empty document".into() });
    }

    let context = {
        let mut rows = Vec::new();
        for (ln, text) in &context_lines {
            rows.extend(parse_affine_ineq(*ln, text, &parameters)?);
        }
        rows
    };

    // Reconstruct the loop tree from iterator-name prefixes to assign
    // syntactic beta paths.
    let mut open: Vec<String> = Vec::new();
    let mut open_pos: Vec<i64> = Vec::new();
    let mut counters: Vec<i64> = vec![0];
    let mut statements = Vec::new();
    for (idx, rs) in stmts.iter().enumerate() {
        if rs.id != idx {
            return Err(ScopError::Syntax {
                line: rs.line,
                msg: format!("statement ids must be 0..N-1 in order; got {}", rs.id),
            });
        }
        if rs.iters.is_empty() {
            return Err(ScopError::Syntax {
                line: rs.line,
                msg: "statement needs at least one iterator".into(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for it in &rs.iters {
            if !seen.insert(it.clone()) {
                return Err(ScopError::Syntax {
                    line: rs.line,
                    msg: format!("iterator `{it}` repeated in statement {}", rs.id),
                });
            }
        }
        let mut common = 0;
        while common < open.len() && common < rs.iters.len() && open[common] == rs.iters[common] {
            common += 1;
        }
        while open.len() > common {
            open.pop();
            open_pos.pop();
            counters.pop();
        }
        for it in &rs.iters[common..] {
            let pos = *counters.last().unwrap();
            *counters.last_mut().unwrap() += 1;
            open.push(it.clone());
            open_pos.push(pos);
            counters.push(0);
        }
        let mut beta = open_pos.clone();
        beta.push(*counters.last().unwrap());
        *counters.last_mut().unwrap() += 1;

        let cols: Vec<String> = rs.iters.iter().chain(parameters.iter()).cloned().collect();
        let mut domain = Vec::new();
        for (ln, text) in &rs.domain_lines {
            domain.extend(parse_affine_ineq(*ln, text, &cols)?);
        }
        let accesses = rs
            .access_lines
            .iter()
            .map(|(ln, text)| parse_access(*ln, text, rs.id, rs.iters.len(), parameters.len()))
            .collect::<Result<Vec<_>, _>>()?;
        statements.push(Statement {
            id: rs.id,
            iterators: rs.iters.clone(),
            domain,
            accesses,
            text: rs.text.clone(),
            beta,
        });
    }
    if statements.is_empty() {
        return Err(ScopError::Invalid("scop has no statements".into()));
    }
    let dloop = statements.iter().map(|s| s.dim()).max().unwrap();
    let scop = Scop { name, parameters, context, statements, dloop };

    // Every domain must admit a point at the smallest admissible sizes.
    let pmin = scop.default_param_min();
    let params = vec![pmin; scop.parameters.len()];
    for s in &scop.statements {
        if first_domain_point(&s.domain, s.dim(), &params).is_none() {
            return Err(ScopError::EmptyDomain { stmt: s.id, params: pmin });
        }
    }
    Ok(scop)
}

fn parse_access(
    line: usize,
    text: &str,
    stmt: usize,
    dim_s: usize,
    n_params: usize,
) -> Result<AccessFunction, ScopError> {
    let syntax = |msg: String| ScopError::Syntax { line, msg };
    let mut rest = text.trim();
    let kind = if let Some(r) = rest.strip_prefix("read") {
        rest = r.trim_start();
        AccessKind::Read
    } else if let Some(r) = rest.strip_prefix("write") {
        rest = r.trim_start();
        AccessKind::Write
    } else {
        return Err(syntax(format!("access must start with read|write: `{text}`")));
    };
    let (array, mut rest) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| syntax("access needs an array name and row lists".into()))?;
    let mut matrix: Vec<Vec<i64>> = Vec::new();
    let mut offsets: Option<Vec<i64>> = None;
    let mut params: Option<Vec<i64>> = None;
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(r) = rest.strip_prefix("offsets") {
            let (list, r2) = parse_bracket_list(line, r)?;
            offsets = Some(list);
            rest = r2;
        } else if let Some(r) = rest.strip_prefix("params") {
            let (list, r2) = parse_bracket_list(line, r)?;
            params = Some(list);
            rest = r2;
        } else if rest.starts_with('[') {
            let (list, r2) = parse_bracket_list(line, rest)?;
            matrix.push(list);
            rest = r2;
        } else {
            return Err(syntax(format!("unexpected access tokens: `{rest}`")));
        }
    }
    if matrix.is_empty() {
        return Err(syntax(format!("access to `{array}` has no subscript rows")));
    }
    for row in &matrix {
        if row.len() != dim_s {
            return Err(ScopError::DimensionMismatch {
                stmt,
                array: array.to_string(),
                got: row.len(),
                want: dim_s,
            });
        }
    }
    let dim_f = matrix.len();
    let offsets = offsets.unwrap_or_else(|| vec![0; dim_f]);
    if offsets.len() != dim_f {
        return Err(syntax(format!("offsets length {} != dim(F) {}", offsets.len(), dim_f)));
    }
    let flat = params.unwrap_or_else(|| vec![0; dim_f * n_params]);
    if flat.len() != dim_f * n_params {
        return Err(syntax(format!(
            "params length {} != dim(F) * n_params = {}",
            flat.len(),
            dim_f * n_params
        )));
    }
    let param_part = if n_params == 0 {
        vec![vec![]; dim_f]
    } else {
        flat.chunks(n_params).map(|c| c.to_vec()).collect()
    };
    Ok(AccessFunction { array: array.to_string(), kind, matrix, offsets, param_part })
}

fn parse_bracket_list(line: usize, s: &str) -> Result<(Vec<i64>, &str), ScopError> {
    let s = s.trim_start();
    let Some(body) = s.strip_prefix('[') else {
        return Err(ScopError::Syntax { line, msg: format!("expected `[`, got `{s}`") });
    };
    let Some(end) = body.find(']') else {
        return Err(ScopError::Syntax { line, msg: "unterminated `[` list".into() });
    };
    let mut out = Vec::new();
    for tok in body[..end].split_whitespace() {
        let v: i64 = tok.parse().map_err(|_| ScopError::Syntax {
            line,
            msg: format!("expected integer in list, got `{tok}`"),
        })?;
        out.push(v);
    }
    Ok((out, &body[end + 1..]))
}

/// Canonical, bit-exact serialization.
pub fn serialize_scop(scop: &Scop) -> String {
    let mut out = String::from("polyvocab-scop v1\n");
    out.push_str(&format!("scop {}\n", scop.name));
    if !scop.parameters.is_empty() {
        out.push_str(&format!("param {}\n", scop.parameters.join(" ")));
    }
    for row in &scop.context {
        out.push_str(&format!("context {}\n", affine_row_text(row, &scop.parameters)));
    }
    for s in &scop.statements {
        out.push_str(&format!("statement {}\n", s.id));
        out.push_str(&format!("  iters {}\n", s.iterators.join(" ")));
        let cols: Vec<String> = s.iterators.iter().chain(scop.parameters.iter()).cloned().collect();
        for row in &s.domain {
            out.push_str(&format!("  domain {}\n", affine_row_text(row, &cols)));
        }
        for a in &s.accesses {
            let kind = match a.kind {
                AccessKind::Read => "read",
                AccessKind::Write => "write",
            };
            let rows: Vec<String> = a.matrix.iter().map(|r| bracket_list(r)).collect();
            out.push_str(&format!(
                "  access {} {} {} offsets {} params {}\n",
                kind,
                a.array,
                rows.join(" "),
                bracket_list(&a.offsets),
                bracket_list(&a.param_part.concat()),
            ));
        }
        if let Some(t) = &s.text {
            out.push_str(&format!("  text {t}\n"));
        }
    }
    out
}

fn bracket_list(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(" "))
}

// ---------------------------------------------------------------------------
// Schedule document
// ---------------------------------------------------------------------------

pub fn serialize_schedules(scop_name: &str, schedules: &[Schedule]) -> String {
    let mut out = String::from("polyvocab-schedule v1\n");
    out.push_str(&format!("scop {scop_name}\n"));
    for s in schedules {
        out.push_str(&format!("schedule {}\n", s.statement));
        out.push_str(&format!("  beta {}\n", join_i64(&s.beta)));
        for (k, row) in s.linear.iter().enumerate() {
            out.push_str(&format!(
                "  row {} coeffs {} const {}\n",
                2 * k + 1,
                join_i64(row),
                s.consts[k]
            ));
        }
    }
    out
}

fn join_i64(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_schedules(text: &str) -> Result<(String, Vec<Schedule>), ScopError> {
    let mut name = String::new();
    let mut out: Vec<Schedule> = Vec::new();
    let mut saw_header = false;
    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "polyvocab-schedule v1" {
                return Err(ScopError::Syntax {
                    line: ln,
                    msg: "expected header `polyvocab-schedule v1`".into(),
                });
            }
            saw_header = true;
            continue;
        }
        let (key, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match key {
            "scop" => name = rest.to_string(),
            "schedule" => {
                let id: usize = rest.parse().map_err(|_| ScopError::Syntax {
                    line: ln,
                    msg: format!("expected statement id, got `{rest}`"),
                })?;
                out.push(Schedule {
                    statement: id,
                    rows: 0,
                    linear: Vec::new(),
                    consts: Vec::new(),
                    beta: Vec::new(),
                });
            }
            "beta" => {
                let cur = out.last_mut().ok_or_else(|| ScopError::Syntax {
                    line: ln,
                    msg: "`beta` outside a schedule block".into(),
                })?;
                cur.beta = parse_i64_list(ln, rest)?;
                cur.rows = 2 * (cur.beta.len() - 1) + 1;
            }
            "row" => {
                let cur = out.last_mut().ok_or_else(|| ScopError::Syntax {
                    line: ln,
                    msg: "`row` outside a schedule block".into(),
                })?;
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let cpos = parts.iter().position(|p| *p == "coeffs").ok_or_else(|| {
                    ScopError::Syntax { line: ln, msg: "row needs `coeffs`".into() }
                })?;
                let kpos = parts.iter().position(|p| *p == "const").ok_or_else(|| {
                    ScopError::Syntax { line: ln, msg: "row needs `const`".into() }
                })?;
                let coeffs = parts[cpos + 1..kpos]
                    .iter()
                    .map(|t| {
                        t.parse::<i64>().map_err(|_| ScopError::Syntax {
                            line: ln,
                            msg: format!("bad coefficient `{t}`"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let konst: i64 = parts[kpos + 1].parse().map_err(|_| ScopError::Syntax {
                    line: ln,
                    msg: "bad const".into(),
                })?;
                cur.linear.push(coeffs);
                cur.consts.push(konst);
            }
            other => {
                return Err(ScopError::Syntax {
                    line: ln,
                    msg: format!("unknown schedule directive `{other}`"),
                })
            }
        }
    }
    Ok((name, out))
}

fn parse_i64_list(line: usize, s: &str) -> Result<Vec<i64>, ScopError> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| ScopError::Syntax { line, msg: format!("bad integer `{t}`") })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Domain point search (parse-time emptiness check, verifier building block)
// ---------------------------------------------------------------------------

/// Depth-first search for one integer point of an affine domain with fixed
/// parameter values.
pub fn first_domain_point(domain: &[Vec<i64>], dim: usize, params: &[i64]) -> Option<Vec<i64>> {
    let mut point = vec![0i64; dim];
    search_point(domain, dim, params, 0, &mut point)
}

fn search_point(
    domain: &[Vec<i64>],
    dim: usize,
    params: &[i64],
    depth: usize,
    point: &mut Vec<i64>,
) -> Option<Vec<i64>> {
    if depth == dim {
        return Some(point.clone());
    }
    let (lo, hi) = iterator_range(domain, dim, params, depth, point)?;
    for v in lo..=hi {
        point[depth] = v;
        if let Some(found) = search_point(domain, dim, params, depth + 1, point) {
            return Some(found);
        }
    }
    None
}

/// Bounds for iterator `depth` with iterators before it fixed; rows touching
/// deeper iterators are skipped here and enforced at their own depth.
pub fn iterator_range(
    domain: &[Vec<i64>],
    dim: usize,
    params: &[i64],
    depth: usize,
    point: &[i64],
) -> Option<(i64, i64)> {
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    for row in domain {
        if row[depth + 1..dim].iter().any(|&c| c != 0) {
            continue;
        }
        let c = row[depth];
        if c == 0 {
            continue;
        }
        let mut rest = row[dim + params.len()];
        for k in 0..depth {
            rest += row[k] * point[k];
        }
        for (k, p) in params.iter().enumerate() {
            rest += row[dim + k] * p;
        }
        // c * x + rest >= 0
        if c > 0 {
            // x >= ceil(-rest / c)
            let b = (-rest).div_euclid(c) + i64::from((-rest).rem_euclid(c) != 0);
            lo = Some(lo.map_or(b, |cur| cur.max(b)));
        } else {
            // x <= floor(rest / -c)
            let b = rest.div_euclid(-c);
            hi = Some(hi.map_or(b, |cur| cur.min(b)));
        }
    }
    let lo = lo?;
    let hi = hi?;
    if lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}
