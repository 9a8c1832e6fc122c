//! Behavioural expressions compiled against the unknown layout.
//!
//! Node names become unknown columns, branch-current references resolve to
//! linear forms over unknowns, and every DDT occurrence receives a memory
//! slot for its backward difference.

use fieldnet_netlist::Expression;
use num_complex::Complex64;

use crate::error::SolverError;

/// A branch current expressed linearly over unknowns plus known waveform
/// terms: I = sum coef * x[col] + sum scale * w(t).
#[derive(Debug, Clone, Default)]
pub struct CurrentForm {
    pub cols: Vec<(usize, f64)>,
    pub known: Vec<(f64, fieldnet_netlist::Waveform)>,
}

impl CurrentForm {
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let mut v = 0.0;
        for &(c, coef) in &self.cols {
            v += coef * x[c];
        }
        for (scale, w) in &self.known {
            v += scale * w.eval(t);
        }
        v
    }

    pub fn coef_of(&self, col: usize) -> f64 {
        self.cols
            .iter()
            .filter(|&&(c, _)| c == col)
            .map(|&(_, v)| v)
            .sum()
    }
}

/// Expression with resolved references. Node references use `None` for
/// ground (value 0).
#[derive(Debug, Clone)]
pub enum CExpr {
    Const(f64),
    NodeV(Option<usize>, Option<usize>),
    Current(CurrentForm),
    Time,
    Ddt(Box<CExpr>, usize),
    Neg(Box<CExpr>),
    Add(Box<CExpr>, Box<CExpr>),
    Sub(Box<CExpr>, Box<CExpr>),
    Mul(Box<CExpr>, Box<CExpr>),
    Div(Box<CExpr>, Box<CExpr>),
}

pub struct CompileCtx<'a> {
    pub node_col: &'a dyn Fn(&str) -> Option<Option<usize>>,
    pub current_form: &'a dyn Fn(&str) -> Result<CurrentForm, SolverError>,
}

/// Compile an expression; `ddt_slots` grows by one per DDT occurrence.
pub fn compile(
    e: &Expression,
    ctx: &CompileCtx,
    ddt_slots: &mut usize,
) -> Result<CExpr, SolverError> {
    Ok(match e {
        Expression::Const(v) => CExpr::Const(*v),
        Expression::Time => CExpr::Time,
        Expression::NodeVoltage(a, b) => {
            let ca = (ctx.node_col)(a).ok_or_else(|| SolverError::UnknownReference(a.clone()))?;
            let cb = match b {
                Some(b) => {
                    (ctx.node_col)(b).ok_or_else(|| SolverError::UnknownReference(b.clone()))?
                }
                None => None,
            };
            CExpr::NodeV(ca, cb)
        }
        Expression::BranchCurrent(name) => CExpr::Current((ctx.current_form)(name)?),
        Expression::Ddt(inner) => {
            let c = compile(inner, ctx, ddt_slots)?;
            let slot = *ddt_slots;
            *ddt_slots += 1;
            CExpr::Ddt(Box::new(c), slot)
        }
        Expression::Neg(inner) => CExpr::Neg(Box::new(compile(inner, ctx, ddt_slots)?)),
        Expression::Add(a, b) => CExpr::Add(
            Box::new(compile(a, ctx, ddt_slots)?),
            Box::new(compile(b, ctx, ddt_slots)?),
        ),
        Expression::Sub(a, b) => CExpr::Sub(
            Box::new(compile(a, ctx, ddt_slots)?),
            Box::new(compile(b, ctx, ddt_slots)?),
        ),
        Expression::Mul(a, b) => CExpr::Mul(
            Box::new(compile(a, ctx, ddt_slots)?),
            Box::new(compile(b, ctx, ddt_slots)?),
        ),
        Expression::Div(a, b) => CExpr::Div(
            Box::new(compile(a, ctx, ddt_slots)?),
            Box::new(compile(b, ctx, ddt_slots)?),
        ),
    })
}

/// Evaluation environment for one Newton iterate.
pub struct EvalEnv<'a> {
    pub x: &'a [f64],
    pub t: f64,
    /// Step size; zero means "DC" and makes every DDT evaluate to 0.
    pub dt: f64,
    pub ddt_prev: &'a [f64],
}

impl CExpr {
    pub fn eval(&self, env: &EvalEnv) -> f64 {
        match self {
            CExpr::Const(v) => *v,
            CExpr::Time => env.t,
            CExpr::NodeV(a, b) => {
                let va = a.map_or(0.0, |c| env.x[c]);
                let vb = b.map_or(0.0, |c| env.x[c]);
                va - vb
            }
            CExpr::Current(f) => f.eval(env.x, env.t),
            CExpr::Ddt(inner, slot) => {
                if env.dt == 0.0 {
                    0.0
                } else {
                    (inner.eval(env) - env.ddt_prev[*slot]) / env.dt
                }
            }
            CExpr::Neg(e) => -e.eval(env),
            CExpr::Add(a, b) => a.eval(env) + b.eval(env),
            CExpr::Sub(a, b) => a.eval(env) - b.eval(env),
            CExpr::Mul(a, b) => a.eval(env) * b.eval(env),
            CExpr::Div(a, b) => a.eval(env) / b.eval(env),
        }
    }

    /// Partial derivative with respect to unknown `col` at the environment.
    pub fn deriv(&self, env: &EvalEnv, col: usize) -> f64 {
        match self {
            CExpr::Const(_) | CExpr::Time => 0.0,
            CExpr::NodeV(a, b) => {
                let da = if *a == Some(col) { 1.0 } else { 0.0 };
                let db = if *b == Some(col) { 1.0 } else { 0.0 };
                da - db
            }
            CExpr::Current(f) => f.coef_of(col),
            CExpr::Ddt(inner, _) => {
                if env.dt == 0.0 {
                    0.0
                } else {
                    inner.deriv(env, col) / env.dt
                }
            }
            CExpr::Neg(e) => -e.deriv(env, col),
            CExpr::Add(a, b) => a.deriv(env, col) + b.deriv(env, col),
            CExpr::Sub(a, b) => a.deriv(env, col) - b.deriv(env, col),
            CExpr::Mul(a, b) => a.deriv(env, col) * b.eval(env) + a.eval(env) * b.deriv(env, col),
            CExpr::Div(a, b) => {
                let bv = b.eval(env);
                (a.deriv(env, col) * bv - a.eval(env) * b.deriv(env, col)) / (bv * bv)
            }
        }
    }

    /// Unknown columns the expression depends on.
    pub fn columns(&self, out: &mut Vec<usize>) {
        let mut push = |c: usize| {
            if !out.contains(&c) {
                out.push(c);
            }
        };
        match self {
            CExpr::Const(_) | CExpr::Time => {}
            CExpr::NodeV(a, b) => {
                if let Some(c) = a {
                    push(*c);
                }
                if let Some(c) = b {
                    push(*c);
                }
            }
            CExpr::Current(f) => {
                for &(c, _) in &f.cols {
                    push(c);
                }
            }
            CExpr::Ddt(e, _) | CExpr::Neg(e) => e.columns(out),
            CExpr::Add(a, b) | CExpr::Sub(a, b) | CExpr::Mul(a, b) | CExpr::Div(a, b) => {
                a.columns(out);
                b.columns(out);
            }
        }
    }

    /// Record the inner DDT values at the accepted state.
    pub fn store_ddt(&self, env: &EvalEnv, memory: &mut [f64]) {
        match self {
            CExpr::Ddt(inner, slot) => {
                inner.store_ddt(env, memory);
                memory[*slot] = inner.eval(env);
            }
            CExpr::Neg(e) => e.store_ddt(env, memory),
            CExpr::Add(a, b) | CExpr::Sub(a, b) | CExpr::Mul(a, b) | CExpr::Div(a, b) => {
                a.store_ddt(env, memory);
                b.store_ddt(env, memory);
            }
            _ => {}
        }
    }

    /// Affine form over unknowns for AC analysis: f = sum c_u x_u + c0,
    /// with DDT contributing a factor jw. Errors on products of unknowns,
    /// time dependence and waveform-backed current references.
    pub fn affine(&self, jw: Complex64) -> Result<Affine, SolverError> {
        Ok(match self {
            CExpr::Const(v) => Affine::constant(Complex64::new(*v, 0.0)),
            CExpr::Time => return Err(SolverError::NonlinearAc("time in AC expression".into())),
            CExpr::NodeV(a, b) => {
                let mut f = Affine::default();
                if let Some(c) = a {
                    f.push(*c, Complex64::new(1.0, 0.0));
                }
                if let Some(c) = b {
                    f.push(*c, Complex64::new(-1.0, 0.0));
                }
                f
            }
            CExpr::Current(form) => {
                if !form.known.is_empty() {
                    return Err(SolverError::NonlinearAc(
                        "waveform-valued current reference in AC expression".into(),
                    ));
                }
                let mut f = Affine::default();
                for &(c, coef) in &form.cols {
                    f.push(c, Complex64::new(coef, 0.0));
                }
                f
            }
            CExpr::Ddt(inner, _) => inner.affine(jw)?.scaled(jw),
            CExpr::Neg(e) => e.affine(jw)?.scaled(Complex64::new(-1.0, 0.0)),
            CExpr::Add(a, b) => a.affine(jw)?.plus(&b.affine(jw)?),
            CExpr::Sub(a, b) => a.affine(jw)?.plus(&b.affine(jw)?.scaled(Complex64::new(-1.0, 0.0))),
            CExpr::Mul(a, b) => {
                let fa = a.affine(jw)?;
                let fb = b.affine(jw)?;
                if fa.is_constant() {
                    fb.scaled(fa.constant)
                } else if fb.is_constant() {
                    fa.scaled(fb.constant)
                } else {
                    return Err(SolverError::NonlinearAc(
                        "product of unknowns in AC expression".into(),
                    ));
                }
            }
            CExpr::Div(a, b) => {
                let fa = a.affine(jw)?;
                let fb = b.affine(jw)?;
                if !fb.is_constant() {
                    return Err(SolverError::NonlinearAc(
                        "division by an unknown in AC expression".into(),
                    ));
                }
                fa.scaled(Complex64::new(1.0, 0.0) / fb.constant)
            }
        })
    }
}

/// Affine expression over unknown columns with a complex constant part.
#[derive(Debug, Clone, Default)]
pub struct Affine {
    pub terms: Vec<(usize, Complex64)>,
    pub constant: Complex64,
}

impl Affine {
    fn constant(v: Complex64) -> Affine {
        Affine {
            terms: Vec::new(),
            constant: v,
        }
    }

    fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, col: usize, coef: Complex64) {
        self.terms.push((col, coef));
    }

    fn scaled(mut self, s: Complex64) -> Affine {
        for (_, c) in &mut self.terms {
            *c *= s;
        }
        self.constant *= s;
        self
    }

    fn plus(mut self, other: &Affine) -> Affine {
        self.terms.extend(other.terms.iter().copied());
        self.constant += other.constant;
        self
    }
}
