use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{BinOp, Expr, Port, PortDir, Program, Stmt};
use super::ScriptError;
use crate::codec::{resolve_params, Arg};
use crate::ir::{resolve_kind, validate, GraphBuilder, NodeKind, PatchGraph, PortRef};

pub const STEP_BUDGET: u64 = 1_000_000;
pub const MAX_LOOP_ITERATIONS: i64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Number(f64),
    Handle(usize),
    Unit,
}

impl Value {
    fn describe(self) -> &'static str {
        match self {
            Value::Number(_) => "a number",
            Value::Handle(_) => "a node handle",
            Value::Unit => "nothing",
        }
    }
}

struct Binding {
    value: Value,
    loop_var: bool,
}

enum Halt {
    Emitted,
    Error(ScriptError),
}

impl From<ScriptError> for Halt {
    fn from(e: ScriptError) -> Self {
        Halt::Error(e)
    }
}

fn runtime(message: impl Into<String>) -> Halt {
    Halt::Error(ScriptError::Runtime(message.into()))
}

struct Interpreter {
    rng: ChaCha8Rng,
    steps: u64,
    scopes: Vec<HashMap<String, Binding>>,
    builder: GraphBuilder,
    kinds: Vec<NodeKind>,
}

impl Interpreter {
    fn tick(&mut self) -> Result<(), Halt> {
        self.steps += 1;
        if self.steps > STEP_BUDGET {
            return Err(runtime(format!("step budget of {STEP_BUDGET} exceeded")));
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn bind(&mut self, name: &str, value: Value, loop_var: bool) -> Result<(), Halt> {
        if self.lookup(name).is_some_and(|b| b.loop_var) {
            return Err(runtime(format!("cannot rebind loop variable `{name}`")));
        }
        self.scopes
            .last_mut()
            .expect("a scope is always open")
            .insert(name.to_string(), Binding { value, loop_var });
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), Halt> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), Halt> {
        self.tick()?;
        match s {
            Stmt::Let { name, value } => {
                let v = self.eval(value)?;
                self.bind(name, v, false)
            }
            Stmt::Expr(e) => self.eval(e).map(|_| ()),
            Stmt::For { var, start, end, body } => {
                let lo = self.integer(start, "loop start")?;
                let hi = self.integer(end, "loop end")?;
                if hi.saturating_sub(lo) > MAX_LOOP_ITERATIONS {
                    return Err(runtime(format!(
                        "loop {lo}..{hi} exceeds {MAX_LOOP_ITERATIONS} iterations"
                    )));
                }
                for i in lo..hi {
                    self.scopes.push(HashMap::new());
                    let r = self
                        .bind(var, Value::Number(i as f64), true)
                        .and_then(|_| self.block(body));
                    self.scopes.pop();
                    r?;
                }
                Ok(())
            }
        }
    }

    fn number(&mut self, e: &Expr, what: &str) -> Result<f64, Halt> {
        match self.eval(e)? {
            Value::Number(v) => Ok(v),
            other => Err(runtime(format!("{what} must be a number, got {}", other.describe()))),
        }
    }

    fn integer(&mut self, e: &Expr, what: &str) -> Result<i64, Halt> {
        let v = self.number(e, what)?;
        if v.fract() != 0.0 || !v.is_finite() || v.abs() > 1e15 {
            return Err(runtime(format!("{what} must be an integer, got {v}")));
        }
        Ok(v as i64)
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, Halt> {
        self.tick()?;
        match e {
            Expr::Number(v) => Ok(Value::Number(*v)),
            Expr::Var(name) => self
                .lookup(name)
                .map(|b| b.value)
                .ok_or_else(|| runtime(format!("`{name}` is not defined"))),
            Expr::Neg(inner) => Ok(Value::Number(-self.number(inner, "operand of `-`")?)),
            Expr::Binary { op, lhs, rhs } => {
                let what = format!("operand of `{}`", op.symbol());
                let a = self.number(lhs, &what)?;
                let b = self.number(rhs, &what)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div | BinOp::Rem if b == 0.0 => return Err(runtime("division by zero")),
                    BinOp::Div => a / b,
                    BinOp::Rem => a % b,
                };
                Ok(Value::Number(v))
            }
            Expr::Random(lo, hi) => {
                let lo = self.number(lo, "random bound")?;
                let hi = self.number(hi, "random bound")?;
                if lo > hi || !(hi - lo).is_finite() {
                    return Err(runtime(format!("random({lo}, {hi}) has an empty range")));
                }
                let u: f64 = self.rng.random();
                Ok(Value::Number(lo + (hi - lo) * u))
            }
            Expr::Place { kind, args } => self.place(kind, args),
            Expr::Connect { from, to } => {
                let (src, outlet) = self.port(from)?;
                let (dst, inlet) = self.port(to)?;
                if from.dir != PortDir::Out || to.dir != PortDir::In {
                    return Err(runtime("connect takes an outlet then an inlet"));
                }
                if outlet >= self.kinds[src].outlet_count() {
                    return Err(runtime(format!("`{}` has no outlet {outlet}", from.handle)));
                }
                if inlet >= self.kinds[dst].inlet_count() {
                    return Err(runtime(format!("`{}` has no inlet {inlet}", to.handle)));
                }
                let src_id = self.builder.node(src).expect("handle is valid").id.clone();
                let dst_id = self.builder.node(dst).expect("handle is valid").id.clone();
                self.builder
                    .connect(PortRef::new(src_id, outlet), PortRef::new(dst_id, inlet));
                Ok(Value::Unit)
            }
            Expr::Emit => Err(Halt::Emitted),
        }
    }

    fn port(&mut self, p: &Port) -> Result<(usize, usize), Halt> {
        let node = match self.lookup(&p.handle).map(|b| b.value) {
            Some(Value::Handle(i)) => i,
            Some(other) => {
                return Err(runtime(format!(
                    "`{}` is {}, not a node handle from place",
                    p.handle,
                    other.describe()
                )))
            }
            None => return Err(runtime(format!("`{}` is not defined", p.handle))),
        };
        let index = self.integer(&p.index, "port index")?;
        if index < 0 {
            return Err(runtime(format!("port index {index} is negative")));
        }
        Ok((node, index as usize))
    }

    fn place(&mut self, spec: &str, args: &[Expr]) -> Result<Value, Halt> {
        let mut words = spec.split_whitespace();
        let name = words.next().unwrap_or("");
        let kind = resolve_kind(name).ok_or_else(|| runtime(format!("unknown kind `{name}`")))?;
        let mut resolved: Vec<Arg> = words.map(Arg::from_token).collect();
        for a in args {
            resolved.push(Arg::Number(self.number(a, "place argument")?));
        }
        let (params, pitch) =
            resolve_params(kind, &resolved).map_err(|e| runtime(format!("place(\"{spec}\"): {e}")))?;
        let id = format!("obj-{}", self.builder.len() + 1);
        self.builder
            .add_with_id(id, kind, params, pitch)
            .map_err(|e| runtime(e.to_string()))?;
        self.kinds.push(kind);
        Ok(Value::Handle(self.kinds.len() - 1))
    }
}

/// Runs a parsed program. The graph accumulated when `emit()` is reached is
/// validated before it is returned, so an invalid graph never escapes.
pub fn run_script(program: &Program, seed: u64) -> Result<PatchGraph, ScriptError> {
    let mut it = Interpreter {
        rng: ChaCha8Rng::seed_from_u64(seed),
        steps: 0,
        scopes: vec![HashMap::new()],
        builder: GraphBuilder::new(),
        kinds: Vec::new(),
    };
    match it.block(&program.stmts) {
        Ok(()) => Err(ScriptError::Runtime("program ended without emit()".into())),
        Err(Halt::Error(e)) => Err(e),
        Err(Halt::Emitted) => {
            let graph = it.builder.finish();
            let report = validate(&graph);
            if report.well_formed {
                Ok(graph)
            } else {
                Err(ScriptError::Runtime(format!("emitted graph is not well-formed: {report}")))
            }
        }
    }
}
