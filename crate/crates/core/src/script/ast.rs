use std::fmt::{self, Write as _};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Let { name: String, value: Expr },
    For { var: String, start: Expr, end: Expr, body: Vec<Stmt> },
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDir {
    Out,
    In,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub handle: String,
    pub dir: PortDir,
    pub index: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Random(Box<Expr>, Box<Expr>),
    Place { kind: String, args: Vec<Expr> },
    Connect { from: Port, to: Port },
    Emit,
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            _ => 3,
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Number(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(name) => out.push_str(name),
        Expr::Neg(inner) => {
            out.push_str("-(");
            write_expr(out, inner);
            out.push(')');
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_operand(out, lhs, lhs.precedence() < p);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, rhs, rhs.precedence() <= p);
        }
        Expr::Random(lo, hi) => {
            out.push_str("random(");
            write_expr(out, lo);
            out.push_str(", ");
            write_expr(out, hi);
            out.push(')');
        }
        Expr::Place { kind, args } => {
            out.push_str("place(");
            write_string(out, kind);
            for a in args {
                out.push_str(", ");
                write_expr(out, a);
            }
            out.push(')');
        }
        Expr::Connect { from, to } => {
            out.push_str("connect(");
            write_port(out, from);
            out.push_str(", ");
            write_port(out, to);
            out.push(')');
        }
        Expr::Emit => out.push_str("emit()"),
    }
}

fn write_operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_port(out: &mut String, p: &Port) {
    out.push_str(&p.handle);
    out.push_str(match p.dir {
        PortDir::Out => ".out[",
        PortDir::In => ".in[",
    });
    write_expr(out, &p.index);
    out.push(']');
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        for _ in 0..depth {
            out.push_str("    ");
        }
        match s {
            Stmt::Let { name, value } => {
                let _ = write!(out, "let {name} = ");
                write_expr(out, value);
            }
            Stmt::For { var, start, end, body } => {
                let _ = write!(out, "for {var} in ");
                write_expr(out, start);
                out.push_str("..");
                write_expr(out, end);
                out.push_str(" {\n");
                write_block(out, body, depth + 1);
                for _ in 0..depth {
                    out.push_str("    ");
                }
                out.push('}');
            }
            Stmt::Expr(e) => write_expr(out, e),
        }
        out.push('\n');
    }
}

/// Canonical source text; parsing it gives back an equal program.
pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    write_block(&mut out, &program.stmts, 0);
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}
