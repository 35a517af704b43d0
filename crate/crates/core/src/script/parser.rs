use super::ast::{BinOp, Expr, Port, PortDir, Program, Stmt};
use super::ScriptError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Str(String),
    Let,
    For,
    In,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    DotDot,
    Eq,
    Op(BinOp),
    Sep,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Let => "`let`".into(),
            Tok::For => "`for`".into(),
            Tok::In => "`in`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::Sep => "end of statement".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const BUILTINS: [&str; 4] = ["random", "place", "connect", "emit"];

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ScriptError {
    ScriptError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<Token>, ScriptError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    // newlines inside () and [] do not end a statement
    let mut nesting = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok| out.push(Token { tok, line: tl, col: tc });
        if c == '\n' {
            if nesting == 0 {
                push(Tok::Sep);
            }
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e' | 'E')) {
                let mut j = i + 1;
                if matches!(chars.get(j), Some('+' | '-')) {
                    j += 1;
                }
                if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(tl, tc, format!("bad number `{text}`")))?;
            if !v.is_finite() {
                return Err(syntax(tl, tc, format!("number `{text}` is out of range")));
            }
            push(Tok::Number(v));
            col += i - start;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            push(match word.as_str() {
                "let" => Tok::Let,
                "for" => Tok::For,
                "in" => Tok::In,
                _ => Tok::Ident(word),
            });
            col += i - start;
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(syntax(tl, tc, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => {
                        let esc = match chars.get(i + 1) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            _ => return Err(syntax(line, col + (i - start), "bad escape in string")),
                        };
                        s.push(esc);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            push(Tok::Str(s));
            col += i - start;
            continue;
        }
        let (tok, len) = match c {
            '(' => {
                nesting += 1;
                (Tok::LParen, 1)
            }
            '[' => {
                nesting += 1;
                (Tok::LBracket, 1)
            }
            ')' => {
                nesting = nesting.saturating_sub(1);
                (Tok::RParen, 1)
            }
            ']' => {
                nesting = nesting.saturating_sub(1);
                (Tok::RBracket, 1)
            }
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ',' => (Tok::Comma, 1),
            '.' if chars.get(i + 1) == Some(&'.') => (Tok::DotDot, 2),
            '.' => (Tok::Dot, 1),
            '=' => (Tok::Eq, 1),
            ';' => (Tok::Sep, 1),
            '+' => (Tok::Op(BinOp::Add), 1),
            '-' => (Tok::Op(BinOp::Sub), 1),
            '*' => (Tok::Op(BinOp::Mul), 1),
            '/' => (Tok::Op(BinOp::Div), 1),
            '%' => (Tok::Op(BinOp::Rem), 1),
            other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
        };
        push(tok);
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ScriptError {
        let t = &self.toks[self.pos];
        syntax(t.line, t.col, format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ScriptError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn skip_seps(&mut self) {
        while *self.peek() == Tok::Sep {
            self.next();
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ScriptError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                if BUILTINS.contains(&name.as_str()) {
                    return Err(self.error_here(what));
                }
                self.next();
                Ok(name)
            }
            _ => Err(self.error_here(what)),
        }
    }

    fn stmts_until(&mut self, end: &Tok) -> Result<Vec<Stmt>, ScriptError> {
        let mut stmts = Vec::new();
        self.skip_seps();
        while self.peek() != end {
            stmts.push(self.stmt()?);
            match self.peek() {
                Tok::Sep => self.skip_seps(),
                t if t == end => {}
                _ => return Err(self.error_here("end of statement")),
            }
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ScriptError> {
        match self.peek() {
            Tok::Let => {
                self.next();
                let name = self.ident("a variable name")?;
                self.expect(Tok::Eq, "`=`")?;
                let value = self.expr()?;
                Ok(Stmt::Let { name, value })
            }
            Tok::For => {
                self.next();
                let var = self.ident("a loop variable")?;
                self.expect(Tok::In, "`in`")?;
                let start = self.expr()?;
                self.expect(Tok::DotDot, "`..`")?;
                let end = self.expr()?;
                self.skip_seps();
                self.expect(Tok::LBrace, "`{`")?;
                let body = self.stmts_until(&Tok::RBrace)?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Stmt::For { var, start, end, body })
            }
            _ => Ok(Stmt::Expr(self.expr()?)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ScriptError> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ScriptError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op) = *self.peek() {
            if op.precedence() < min_prec {
                break;
            }
            self.next();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ScriptError> {
        if *self.peek() == Tok::Op(BinOp::Sub) {
            self.next();
            // a minus directly before a literal is part of the literal
            if let Tok::Number(v) = *self.peek() {
                self.next();
                return Ok(Expr::Number(-v));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ScriptError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.next();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.toks[self.pos + 1].tok == Tok::LParen {
                    self.call(&name)
                } else if BUILTINS.contains(&name.as_str()) {
                    self.next();
                    Err(self.error_here("`(`"))
                } else {
                    self.next();
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(self.error_here("an expression")),
        }
    }

    fn call(&mut self, name: &str) -> Result<Expr, ScriptError> {
        let at = self.toks[self.pos].clone();
        self.next();
        self.next();
        let e = match name {
            "random" => {
                let lo = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let hi = self.expr()?;
                Expr::Random(Box::new(lo), Box::new(hi))
            }
            "place" => {
                let kind = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.next();
                        s
                    }
                    _ => return Err(self.error_here("a kind string")),
                };
                let mut args = Vec::new();
                while *self.peek() == Tok::Comma {
                    self.next();
                    args.push(self.expr()?);
                }
                Expr::Place { kind, args }
            }
            "connect" => {
                let from = self.port()?;
                self.expect(Tok::Comma, "`,`")?;
                let to = self.port()?;
                Expr::Connect { from, to }
            }
            "emit" => Expr::Emit,
            other => return Err(syntax(at.line, at.col, format!("unknown function `{other}`"))),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn port(&mut self) -> Result<Port, ScriptError> {
        let handle = self.ident("a node handle")?;
        self.expect(Tok::Dot, "`.`")?;
        let dir = match self.peek() {
            Tok::In => PortDir::In,
            Tok::Ident(s) if s == "out" => PortDir::Out,
            _ => return Err(self.error_here("`out` or `in`")),
        };
        self.next();
        self.expect(Tok::LBracket, "`[`")?;
        let index = self.expr()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Port {
            handle,
            dir,
            index: Box::new(index),
        })
    }
}

/// Parses PatchScript source. Stops at the first syntax error.
pub fn parse_script(source: &str) -> Result<Program, ScriptError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let stmts = p.stmts_until(&Tok::Eof)?;
    Ok(Program { stmts })
}
