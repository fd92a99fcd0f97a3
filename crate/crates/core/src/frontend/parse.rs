// SPDX-License-Identifier: Apache-2.0

//! Parser for the TinyIR text form. See `docs/tinyir.md` for the grammar.

use std::collections::{HashMap, HashSet};

use super::ast::{Function, Global, Param, Statement, TinyModule, ValueType};
use crate::error::FrontendError;
use crate::model::Linkage;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Reg(String),
    Sym(String),
    Punct(char),
    Arrow,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>, FrontendError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let column = pos + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1).map(|x| x.1) == Some('>') {
            out.push((Tok::Arrow, column));
            i += 2;
            continue;
        }
        if matches!(c, '=' | ',' | '(' | ')' | ':' | '{' | '}' | '&') {
            out.push((Tok::Punct(c), column));
            i += 1;
            continue;
        }
        let (sigil, start) = match c {
            '%' | '@' => (Some(c), i + 1),
            _ => (None, i),
        };
        let mut j = start;
        while j < chars.len() && is_ident_char(chars[j].1) {
            j += 1;
        }
        if j == start {
            return Err(FrontendError::Syntax {
                line: line_no,
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
        let end = chars.get(j).map_or(line.len(), |x| x.0);
        let text = line[chars[start].0..end].to_string();
        out.push((
            match sigil {
                Some('%') => Tok::Reg(text),
                Some('@') => Tok::Sym(text),
                _ => Tok::Ident(text),
            },
            column,
        ));
        i = j;
    }
    Ok(out)
}

struct Line {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    len: usize,
}

impl Line {
    fn err(&self, message: impl Into<String>) -> FrontendError {
        let column = self.toks.get(self.pos).map_or(self.len + 1, |(_, c)| *c);
        FrontendError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), FrontendError> {
        if self.done() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing tokens"))
        }
    }

    fn punct(&mut self, c: char) -> Result<(), FrontendError> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{c}`"))),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        self.punct(c).is_ok()
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn reg(&mut self) -> Result<String, FrontendError> {
        match self.peek() {
            Some(Tok::Reg(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected register")),
        }
    }

    fn sym(&mut self) -> Result<String, FrontendError> {
        match self.peek() {
            Some(Tok::Sym(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected symbol")),
        }
    }

    fn value_type(&mut self) -> Result<ValueType, FrontendError> {
        if self.keyword("ptr") {
            Ok(ValueType::Ptr)
        } else if self.keyword("scalar") {
            Ok(ValueType::Scalar)
        } else {
            Err(self.err("expected `ptr` or `scalar`"))
        }
    }

    fn linkage(&mut self) -> Linkage {
        if self.keyword("export") {
            Linkage::Export
        } else if self.keyword("import") {
            Linkage::Import
        } else {
            Linkage::Internal
        }
    }

    fn reg_list(&mut self) -> Result<Vec<String>, FrontendError> {
        self.punct('(')?;
        let mut out = Vec::new();
        if self.eat_punct(')') {
            return Ok(out);
        }
        loop {
            out.push(self.reg()?);
            if self.eat_punct(')') {
                return Ok(out);
            }
            self.punct(',')?;
        }
    }
}

fn statement(l: &mut Line) -> Result<Statement, FrontendError> {
    if let Some(Tok::Reg(_)) = l.peek() {
        let dest = l.reg()?;
        l.punct('=')?;
        let op = l.ident()?;
        let s = match op.as_str() {
            "alloca" => Statement::Alloca {
                dest,
                cell: l.value_type()?,
            },
            "addr" => Statement::AddrOf {
                dest,
                symbol: l.sym()?,
            },
            "copy" => Statement::Copy {
                dest,
                src: l.reg()?,
            },
            "load" => {
                let ty = l.value_type()?;
                Statement::Load {
                    dest,
                    addr: l.reg()?,
                    ty,
                }
            }
            "call" => {
                let ty = l.value_type()?;
                call_tail(l, Some((dest, ty)))?
            }
            "ptrtoint" => Statement::PtrToInt {
                dest,
                src: l.reg()?,
            },
            "inttoptr" => Statement::IntToPtr {
                dest,
                src: l.reg()?,
            },
            "malloc" => Statement::Malloc { dest },
            other => return Err(l.err(format!("unknown instruction `{other}`"))),
        };
        l.expect_end()?;
        return Ok(s);
    }
    let op = l.ident()?;
    let s = match op.as_str() {
        "store" => {
            let ty = l.value_type()?;
            let addr = l.reg()?;
            l.punct(',')?;
            Statement::Store {
                addr,
                src: l.reg()?,
                ty,
            }
        }
        "call" => call_tail(l, None)?,
        "ret" => {
            if l.done() {
                Statement::Ret(None)
            } else {
                Statement::Ret(Some(l.reg()?))
            }
        }
        "free" => Statement::Free { arg: l.reg()? },
        "memcpy" => {
            let dst = l.reg()?;
            l.punct(',')?;
            Statement::Memcpy { dst, src: l.reg()? }
        }
        other => return Err(l.err(format!("unknown instruction `{other}`"))),
    };
    l.expect_end()?;
    Ok(s)
}

fn call_tail(l: &mut Line, dest: Option<(String, ValueType)>) -> Result<Statement, FrontendError> {
    match l.peek() {
        Some(Tok::Sym(_)) => {
            let callee = l.sym()?;
            let args = l.reg_list()?;
            Ok(Statement::Call { dest, callee, args })
        }
        Some(Tok::Reg(_)) => {
            let target = l.reg()?;
            let args = l.reg_list()?;
            Ok(Statement::CallIndirect { dest, target, args })
        }
        _ => Err(l.err("expected call target")),
    }
}

/// Parses TinyIR text into a structurally checked [`TinyModule`].
pub fn parse_tiny_module(text: &str) -> Result<TinyModule, FrontendError> {
    let mut module: Option<TinyModule> = None;
    let mut current: Option<(Function, usize)> = None;
    let mut stmt_lines: Vec<Vec<usize>> = Vec::new();
    let mut decl_lines: HashMap<String, usize> = HashMap::new();
    let mut global_init_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = lex(raw, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut l = Line {
            toks,
            pos: 0,
            line: line_no,
            len: raw.len(),
        };
        let Some(m) = module.as_mut() else {
            if !l.keyword("module") {
                return Err(l.err("expected `module <name>`"));
            }
            let name = l.ident()?;
            l.expect_end()?;
            module = Some(TinyModule::new(name));
            continue;
        };

        if let Some((func, _)) = current.as_mut() {
            if l.eat_punct('}') {
                l.expect_end()?;
                let (func, _) = current.take().unwrap();
                m.functions.push(func);
                continue;
            }
            func.body.push(statement(&mut l)?);
            stmt_lines.last_mut().unwrap().push(line_no);
            continue;
        }

        if l.keyword("global") {
            let name = l.ident()?;
            let ty = l.value_type()?;
            let linkage = l.linkage();
            let init = if l.eat_punct('=') {
                l.punct('&')?;
                Some(l.ident()?)
            } else {
                None
            };
            l.expect_end()?;
            if decl_lines.insert(name.clone(), line_no).is_some() {
                return Err(FrontendError::DuplicateSymbol {
                    line: line_no,
                    name,
                });
            }
            if init.is_some() {
                global_init_lines.push((m.globals.len(), line_no));
            }
            m.globals.push(Global {
                name,
                ty,
                linkage,
                init,
            });
        } else if l.keyword("func") {
            let name = l.ident()?;
            l.punct('(')?;
            let mut params = Vec::new();
            if !l.eat_punct(')') {
                loop {
                    let p = l.reg()?;
                    l.punct(':')?;
                    params.push(Param {
                        name: p,
                        ty: l.value_type()?,
                    });
                    if l.eat_punct(')') {
                        break;
                    }
                    l.punct(',')?;
                }
            }
            let ret = if matches!(l.peek(), Some(Tok::Arrow)) {
                l.next();
                Some(l.value_type()?)
            } else {
                None
            };
            let linkage = l.linkage();
            let has_body = l.eat_punct('{');
            l.expect_end()?;
            if decl_lines.insert(name.clone(), line_no).is_some() {
                return Err(FrontendError::DuplicateSymbol {
                    line: line_no,
                    name,
                });
            }
            let func = Function {
                name: name.clone(),
                linkage,
                params,
                ret,
                body: Vec::new(),
            };
            match (linkage == Linkage::Import, has_body) {
                (true, true) => {
                    return Err(FrontendError::BodyOnImport {
                        line: line_no,
                        name,
                    })
                }
                (false, false) => {
                    return Err(FrontendError::MissingBody {
                        line: line_no,
                        name,
                    })
                }
                (true, false) => {
                    stmt_lines.push(Vec::new());
                    m.functions.push(func);
                }
                (false, true) => {
                    stmt_lines.push(Vec::new());
                    current = Some((func, line_no));
                }
            }
        } else {
            return Err(l.err("expected `global` or `func`"));
        }
    }

    if let Some((func, line)) = current {
        return Err(FrontendError::Syntax {
            line,
            column: 1,
            message: format!("function `{}` is not closed", func.name),
        });
    }
    let module = module.ok_or(FrontendError::Syntax {
        line: 1,
        column: 1,
        message: "missing `module <name>` header".into(),
    })?;

    for (gi, line) in global_init_lines {
        let init = module.globals[gi].init.as_deref().unwrap();
        if !decl_lines.contains_key(init) {
            return Err(FrontendError::Undeclared {
                line,
                name: init.to_string(),
            });
        }
    }
    let mut lines = stmt_lines.into_iter();
    for func in &module.functions {
        let lines = lines.next().unwrap_or_default();
        check_function(&module, func, &lines)?;
    }
    Ok(module)
}

/// Register typing and operand resolution for one function body.
pub(crate) fn check_function(
    module: &TinyModule,
    func: &Function,
    lines: &[usize],
) -> Result<(), FrontendError> {
    let functions: HashSet<&str> = module.functions.iter().map(|f| f.name.as_str()).collect();
    let globals: HashSet<&str> = module.globals.iter().map(|g| g.name.as_str()).collect();
    let mut regs: HashMap<&str, ValueType> = HashMap::new();
    for p in &func.params {
        if regs.insert(&p.name, p.ty).is_some() {
            return Err(FrontendError::TypeMismatch {
                line: lines.first().copied().unwrap_or(0),
                name: p.name.clone(),
            });
        }
    }

    for (i, s) in func.body.iter().enumerate() {
        let line = lines.get(i).copied().unwrap_or(0);
        let use_reg = |regs: &HashMap<&str, ValueType>, r: &str| {
            regs.get(r)
                .copied()
                .ok_or_else(|| FrontendError::Undeclared {
                    line,
                    name: format!("%{r}"),
                })
        };
        let use_ptr = |regs: &HashMap<&str, ValueType>, r: &str| match use_reg(regs, r)? {
            ValueType::Ptr => Ok(()),
            ValueType::Scalar => Err(FrontendError::ScalarAddress {
                line,
                name: r.to_string(),
            }),
        };
        let mut new_def: Option<(&str, ValueType)> = None;
        match s {
            Statement::Alloca { dest, .. } | Statement::Malloc { dest } => {
                new_def = Some((dest, ValueType::Ptr));
            }
            Statement::AddrOf { dest, symbol } => {
                if !globals.contains(symbol.as_str()) && !functions.contains(symbol.as_str()) {
                    return Err(FrontendError::Undeclared {
                        line,
                        name: format!("@{symbol}"),
                    });
                }
                new_def = Some((dest, ValueType::Ptr));
            }
            Statement::Copy { dest, src } => {
                let ty = use_reg(&regs, src)?;
                new_def = Some((dest, ty));
            }
            Statement::Load { dest, addr, ty } => {
                use_ptr(&regs, addr)?;
                new_def = Some((dest, *ty));
            }
            Statement::Store { addr, src, .. } => {
                use_ptr(&regs, addr)?;
                use_reg(&regs, src)?;
            }
            Statement::Call { dest, callee, args } => {
                if !functions.contains(callee.as_str()) {
                    if globals.contains(callee.as_str()) {
                        return Err(FrontendError::NotAFunction {
                            line,
                            name: callee.clone(),
                        });
                    }
                    return Err(FrontendError::Undeclared {
                        line,
                        name: format!("@{callee}"),
                    });
                }
                for a in args {
                    use_reg(&regs, a)?;
                }
                new_def = dest.as_ref().map(|(d, ty)| (d.as_str(), *ty));
            }
            Statement::CallIndirect { dest, target, args } => {
                use_ptr(&regs, target)?;
                for a in args {
                    use_reg(&regs, a)?;
                }
                new_def = dest.as_ref().map(|(d, ty)| (d.as_str(), *ty));
            }
            Statement::Ret(v) => {
                if let Some(v) = v {
                    use_reg(&regs, v)?;
                }
            }
            Statement::PtrToInt { dest, src } => {
                use_reg(&regs, src)?;
                new_def = Some((dest, ValueType::Scalar));
            }
            Statement::IntToPtr { dest, src } => {
                use_reg(&regs, src)?;
                new_def = Some((dest, ValueType::Ptr));
            }
            Statement::Free { arg } => {
                use_reg(&regs, arg)?;
            }
            Statement::Memcpy { dst, src } => {
                use_ptr(&regs, dst)?;
                use_ptr(&regs, src)?;
            }
        }
        if let Some((r, ty)) = new_def {
            if regs.insert(r, ty).is_some_and(|prev| prev != ty) {
                return Err(FrontendError::TypeMismatch {
                    line,
                    name: r.to_string(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_module() {
        let m = parse_tiny_module("module empty\n").unwrap();
        assert!(m.globals.is_empty() && m.functions.is_empty());
    }

    #[test]
    fn store_to_undeclared_register() {
        let text = "module m\nglobal g ptr\nfunc f() {\n  %r = addr @g\n  store ptr %g, %r\n}\n";
        let err = parse_tiny_module(text).unwrap_err();
        assert_eq!(
            err,
            FrontendError::Undeclared {
                line: 5,
                name: "%g".into()
            }
        );
    }

    #[test]
    fn imported_function_with_body() {
        let text = "module m\nfunc f() import {\n}\n";
        assert!(matches!(
            parse_tiny_module(text),
            Err(FrontendError::BodyOnImport { line: 2, .. })
        ));
    }

    #[test]
    fn register_type_conflict() {
        let text = "module m\nglobal g ptr\nfunc f() {\n  %r = addr @g\n  %r = ptrtoint %r\n}\n";
        assert!(matches!(
            parse_tiny_module(text),
            Err(FrontendError::TypeMismatch { line: 5, .. })
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "module m
global g ptr export = &f
global n scalar import
func ext(%a: ptr) -> ptr import
func f(%p: ptr, %k: scalar) -> ptr {
  %a = alloca ptr
  %b = addr @g
  %c = copy %b
  %d = load ptr %c
  store scalar %a, %k
  %e = call ptr @ext(%d)
  call %e(%a, %k)
  %i = ptrtoint %e
  %j = inttoptr %i
  %h = malloc
  free %h
  memcpy %h, %a
  ret %j
}
";
        let m = parse_tiny_module(text).unwrap();
        assert_eq!(m.to_string(), text);
        assert_eq!(parse_tiny_module(&m.to_string()).unwrap(), m);
    }
}
