// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::model::Linkage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueType {
    Ptr,
    Scalar,
}

impl ValueType {
    pub fn is_pointer(self) -> bool {
        self == ValueType::Ptr
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Ptr => "ptr",
            ValueType::Scalar => "scalar",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Global {
    pub name: String,
    pub ty: ValueType,
    pub linkage: Linkage,
    /// `= &sym` initializer.
    pub init: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: ValueType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub linkage: Linkage,
    pub params: Vec<Param>,
    /// `None` for functions returning nothing.
    pub ret: Option<ValueType>,
    pub body: Vec<Statement>,
}

impl Function {
    pub fn is_import(&self) -> bool {
        self.linkage == Linkage::Import
    }
}

/// Register names are stored without the leading `%`, symbols without `@`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Alloca {
        dest: String,
        cell: ValueType,
    },
    AddrOf {
        dest: String,
        symbol: String,
    },
    Copy {
        dest: String,
        src: String,
    },
    Load {
        dest: String,
        addr: String,
        ty: ValueType,
    },
    Store {
        addr: String,
        src: String,
        ty: ValueType,
    },
    Call {
        dest: Option<(String, ValueType)>,
        callee: String,
        args: Vec<String>,
    },
    CallIndirect {
        dest: Option<(String, ValueType)>,
        target: String,
        args: Vec<String>,
    },
    Ret(Option<String>),
    PtrToInt {
        dest: String,
        src: String,
    },
    IntToPtr {
        dest: String,
        src: String,
    },
    Malloc {
        dest: String,
    },
    Free {
        arg: String,
    },
    Memcpy {
        dst: String,
        src: String,
    },
}

impl Statement {
    /// The address operand if this is a memory access (load or store).
    pub fn access_address(&self) -> Option<&str> {
        match self {
            Statement::Load { addr, .. } | Statement::Store { addr, .. } => Some(addr),
            _ => None,
        }
    }
}

/// A parsed TinyIR module.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TinyModule {
    pub name: String,
    pub globals: Vec<Global>,
    pub functions: Vec<Function>,
}

impl TinyModule {
    pub fn new(name: impl Into<String>) -> Self {
        TinyModule {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&Global> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn num_statements(&self) -> usize {
        self.functions.iter().map(|f| f.body.len()).sum()
    }
}

fn linkage_suffix(l: Linkage) -> &'static str {
    match l {
        Linkage::Internal => "",
        Linkage::Export => " export",
        Linkage::Import => " import",
    }
}

fn call_prefix(dest: &Option<(String, ValueType)>) -> String {
    match dest {
        Some((d, ty)) => format!("%{d} = call {} ", ty.keyword()),
        None => "call ".to_string(),
    }
}

fn reg_list(args: &[String]) -> String {
    args.iter()
        .map(|a| format!("%{a}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Alloca { dest, cell } => write!(f, "%{dest} = alloca {}", cell.keyword()),
            Statement::AddrOf { dest, symbol } => write!(f, "%{dest} = addr @{symbol}"),
            Statement::Copy { dest, src } => write!(f, "%{dest} = copy %{src}"),
            Statement::Load { dest, addr, ty } => {
                write!(f, "%{dest} = load {} %{addr}", ty.keyword())
            }
            Statement::Store { addr, src, ty } => {
                write!(f, "store {} %{addr}, %{src}", ty.keyword())
            }
            Statement::Call { dest, callee, args } => {
                write!(f, "{}@{callee}({})", call_prefix(dest), reg_list(args))
            }
            Statement::CallIndirect { dest, target, args } => {
                write!(f, "{}%{target}({})", call_prefix(dest), reg_list(args))
            }
            Statement::Ret(None) => write!(f, "ret"),
            Statement::Ret(Some(v)) => write!(f, "ret %{v}"),
            Statement::PtrToInt { dest, src } => write!(f, "%{dest} = ptrtoint %{src}"),
            Statement::IntToPtr { dest, src } => write!(f, "%{dest} = inttoptr %{src}"),
            Statement::Malloc { dest } => write!(f, "%{dest} = malloc"),
            Statement::Free { arg } => write!(f, "free %{arg}"),
            Statement::Memcpy { dst, src } => write!(f, "memcpy %{dst}, %{src}"),
        }
    }
}

impl fmt::Display for TinyModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {}", self.name)?;
        for g in &self.globals {
            write!(
                f,
                "global {} {}{}",
                g.name,
                g.ty.keyword(),
                linkage_suffix(g.linkage)
            )?;
            if let Some(init) = &g.init {
                write!(f, " = &{init}")?;
            }
            writeln!(f)?;
        }
        for func in &self.functions {
            let params = func
                .params
                .iter()
                .map(|p| format!("%{}: {}", p.name, p.ty.keyword()))
                .collect::<Vec<_>>()
                .join(", ");
            write!(f, "func {}({params})", func.name)?;
            if let Some(ret) = func.ret {
                write!(f, " -> {}", ret.keyword())?;
            }
            write!(f, "{}", linkage_suffix(func.linkage))?;
            if func.is_import() {
                writeln!(f)?;
            } else {
                writeln!(f, " {{")?;
                for s in &func.body {
                    writeln!(f, "  {s}")?;
                }
                writeln!(f, "}}")?;
            }
        }
        Ok(())
    }
}
