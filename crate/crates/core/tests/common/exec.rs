// SPDX-License-Identifier: Apache-2.0

//! A tiny concrete interpreter for TinyIR. Exported functions are run as
//! entry points with arguments supplied by an unknown caller; imported
//! functions return external memory. Observed pointer values are checked
//! against a solution afterwards.

use std::collections::{BTreeSet, HashMap};

use andersen_core::frontend::{register_name, Function, Statement, TinyModule, ValueType};
use andersen_core::model::Linkage;
use andersen_core::Solution;

/// Object id 0 stands for all memory outside the module.
const EXTERNAL: usize = 0;
const MAX_DEPTH: usize = 4;
const MAX_STEPS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Ptr(usize),
    /// An integer, remembering the object whose address it came from.
    Int(Option<usize>),
    Undef,
}

/// What the run saw.
#[derive(Default)]
pub struct Trace {
    /// (register, abstract target) for every pointer a register held.
    pub reg_values: BTreeSet<(String, String)>,
    /// (cell, abstract target) for every pointer stored into a cell.
    pub cell_values: BTreeSet<(String, String)>,
    /// Concrete objects addressed per (function, statement index).
    pub accesses: HashMap<(String, usize), BTreeSet<usize>>,
}

struct Machine<'a> {
    m: &'a TinyModule,
    /// Abstract name per object.
    objects: Vec<String>,
    cells: Vec<Value>,
    cell_is_ptr: Vec<bool>,
    symbols: HashMap<String, usize>,
    /// Abstract location per (function, statement index) for allocas and mallocs.
    sites: HashMap<(String, usize), (String, bool)>,
    trace: Trace,
    steps: usize,
}

fn site_names(f: &Function) -> HashMap<usize, (String, bool)> {
    let mut out = HashMap::new();
    let mut allocas: HashMap<&str, usize> = HashMap::new();
    let mut heaps = 0;
    for (i, s) in f.body.iter().enumerate() {
        match s {
            Statement::Alloca { dest, cell } => {
                let k = allocas.entry(dest).or_insert(0);
                let name = match *k {
                    0 => format!("{}::{dest}", f.name),
                    k => format!("{}::{dest}#{k}", f.name),
                };
                *k += 1;
                out.insert(i, (name, *cell == ValueType::Ptr));
            }
            Statement::Malloc { .. } => {
                out.insert(i, (format!("{}::malloc#{heaps}", f.name), true));
                heaps += 1;
            }
            _ => {}
        }
    }
    out
}

impl<'a> Machine<'a> {
    fn new(m: &'a TinyModule) -> Self {
        let mut mc = Machine {
            m,
            objects: vec!["EXTERNAL".into()],
            cells: vec![Value::Ptr(EXTERNAL)],
            cell_is_ptr: vec![true],
            symbols: HashMap::new(),
            sites: HashMap::new(),
            trace: Trace::default(),
            steps: 0,
        };
        for g in &m.globals {
            let id = mc.alloc(g.name.clone(), g.ty == ValueType::Ptr);
            mc.symbols.insert(g.name.clone(), id);
        }
        for f in &m.functions {
            let id = mc.alloc(f.name.clone(), false);
            mc.symbols.insert(f.name.clone(), id);
            for (i, site) in site_names(f) {
                mc.sites.insert((f.name.clone(), i), site);
            }
        }
        for g in &m.globals {
            let id = mc.symbols[&g.name];
            mc.cells[id] = match (&g.init, g.linkage) {
                (Some(init), _) => {
                    let t = mc.symbols[init];
                    match g.ty {
                        ValueType::Ptr => Value::Ptr(t),
                        ValueType::Scalar => Value::Int(Some(t)),
                    }
                }
                (None, Linkage::Internal) => Value::Undef,
                (None, _) => Value::Ptr(EXTERNAL),
            };
        }
        mc
    }

    fn alloc(&mut self, name: String, is_ptr: bool) -> usize {
        self.objects.push(name);
        self.cells.push(Value::Undef);
        self.cell_is_ptr.push(is_ptr);
        self.objects.len() - 1
    }

    fn see_reg(&mut self, f: &str, reg: &str, v: Value) {
        if let Value::Ptr(o) = v {
            let name = register_name(f, reg);
            self.trace
                .reg_values
                .insert((name, self.objects[o].clone()));
        }
    }

    fn write(&mut self, cell: usize, v: Value) {
        if cell == EXTERNAL {
            return;
        }
        if let Value::Ptr(o) = v {
            if self.cell_is_ptr[cell] {
                let c = self.objects[cell].clone();
                self.trace.cell_values.insert((c, self.objects[o].clone()));
            }
        }
        self.cells[cell] = v;
    }

    fn read(&self, cell: usize, ty: ValueType) -> Value {
        let v = self.cells[cell];
        match (ty, v) {
            (ValueType::Ptr, Value::Int(Some(o))) => Value::Ptr(o),
            (ValueType::Ptr, Value::Int(None)) => Value::Undef,
            (ValueType::Scalar, Value::Ptr(o)) => Value::Int(Some(o)),
            _ => v,
        }
    }

    fn call(&mut self, target: usize, args: Vec<Value>, depth: usize) -> Value {
        let f = self
            .m
            .functions
            .iter()
            .find(|f| self.symbols[&f.name] == target);
        match f {
            Some(f) if !f.is_import() => {
                if depth >= MAX_DEPTH {
                    Value::Undef
                } else {
                    self.run(f, args, depth + 1)
                }
            }
            Some(_) => Value::Ptr(EXTERNAL),
            None if target == EXTERNAL => Value::Ptr(EXTERNAL),
            None => Value::Undef,
        }
    }

    fn run(&mut self, f: &Function, args: Vec<Value>, depth: usize) -> Value {
        let mut regs: HashMap<&str, Value> = HashMap::new();
        for (i, p) in f.params.iter().enumerate() {
            let v = match (args.get(i).copied().unwrap_or(Value::Undef), p.ty) {
                (Value::Ptr(o), ValueType::Scalar) => Value::Int(Some(o)),
                (Value::Int(Some(o)), ValueType::Ptr) => Value::Ptr(o),
                (v, _) => v,
            };
            self.see_reg(&f.name, &p.name, v);
            regs.insert(&p.name, v);
        }
        let get =
            |regs: &HashMap<&str, Value>, r: &str| regs.get(r).copied().unwrap_or(Value::Undef);
        for (i, s) in f.body.iter().enumerate() {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Value::Undef;
            }
            let (dest, v): (Option<&str>, Value) = match s {
                Statement::Alloca { dest, .. } | Statement::Malloc { dest } => {
                    let (name, is_ptr) = self.sites[&(f.name.clone(), i)].clone();
                    let id = match self.objects.iter().position(|o| *o == name) {
                        Some(id) => id,
                        None => self.alloc(name, is_ptr),
                    };
                    (Some(dest), Value::Ptr(id))
                }
                Statement::AddrOf { dest, symbol } => {
                    (Some(dest), Value::Ptr(self.symbols[symbol]))
                }
                Statement::Copy { dest, src } => (Some(dest), get(&regs, src)),
                Statement::Load { dest, addr, ty } => {
                    let v = match get(&regs, addr) {
                        Value::Ptr(o) => {
                            self.trace
                                .accesses
                                .entry((f.name.clone(), i))
                                .or_default()
                                .insert(o);
                            self.read(o, *ty)
                        }
                        _ => Value::Undef,
                    };
                    (Some(dest), v)
                }
                Statement::Store { addr, src, .. } => {
                    if let Value::Ptr(o) = get(&regs, addr) {
                        self.trace
                            .accesses
                            .entry((f.name.clone(), i))
                            .or_default()
                            .insert(o);
                        let v = get(&regs, src);
                        self.write(o, v);
                    }
                    (None, Value::Undef)
                }
                Statement::Call { dest, callee, args } => {
                    let a = args.iter().map(|r| get(&regs, r)).collect();
                    let v = self.call(self.symbols[callee], a, depth);
                    (dest.as_ref().map(|d| d.0.as_str()), coerce(v, dest))
                }
                Statement::CallIndirect { dest, target, args } => {
                    let a: Vec<Value> = args.iter().map(|r| get(&regs, r)).collect();
                    let v = match get(&regs, target) {
                        Value::Ptr(t) => self.call(t, a, depth),
                        _ => Value::Undef,
                    };
                    (dest.as_ref().map(|d| d.0.as_str()), coerce(v, dest))
                }
                Statement::Ret(v) => return v.as_ref().map_or(Value::Undef, |r| get(&regs, r)),
                Statement::PtrToInt { dest, src } => {
                    let v = match get(&regs, src) {
                        Value::Ptr(o) => Value::Int(Some(o)),
                        v => v,
                    };
                    (Some(dest), v)
                }
                Statement::IntToPtr { dest, src } => {
                    let v = match get(&regs, src) {
                        Value::Int(Some(o)) | Value::Ptr(o) => Value::Ptr(o),
                        _ => Value::Undef,
                    };
                    (Some(dest), v)
                }
                Statement::Free { .. } => (None, Value::Undef),
                Statement::Memcpy { dst, src } => {
                    if let (Value::Ptr(d), Value::Ptr(s)) = (get(&regs, dst), get(&regs, src)) {
                        let v = self.cells[s];
                        self.write(d, v);
                    }
                    (None, Value::Undef)
                }
            };
            if let Some(d) = dest {
                self.see_reg(&f.name, d, v);
                regs.insert(d, v);
            }
        }
        Value::Undef
    }
}

fn coerce(v: Value, dest: &Option<(String, ValueType)>) -> Value {
    match (v, dest.as_ref().map(|d| d.1)) {
        (Value::Int(Some(o)), Some(ValueType::Ptr)) => Value::Ptr(o),
        (Value::Ptr(o), Some(ValueType::Scalar)) => Value::Int(Some(o)),
        _ => v,
    }
}

/// Runs every exported function twice with external arguments.
pub fn execute(m: &TinyModule) -> Trace {
    let mut mc = Machine::new(m);
    for _ in 0..2 {
        for f in m.functions.iter().filter(|f| f.linkage == Linkage::Export) {
            let args = f
                .params
                .iter()
                .map(|p| match p.ty {
                    ValueType::Ptr => Value::Ptr(EXTERNAL),
                    ValueType::Scalar => Value::Int(None),
                })
                .collect();
            mc.steps = 0;
            mc.run(f, args, 0);
        }
    }
    mc.trace
}

/// Observed pointer facts the solution fails to cover.
pub fn uncovered(trace: &Trace, sol: &Solution) -> Vec<String> {
    let mut out = Vec::new();
    let covers = |var: &str, target: &str| match sol.get_by_name(var) {
        None => true,
        Some(pt) if target == "EXTERNAL" => pt.external,
        Some(pt) => sol.lookup(target).is_some_and(|t| pt.contains(t)),
    };
    for (var, target) in trace.reg_values.iter().chain(&trace.cell_values) {
        if !covers(var, target) {
            out.push(format!("{var} -> {target}"));
        }
    }
    out
}
