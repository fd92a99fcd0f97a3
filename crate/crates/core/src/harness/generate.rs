// SPDX-License-Identifier: Apache-2.0

//! Seeded random TinyIR programs for differential and soundness testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frontend::{Function, Global, Param, Statement, TinyModule, ValueType};
use crate::model::Linkage;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzParams {
    pub seed: u64,
    pub modules: usize,
    /// Rough budget of symbols and registers per module.
    pub vars: usize,
    pub statements: usize,
    pub export_fraction: f64,
    /// Weight of casts and scalar traffic through pointers.
    pub cast_fraction: f64,
    pub indirect_call_fraction: f64,
    /// Chance of declaring each unresolved external symbol.
    pub import_fraction: f64,
}

impl Default for FuzzParams {
    fn default() -> Self {
        FuzzParams {
            seed: 1,
            modules: 3,
            vars: 60,
            statements: 80,
            export_fraction: 0.3,
            cast_fraction: 0.1,
            indirect_call_fraction: 0.2,
            import_fraction: 0.5,
        }
    }
}

impl FuzzParams {
    pub fn with_seed(seed: u64) -> Self {
        FuzzParams {
            seed,
            ..FuzzParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.modules == 0 || self.vars == 0 || self.statements == 0 {
            return Err("counts must be at least 1".into());
        }
        let fractions = [
            self.export_fraction,
            self.cast_fraction,
            self.indirect_call_fraction,
            self.import_fraction,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err("fractions must lie in [0, 1]".into());
        }
        Ok(())
    }
}

const EXTERNAL_FUNCS: usize = 3;
const EXTERNAL_GLOBALS: usize = 2;

#[derive(Clone)]
struct Plan {
    globals: Vec<Global>,
    functions: Vec<Function>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_type(rng: &mut impl Rng) -> ValueType {
    if rng.gen_bool(0.75) {
        ValueType::Ptr
    } else {
        ValueType::Scalar
    }
}

fn external_function(j: usize) -> Function {
    let ty = if j.is_multiple_of(2) {
        ValueType::Ptr
    } else {
        ValueType::Scalar
    };
    Function {
        name: format!("ext{j}"),
        linkage: Linkage::Import,
        params: (0..j % 3)
            .map(|k| Param {
                name: format!("a{k}"),
                ty: if k == 0 { ValueType::Ptr } else { ty },
            })
            .collect(),
        ret: (j != 1).then_some(ValueType::Ptr),
        body: Vec::new(),
    }
}

fn plan_module(p: &FuzzParams, i: usize) -> Plan {
    let mut rng = rng_for(p.seed, 2 * i as u64);
    let n_globals = (p.vars / 5).max(1);
    let n_funcs = (p.vars / 20).max(1);
    let linkage = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(p.export_fraction) {
            Linkage::Export
        } else {
            Linkage::Internal
        }
    };
    let globals = (0..n_globals)
        .map(|j| {
            let linkage = linkage(&mut rng);
            Global {
                name: match linkage {
                    Linkage::Export => format!("m{i}_g{j}"),
                    _ => format!("g{j}"),
                },
                ty: random_type(&mut rng),
                linkage,
                init: None,
            }
        })
        .collect();
    let functions = (0..n_funcs)
        .map(|j| {
            let linkage = linkage(&mut rng);
            let params = (0..rng.gen_range(0..=3))
                .map(|k| Param {
                    name: format!("a{k}"),
                    ty: random_type(&mut rng),
                })
                .collect();
            let ret = match rng.gen_range(0..4) {
                0 => None,
                1 => Some(ValueType::Scalar),
                _ => Some(ValueType::Ptr),
            };
            Function {
                name: match linkage {
                    Linkage::Export => format!("m{i}_f{j}"),
                    _ => format!("f{j}"),
                },
                linkage,
                params,
                ret,
                body: Vec::new(),
            }
        })
        .collect();
    Plan { globals, functions }
}

struct Body<'a, R: Rng> {
    rng: &'a mut R,
    p: &'a FuzzParams,
    globals: &'a [String],
    functions: &'a [Function],
    regs: Vec<(String, ValueType)>,
    next: usize,
    out: Vec<Statement>,
}

impl<R: Rng> Body<'_, R> {
    fn fresh(&mut self, ty: ValueType) -> String {
        let name = format!("r{}", self.next);
        self.next += 1;
        self.regs.push((name.clone(), ty));
        name
    }

    /// A destination register: usually fresh, sometimes a redefinition of
    /// an existing register of the same type.
    fn dest(&mut self, ty: ValueType) -> String {
        if self.rng.gen_bool(0.2) {
            let same: Vec<&String> = self
                .regs
                .iter()
                .filter(|r| r.1 == ty)
                .map(|r| &r.0)
                .collect();
            if let Some(r) = same.choose(self.rng) {
                return (*r).clone();
            }
        }
        self.fresh(ty)
    }

    fn pick(&mut self, ty: Option<ValueType>) -> Option<String> {
        let pool: Vec<&String> = self
            .regs
            .iter()
            .filter(|r| ty.is_none_or(|t| r.1 == t))
            .map(|r| &r.0)
            .collect();
        pool.choose(self.rng).map(|r| (*r).clone())
    }

    fn ptr(&mut self) -> String {
        match self.pick(Some(ValueType::Ptr)) {
            Some(r) => r,
            None => {
                let dest = self.fresh(ValueType::Ptr);
                self.out.push(Statement::Alloca {
                    dest: dest.clone(),
                    cell: ValueType::Ptr,
                });
                dest
            }
        }
    }

    fn value(&mut self, ty: ValueType) -> String {
        match self.pick(Some(ty)) {
            Some(r) => r,
            None if ty == ValueType::Ptr => self.ptr(),
            None => {
                let src = self.ptr();
                let dest = self.fresh(ValueType::Scalar);
                self.out.push(Statement::PtrToInt {
                    dest: dest.clone(),
                    src,
                });
                dest
            }
        }
    }

    fn call_args(&mut self, params: Option<&[Param]>) -> Vec<String> {
        match params {
            Some(ps) if self.rng.gen_bool(0.85) => ps
                .iter()
                .map(|q| self.pick(Some(q.ty)).unwrap_or_else(|| self.ptr()))
                .collect(),
            _ => {
                let n = self.rng.gen_range(0..=3);
                (0..n)
                    .map(|_| self.pick(None).unwrap_or_else(|| self.ptr()))
                    .collect()
            }
        }
    }

    fn call_dest(&mut self, ret: Option<ValueType>) -> Option<(String, ValueType)> {
        let ty = if self.rng.gen_bool(0.85) {
            ret
        } else {
            [None, Some(ValueType::Ptr), Some(ValueType::Scalar)]
                .choose(self.rng)
                .copied()
                .flatten()
        };
        ty.map(|ty| (self.dest(ty), ty))
    }

    fn statement(&mut self) {
        let cast = self.p.cast_fraction * 20.0;
        let weights = [
            6.0,                                  // alloca
            10.0,                                 // addr of global
            3.0,                                  // addr of function
            10.0,                                 // copy
            10.0,                                 // load ptr
            10.0,                                 // store ptr
            cast / 2.0,                           // load scalar
            cast / 2.0,                           // store scalar
            8.0,                                  // direct call
            self.p.indirect_call_fraction * 20.0, // indirect call
            cast,                                 // ptrtoint
            cast,                                 // inttoptr
            3.0,                                  // malloc
            1.0,                                  // free
            2.0,                                  // memcpy
        ];
        let dist = rand::distributions::WeightedIndex::new(weights).expect("positive weights");
        let s = match self.rng.sample(dist) {
            0 => {
                let cell = random_type(self.rng);
                Statement::Alloca {
                    dest: self.fresh(ValueType::Ptr),
                    cell,
                }
            }
            1 if !self.globals.is_empty() => {
                let symbol = self.globals.choose(self.rng).unwrap().clone();
                Statement::AddrOf {
                    dest: self.dest(ValueType::Ptr),
                    symbol,
                }
            }
            1 | 2 => {
                let symbol = self.functions.choose(self.rng).unwrap().name.clone();
                Statement::AddrOf {
                    dest: self.dest(ValueType::Ptr),
                    symbol,
                }
            }
            3 => {
                let src = self.pick(None).unwrap_or_else(|| self.ptr());
                let ty = self.regs.iter().find(|r| r.0 == src).unwrap().1;
                Statement::Copy {
                    dest: self.dest(ty),
                    src,
                }
            }
            4 => Statement::Load {
                addr: self.ptr(),
                dest: self.dest(ValueType::Ptr),
                ty: ValueType::Ptr,
            },
            5 => Statement::Store {
                addr: self.ptr(),
                src: self.value(ValueType::Ptr),
                ty: ValueType::Ptr,
            },
            6 => Statement::Load {
                addr: self.ptr(),
                dest: self.dest(ValueType::Scalar),
                ty: ValueType::Scalar,
            },
            7 => Statement::Store {
                addr: self.ptr(),
                src: self.value(ValueType::Scalar),
                ty: ValueType::Scalar,
            },
            8 => {
                let f = self.functions.choose(self.rng).unwrap().clone();
                let args = self.call_args(Some(&f.params));
                let dest = self.call_dest(f.ret);
                Statement::Call {
                    dest,
                    callee: f.name,
                    args,
                }
            }
            9 => {
                let target = self.ptr();
                let args = self.call_args(None);
                let dest = self.call_dest(Some(ValueType::Ptr));
                Statement::CallIndirect { dest, target, args }
            }
            10 => {
                let src = self.ptr();
                Statement::PtrToInt {
                    dest: self.dest(ValueType::Scalar),
                    src,
                }
            }
            11 => {
                let src = self.value(ValueType::Scalar);
                Statement::IntToPtr {
                    dest: self.dest(ValueType::Ptr),
                    src,
                }
            }
            12 => Statement::Malloc {
                dest: self.dest(ValueType::Ptr),
            },
            13 => Statement::Free { arg: self.ptr() },
            _ => Statement::Memcpy {
                dst: self.ptr(),
                src: self.ptr(),
            },
        };
        self.out.push(s);
    }
}

fn build_module(p: &FuzzParams, plans: &[Plan], i: usize) -> TinyModule {
    let mut rng = rng_for(p.seed, 2 * i as u64 + 1);
    let own = &plans[i];
    let mut m = TinyModule::new(format!("m{i}"));
    m.globals = own.globals.clone();
    m.functions = own.functions.clone();

    for (j, other) in plans.iter().enumerate() {
        if j == i {
            continue;
        }
        for g in other
            .globals
            .iter()
            .filter(|g| g.linkage == Linkage::Export)
        {
            if rng.gen_bool(0.5) {
                m.globals.push(Global {
                    linkage: Linkage::Import,
                    init: None,
                    ..g.clone()
                });
            }
        }
        for f in other
            .functions
            .iter()
            .filter(|f| f.linkage == Linkage::Export)
        {
            if rng.gen_bool(0.5) {
                m.functions.push(Function {
                    linkage: Linkage::Import,
                    ..f.clone()
                });
            }
        }
    }
    for j in 0..EXTERNAL_FUNCS {
        if rng.gen_bool(p.import_fraction) {
            m.functions.push(external_function(j));
        }
    }
    for j in 0..EXTERNAL_GLOBALS {
        if rng.gen_bool(p.import_fraction) {
            m.globals.push(Global {
                name: format!("extg{j}"),
                ty: ValueType::Ptr,
                linkage: Linkage::Import,
                init: None,
            });
        }
    }

    let globals: Vec<String> = m.globals.iter().map(|g| g.name.clone()).collect();
    let symbols: Vec<String> = globals
        .iter()
        .cloned()
        .chain(m.functions.iter().map(|f| f.name.clone()))
        .collect();
    for g in m
        .globals
        .iter_mut()
        .filter(|g| g.linkage != Linkage::Import)
    {
        let chance = match g.ty {
            ValueType::Ptr => 0.3,
            ValueType::Scalar => p.cast_fraction,
        };
        if rng.gen_bool(chance) {
            g.init = symbols.choose(&mut rng).cloned();
        }
    }

    let functions = m.functions.clone();
    let defined: Vec<usize> = (0..m.functions.len())
        .filter(|&k| !m.functions[k].is_import())
        .collect();
    let mut budget = vec![0usize; defined.len()];
    for _ in 0..p.statements {
        budget[rng.gen_range(0..defined.len())] += 1;
    }
    for (&k, &n) in defined.iter().zip(&budget) {
        let f = &functions[k];
        let mut body = Body {
            rng: &mut rng,
            p,
            globals: &globals,
            functions: &functions,
            regs: f.params.iter().map(|q| (q.name.clone(), q.ty)).collect(),
            next: 0,
            out: Vec::new(),
        };
        for _ in 0..n {
            body.statement();
        }
        if let Some(ty) = f.ret {
            let v = body.value(ty);
            body.out.push(Statement::Ret(Some(v)));
        }
        m.functions[k].body = body.out;
    }
    m
}

/// A linkable program of `p.modules` modules. Deterministic in `p`.
pub fn generate_program(p: &FuzzParams) -> Vec<TinyModule> {
    let plans: Vec<Plan> = (0..p.modules).map(|i| plan_module(p, i)).collect();
    (0..p.modules).map(|i| build_module(p, &plans, i)).collect()
}

/// The first module of [`generate_program`].
pub fn generate_random_module(p: &FuzzParams) -> TinyModule {
    let plans: Vec<Plan> = (0..p.modules).map(|i| plan_module(p, i)).collect();
    build_module(p, &plans, 0)
}
