// SPDX-License-Identifier: Apache-2.0

use crate::frontend::{Function, Global, Statement, TinyModule, ValueType};
use crate::model::Linkage;

/// `n` exported pointer globals and `m` registers, each holding the result
/// of a different imported function. Every register may target every
/// global, which an explicit representation stores as `n * m` pairs.
pub fn generate_stress_instance(n: usize, m: usize) -> TinyModule {
    assert!(n >= 1 && m >= 1, "stress instance needs n, m >= 1");
    let mut t = TinyModule::new(format!("stress_{n}_{m}"));
    t.globals = (0..n)
        .map(|i| Global {
            name: format!("g_{i}"),
            ty: ValueType::Ptr,
            linkage: Linkage::Export,
            init: None,
        })
        .collect();
    let mut body = Vec::with_capacity(m);
    for j in 0..m {
        t.functions.push(Function {
            name: format!("src_{j}"),
            linkage: Linkage::Import,
            params: Vec::new(),
            ret: Some(ValueType::Ptr),
            body: Vec::new(),
        });
        body.push(Statement::Call {
            dest: Some((format!("r_{j}"), ValueType::Ptr)),
            callee: format!("src_{j}"),
            args: Vec::new(),
        });
    }
    t.functions.push(Function {
        name: "main".into(),
        linkage: Linkage::Internal,
        params: Vec::new(),
        ret: None,
        body,
    });
    t
}
