// SPDX-License-Identifier: Apache-2.0

//! Call summaries for imported functions whose effect on pointers is known.

use std::collections::HashMap;

use super::lower::{LowerCx, Operand};

/// Replaces the call constraint for a direct call to an imported function.
pub trait CallSummary: Send + Sync {
    fn lower_call(&self, cx: &mut LowerCx<'_>, dest: Option<Operand>, args: &[Operand]);
}

impl<F> CallSummary for F
where
    F: Fn(&mut LowerCx<'_>, Option<Operand>, &[Operand]) + Send + Sync,
{
    fn lower_call(&self, cx: &mut LowerCx<'_>, dest: Option<Operand>, args: &[Operand]) {
        self(cx, dest, args)
    }
}

#[derive(Default)]
pub struct SummaryTable {
    map: HashMap<String, Box<dyn CallSummary>>,
}

impl SummaryTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `malloc`, `free` and `memcpy`.
    pub fn standard() -> Self {
        let mut t = Self::empty();
        t.insert(
            "malloc",
            |cx: &mut LowerCx<'_>, dest: Option<Operand>, _: &[Operand]| lower_malloc(cx, dest),
        );
        t.insert(
            "free",
            |_: &mut LowerCx<'_>, _: Option<Operand>, _: &[Operand]| {},
        );
        t.insert(
            "memcpy",
            |cx: &mut LowerCx<'_>, dest: Option<Operand>, args: &[Operand]| {
                if let [d, s, ..] = args {
                    lower_memcpy(cx, *d, *s);
                    if let Some(r) = dest {
                        cx.simple(r, *d);
                    }
                }
            },
        );
        t
    }

    pub fn insert(&mut self, name: impl Into<String>, summary: impl CallSummary + 'static) {
        self.map.insert(name.into(), Box::new(summary));
    }

    pub fn get(&self, name: &str) -> Option<&dyn CallSummary> {
        self.map.get(name).map(|b| b.as_ref())
    }
}

pub(crate) fn lower_malloc(cx: &mut LowerCx<'_>, dest: Option<Operand>) {
    let heap = cx.fresh_heap();
    if let Some(d) = dest.filter(|d| d.pointer) {
        cx.base(d.var, heap);
    }
}

pub(crate) fn lower_memcpy(cx: &mut LowerCx<'_>, dst: Operand, src: Operand) {
    let t = Operand {
        var: cx.fresh_register("memcpy"),
        pointer: true,
    };
    if src.pointer {
        cx.load(t, src.var);
    }
    if dst.pointer {
        cx.store(dst.var, t);
    }
}
