// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{ConstraintGraph, Representation};
use std::sync::Arc;

use crate::model::{ConstraintModule, Flags, VarId, VarInfo};

/// Token standing for the external region in canonical sets.
pub const EXTERNAL: &str = "EXTERNAL";

/// Canonical points-to set: memory locations plus the external token.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PointsTo {
    /// Sorted, without duplicates.
    targets: Vec<VarId>,
    pub external: bool,
}

impl PointsTo {
    pub fn new(targets: impl IntoIterator<Item = VarId>, external: bool) -> Self {
        let mut targets: Vec<VarId> = targets.into_iter().collect();
        targets.sort_unstable();
        targets.dedup();
        PointsTo { targets, external }
    }

    pub fn targets(&self) -> &[VarId] {
        &self.targets
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty() && !self.external
    }

    pub fn len(&self) -> usize {
        self.targets.len() + usize::from(self.external)
    }

    pub fn contains(&self, x: VarId) -> bool {
        self.targets.binary_search(&x).is_ok()
    }

    /// True if the sets share a location or both contain EXTERNAL.
    pub fn intersects(&self, other: &PointsTo) -> bool {
        if self.external && other.external {
            return true;
        }
        let (mut a, mut b) = (
            self.targets.iter().peekable(),
            other.targets.iter().peekable(),
        );
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn is_subset(&self, other: &PointsTo) -> bool {
        if self.external && !other.external || self.targets.len() > other.targets.len() {
            return false;
        }
        let mut rest = other.targets.iter();
        self.targets.iter().all(|x| rest.any(|y| y == x))
    }
}

/// The representation-independent result of a solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    vars: Arc<Vec<VarInfo>>,
    sets: BTreeMap<VarId, PointsTo>,
    external: BTreeSet<VarId>,
}

/// First point where two solutions disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionDiff {
    pub var: String,
    pub left: String,
    pub right: String,
}

impl Solution {
    pub(crate) fn from_graph(g: &ConstraintGraph) -> Solution {
        let n = g.num_original;
        let find = |v: u32| g.uf.find_const(v) as usize;
        let (external, omega_rep) = match (g.repr, g.omega) {
            (Representation::Ep, Some(o)) => {
                let e: BTreeSet<VarId> = g.sol[find(o)]
                    .iter()
                    .filter(|&&x| x != o)
                    .map(|&x| VarId(x))
                    .collect();
                (e, Some(o))
            }
            _ => (
                (0..n as u32)
                    .filter(|&x| g.lflags[x as usize].contains(Flags::EXT_TARGET))
                    .map(VarId)
                    .collect(),
                None,
            ),
        };

        let mut sets = BTreeMap::new();
        for v in 0..n as u32 {
            if !g.vars[v as usize].pointer_compatible {
                continue;
            }
            let rep = find(v);
            let pt = match omega_rep {
                Some(o) => PointsTo::new(
                    g.sol[rep].iter().filter(|&&x| x != o).map(|&x| VarId(x)),
                    g.sol[rep].contains(&o),
                ),
                None => {
                    let px = g.pflags[rep].contains(Flags::POINTS_EXTERNAL);
                    let explicit = g.sol[rep].iter().map(|&x| VarId(x));
                    match px {
                        true => PointsTo::new(explicit.chain(external.iter().copied()), true),
                        false => PointsTo::new(explicit, false),
                    }
                }
            };
            sets.insert(VarId(v), pt);
        }
        Solution {
            vars: Arc::clone(&g.vars),
            sets,
            external,
        }
    }

    /// Builds a solution for `m` directly; used by oracles and tests.
    pub fn from_parts(
        m: &ConstraintModule,
        sets: BTreeMap<VarId, PointsTo>,
        external: BTreeSet<VarId>,
    ) -> Solution {
        Solution {
            vars: m.shared_vars(),
            sets,
            external,
        }
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.vars[v.index()].name
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.vars.iter().map(|v| v.name.as_str())
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    /// Canonical set of a pointer-compatible variable.
    pub fn get(&self, v: VarId) -> Option<&PointsTo> {
        self.sets.get(&v)
    }

    pub fn get_by_name(&self, name: &str) -> Option<&PointsTo> {
        self.lookup(name).and_then(|v| self.get(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &PointsTo)> + '_ {
        self.sets.iter().map(|(v, p)| (*v, p))
    }

    /// The externally accessible locations E.
    pub fn external_set(&self) -> &BTreeSet<VarId> {
        &self.external
    }

    /// Member names of `pt`, sorted, with EXTERNAL last.
    pub fn member_names(&self, pt: &PointsTo) -> Vec<String> {
        let mut out: Vec<String> = pt
            .targets
            .iter()
            .map(|x| self.name(*x).to_string())
            .collect();
        out.sort();
        if pt.external {
            out.push(EXTERNAL.to_string());
        }
        out
    }

    fn render(&self, pt: &PointsTo) -> String {
        format!("{{{}}}", self.member_names(pt).join(", "))
    }

    /// One line per reported variable, `name: {members}`, followed by the
    /// externally accessible set on a `#E:` line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, pt) in &self.sets {
            let name = self.name(*v);
            if name.starts_with('$') {
                continue;
            }
            let _ = writeln!(out, "{name}: {}", self.render(pt));
        }
        let mut e: Vec<&str> = self.external.iter().map(|x| self.name(*x)).collect();
        e.sort();
        let _ = writeln!(out, "#E: {{{}}}", e.join(", "));
        out
    }

    pub fn first_difference(&self, other: &Solution) -> Option<SolutionDiff> {
        let empty = PointsTo::default();
        if self.sets == other.sets && self.external == other.external {
            return None;
        }
        let keys: BTreeSet<VarId> = self.sets.keys().chain(other.sets.keys()).copied().collect();
        for v in keys {
            let a = self.sets.get(&v).unwrap_or(&empty);
            let b = other.sets.get(&v).unwrap_or(&empty);
            if a != b {
                return Some(SolutionDiff {
                    var: self.name(v).to_string(),
                    left: self.render(a),
                    right: other.render(b),
                });
            }
        }
        if self.external != other.external {
            let show = |s: &Solution| {
                let mut e: Vec<&str> = s.external.iter().map(|x| s.name(*x)).collect();
                e.sort();
                format!("{{{}}}", e.join(", "))
            };
            return Some(SolutionDiff {
                var: "#E".into(),
                left: show(self),
                right: show(other),
            });
        }
        None
    }
}
