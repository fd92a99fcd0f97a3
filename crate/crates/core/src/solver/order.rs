// SPDX-License-Identifier: Apache-2.0

//! Worklist iteration orders. Every worklist ignores pushes of nodes that
//! are already queued.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::config::Order;
use super::cycles;
use crate::graph::ConstraintGraph;

pub(crate) trait Worklist {
    fn push(&mut self, n: u32);
    fn pop(&mut self, g: &ConstraintGraph) -> Option<u32>;
}

pub(crate) fn make(order: Order, n: usize) -> Box<dyn Worklist> {
    match order {
        Order::Fifo => Box::new(Fifo {
            queue: VecDeque::new(),
            queued: vec![false; n],
        }),
        Order::Lifo => Box::new(Lifo {
            stack: Vec::new(),
            queued: vec![false; n],
        }),
        Order::Lrf => Box::new(Lrf::new(n)),
        Order::TwoPhaseLrf => Box::new(TwoPhaseLrf {
            current: Lrf::new(n),
            next: Vec::new(),
        }),
        Order::Topo => Box::new(Topo {
            queued: vec![false; n],
            pending: 0,
            order: Vec::new(),
            pos: 0,
            edges_at_sort: 0,
            edges_now: 0,
        }),
    }
}

struct Fifo {
    queue: VecDeque<u32>,
    queued: Vec<bool>,
}

impl Worklist for Fifo {
    fn push(&mut self, n: u32) {
        if !std::mem::replace(&mut self.queued[n as usize], true) {
            self.queue.push_back(n);
        }
    }

    fn pop(&mut self, _: &ConstraintGraph) -> Option<u32> {
        let n = self.queue.pop_front()?;
        self.queued[n as usize] = false;
        Some(n)
    }
}

struct Lifo {
    stack: Vec<u32>,
    queued: Vec<bool>,
}

impl Worklist for Lifo {
    fn push(&mut self, n: u32) {
        if !std::mem::replace(&mut self.queued[n as usize], true) {
            self.stack.push(n);
        }
    }

    fn pop(&mut self, _: &ConstraintGraph) -> Option<u32> {
        let n = self.stack.pop()?;
        self.queued[n as usize] = false;
        Some(n)
    }
}

/// Least recently fired: pops the queued node whose last visit is oldest.
/// Initial timestamps follow node order.
struct Lrf {
    heap: BinaryHeap<Reverse<(u64, u32)>>,
    queued: Vec<bool>,
    fired: Vec<u64>,
    clock: u64,
}

impl Lrf {
    fn new(n: usize) -> Self {
        Lrf {
            heap: BinaryHeap::new(),
            queued: vec![false; n],
            fired: (0..n as u64).collect(),
            clock: n as u64,
        }
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

impl Worklist for Lrf {
    fn push(&mut self, n: u32) {
        if !std::mem::replace(&mut self.queued[n as usize], true) {
            self.heap.push(Reverse((self.fired[n as usize], n)));
        }
    }

    fn pop(&mut self, _: &ConstraintGraph) -> Option<u32> {
        let Reverse((_, n)) = self.heap.pop()?;
        self.queued[n as usize] = false;
        self.fired[n as usize] = self.clock;
        self.clock += 1;
        Some(n)
    }
}

/// Two-list LRF: nodes pushed while a round is running wait for the next
/// round; each round drains in LRF order.
struct TwoPhaseLrf {
    current: Lrf,
    next: Vec<u32>,
}

impl Worklist for TwoPhaseLrf {
    fn push(&mut self, n: u32) {
        if !self.current.queued[n as usize] {
            self.next.push(n);
        }
    }

    fn pop(&mut self, g: &ConstraintGraph) -> Option<u32> {
        if self.current.is_empty() {
            for n in std::mem::take(&mut self.next) {
                self.current.push(n);
            }
        }
        self.current.pop(g)
    }
}

/// Sweeps nodes in topological order of the simple-edge graph, re-sorting
/// when the edge count has grown by more than a tenth since the last sort.
struct Topo {
    queued: Vec<bool>,
    pending: usize,
    order: Vec<u32>,
    pos: usize,
    edges_at_sort: usize,
    edges_now: usize,
}

impl Worklist for Topo {
    fn push(&mut self, n: u32) {
        if !std::mem::replace(&mut self.queued[n as usize], true) {
            self.pending += 1;
        }
    }

    fn pop(&mut self, g: &ConstraintGraph) -> Option<u32> {
        if self.pending == 0 {
            return None;
        }
        loop {
            while self.pos < self.order.len() {
                let n = self.order[self.pos];
                self.pos += 1;
                if std::mem::replace(&mut self.queued[n as usize], false) {
                    self.pending -= 1;
                    return Some(n);
                }
            }
            self.edges_now = g.succ.iter().map(|s| s.len()).sum();
            if self.order.is_empty() || self.edges_now * 10 > self.edges_at_sort * 11 {
                self.order = cycles::topological_order(g);
                self.edges_at_sort = self.edges_now;
            }
            self.pos = 0;
        }
    }
}
