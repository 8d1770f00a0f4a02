//! Reduced ordered BDDs without complement edges.
//!
//! Node 0 is the false terminal and node 1 the true terminal. Every internal
//! node is unique per `(level, low, high)` and has `low != high`, so two
//! handles of one manager are equal iff they denote the same function.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::formula::{FormulaRef, FormulaStore, Node};
use crate::program::AtomId;
use crate::weights::WeightFunction;

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(0);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("atom #{0} is not in the variable order")]
    AtomNotInOrder(u32),
    #[error("BDD handles belong to different managers")]
    ManagerMismatch,
    #[error("no weight for atom #{0}")]
    MissingWeight(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BddRef {
    manager: u32,
    node: u32,
}

impl BddRef {
    pub fn is_false(self) -> bool {
        self.node == 0
    }

    pub fn is_true(self) -> bool {
        self.node == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct BddNode {
    level: u32,
    low: u32,
    high: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Xor,
}

impl BoolOp {
    fn terminal(self, a: u32, b: u32) -> Option<u32> {
        match self {
            BoolOp::And => match (a, b) {
                (0, _) | (_, 0) => Some(0),
                (1, x) | (x, 1) => Some(x),
                _ if a == b => Some(a),
                _ => None,
            },
            BoolOp::Or => match (a, b) {
                (1, _) | (_, 1) => Some(1),
                (0, x) | (x, 0) => Some(x),
                _ if a == b => Some(a),
                _ => None,
            },
            BoolOp::Xor => match (a, b) {
                _ if a == b => Some(0),
                (0, x) | (x, 0) => Some(x),
                (1, 1) => Some(0),
                _ => None,
            },
        }
    }
}

/// Arithmetic used by weighted model counting.
pub trait WeightValue: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl WeightValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl WeightValue for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

#[derive(Clone, Debug)]
pub struct BddManager {
    id: u32,
    vars: Vec<AtomId>,
    level_of: HashMap<AtomId, u32>,
    nodes: Vec<BddNode>,
    unique: HashMap<BddNode, u32>,
    apply_cache: HashMap<(BoolOp, u32, u32), u32>,
    not_cache: HashMap<u32, u32>,
    formula_cache: HashMap<(u32, FormulaRef), u32>,
}

impl BddManager {
    /// A manager over `vars`, the first entry being the top level.
    pub fn new(vars: impl IntoIterator<Item = AtomId>) -> Self {
        let vars: Vec<AtomId> = vars.into_iter().collect();
        let level_of = vars.iter().enumerate().map(|(i, &a)| (a, i as u32)).collect();
        let n = vars.len() as u32;
        let terminal = |v| BddNode {
            level: n,
            low: v,
            high: v,
        };
        BddManager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            vars,
            level_of,
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
            formula_cache: HashMap::new(),
        }
    }

    pub fn variables(&self) -> &[AtomId] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Total number of nodes allocated so far, terminals included.
    pub fn allocated(&self) -> usize {
        self.nodes.len()
    }

    fn wrap(&self, node: u32) -> BddRef {
        BddRef { manager: self.id, node }
    }

    fn check(&self, r: BddRef) -> Result<u32, BddError> {
        if r.manager == self.id {
            Ok(r.node)
        } else {
            Err(BddError::ManagerMismatch)
        }
    }

    pub fn zero(&self) -> BddRef {
        self.wrap(0)
    }

    pub fn one(&self) -> BddRef {
        self.wrap(1)
    }

    pub fn constant(&self, value: bool) -> BddRef {
        self.wrap(value as u32)
    }

    pub fn var(&mut self, atom: AtomId) -> Result<BddRef, BddError> {
        let level = *self.level_of.get(&atom).ok_or(BddError::AtomNotInOrder(atom.0))?;
        let n = self.mk(level, 0, 1);
        Ok(self.wrap(n))
    }

    fn mk(&mut self, level: u32, low: u32, high: u32) -> u32 {
        if low == high {
            return low;
        }
        let node = BddNode { level, low, high };
        if let Some(&n) = self.unique.get(&node) {
            return n;
        }
        let n = self.nodes.len() as u32;
        self.nodes.push(node);
        self.unique.insert(node, n);
        n
    }

    fn level(&self, n: u32) -> u32 {
        self.nodes[n as usize].level
    }

    fn cofactors(&self, n: u32, level: u32) -> (u32, u32) {
        let node = self.nodes[n as usize];
        if node.level == level {
            (node.low, node.high)
        } else {
            (n, n)
        }
    }

    fn apply_raw(&mut self, op: BoolOp, a: u32, b: u32) -> u32 {
        if let Some(r) = op.terminal(a, b) {
            return r;
        }
        let key = if a <= b { (op, a, b) } else { (op, b, a) };
        if let Some(&r) = self.apply_cache.get(&key) {
            return r;
        }
        let level = self.level(a).min(self.level(b));
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let low = self.apply_raw(op, a0, b0);
        let high = self.apply_raw(op, a1, b1);
        let r = self.mk(level, low, high);
        self.apply_cache.insert(key, r);
        r
    }

    fn not_raw(&mut self, a: u32) -> u32 {
        if a < 2 {
            return 1 - a;
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return r;
        }
        let BddNode { level, low, high } = self.nodes[a as usize];
        let (l, h) = (self.not_raw(low), self.not_raw(high));
        let r = self.mk(level, l, h);
        self.not_cache.insert(a, r);
        r
    }

    pub fn apply(&mut self, op: BoolOp, a: BddRef, b: BddRef) -> Result<BddRef, BddError> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        let n = self.apply_raw(op, a, b);
        Ok(self.wrap(n))
    }

    pub fn and(&mut self, a: BddRef, b: BddRef) -> Result<BddRef, BddError> {
        self.apply(BoolOp::And, a, b)
    }

    pub fn or(&mut self, a: BddRef, b: BddRef) -> Result<BddRef, BddError> {
        self.apply(BoolOp::Or, a, b)
    }

    pub fn negate(&mut self, a: BddRef) -> Result<BddRef, BddError> {
        let a = self.check(a)?;
        let n = self.not_raw(a);
        Ok(self.wrap(n))
    }

    pub fn equivalent(&self, a: BddRef, b: BddRef) -> Result<bool, BddError> {
        Ok(self.check(a)? == self.check(b)?)
    }

    /// `a` entails `b`.
    pub fn entails(&mut self, a: BddRef, b: BddRef) -> Result<bool, BddError> {
        let nb = self.negate(b)?;
        Ok(self.and(a, nb)?.is_false())
    }

    /// The BDD of a circuit. Results are cached per (store, node), which is
    /// sound because stores are append-only.
    pub fn from_formula(&mut self, store: &FormulaStore, x: FormulaRef) -> Result<BddRef, BddError> {
        let sid = store.id();
        if let Some(&n) = self.formula_cache.get(&(sid, x)) {
            return Ok(self.wrap(n));
        }
        // walk only the part of the DAG not seen before
        let mut order = Vec::new();
        let mut stack = vec![(x, false)];
        let mut visited = std::collections::HashSet::new();
        while let Some((f, expanded)) = stack.pop() {
            if expanded {
                order.push(f);
                continue;
            }
            if self.formula_cache.contains_key(&(sid, f)) || !visited.insert(f) {
                continue;
            }
            stack.push((f, true));
            for &c in store.node(f).children() {
                stack.push((c, false));
            }
        }
        for f in order {
            let get = |m: &Self, c: &FormulaRef| m.formula_cache[&(sid, *c)];
            let n = match store.node(f) {
                Node::False => 0,
                Node::True => 1,
                Node::Var(a) => self.var(*a)?.node,
                Node::Not(c) => {
                    let c = get(self, c);
                    self.not_raw(c)
                }
                Node::And(cs) | Node::Or(cs) => {
                    let op = if matches!(store.node(f), Node::And(_)) {
                        BoolOp::And
                    } else {
                        BoolOp::Or
                    };
                    let kids: Vec<u32> = cs.iter().map(|c| get(self, c)).collect();
                    let mut acc = if op == BoolOp::And { 1 } else { 0 };
                    for k in kids {
                        acc = self.apply_raw(op, acc, k);
                    }
                    acc
                }
            };
            self.formula_cache.insert((sid, f), n);
        }
        Ok(self.wrap(self.formula_cache[&(sid, x)]))
    }

    /// Rebuilds a BDD as a circuit (if-then-else expansion) in `store`.
    /// Equal BDDs give equal circuits as long as `memo` is shared.
    pub fn to_formula(
        &self,
        a: BddRef,
        store: &mut FormulaStore,
        memo: &mut HashMap<u32, FormulaRef>,
    ) -> Result<FormulaRef, BddError> {
        let a = self.check(a)?;
        Ok(self.to_formula_raw(a, store, memo))
    }

    fn to_formula_raw(&self, n: u32, store: &mut FormulaStore, memo: &mut HashMap<u32, FormulaRef>) -> FormulaRef {
        if n < 2 {
            return store.mk_const(n == 1);
        }
        if let Some(&f) = memo.get(&n) {
            return f;
        }
        let BddNode { level, low, high } = self.nodes[n as usize];
        let v = store
            .mk_atom(self.vars[level as usize])
            .expect("manager variables belong to the store alphabet");
        let nv = store.mk_not(v);
        let f = match (low, high) {
            (0, 1) => v,
            (1, 0) => nv,
            (0, h) => {
                let h = self.to_formula_raw(h, store, memo);
                store.mk_and2(v, h)
            }
            (l, 0) => {
                let l = self.to_formula_raw(l, store, memo);
                store.mk_and2(nv, l)
            }
            (l, 1) => {
                let l = self.to_formula_raw(l, store, memo);
                store.mk_or2(v, l)
            }
            (1, h) => {
                let h = self.to_formula_raw(h, store, memo);
                store.mk_or2(nv, h)
            }
            (l, h) => {
                let h = self.to_formula_raw(h, store, memo);
                let l = self.to_formula_raw(l, store, memo);
                let hi = store.mk_and2(v, h);
                let lo = store.mk_and2(nv, l);
                store.mk_or2(hi, lo)
            }
        };
        memo.insert(n, f);
        f
    }

    /// Registers `f` (built in `store`) as denoting `a`.
    pub fn remember(&mut self, store: &FormulaStore, f: FormulaRef, a: BddRef) -> Result<(), BddError> {
        let a = self.check(a)?;
        self.formula_cache.insert((store.id(), f), a);
        Ok(())
    }

    /// Internal nodes reachable from `a`.
    pub fn size(&self, a: BddRef) -> Result<usize, BddError> {
        let a = self.check(a)?;
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![a];
        while let Some(n) = stack.pop() {
            if n < 2 || !seen.insert(n) {
                continue;
            }
            let node = self.nodes[n as usize];
            stack.push(node.low);
            stack.push(node.high);
        }
        Ok(seen.len())
    }

    /// Evaluates under a total assignment of the manager's variables.
    pub fn eval(&self, a: BddRef, value: impl Fn(AtomId) -> bool) -> Result<bool, BddError> {
        let mut n = self.check(a)?;
        while n >= 2 {
            let node = self.nodes[n as usize];
            n = if value(self.vars[node.level as usize]) {
                node.high
            } else {
                node.low
            };
        }
        Ok(n == 1)
    }

    /// Number of satisfying total assignments over all manager variables.
    pub fn count_models(&self, a: BddRef) -> Result<BigUint, BddError> {
        let a = self.check(a)?;
        let mut memo: HashMap<u32, BigUint> = HashMap::new();
        let top = self.level(a);
        Ok(self.count_raw(a, &mut memo) << top as usize)
    }

    fn count_raw(&self, n: u32, memo: &mut HashMap<u32, BigUint>) -> BigUint {
        if n < 2 {
            return BigUint::from(n);
        }
        if let Some(c) = memo.get(&n) {
            return c.clone();
        }
        let BddNode { level, low, high } = self.nodes[n as usize];
        let lo = self.count_raw(low, memo) << (self.level(low) - level - 1) as usize;
        let hi = self.count_raw(high, memo) << (self.level(high) - level - 1) as usize;
        let c = lo + hi;
        memo.insert(n, c.clone());
        c
    }

    /// Weighted model count in floating point.
    pub fn wmc(&self, a: BddRef, w: &WeightFunction) -> Result<f64, BddError> {
        let table = self.weight_table(w, |lw| (lw.w_true, lw.w_false))?;
        self.wmc_generic(a, &table)
    }

    /// Weighted model count in exact rational arithmetic.
    pub fn wmc_exact(&self, a: BddRef, w: &WeightFunction) -> Result<BigRational, BddError> {
        let table = self.weight_table(w, |lw| (lw.exact_true.clone(), lw.exact_false.clone()))?;
        self.wmc_generic(a, &table)
    }

    pub fn weight_table<T>(
        &self,
        w: &WeightFunction,
        pick: impl Fn(&crate::weights::LiteralWeights) -> (T, T),
    ) -> Result<Vec<(T, T)>, BddError> {
        self.vars
            .iter()
            .map(|&v| w.get(v).map(&pick).ok_or(BddError::MissingWeight(v.0)))
            .collect()
    }

    /// `table[level] = (w_true, w_false)`. Skipped levels contribute
    /// `w_true + w_false`.
    pub fn wmc_generic<T: WeightValue>(&self, a: BddRef, table: &[(T, T)]) -> Result<T, BddError> {
        let a = self.check(a)?;
        let span = |from: u32, to: u32| -> T {
            // product over levels from..to
            let mut acc = T::one();
            for l in from..to {
                acc = acc.mul(&table[l as usize].0.add(&table[l as usize].1));
            }
            acc
        };
        let mut memo: HashMap<u32, T> = HashMap::new();
        let v = self.wmc_raw(a, table, &span, &mut memo);
        Ok(span(0, self.level(a)).mul(&v))
    }

    fn wmc_raw<T: WeightValue>(
        &self,
        n: u32,
        table: &[(T, T)],
        span: &impl Fn(u32, u32) -> T,
        memo: &mut HashMap<u32, T>,
    ) -> T {
        if n < 2 {
            return if n == 1 { T::one() } else { T::zero() };
        }
        if let Some(v) = memo.get(&n) {
            return v.clone();
        }
        let BddNode { level, low, high } = self.nodes[n as usize];
        let lo = self.wmc_raw(low, table, span, memo);
        let hi = self.wmc_raw(high, table, span, memo);
        let lo = table[level as usize].1.mul(&span(level + 1, self.level(low))).mul(&lo);
        let hi = table[level as usize].0.mul(&span(level + 1, self.level(high))).mul(&hi);
        let v = lo.add(&hi);
        memo.insert(n, v.clone());
        v
    }

    /// Up to `limit` satisfying total assignments, lexicographically ordered
    /// with `false < true` and the top variable most significant. Each
    /// assignment is aligned with [`BddManager::variables`].
    pub fn enumerate_models(&self, a: BddRef, limit: usize) -> Result<Vec<Vec<bool>>, BddError> {
        let a = self.check(a)?;
        let mut out = Vec::new();
        let mut current = vec![false; self.vars.len()];
        self.enumerate_raw(a, 0, &mut current, limit, &mut out);
        Ok(out)
    }

    fn enumerate_raw(&self, n: u32, level: usize, current: &mut Vec<bool>, limit: usize, out: &mut Vec<Vec<bool>>) {
        if out.len() >= limit || n == 0 {
            return;
        }
        if level == self.vars.len() {
            out.push(current.clone());
            return;
        }
        let node = self.nodes[n as usize];
        let (low, high) = if node.level as usize == level {
            (node.low, node.high)
        } else {
            (n, n)
        };
        current[level] = false;
        self.enumerate_raw(low, level + 1, current, limit, out);
        current[level] = true;
        self.enumerate_raw(high, level + 1, current, limit, out);
        current[level] = false;
    }
}
