//! Hash-consed Boolean circuits over the parameter alphabet.
//!
//! Nodes are only ever appended, and a node is always created after its
//! children, so node indices form a topological order of every DAG held by
//! the store. Normalisation is purely syntactic; semantic equivalence is
//! decided by [`crate::bdd`].

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

use crate::program::{Alphabet, AtomId, AtomKind};

static NEXT_STORE_ID: AtomicU32 = AtomicU32::new(0);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("unknown atom id {0}")]
    UnknownAtom(u32),
    #[error("`{0}` is a defined atom and cannot be a circuit input")]
    DefinedAtomAsVariable(String),
}

/// Handle of a node in a [`FormulaStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaRef(u32);

impl FormulaRef {
    pub const FALSE: FormulaRef = FormulaRef(0);
    pub const TRUE: FormulaRef = FormulaRef(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    False,
    True,
    Var(AtomId),
    Not(FormulaRef),
    And(Box<[FormulaRef]>),
    Or(Box<[FormulaRef]>),
}

impl Node {
    pub fn children(&self) -> &[FormulaRef] {
        match self {
            Node::Not(c) => std::slice::from_ref(c),
            Node::And(cs) | Node::Or(cs) => cs,
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormulaStats {
    pub nodes: usize,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct FormulaStore {
    id: u32,
    nodes: Vec<Node>,
    table: HashMap<Node, FormulaRef>,
    kinds: Vec<AtomKind>,
}

impl FormulaStore {
    pub fn new(alphabet: &Alphabet) -> Self {
        let mut store = FormulaStore {
            id: NEXT_STORE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            table: HashMap::new(),
            kinds: alphabet.ids().map(|id| alphabet.kind(id)).collect(),
        };
        store.intern(Node::False);
        store.intern(Node::True);
        store
    }

    /// Process-unique identity, used as a cache key by BDD managers.
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, f: FormulaRef) -> &Node {
        &self.nodes[f.index()]
    }

    fn intern(&mut self, node: Node) -> FormulaRef {
        if let Some(&r) = self.table.get(&node) {
            return r;
        }
        let r = FormulaRef(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.table.insert(node, r);
        r
    }

    pub fn mk_const(&mut self, value: bool) -> FormulaRef {
        if value {
            FormulaRef::TRUE
        } else {
            FormulaRef::FALSE
        }
    }

    /// Input node for a parameter atom.
    pub fn mk_var(&mut self, atom: AtomId) -> Result<FormulaRef, FormulaError> {
        match self.kinds.get(atom.index()) {
            None => Err(FormulaError::UnknownAtom(atom.0)),
            Some(AtomKind::Defined) => Err(FormulaError::DefinedAtomAsVariable(format!("#{}", atom.0))),
            Some(AtomKind::Parameter) => Ok(self.intern(Node::Var(atom))),
        }
    }

    /// Input node for any atom of the alphabet, defined atoms included.
    /// Theories use this to state `d <=> ψ_d`.
    pub fn mk_atom(&mut self, atom: AtomId) -> Result<FormulaRef, FormulaError> {
        if atom.index() >= self.kinds.len() {
            return Err(FormulaError::UnknownAtom(atom.0));
        }
        Ok(self.intern(Node::Var(atom)))
    }

    pub fn mk_not(&mut self, x: FormulaRef) -> FormulaRef {
        match *self.node(x) {
            Node::False => FormulaRef::TRUE,
            Node::True => FormulaRef::FALSE,
            Node::Not(inner) => inner,
            _ => self.intern(Node::Not(x)),
        }
    }

    pub fn mk_and(&mut self, xs: impl IntoIterator<Item = FormulaRef>) -> FormulaRef {
        self.mk_nary(xs, true)
    }

    pub fn mk_or(&mut self, xs: impl IntoIterator<Item = FormulaRef>) -> FormulaRef {
        self.mk_nary(xs, false)
    }

    pub fn mk_and2(&mut self, a: FormulaRef, b: FormulaRef) -> FormulaRef {
        self.mk_and([a, b])
    }

    pub fn mk_or2(&mut self, a: FormulaRef, b: FormulaRef) -> FormulaRef {
        self.mk_or([a, b])
    }

    pub fn mk_iff(&mut self, a: FormulaRef, b: FormulaRef) -> FormulaRef {
        let both = self.mk_and2(a, b);
        let (na, nb) = (self.mk_not(a), self.mk_not(b));
        let neither = self.mk_and2(na, nb);
        self.mk_or2(both, neither)
    }

    fn mk_nary(&mut self, xs: impl IntoIterator<Item = FormulaRef>, is_and: bool) -> FormulaRef {
        // `unit` is neutral, `zero` absorbing
        let (unit, zero) = if is_and {
            (FormulaRef::TRUE, FormulaRef::FALSE)
        } else {
            (FormulaRef::FALSE, FormulaRef::TRUE)
        };
        let mut kids: Vec<FormulaRef> = Vec::new();
        for x in xs {
            if x == zero {
                return zero;
            }
            if x == unit {
                continue;
            }
            match self.node(x) {
                Node::And(cs) if is_and => kids.extend_from_slice(cs),
                Node::Or(cs) if !is_and => kids.extend_from_slice(cs),
                _ => kids.push(x),
            }
        }
        kids.sort_unstable();
        kids.dedup();
        match kids.len() {
            0 => unit,
            1 => kids[0],
            _ => {
                let kids = kids.into_boxed_slice();
                self.intern(if is_and { Node::And(kids) } else { Node::Or(kids) })
            }
        }
    }

    /// Node indices reachable from `roots`, ascending (children first).
    pub fn reachable(&self, roots: &[FormulaRef]) -> Vec<FormulaRef> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<FormulaRef> = roots.to_vec();
        while let Some(f) = stack.pop() {
            if std::mem::replace(&mut seen[f.index()], true) {
                continue;
            }
            stack.extend_from_slice(self.node(f).children());
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| FormulaRef(i as u32))
            .collect()
    }

    /// Two-valued evaluation under an assignment of the input atoms.
    pub fn eval(&self, x: FormulaRef, value: impl Fn(AtomId) -> bool) -> bool {
        EvalPlan::new(self, &[x]).eval(&value)[0]
    }

    pub fn stats(&self, x: FormulaRef) -> FormulaStats {
        self.stats_many(&[x])
    }

    /// Distinct reachable nodes and the longest root-to-leaf path (in edges).
    pub fn stats_many(&self, roots: &[FormulaRef]) -> FormulaStats {
        let order = self.reachable(roots);
        let mut depth: HashMap<FormulaRef, usize> = HashMap::with_capacity(order.len());
        let mut max = 0;
        for &f in &order {
            let d = self.node(f).children().iter().map(|c| depth[c] + 1).max().unwrap_or(0);
            max = max.max(d);
            depth.insert(f, d);
        }
        FormulaStats {
            nodes: order.len(),
            depth: max,
        }
    }

    /// Atoms occurring in the DAG below `x`, ascending by id.
    pub fn support(&self, x: FormulaRef) -> Vec<AtomId> {
        let mut atoms: Vec<AtomId> = self
            .reachable(&[x])
            .into_iter()
            .filter_map(|f| match self.node(f) {
                Node::Var(a) => Some(*a),
                _ => None,
            })
            .collect();
        atoms.sort_unstable();
        atoms
    }

    /// Copies the DAG rooted at `x` from `other`, renaming input atoms.
    pub fn import(
        &mut self,
        other: &FormulaStore,
        x: FormulaRef,
        rename: impl Fn(AtomId) -> Option<AtomId>,
    ) -> Result<FormulaRef, FormulaError> {
        let mut map: HashMap<FormulaRef, FormulaRef> = HashMap::new();
        for f in other.reachable(&[x]) {
            let new = match other.node(f) {
                Node::False => FormulaRef::FALSE,
                Node::True => FormulaRef::TRUE,
                Node::Var(a) => {
                    let a2 = rename(*a).ok_or(FormulaError::UnknownAtom(a.0))?;
                    self.mk_atom(a2)?
                }
                Node::Not(c) => self.mk_not(map[c]),
                Node::And(cs) => {
                    let kids: Vec<_> = cs.iter().map(|c| map[c]).collect();
                    self.mk_and(kids)
                }
                Node::Or(cs) => {
                    let kids: Vec<_> = cs.iter().map(|c| map[c]).collect();
                    self.mk_or(kids)
                }
            };
            map.insert(f, new);
        }
        Ok(map[&x])
    }

    pub fn display<'a>(&'a self, x: FormulaRef, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        FormulaDisplay {
            store: self,
            root: x,
            alphabet,
        }
    }
}

/// Reusable evaluation schedule for a fixed set of roots, for sweeping many
/// assignments over the same circuits.
#[derive(Clone, Debug)]
pub struct EvalPlan {
    ops: Vec<Op>,
    kids: Vec<u32>,
    roots: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(bool),
    Var(AtomId),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
}

impl EvalPlan {
    pub fn new(store: &FormulaStore, roots: &[FormulaRef]) -> Self {
        let order = store.reachable(roots);
        let slot: HashMap<FormulaRef, u32> = order.iter().enumerate().map(|(i, &f)| (f, i as u32)).collect();
        let mut kids = Vec::new();
        let ops = order
            .iter()
            .map(|&f| match store.node(f) {
                Node::False => Op::Const(false),
                Node::True => Op::Const(true),
                Node::Var(a) => Op::Var(*a),
                Node::Not(c) => Op::Not(slot[c]),
                Node::And(cs) | Node::Or(cs) => {
                    let start = kids.len() as u32;
                    kids.extend(cs.iter().map(|c| slot[c]));
                    let end = kids.len() as u32;
                    if matches!(store.node(f), Node::And(_)) {
                        Op::And(start, end)
                    } else {
                        Op::Or(start, end)
                    }
                }
            })
            .collect();
        let roots = roots.iter().map(|r| slot[r] as usize).collect();
        EvalPlan { ops, kids, roots }
    }

    /// Values of the roots, in the order given to [`EvalPlan::new`].
    pub fn eval(&self, value: &impl Fn(AtomId) -> bool) -> Vec<bool> {
        let mut vals = vec![false; self.ops.len()];
        for (i, op) in self.ops.iter().enumerate() {
            vals[i] = match *op {
                Op::Const(b) => b,
                Op::Var(a) => value(a),
                Op::Not(c) => !vals[c as usize],
                Op::And(s, e) => self.kids[s as usize..e as usize].iter().all(|&c| vals[c as usize]),
                Op::Or(s, e) => self.kids[s as usize..e as usize].iter().any(|&c| vals[c as usize]),
            };
        }
        self.roots.iter().map(|&i| vals[i]).collect()
    }
}

struct FormulaDisplay<'a> {
    store: &'a FormulaStore,
    root: FormulaRef,
    alphabet: &'a Alphabet,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(s: &FormulaStore, x: FormulaRef, a: &Alphabet, top: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match s.node(x) {
                Node::False => f.write_str("false"),
                Node::True => f.write_str("true"),
                Node::Var(id) => f.write_str(a.name(*id)),
                Node::Not(c) => {
                    f.write_str("!")?;
                    go(s, *c, a, false, f)
                }
                Node::And(cs) | Node::Or(cs) => {
                    let op = if matches!(s.node(x), Node::And(_)) {
                        " & "
                    } else {
                        " | "
                    };
                    if !top {
                        f.write_str("(")?;
                    }
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            f.write_str(op)?;
                        }
                        go(s, *c, a, false, f)?;
                    }
                    if !top {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self.store, self.root, self.alphabet, true, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Alphabet;

    fn setup() -> (Alphabet, FormulaStore) {
        let mut a = Alphabet::new();
        for n in ["e(a,b)", "e(a,c)", "e(c,b)"] {
            a.insert(n, AtomKind::Parameter).unwrap();
        }
        a.insert("r(a,b)", AtomKind::Defined).unwrap();
        let s = FormulaStore::new(&a);
        (a, s)
    }

    fn intro_formula(a: &Alphabet, s: &mut FormulaStore) -> FormulaRef {
        let v = |s: &mut FormulaStore, n: &str| s.mk_var(a.lookup(n).unwrap()).unwrap();
        let ab = v(s, "e(a,b)");
        let ac = v(s, "e(a,c)");
        let cb = v(s, "e(c,b)");
        let chain = s.mk_and([ac, cb]);
        s.mk_or([ab, chain])
    }

    #[test]
    fn constants_are_unique() {
        let (_, mut s) = setup();
        assert_eq!(s.mk_const(true), s.mk_const(true));
        let t = s.mk_const(true);
        assert_eq!(*s.node(t), Node::True);
        assert_eq!(*s.node(FormulaRef::FALSE), Node::False);
    }

    #[test]
    fn vars_are_hash_consed() {
        let (a, mut s) = setup();
        let e = a.lookup("e(a,b)").unwrap();
        let x = s.mk_var(e).unwrap();
        assert_eq!(x, s.mk_var(e).unwrap());
        assert_eq!(*s.node(x), Node::Var(e));
    }

    #[test]
    fn defined_atom_is_not_an_input() {
        let (a, mut s) = setup();
        let r = a.lookup("r(a,b)").unwrap();
        assert!(matches!(s.mk_var(r), Err(FormulaError::DefinedAtomAsVariable(_))));
        assert!(matches!(s.mk_var(AtomId(99)), Err(FormulaError::UnknownAtom(99))));
    }

    #[test]
    fn negation_folds() {
        let (a, mut s) = setup();
        assert_eq!(s.mk_not(FormulaRef::TRUE), FormulaRef::FALSE);
        let e = s.mk_var(a.lookup("e(a,b)").unwrap()).unwrap();
        let ne = s.mk_not(e);
        assert_eq!(*s.node(ne), Node::Not(e));
        assert_eq!(s.mk_not(ne), e);
    }

    #[test]
    fn unit_and_idempotence_laws() {
        let (a, mut s) = setup();
        let e = s.mk_var(a.lookup("e(a,b)").unwrap()).unwrap();
        assert_eq!(s.mk_and([e, FormulaRef::TRUE]), e);
        assert_eq!(s.mk_or([e, e]), e);
        assert_eq!(s.mk_and([e, FormulaRef::FALSE]), FormulaRef::FALSE);
        assert_eq!(s.mk_or([e, FormulaRef::TRUE]), FormulaRef::TRUE);
        assert_eq!(s.mk_and([]), FormulaRef::TRUE);
        assert_eq!(s.mk_or([]), FormulaRef::FALSE);
    }

    #[test]
    fn nary_nodes_are_flat_sorted_and_shared() {
        let (a, mut s) = setup();
        let f = intro_formula(&a, &mut s);
        let g = intro_formula(&a, &mut s);
        assert_eq!(f, g);
        let x = s.mk_var(a.lookup("e(a,c)").unwrap()).unwrap();
        let y = s.mk_var(a.lookup("e(c,b)").unwrap()).unwrap();
        let inner = s.mk_and([y, x]);
        let outer = s.mk_and([inner, x]);
        assert_eq!(outer, inner);
        match s.node(inner) {
            Node::And(cs) => assert!(cs.windows(2).all(|w| w[0] < w[1])),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn intro_formula_evaluates() {
        let (a, mut s) = setup();
        let f = intro_formula(&a, &mut s);
        let on = [a.lookup("e(a,c)").unwrap(), a.lookup("e(c,b)").unwrap()];
        assert!(s.eval(f, |x| on.contains(&x)));
        assert!(!s.eval(f, |x| x == on[0]));
        assert!(!s.eval(FormulaRef::FALSE, |_| true));
        assert_eq!(s.display(f, &a).to_string(), "e(a,b) | (e(a,c) & e(c,b))");
    }

    #[test]
    fn stats_by_hand() {
        let (a, mut s) = setup();
        assert_eq!(s.stats(FormulaRef::TRUE), FormulaStats { nodes: 1, depth: 0 });
        let x = s.mk_var(a.lookup("e(a,b)").unwrap()).unwrap();
        assert_eq!(s.stats(x), FormulaStats { nodes: 1, depth: 0 });
        let y = s.mk_var(a.lookup("e(a,c)").unwrap()).unwrap();
        let ny = s.mk_not(y);
        let f = s.mk_or([x, ny]);
        assert_eq!(s.stats(f), FormulaStats { nodes: 4, depth: 2 });
    }

    #[test]
    fn import_renames_atoms() {
        let (a, mut s) = setup();
        let f = intro_formula(&a, &mut s);
        let (_, mut t) = setup();
        let g = t.import(&s, f, Some).unwrap();
        assert_eq!(t.display(g, &a).to_string(), s.display(f, &a).to_string());
    }
}
