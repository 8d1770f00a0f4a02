//! Example programs shipped with the crate.

use std::fmt::Write;

pub const SMOKERS: &str = include_str!("../programs/smokers.lp");
pub const GEAR_WHEELS: &str = include_str!("../programs/gear_wheels.lp");
pub const GEAR_WHEELS_2: &str = include_str!("../programs/gear_wheels2.lp");
pub const TC_LEFT: &str = include_str!("../programs/tc_left.lp");
pub const TC_DOUBLE: &str = include_str!("../programs/tc_double.lp");
pub const NT: &str = include_str!("../programs/nt.lp");
pub const DEF: &str = include_str!("../programs/def.lp");
pub const EMPTY: &str = include_str!("../programs/empty.lp");

pub const ALL: &[(&str, &str)] = &[
    ("smokers", SMOKERS),
    ("gear_wheels", GEAR_WHEELS),
    ("gear_wheels2", GEAR_WHEELS_2),
    ("tc_left", TC_LEFT),
    ("tc_double", TC_DOUBLE),
    ("nt", NT),
    ("def", DEF),
    ("empty", EMPTY),
];

pub fn by_name(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Constants `n0 .. n{k-1}`.
pub fn domain(size: usize) -> Vec<String> {
    (0..size).map(|i| format!("n{i}")).collect()
}

/// Ground transitive closure over the chain `n0 -> n1 -> ... -> n{k-1}`:
/// only chain edges are parameters, every other edge is absent.
pub fn chain_tc(nodes: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "% transitive closure of a {nodes}-node chain");
    for i in 0..nodes.saturating_sub(1) {
        let _ = writeln!(out, "r(n{i},n{}) :- e(n{i},n{}).", i + 1, i + 1);
        for y in 0..nodes {
            let _ = writeln!(out, "r(n{i},n{y}) :- e(n{i},n{}), r(n{},n{y}).", i + 1, i + 1);
        }
    }
    out
}
