use std::collections::{HashMap, HashSet};

use super::{
    Alphabet, AtomId, AtomKind, AtomPattern, GroundProgram, GroundRule, Literal, Program, ProgramError, Statement, Term,
};

type Binding<'a> = HashMap<&'a str, &'a str>;

fn ground_name(atom: &AtomPattern, binding: &Binding<'_>) -> String {
    let mut s = atom.predicate.clone();
    if !atom.args.is_empty() {
        s.push('(');
        for (i, t) in atom.args.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            match t {
                Term::Const(c) => s.push_str(c),
                Term::Var(v) => s.push_str(binding[v.as_str()]),
            }
        }
        s.push(')');
    }
    s
}

/// Calls `f` for every assignment of `vars` over `domain`, first variable
/// varying slowest.
fn for_each_binding<'a>(
    vars: &'a [String],
    domain: &'a [String],
    mut f: impl FnMut(&Binding<'a>) -> Result<(), ProgramError>,
) -> Result<(), ProgramError> {
    if vars.is_empty() {
        return f(&HashMap::new());
    }
    if domain.is_empty() {
        return Ok(());
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let binding: Binding<'a> = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| (v.as_str(), domain[i].as_str()))
            .collect();
        f(&binding)?;
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domain.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn pattern_vars(a: &AtomPattern) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in a.variables() {
        if !out.iter().any(|o| o == v) {
            out.push(v.to_string());
        }
    }
    out
}

fn ground_pattern(a: &AtomPattern, domain: &[String]) -> Result<Vec<String>, ProgramError> {
    let vars = pattern_vars(a);
    if !vars.is_empty() && domain.is_empty() {
        return Err(ProgramError::UnboundVariable {
            var: vars[0].clone(),
            rule: a.to_string(),
        });
    }
    let mut out = Vec::new();
    for_each_binding(&vars, domain, |b| {
        out.push(ground_name(a, b));
        Ok(())
    })?;
    Ok(out)
}

pub(super) fn ground(program: &Program, domain: &[String]) -> Result<GroundProgram, ProgramError> {
    let head_preds: HashSet<(&str, usize)> = program.rules().map(|r| r.head.signature()).collect();

    let mut declared_defined: HashSet<String> = HashSet::new();
    let mut declared_param: HashSet<String> = HashSet::new();
    for s in &program.statements {
        match s {
            Statement::Defined(a) => declared_defined.extend(ground_pattern(a, domain)?),
            Statement::Param(a) => {
                for g in ground_pattern(a, domain)? {
                    if declared_defined.contains(&g) {
                        return Err(ProgramError::DuplicateDeclaration(g));
                    }
                    declared_param.insert(g);
                }
            }
            _ => {}
        }
    }
    if let Some(g) = declared_param.iter().find(|g| declared_defined.contains(*g)) {
        return Err(ProgramError::DuplicateDeclaration(g.clone()));
    }

    let mut alphabet = Alphabet::new();
    let intern = |alphabet: &mut Alphabet, atom: &AtomPattern, name: String| {
        let kind = if head_preds.contains(&atom.signature()) || declared_defined.contains(&name) {
            AtomKind::Defined
        } else {
            AtomKind::Parameter
        };
        if kind == AtomKind::Defined && declared_param.contains(&name) {
            return Err(ProgramError::DefinedAtomDeclaredParam(name));
        }
        alphabet.insert(&name, kind)
    };

    let mut rules: Vec<GroundRule> = Vec::new();
    for s in &program.statements {
        match s {
            Statement::Rule(rule) => {
                let vars = rule.variables();
                if !vars.is_empty() && domain.is_empty() {
                    return Err(ProgramError::UnboundVariable {
                        var: vars[0].clone(),
                        rule: rule.to_string(),
                    });
                }
                for_each_binding(&vars, domain, |b| {
                    let head = intern(&mut alphabet, &rule.head, ground_name(&rule.head, b))?;
                    let body = rule
                        .body
                        .iter()
                        .map(|l| {
                            let atom: AtomId = intern(&mut alphabet, &l.atom, ground_name(&l.atom, b))?;
                            Ok(Literal {
                                atom,
                                positive: l.positive,
                            })
                        })
                        .collect::<Result<Vec<_>, ProgramError>>()?;
                    rules.push(GroundRule { head, body });
                    Ok(())
                })?;
            }
            Statement::Defined(a) | Statement::Param(a) => {
                let vars = pattern_vars(a);
                for_each_binding(&vars, domain, |b| {
                    intern(&mut alphabet, a, ground_name(a, b)).map(|_| ())
                })?;
            }
            Statement::Domain(_) => {}
        }
    }
    GroundProgram::new(alphabet, rules)
}
