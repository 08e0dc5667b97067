//! Coinductive subtyping on session types.
//!
//! An intersection (external choice) may shrink along subtyping: the
//! subtype offers at least the inputs of the supertype. A union (internal
//! choice) may grow: the subtype commits to a subset of the supertype's
//! outputs. Shared labels must carry the same sort — there is no
//! subsorting. A checkpointed type relates only to a type checkpointed by
//! the same name. The relation is decided by the usual assume-and-check
//! loop: recursion is unfolded at the head and every visited pair is
//! assumed to hold while its premises are examined.

use std::collections::{BTreeMap, HashSet};

use crate::kernel::{Label, SessionType, TBranch};

pub fn is_subtype(sub: &SessionType, sup: &SessionType) -> bool {
    let mut assumed = HashSet::new();
    check(sub, sup, &mut assumed)
}

/// Mutual subtyping: equality of the regular trees denoted by the types.
pub fn equal_regular(a: &SessionType, b: &SessionType) -> bool {
    is_subtype(a, b) && is_subtype(b, a)
}

fn check(
    sub: &SessionType,
    sup: &SessionType,
    assumed: &mut HashSet<(SessionType, SessionType)>,
) -> bool {
    let a = sub.unfold_head();
    let b = sup.unfold_head();
    let key = (a.clone(), b.clone());
    if assumed.contains(&key) {
        return true;
    }
    assumed.insert(key);
    match (&a, &b) {
        (SessionType::End, SessionType::End) => true,
        (
            SessionType::Inter { from: f1, branches: b1 },
            SessionType::Inter { from: f2, branches: b2 },
        ) => f1 == f2 && wider_in(b1, b2, assumed),
        (
            SessionType::Union { to: t1, branches: b1 },
            SessionType::Union { to: t2, branches: b2 },
        ) => t1 == t2 && narrower_out(b1, b2, assumed),
        (
            SessionType::CkInter { name: n1, from: f1, branches: b1 },
            SessionType::CkInter { name: n2, from: f2, branches: b2 },
        ) => n1 == n2 && f1 == f2 && wider_in(b1, b2, assumed),
        (
            SessionType::CkUnion { name: n1, to: t1, branches: b1 },
            SessionType::CkUnion { name: n2, to: t2, branches: b2 },
        ) => n1 == n2 && t1 == t2 && narrower_out(b1, b2, assumed),
        // Free variables only relate to themselves; closed types never get
        // here.
        (SessionType::Var(x), SessionType::Var(y)) => x == y,
        _ => false,
    }
}

/// The subtype's inputs cover the supertype's.
fn wider_in(
    sub: &BTreeMap<Label, TBranch>,
    sup: &BTreeMap<Label, TBranch>,
    assumed: &mut HashSet<(SessionType, SessionType)>,
) -> bool {
    sup.iter().all(|(l, want)| match sub.get(l) {
        Some(have) => have.sort == want.sort && check(&have.cont, &want.cont, assumed),
        None => false,
    })
}

/// The subtype's outputs are covered by the supertype's.
fn narrower_out(
    sub: &BTreeMap<Label, TBranch>,
    sup: &BTreeMap<Label, TBranch>,
    assumed: &mut HashSet<(SessionType, SessionType)>,
) -> bool {
    sub.iter().all(|(l, have)| match sup.get(l) {
        Some(want) => have.sort == want.sort && check(&have.cont, &want.cont, assumed),
        None => false,
    })
}
