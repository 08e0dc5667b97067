//! Projection of single-threaded global types onto participants.
//!
//! The sender of a choice projects to a union, the receiver to an
//! intersection, and everyone else to the merge of the branch projections
//! (or `end` when uninvolved in every branch). Merge is deliberately
//! strict: it only combines intersections from the same sender with
//! pairwise-disjoint label sets, or checkpointed types carrying the same
//! name. A global type is well formed when every participant projects.

use std::collections::BTreeSet;

use crate::kernel::{
    GlobalPair, GlobalType, Participant, SessionType, TBranch,
};

/// Result of projecting: either a session type or a reason it is undefined,
/// with the branch path where projection failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proj {
    Defined(SessionType),
    Undefined { reason: String, path: String },
}

impl Proj {
    pub fn defined(self) -> Option<SessionType> {
        match self {
            Proj::Defined(t) => Some(t),
            Proj::Undefined { .. } => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Proj::Defined(_))
    }
}

/// The participants occurring in a global type. Checkpoints and recursion
/// binders are transparent; `end` and type variables contribute nothing.
pub fn participants_global(g: &GlobalType) -> BTreeSet<Participant> {
    let mut out = BTreeSet::new();
    collect(g, &mut out);
    out
}

fn collect(g: &GlobalType, out: &mut BTreeSet<Participant>) {
    match g {
        GlobalType::Comm { from, to, branches } | GlobalType::CkComm { from, to, branches, .. } => {
            out.insert(from.clone());
            out.insert(to.clone());
            for b in branches.values() {
                collect(&b.cont, out);
            }
        }
        GlobalType::Rec { body, .. } => collect(body, out),
        GlobalType::Var(_) | GlobalType::End => {}
    }
}

/// The participants of a tracked pair: everyone in the history or in the
/// active type.
pub fn participants_pair(gp: &GlobalPair) -> BTreeSet<Participant> {
    let mut out = participants_global(&gp.active);
    for g in &gp.history {
        out.extend(participants_global(g));
    }
    out
}

/// Merges the branch projections seen by a participant who is not involved
/// in the choice itself. The projections form an indexed family, one per
/// branch: identical entries are not collapsed, so two branches projecting
/// to the same intersection clash just like overlapping labels do.
pub fn merge(parts: &[SessionType]) -> Result<SessionType, String> {
    if parts.is_empty() {
        return Err("nothing to merge".into());
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    if let SessionType::Inter { from, .. } = &parts[0] {
        if parts.iter().all(
            |t| matches!(t, SessionType::Inter { from: f, .. } if f == from),
        ) {
            let mut branches = std::collections::BTreeMap::new();
            for t in parts {
                let SessionType::Inter { branches: bs, .. } = t else { unreachable!() };
                for (l, b) in bs {
                    if branches.insert(l.clone(), b.clone()).is_some() {
                        return Err(format!(
                            "label `{l}` appears in more than one branch projection"
                        ));
                    }
                }
            }
            return Ok(SessionType::Inter { from: from.clone(), branches });
        }
    }
    if let Some(name) = parts[0].ck_name() {
        if parts.iter().all(|t| t.ck_name() == Some(name)) {
            let inner: Vec<SessionType> = parts.iter().map(|t| t.strip_ck()).collect();
            let merged = merge(&inner)?;
            return match merged {
                SessionType::Inter { from, branches } => Ok(SessionType::CkInter {
                    name: name.clone(),
                    from,
                    branches,
                }),
                SessionType::Union { to, branches } => Ok(SessionType::CkUnion {
                    name: name.clone(),
                    to,
                    branches,
                }),
                _ => Err("checkpointed merge did not yield a choice".into()),
            };
        }
    }
    Err("branch projections are neither mergeable intersections nor identically named checkpoints"
        .into())
}

/// Projects a global type onto a participant.
pub fn project(g: &GlobalType, r: &Participant) -> Proj {
    let mut path = Vec::new();
    project_at(g, r, &mut path)
}

fn project_at(g: &GlobalType, r: &Participant, path: &mut Vec<String>) -> Proj {
    match g {
        GlobalType::End => Proj::Defined(SessionType::End),
        GlobalType::Var(t) => Proj::Defined(SessionType::Var(t.clone())),
        GlobalType::Rec { var, body } => {
            if participants_global(body).contains(r) {
                path.push(format!("mu {var}"));
                let inner = project_at(body, r, path);
                path.pop();
                match inner {
                    Proj::Defined(t) => Proj::Defined(SessionType::Rec {
                        var: var.clone(),
                        body: Box::new(t),
                    }),
                    u => u,
                }
            } else {
                Proj::Defined(SessionType::End)
            }
        }
        GlobalType::Comm { from, to, branches } | GlobalType::CkComm { from, to, branches, .. } => {
            if r == from || r == to {
                let mut out = std::collections::BTreeMap::new();
                for (l, b) in branches {
                    path.push(l.as_str().into());
                    let cont = project_at(&b.cont, r, path);
                    path.pop();
                    match cont {
                        Proj::Defined(t) => {
                            out.insert(l.clone(), TBranch { sort: b.sort.clone(), cont: t });
                        }
                        u => return u,
                    }
                }
                let plain = if r == from {
                    SessionType::Union { to: to.clone(), branches: out }
                } else {
                    SessionType::Inter { from: from.clone(), branches: out }
                };
                match g.ck_name() {
                    None => Proj::Defined(plain),
                    Some(name) => Proj::Defined(match plain {
                        SessionType::Union { to, branches } => SessionType::CkUnion {
                            name: name.clone(),
                            to,
                            branches,
                        },
                        SessionType::Inter { from, branches } => SessionType::CkInter {
                            name: name.clone(),
                            from,
                            branches,
                        },
                        _ => unreachable!(),
                    }),
                }
            } else {
                let mut projs = Vec::new();
                for (l, b) in branches {
                    path.push(l.as_str().into());
                    let cont = project_at(&b.cont, r, path);
                    path.pop();
                    match cont {
                        Proj::Defined(t) => projs.push(t),
                        u => return u,
                    }
                }
                if projs.iter().all(|t| *t == SessionType::End) {
                    return Proj::Defined(SessionType::End);
                }
                let merged = match merge(&projs) {
                    Ok(t) => t,
                    Err(reason) => {
                        return Proj::Undefined { reason, path: render_path(path) };
                    }
                };
                match g.ck_name() {
                    None => Proj::Defined(merged),
                    Some(name) => {
                        if merged.ck_name().is_some() {
                            return Proj::Undefined {
                                reason: format!(
                                    "merge under checkpoint `{name}` is already checkpointed"
                                ),
                                path: render_path(path),
                            };
                        }
                        match merged {
                            SessionType::Inter { from, branches } => {
                                Proj::Defined(SessionType::CkInter {
                                    name: name.clone(),
                                    from,
                                    branches,
                                })
                            }
                            SessionType::Union { to, branches } => {
                                Proj::Defined(SessionType::CkUnion {
                                    name: name.clone(),
                                    to,
                                    branches,
                                })
                            }
                            _ => Proj::Undefined {
                                reason: format!(
                                    "merge under checkpoint `{name}` is not a choice type"
                                ),
                                path: render_path(path),
                            },
                        }
                    }
                }
            }
        }
    }
}

fn render_path(path: &[String]) -> String {
    if path.is_empty() {
        "<root>".into()
    } else {
        path.join("/")
    }
}

/// A global type is well formed when it projects onto every participant.
/// Returns the first failing participant with the reason and path.
pub fn well_formed(g: &GlobalType) -> Result<(), (Participant, String, String)> {
    for p in participants_global(g) {
        if let Proj::Undefined { reason, path } = project(g, &p) {
            return Err((p, reason, path));
        }
    }
    Ok(())
}
