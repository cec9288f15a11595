use std::fmt;

use serde::{Deserialize, Serialize};

use crate::davis::{Schedule, Truncation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum SpaceNode {
    Lp {
        p: f64,
    },
    Sb {
        child: Box<SpaceNode>,
        r: f64,
    },
    Davis {
        child: Box<SpaceNode>,
        q: f64,
        p: f64,
        schedule: Schedule,
        truncation: Option<Truncation>,
    },
}

/// A parsed space expression. Equality is structural; the source text is
/// kept only for messages.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceExpr {
    pub root: SpaceNode,
    #[serde(skip)]
    pub source: Option<String>,
}

impl PartialEq for SpaceExpr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl SpaceExpr {
    pub fn new(root: SpaceNode) -> Self {
        Self { root, source: None }
    }

    pub fn lp(p: f64) -> Self {
        Self::new(SpaceNode::Lp { p })
    }

    pub fn sb(child: SpaceExpr, r: f64) -> Self {
        Self::new(SpaceNode::Sb {
            child: Box::new(child.root),
            r,
        })
    }

    pub fn davis(child: SpaceExpr, q: f64, p: f64, schedule: Schedule, truncation: Option<Truncation>) -> Self {
        Self::new(SpaceNode::Davis {
            child: Box::new(child.root),
            q,
            p,
            schedule,
            truncation,
        })
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

impl SpaceNode {
    pub fn depth(&self) -> usize {
        match self {
            SpaceNode::Lp { .. } => 1,
            SpaceNode::Sb { child, .. } | SpaceNode::Davis { child, .. } => 1 + child.depth(),
        }
    }

    pub fn child(&self) -> Option<&SpaceNode> {
        match self {
            SpaceNode::Lp { .. } => None,
            SpaceNode::Sb { child, .. } | SpaceNode::Davis { child, .. } => Some(child),
        }
    }

    /// Short label used in error paths.
    pub fn label(&self) -> String {
        match self {
            SpaceNode::Lp { p } => format!("lp({})", fmt_real(*p)),
            SpaceNode::Sb { r, .. } => format!("sb(_, r={})", fmt_real(*r)),
            SpaceNode::Davis { q, p, .. } => format!("davis(_, q={}, p={})", fmt_real(*q), fmt_real(*p)),
        }
    }
}

/// Shortest round-tripping decimal, switching to exponent form for small
/// magnitudes.
pub fn fmt_real(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl fmt::Display for SpaceNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceNode::Lp { p } => write!(f, "lp({})", fmt_real(*p)),
            SpaceNode::Sb { child, r } => write!(f, "sb({child}, r={})", fmt_real(*r)),
            SpaceNode::Davis {
                child,
                q,
                p,
                schedule,
                truncation,
            } => {
                write!(f, "davis({child}, q={}, p={}, m=", fmt_real(*q), fmt_real(*p))?;
                match schedule {
                    Schedule::Pow2 => f.write_str("pow2")?,
                    Schedule::Lin => f.write_str("lin")?,
                    Schedule::Explicit(ms) => {
                        let items: Vec<String> = ms.iter().map(|&m| fmt_real(m)).collect();
                        write!(f, "[{}]", items.join(", "))?;
                    }
                }
                match truncation {
                    None => {}
                    Some(Truncation::Fixed(k)) => write!(f, ", K={k}")?,
                    Some(Truncation::Eps(e)) => write!(f, ", eps={}", fmt_real(*e))?,
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Canonical text; `parse(&format(e))` equals `e`.
pub fn format(expr: &SpaceExpr) -> String {
    expr.to_string()
}
