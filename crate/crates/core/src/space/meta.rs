use serde::{Deserialize, Serialize};

use crate::space::expr::{SpaceExpr, SpaceNode};

/// Convexity and estimate parameters tracked through a space expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub p_convex: Option<f64>,
    pub lower_estimate_r: Option<f64>,
    pub symmetric: bool,
    pub spreading_basis: bool,
    /// Informational: the r with ℓ_r-saturation expected from the outermost
    /// SB node on the path.
    pub saturated_r: Option<f64>,
}

pub fn meta_of(expr: &SpaceExpr) -> SpaceMeta {
    node_meta(&expr.root)
}

pub fn node_meta(node: &SpaceNode) -> SpaceMeta {
    match node {
        SpaceNode::Lp { p } => SpaceMeta {
            p_convex: Some(*p),
            lower_estimate_r: Some(*p),
            symmetric: true,
            spreading_basis: true,
            saturated_r: Some(*p),
        },
        SpaceNode::Sb { child, r } => {
            let c = node_meta(child);
            SpaceMeta {
                p_convex: c.p_convex.filter(|&pc| *r >= pc),
                lower_estimate_r: Some(*r),
                symmetric: false,
                spreading_basis: false,
                saturated_r: Some(*r),
            }
        }
        SpaceNode::Davis { child, .. } => SpaceMeta {
            p_convex: None,
            lower_estimate_r: None,
            symmetric: true,
            spreading_basis: true,
            saturated_r: node_meta(child).saturated_r,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::parse;

    #[test]
    fn examples() {
        let m = meta_of(&parse("lp(2)").unwrap());
        assert_eq!((m.p_convex, m.lower_estimate_r, m.symmetric), (Some(2.0), Some(2.0), true));
        let m = meta_of(&parse("sb(lp(2), r=3)").unwrap());
        assert_eq!((m.p_convex, m.lower_estimate_r, m.symmetric), (Some(2.0), Some(3.0), false));
        let m = meta_of(&parse("sb(lp(3), r=2)").unwrap());
        assert_eq!(m.p_convex, None);
        let m = meta_of(&parse("davis(sb(lp(2), r=3), q=1.2, p=1.8, m=pow2)").unwrap());
        assert!(m.symmetric && m.p_convex.is_none() && m.lower_estimate_r.is_none());
        assert_eq!(m.saturated_r, Some(3.0));
    }
}
