//! Plots of the belief walk a conversation induces.
//!
//! Each point is a pair `(q_B(x-type), q_A(y-type))` at some node; arrows
//! carry the probability of the step. Steps where nothing is learned (a
//! silent move) are folded into their parent.

use std::fmt::Write;

use parley::conversation::{history_label, DimartingaleTrace};
use parley::Rational;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPoint {
    pub label: String,
    pub q_b: Rational,
    pub q_a: Rational,
    pub parent: Option<usize>,
    /// Probability of reaching this point from its parent.
    pub edge_prob: Rational,
}

/// Collapses the trace to the points actually visited. `bob_type` and
/// `alice_type` pick the coordinates plotted for binary type spaces.
pub fn belief_walk(trace: &DimartingaleTrace, bob_type: usize, alice_type: usize) -> Vec<WalkPoint> {
    let mut drawn: Vec<usize> = Vec::with_capacity(trace.nodes.len());
    let mut points: Vec<WalkPoint> = Vec::new();
    for n in &trace.nodes {
        if let Some(p) = n.parent {
            let parent = &trace.nodes[p];
            if n.edge_prob.is_one() && n.q_a == parent.q_a && n.q_b == parent.q_b {
                drawn.push(drawn[p]);
                continue;
            }
        }
        drawn.push(points.len());
        points.push(WalkPoint {
            label: history_label(&n.history),
            q_b: n.q_b.get(bob_type).clone(),
            q_a: n.q_a.get(alice_type).clone(),
            parent: n.parent.map(|p| drawn[p]),
            edge_prob: n.edge_prob.clone(),
        });
    }
    points
}

fn px(v: &Rational) -> f64 {
    MARGIN + v.to_f64() * (SIZE - 2.0 * MARGIN)
}

fn py(v: &Rational) -> f64 {
    SIZE - MARGIN - v.to_f64() * (SIZE - 2.0 * MARGIN)
}

pub fn render(points: &[WalkPoint], x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let lo = MARGIN;
    let hi = SIZE - MARGIN;
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    s.push_str(concat!(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" orient="auto">"#,
        r#"<path d="M0,0 L10,5 L0,10 z"/></marker></defs>"#,
        "\n"
    ));
    writeln!(
        s,
        r#"<rect x="{lo}" y="{lo}" width="{w}" height="{w}" fill="none" stroke="black"/>"#,
        w = hi - lo
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        escape(y_label)
    )
    .unwrap();
    for p in points {
        if let Some(parent) = p.parent {
            let q = &points[parent];
            let (x1, y1, x2, y2) = (px(&q.q_b), py(&q.q_a), px(&p.q_b), py(&p.q_a));
            writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="gray" marker-end="url(#arrow)"/>"#
            )
            .unwrap();
            writeln!(
                s,
                r#"<text class="prob" x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                (x1 + x2) / 2.0 + 4.0,
                (y1 + y2) / 2.0 - 4.0,
                p.edge_prob
            )
            .unwrap();
        }
    }
    for p in points {
        writeln!(
            s,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4"><title>{} ({}, {})</title></circle>"#,
            px(&p.q_b),
            py(&p.q_a),
            escape(&p.label),
            p.q_b,
            p.q_a
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use parley::conversation::DEFAULT_TRANSCRIPT_BUDGET;
    use parley::fixtures::two_way_conversation;
    use parley::rat;
    use std::collections::BTreeSet;

    #[test]
    fn two_way_walk_skips_silent_moves() {
        let (c, pa, pb) = two_way_conversation();
        let trace = c.dimartingale_audit(&pa, &pb, DEFAULT_TRANSCRIPT_BUDGET).unwrap();
        let walk = belief_walk(&trace, 0, 0);
        assert_eq!(walk.len(), 9);
        let probs: BTreeSet<Rational> = walk
            .iter()
            .filter(|p| p.parent.is_some())
            .map(|p| p.edge_prob.clone())
            .collect();
        let expected: BTreeSet<Rational> = [rat(1, 2), rat(1, 3), rat(2, 3), rat(1, 4), rat(3, 4)]
            .into_iter()
            .collect();
        assert_eq!(probs, expected);
    }

    #[test]
    fn render_has_one_circle_per_point() {
        let (c, pa, pb) = two_way_conversation();
        let trace = c.dimartingale_audit(&pa, &pb, DEFAULT_TRANSCRIPT_BUDGET).unwrap();
        let svg = render(&belief_walk(&trace, 0, 0), "q_B", "q_A");
        assert_eq!(svg.matches("<circle").count(), 9);
        assert_eq!(svg.matches("<line").count(), 8);
    }
}
