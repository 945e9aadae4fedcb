//! Lift search: enumerate tuples `(e, g_1, …, g_k)` placing the points
//! `g_i · x_i` upstairs, pruning partial tuples that cannot be completed.
//!
//! Both the action-property checks and the isomorphism checker go through
//! [`for_each_lift`], so there is a single engine deciding whether a
//! configuration of orbits lifts.

use std::ops::ControlFlow;

use crate::action::IsometricAction;

/// Depth-first enumeration of lift tuples for `points = [x_0, …, x_k]`,
/// with `g_0 = e` fixed and elements tried in group order.
///
/// `viable(lifted)` is called whenever a new point is appended (the new
/// point is `lifted.last()`); returning `false` prunes the branch. For every
/// complete tuple `visit(elements, lifted)` is called, where `elements[0]`
/// is the identity. Enumeration stops when `visit` breaks.
pub fn for_each_lift<P, V>(action: &IsometricAction, points: &[usize], mut viable: P, mut visit: V)
where
    P: FnMut(&[usize]) -> bool,
    V: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
{
    if points.is_empty() {
        return;
    }
    let mut elements = vec![0usize];
    let mut lifted = vec![points[0]];
    let _ = descend(action, points, &mut elements, &mut lifted, &mut viable, &mut visit);
}

fn descend<P, V>(
    action: &IsometricAction,
    points: &[usize],
    elements: &mut Vec<usize>,
    lifted: &mut Vec<usize>,
    viable: &mut P,
    visit: &mut V,
) -> ControlFlow<()>
where
    P: FnMut(&[usize]) -> bool,
    V: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
{
    let depth = lifted.len();
    if depth == points.len() {
        return visit(elements, lifted);
    }
    for g in 0..action.order() {
        lifted.push(action.apply(g, points[depth]));
        elements.push(g);
        if viable(lifted) {
            descend(action, points, elements, lifted, viable, visit)?;
        }
        elements.pop();
        lifted.pop();
    }
    ControlFlow::Continue(())
}

/// Up to `limit` complete lift tuples (element indices, identity first).
pub fn collect_lifts<P>(action: &IsometricAction, points: &[usize], viable: P, limit: usize) -> Vec<Vec<usize>>
where
    P: FnMut(&[usize]) -> bool,
{
    let mut out = Vec::new();
    for_each_lift(action, points, viable, |elements, _| {
        out.push(elements.to_vec());
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}
