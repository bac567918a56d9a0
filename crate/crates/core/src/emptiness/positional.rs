//! Linear encodings of `an+b` membership and its negation.

use super::ila::{Cmp, Formula, Problem, Term};

/// `exists k >= 0. x = a*k + b`, with `k` declared as `{prefix}_k`.
pub fn matches_anb(p: &mut Problem, prefix: &str, x: Term, a: i64, b: i64) -> Formula {
    if a == 0 {
        return Formula::eq(x, Term::Const(b));
    }
    let k = p.int_in(&format!("{prefix}_k"), Some(0), None);
    Formula::eq(x, k.scale(a).plus(b))
}

/// `not exists k >= 0. x = a*k + b`, written without negating an existential.
///
/// For `a = 0` this is `x != b`. For `a > 0`, `x` lies below `b` or strictly
/// between two members of the progression; symmetrically for `a < 0`.
pub fn nomatch(p: &mut Problem, prefix: &str, x: Term, a: i64, b: i64) -> Formula {
    if a == 0 {
        return Formula::cmp(Cmp::Ne, x, Term::Const(b));
    }
    let m = a.abs();
    let outside = if a > 0 {
        Formula::cmp(Cmp::Lt, x.clone(), Term::Const(b))
    } else {
        Formula::cmp(Cmp::Gt, x.clone(), Term::Const(b))
    };
    if m == 1 {
        return outside;
    }
    let k = p.int_in(&format!("{prefix}_k"), Some(0), None);
    let r = p.int_in(&format!("{prefix}_r"), Some(1), Some(m - 1));
    let between = if a > 0 {
        Formula::eq(x, k.scale(m).add(r).plus(b))
    } else {
        Formula::eq(x, k.scale(-m).sub(r).plus(b))
    };
    Formula::or(vec![outside, between])
}
