use std::collections::HashMap;

use super::{Series, SeriesError};
use crate::trees::{Decoration, TreePoly};

/// Evaluates `F(X)` in the forest algebra, keeping forests of weight at most `bound`.
///
/// `images[d]` is the element substituted for `h_d`; none may have a weight-0 part.
pub fn substitute(f: &Series, images: &[TreePoly], bound: u32) -> Result<TreePoly, SeriesError> {
    for (i, x) in images.iter().enumerate() {
        if x.iter()
            .any(|(forest, c)| forest.weight() == 0 && !num_traits::Zero::is_zero(c))
        {
            return Err(SeriesError::WeightZeroPart(i as u32));
        }
    }
    let mut powers: HashMap<(Decoration, u32), TreePoly> = HashMap::new();
    let mut out = TreePoly::zero();
    for (m, c) in f.terms() {
        if m.degree() > bound {
            break;
        }
        let mut term = TreePoly::one().scale(c);
        for &(d, e) in m.entries() {
            let p = power(&mut powers, images, d, e, bound);
            term = term.mul_bounded(&p, bound);
            if term.is_zero() {
                break;
            }
        }
        out.add_assign(&term);
    }
    Ok(out)
}

fn power(
    cache: &mut HashMap<(Decoration, u32), TreePoly>,
    images: &[TreePoly],
    d: Decoration,
    e: u32,
    bound: u32,
) -> TreePoly {
    if let Some(p) = cache.get(&(d, e)) {
        return p.clone();
    }
    let base = images.get(d.index()).cloned().unwrap_or_else(TreePoly::zero);
    let p = if e == 0 {
        TreePoly::one()
    } else if e == 1 {
        base.truncate(bound)
    } else {
        power(cache, images, d, e - 1, bound).mul_bounded(&base, bound)
    };
    cache.insert((d, e), p.clone());
    p
}
