use num_traits::Zero;

use crate::rational::{int, Q};
use crate::sdse::LambdaTable;
use crate::trees::Decoration;

/// Number of consecutive determined points a λ row needs before it is
/// accepted as affine.
pub const MIN_WINDOW: u32 = 3;

/// Level of a vertex as certified on the table's window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Level {
    /// Every row is affine for `n > level`: `λ_n^{(i,j)} = ã_j + b_j (n − 1)`.
    Finite {
        level: u32,
        slopes: Vec<Q>,
        intercepts: Vec<Q>,
    },
    /// Not affine even on the last `MIN_WINDOW` points.
    NoFinite,
    /// The table is too short to test any window; `required` is the
    /// smallest table length that would be.
    Undetermined { required: u32 },
}

impl Level {
    pub fn finite(&self) -> Option<u32> {
        match self {
            Level::Finite { level, .. } => Some(*level),
            _ => None,
        }
    }

    pub fn slope(&self, j: Decoration) -> Option<&Q> {
        match self {
            Level::Finite { slopes, .. } => slopes.get(j.index()),
            _ => None,
        }
    }

    pub fn intercept(&self, j: Decoration) -> Option<&Q> {
        match self {
            Level::Finite { intercepts, .. } => intercepts.get(j.index()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelAssignment {
    pub max_n: u32,
    pub levels: Vec<Level>,
}

impl LevelAssignment {
    pub fn get(&self, i: Decoration) -> &Level {
        &self.levels[i.index()]
    }

    pub fn all_finite(&self, vertices: &[Decoration]) -> bool {
        vertices.iter().all(|&v| self.get(v).finite().is_some())
    }

    pub fn none_finite(&self, vertices: &[Decoration]) -> bool {
        vertices.iter().all(|&v| *self.get(v) == Level::NoFinite)
    }
}

// slope and intercept of the points (n, y) if they lie on one line
fn affine_fit(points: &[(u32, &Q)]) -> Option<(Q, Q)> {
    let (&(n0, y0), rest) = points.split_first()?;
    let Some(&(n1, y1)) = rest.first() else {
        return Some((Q::zero(), y0.clone()));
    };
    let slope = (y1 - y0) / int(n1 as i64 - n0 as i64);
    let intercept = y0 - &slope * int(n0 as i64 - 1);
    for &(n, y) in &rest[1..] {
        if &intercept + &slope * int(n as i64 - 1) != *y {
            return None;
        }
    }
    Some((slope, intercept))
}

/// `level(i)` = least `M` such that every row `n ↦ λ_n^{(i,j)}` is affine on
/// `M < n ≤ max_n` with at least `MIN_WINDOW` determined points. Undetermined
/// (`⊥`) entries are skipped.
pub fn vertex_levels(table: &LambdaTable) -> LevelAssignment {
    let max_n = table.max_n();
    let k = table.num_indices();
    let levels = (0..k)
        .map(|i| vertex_level(table, Decoration(i as u32), k, max_n))
        .collect();
    LevelAssignment { max_n, levels }
}

fn vertex_level(table: &LambdaTable, i: Decoration, k: usize, max_n: u32) -> Level {
    let determined: Vec<u32> = (1..=max_n)
        .filter(|&n| (0..k).all(|j| table.value(i, Decoration(j as u32), n).is_some()))
        .collect();
    if (determined.len() as u32) < MIN_WINDOW {
        return Level::Undetermined {
            required: max_n + MIN_WINDOW - determined.len() as u32,
        };
    }
    for m in 0..max_n {
        let window: Vec<u32> = determined.iter().copied().filter(|&n| n > m).collect();
        if (window.len() as u32) < MIN_WINDOW {
            break;
        }
        let mut slopes = Vec::with_capacity(k);
        let mut intercepts = Vec::with_capacity(k);
        let ok = (0..k).all(|j| {
            let j = Decoration(j as u32);
            let points: Vec<(u32, &Q)> = window
                .iter()
                .map(|&n| (n, table.value(i, j, n).expect("determined")))
                .collect();
            match affine_fit(&points) {
                Some((b, a)) => {
                    slopes.push(b);
                    intercepts.push(a);
                    true
                }
                None => false,
            }
        });
        if ok {
            return Level::Finite {
                level: m,
                slopes,
                intercepts,
            };
        }
    }
    Level::NoFinite
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::sdse::{check_hopf, cycle, fundamental, FundamentalSpec, I1Vertex, J1Vertex, Lambda};

    #[test]
    fn self_loop_is_level_zero() {
        let t = LambdaTable::from_fn(1, 6, |_, _, n| int(2 * n as i64 - 1));
        let l = vertex_levels(&t);
        assert_eq!(
            l.levels[0],
            Level::Finite {
                level: 0,
                slopes: vec![int(2)],
                intercepts: vec![int(1)]
            }
        );
    }

    #[test]
    fn cycles_have_no_finite_level() {
        for n in 2..=5 {
            let s = cycle(n, 7).unwrap().build().unwrap();
            let v = check_hopf(&s, 7).unwrap();
            let l = vertex_levels(&v.table);
            assert!(l.none_finite(&s.indices()), "cycle {n}");
        }
    }

    #[test]
    fn short_tables_are_undetermined() {
        let t = LambdaTable::from_fn(1, 2, |_, _, _| int(1));
        assert_eq!(vertex_levels(&t).levels[0], Level::Undetermined { required: 3 });
        let mut t = LambdaTable::from_fn(1, 4, |_, _, _| int(1));
        t.insert(Decoration(0), Decoration(0), 2, Lambda::Undetermined);
        t.insert(Decoration(0), Decoration(0), 3, Lambda::Undetermined);
        assert_eq!(vertex_levels(&t).levels[0], Level::Undetermined { required: 5 });
    }

    #[test]
    fn fundamental_levels() {
        let spec = FundamentalSpec {
            i0: vec![int(2)],
            j0: 1,
            k0: 1,
            i1: vec![
                I1Vertex {
                    nu: int(3),
                    coeffs: vec![int(1), int(2), int(1)],
                },
                I1Vertex {
                    nu: int(1),
                    coeffs: vec![int(2), int(1), ratio(1, 2)],
                },
            ],
            j1: vec![J1Vertex {
                nu: int(2),
                i1_coeffs: vec![int(0), int(1)],
            }],
        };
        let s = fundamental(&spec, 6).unwrap().build().unwrap();
        let v = check_hopf(&s, 6).unwrap();
        let l = vertex_levels(&v.table);
        let levels: Vec<Option<u32>> = l.levels.iter().map(Level::finite).collect();
        assert_eq!(levels, vec![Some(0), Some(0), Some(0), Some(1), Some(0), Some(1)]);
        for i in s.indices() {
            for j in s.indices() {
                let (_, at, b) = spec.lambda_arrays(i, j);
                assert_eq!(l.get(i).slope(j), Some(&b));
                assert_eq!(l.get(i).intercept(j), Some(&at));
            }
        }
    }
}
