//! The evaluation functor on closed crossingless webs: graded state spaces,
//! foam actions as exact matrices, closed foam evaluation, and the Lee
//! canonical basis. The relation suite in the tests below pins every sign
//! convention used by the foam evaluator.

use crate::foam::{Evaluator, FoamError, FoamStep, FoamWord, Theory};
use crate::matrix::SparseMatrix;
use crate::ring::Coeff;
use crate::web::{connectivity, Label, WebDiagram, WebError};

/// Graded state space of a closed crossingless web: one rank-2 tensor
/// factor per squeezed curve (free 1-circles and digon classes), rank 1 for
/// each 2-labeled circle.
#[derive(Clone)]
pub struct StateSpace {
    pub web: WebDiagram,
    pub theory: Theory,
    pub curves: usize,
    /// q-degree shift carried by twist markers on the web
    pub twist_shift: i64,
}

impl StateSpace {
    pub fn rank(&self) -> usize {
        1usize << self.curves
    }

    /// Basis words in lexicographic order (curve 0 most significant;
    /// `false` = unit generator, `true` = dot generator X).
    pub fn basis_word(&self, index: usize) -> Vec<bool> {
        (0..self.curves)
            .map(|j| (index >> (self.curves - 1 - j)) & 1 == 1)
            .collect()
    }

    pub fn index_of(&self, word: &[bool]) -> usize {
        word.iter().fold(0usize, |acc, b| (acc << 1) | usize::from(*b))
    }

    /// Intrinsic q-degree of a basis word (before twist shifts): +1 per
    /// unit factor, -1 per dot factor.
    pub fn intrinsic_qdeg(&self, index: usize) -> i64 {
        let w = self.basis_word(index);
        w.iter().map(|b| if *b { -1 } else { 1 }).sum()
    }

    pub fn qdeg(&self, index: usize) -> i64 {
        self.intrinsic_qdeg(index) + self.twist_shift
    }
}

/// q-degree shift contributed by the twist markers of a web.
pub fn twist_qshift(w: &WebDiagram) -> i64 {
    w.twists()
        .iter()
        .map(|(label, sign)| match label {
            Label::One => -(*sign as i64),
            Label::Two => -2 * (*sign as i64),
        })
        .sum()
}

/// Homological shift contributed by twist markers (2-labeled twists move
/// homological degree by two).
pub fn twist_tshift(w: &WebDiagram) -> i64 {
    w.twists()
        .iter()
        .map(|(label, sign)| match label {
            Label::One => 0,
            Label::Two => 2 * (*sign as i64),
        })
        .sum()
}

/// Build the state space of a closed crossingless web.
pub fn state_space(w: &WebDiagram, theory: Theory) -> Result<StateSpace, WebError> {
    if !w.is_closed() {
        return Err(WebError::OpenBoundary);
    }
    let conn = connectivity(w)?;
    Ok(StateSpace {
        web: w.clone(),
        theory,
        curves: conn.curve_count(),
        twist_shift: twist_qshift(w),
    })
}

/// Matrix of a foam word starting at `src`, together with the state space
/// of the (normalized) target web it lands on.
pub fn foam_matrix(
    word: &FoamWord,
    src: &StateSpace,
) -> Result<(StateSpace, SparseMatrix), FoamError> {
    let mut cols: Vec<Vec<(Vec<bool>, Coeff)>> = Vec::new();
    let mut target: Option<WebDiagram> = None;
    for col in 0..src.rank() {
        let w = src.basis_word(col);
        let mut ev = Evaluator::start_basis(src.theory, &src.web, &w)?;
        ev.apply_word(word)?;
        ev.normalize()?;
        match &target {
            None => target = Some(ev.web.clone()),
            Some(t) => {
                if *t != ev.web {
                    return Err(FoamError::TypeMismatch(
                        "foam word target web depends on the input state".into(),
                    ));
                }
            }
        }
        cols.push(ev.extract());
    }
    let tweb = target.expect("at least one basis vector");
    let tgt = StateSpace {
        theory: src.theory,
        curves: connectivity(&tweb).map_err(FoamError::Web)?.curve_count(),
        twist_shift: twist_qshift(&tweb),
        web: tweb,
    };
    let mut m = SparseMatrix::zero(tgt.rank(), src.rank());
    for (col, terms) in cols.into_iter().enumerate() {
        for (word_out, c) in terms {
            let row = tgt.index_of(&word_out);
            m.add_to(row, col, c);
        }
    }
    Ok((tgt, m))
}

/// Matrix of a foam word whose target is the given state space, checked.
pub fn apply_foam(
    word: &FoamWord,
    src: &StateSpace,
    tgt: &StateSpace,
) -> Result<SparseMatrix, FoamError> {
    let (found, m) = foam_matrix(word, src)?;
    let mut want = tgt.web.clone();
    want.rows.retain(|r| !r.is_empty());
    if found.web != want {
        return Err(FoamError::TypeMismatch(format!(
            "foam word ends at a different web than the declared target:\n{}\nvs\n{}",
            crate::web::print_diagram(&found.web),
            crate::web::print_diagram(&want),
        )));
    }
    Ok(m)
}

/// Evaluate a closed foam word (empty web to empty web) to a scalar.
pub fn evaluate_closed_foam(word: &FoamWord, theory: Theory) -> Result<Coeff, FoamError> {
    let mut ev = Evaluator::start_empty(theory);
    ev.apply_word(word)?;
    ev.scalar()
        .ok_or_else(|| FoamError::TypeMismatch("foam word is not closed".into()))
}

/// The Lee canonical basis: all sign words of idempotents over the curves.
/// Returned as the change-of-basis matrix from the canonical (1, X) basis
/// to the (p+, p-) word basis, together with the sign words.
pub fn lee_canonical_generators(space: &StateSpace) -> (Vec<Vec<bool>>, SparseMatrix) {
    // p+ = (1 + X)/2, p- = (1 - X)/2 per factor; sign word w maps to the
    // product of idempotents. Expressed in the (1, X) basis:
    // column for sign word s has entry 1/2^n * prod(signs chosen)
    let n = space.curves;
    let rank = space.rank();
    let mut m = SparseMatrix::zero(rank, rank);
    let words: Vec<Vec<bool>> = (0..rank).map(|i| space.basis_word(i)).collect();
    for (col, sw) in words.iter().enumerate() {
        // sign word: false = p+, true = p-
        for (row, bw) in words.iter().enumerate() {
            // coefficient of basis monomial bw in prod p_{s_j}
            let mut c = Coeff::one();
            for j in 0..n {
                let half = Coeff::from_frac(1, 2);
                let sgn = if sw[j] && bw[j] {
                    // p-: (1 - X)/2, X-component = -1/2
                    -half
                } else if sw[j] && !bw[j] {
                    half
                } else {
                    // p+
                    half
                };
                c *= sgn;
            }
            m.add_to(row, col, c);
        }
    }
    (words, m)
}

/// Convenience constructors for closed webs used across the test corpus.
pub mod webs {
    use crate::web::{parse_diagram, WebDiagram};

    pub fn circle() -> WebDiagram {
        parse_diagram("boundary: - ; -\ncup(1)\ncap(1)\n").unwrap()
    }
    pub fn circle_cw() -> WebDiagram {
        parse_diagram("boundary: - ; -\ncup(1,r)\ncap(1,r)\n").unwrap()
    }
    pub fn two_circle() -> WebDiagram {
        parse_diagram("boundary: - ; -\ncup(2)\ncap(2)\n").unwrap()
    }
    pub fn two_disjoint_circles() -> WebDiagram {
        parse_diagram("boundary: - ; -\ncup(1)\nid(1,u) id(1,d) cup(1)\nid(1,u) id(1,d) cap(1)\ncap(1)\n")
            .unwrap()
    }
    pub fn nested_circles() -> WebDiagram {
        parse_diagram(
            "boundary: - ; -\ncup(1)\nid(1,u) cup(1) id(1,d)\nid(1,u) cap(1) id(1,d)\ncap(1)\n",
        )
        .unwrap()
    }
    pub fn theta() -> WebDiagram {
        parse_diagram("boundary: - ; -\ncup(2)\nsplit(u) id(2,d)\nmerge(u) id(2,d)\ncap(2)\n").unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::webs::*;
    use super::*;
    use crate::foam::FoamStep as F;
    use crate::web::print_diagram;

    fn eval_closed(theory: Theory, steps: Vec<FoamStep>) -> Coeff {
        evaluate_closed_foam(&FoamWord::new(steps), theory).unwrap()
    }

    /// Both words must act identically (after the stated scalings) as
    /// operators out of `web`, landing on the same target web.
    fn assert_words_equal(
        theory: Theory,
        web: &WebDiagram,
        lhs: Vec<FoamStep>,
        lhs_scale: i64,
        rhs: Vec<FoamStep>,
        rhs_scale: i64,
    ) {
        let space = state_space(web, theory).unwrap();
        let (t1, m1) = foam_matrix(&FoamWord::new(lhs), &space).unwrap();
        let (t2, m2) = foam_matrix(&FoamWord::new(rhs), &space).unwrap();
        assert_eq!(
            t1.web,
            t2.web,
            "targets differ:\n{}\nvs\n{}",
            print_diagram(&t1.web),
            print_diagram(&t2.web)
        );
        assert_eq!(
            m1.scale(&Coeff::from_int(lhs_scale)),
            m2.scale(&Coeff::from_int(rhs_scale)),
            "operators differ"
        );
    }

    /// lhs as an operator equals a sum of scaled words.
    fn assert_word_is_sum(
        theory: Theory,
        web: &WebDiagram,
        lhs: Vec<FoamStep>,
        rhs: Vec<(i64, Vec<FoamStep>)>,
    ) {
        let space = state_space(web, theory).unwrap();
        let (t1, m1) = foam_matrix(&FoamWord::new(lhs), &space).unwrap();
        let mut acc: Option<SparseMatrix> = None;
        for (k, w) in rhs {
            let (t2, m2) = foam_matrix(&FoamWord::new(w), &space).unwrap();
            assert_eq!(t1.web, t2.web, "summand target differs");
            let scaled = m2.scale(&Coeff::from_int(k));
            acc = Some(match acc {
                None => scaled,
                Some(a) => a.add(&scaled),
            });
        }
        assert_eq!(m1, acc.unwrap());
    }

    // ---- relation suite: plain theory (sl2closedfoam .. sl2sq2) -----------

    #[test]
    fn sphere_relations() {
        let v = eval_closed(
            Theory::Plain,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::zero(), "undotted sphere");
        let v = eval_closed(
            Theory::Plain,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Dot { level: 1, pos: 0 },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::one(), "dotted sphere");
        let v = eval_closed(
            Theory::Plain,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Dot { level: 1, pos: 0 },
                F::Dot { level: 1, pos: 0 },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::zero(), "doubly dotted sphere (plain)");
    }

    #[test]
    fn neck_cutting_on_circle() {
        // id = [dot; death; birth] + [death; birth; dot]
        assert_word_is_sum(
            Theory::Plain,
            &circle(),
            vec![],
            vec![
                (
                    1,
                    vec![
                        F::Dot { level: 1, pos: 0 },
                        F::Death { level: 1, pos: 0 },
                        F::Birth { row: 0, pos: 0, label: Label::One },
                    ],
                ),
                (
                    1,
                    vec![
                        F::Death { level: 1, pos: 0 },
                        F::Birth { row: 0, pos: 0, label: Label::One },
                        F::Dot { level: 1, pos: 0 },
                    ],
                ),
            ],
        );
    }

    #[test]
    fn handle_is_twice_a_dot() {
        // split the circle and rejoin: equals multiplication by two dots
        let w = two_disjoint_circles();
        // join the two circles (antiparallel pair at level 2, positions 1,2),
        // then resplit at the same spot, then rejoin: net = join . handle
        let join = vec![F::Saddle { row: 2, pos: 1 }];
        let mut handle_then_join = vec![
            F::Saddle { row: 2, pos: 1 }, // join
            F::Saddle { row: 3, pos: 1 }, // resplit (new rows shifted)
            F::Saddle { row: 3, pos: 1 }, // rejoin
        ];
        let mut join_then_dot = join.clone();
        join_then_dot.push(F::Dot { level: 2, pos: 0 });
        // handle = 2 dots: [join; split; join] = 2 [join; dot]
        assert_words_equal(
            Theory::Plain,
            &w,
            std::mem::take(&mut handle_then_join),
            1,
            join_then_dot,
            2,
        );
    }

    #[test]
    fn two_labeled_sphere_and_tube() {
        let v = eval_closed(
            Theory::Plain,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::Two },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::from_int(-1), "2-sphere");
        // 2-labeled neck cutting: id = -(death; birth) on a 2-circle
        assert_words_equal(
            Theory::Plain,
            &two_circle(),
            vec![],
            1,
            vec![
                F::Death { level: 1, pos: 0 },
                F::Birth { row: 0, pos: 0, label: Label::Two },
            ],
            -1,
        );
    }

    #[test]
    fn theta_foam_values() {
        let theta_foam = |alpha: usize, beta: usize| -> Coeff {
            let mut steps = vec![
                F::Birth { row: 0, pos: 0, label: Label::Two },
                F::DigonBirth { row: 1, pos: 0 },
            ];
            for _ in 0..alpha {
                steps.push(F::Dot { level: 2, pos: 0 });
            }
            for _ in 0..beta {
                steps.push(F::Dot { level: 2, pos: 1 });
            }
            steps.push(F::DigonDeath { row: 1 });
            steps.push(F::Death { level: 1, pos: 0 });
            eval_closed(Theory::Plain, steps)
        };
        assert_eq!(theta_foam(1, 0), Coeff::one());
        assert_eq!(theta_foam(0, 1), Coeff::from_int(-1));
        assert_eq!(theta_foam(0, 0), Coeff::zero());
        assert_eq!(theta_foam(1, 1), Coeff::zero());
    }

    #[test]
    fn bubble_blister_relations() {
        // sl2bubble11nodot / sl2bubble11dot on the 2-sphere
        let blister = |dots_left: usize, dots_right: usize| {
            let mut steps = vec![
                F::Birth { row: 0, pos: 0, label: Label::Two },
                F::DigonBirth { row: 1, pos: 0 },
            ];
            for _ in 0..dots_left {
                steps.push(F::Dot { level: 2, pos: 0 });
            }
            for _ in 0..dots_right {
                steps.push(F::Dot { level: 2, pos: 1 });
            }
            steps.push(F::DigonDeath { row: 1 });
            steps.push(F::Death { level: 1, pos: 0 });
            eval_closed(Theory::Plain, steps)
        };
        assert_eq!(blister(0, 0), Coeff::zero());
        assert_eq!(blister(1, 0), Coeff::one());
        assert_eq!(blister(0, 1), Coeff::from_int(-1));
    }

    #[test]
    fn bubble12_on_a_circle() {
        // (1,2)-bubble blister on a 1-sheet: opposite signs for the two
        // planar positions of the 2-edge (sl2bubble12)
        let blister = |two_left: bool| {
            eval_closed(
                Theory::Plain,
                vec![
                    F::Birth { row: 0, pos: 0, label: Label::One },
                    F::BubbleBirth { row: 1, pos: 0, two_left, merge_first: true },
                    F::BubbleDeath { row: 1 },
                    F::Dot { level: 1, pos: 0 },
                    F::Death { level: 1, pos: 0 },
                ],
            )
        };
        let a = blister(true);
        let b = blister(false);
        assert_eq!(a, Coeff::one());
        assert_eq!(b, Coeff::from_int(-1));
    }

    #[test]
    fn fig5_bubble_collapse_is_invertible() {
        // death then rebirth of a (1,2)-bubble returns the identity up to
        // the relation's sign; both signs occur (sl2Fig5Blanchet_1)
        for two_left in [true, false] {
            let w = circle();
            let space = state_space(&w, Theory::Plain).unwrap();
            let word = FoamWord::new(vec![
                F::BubbleBirth { row: 1, pos: 0, two_left, merge_first: true },
                F::BubbleDeath { row: 1 },
                F::BubbleBirth { row: 1, pos: 0, two_left, merge_first: true },
                F::BubbleDeath { row: 1 },
            ]);
            let (_, m) = foam_matrix(&word, &space).unwrap();
            assert_eq!(m, SparseMatrix::identity(space.rank()), "two_left={two_left}");
        }
    }

    #[test]
    fn nh_relation_on_theta() {
        // id_D = [death; birth; dot_R] - [dot_L; death; birth]
        assert_word_is_sum(
            Theory::Plain,
            &theta(),
            vec![],
            vec![
                (
                    1,
                    vec![
                        F::DigonDeath { row: 1 },
                        F::DigonBirth { row: 1, pos: 0 },
                        F::Dot { level: 2, pos: 1 },
                    ],
                ),
                (
                    -1,
                    vec![
                        F::Dot { level: 2, pos: 0 },
                        F::DigonDeath { row: 1 },
                        F::DigonBirth { row: 1, pos: 0 },
                    ],
                ),
            ],
        );
    }

    #[test]
    fn tube_relations() {
        // sl2Tube_1: [to2_0; from2_0] = -(death; birth) on a circle
        assert_words_equal(
            Theory::Plain,
            &circle(),
            vec![
                F::ConvertTo2 { level: 1, pos: 0, beta: 0 },
                F::ConvertFrom2 { level: 1, pos: 0, beta: 0 },
            ],
            1,
            vec![
                F::Death { level: 1, pos: 0 },
                F::Birth { row: 0, pos: 0, label: Label::One },
            ],
            -1,
        );
        // sl2Tube_2: [membrane2; to2_0] = -(death; 2-birth)
        assert_words_equal(
            Theory::Plain,
            &circle(),
            vec![
                F::Membrane2 { level: 1, pos: 0 },
                F::ConvertTo2 { level: 1, pos: 0, beta: 0 },
            ],
            1,
            vec![
                F::Death { level: 1, pos: 0 },
                F::Birth { row: 0, pos: 0, label: Label::Two },
            ],
            -1,
        );
    }

    #[test]
    fn theta_values_via_conversion_events() {
        let theta_conv = |alpha: usize, beta: u8| {
            let mut steps = vec![F::Birth { row: 0, pos: 0, label: Label::One }];
            for _ in 0..alpha {
                steps.push(F::Dot { level: 1, pos: 0 });
            }
            steps.push(F::ConvertTo2 { level: 1, pos: 0, beta });
            steps.push(F::Death { level: 1, pos: 0 });
            eval_closed(Theory::Plain, steps)
        };
        assert_eq!(theta_conv(1, 0), Coeff::one());
        assert_eq!(theta_conv(0, 1), Coeff::from_int(-1));
        assert_eq!(theta_conv(0, 0), Coeff::zero());
        assert_eq!(theta_conv(1, 1), Coeff::zero());
    }

    #[test]
    fn square_relations() {
        // sl2sq1 / sl2sq2: moving the collapsed (1,2)-bigon across the
        // square costs a sign
        let w = circle();
        let space = state_space(&w, Theory::Plain).unwrap();
        for left_first in [true, false] {
            let word = FoamWord::new(vec![
                F::BubbleBirth { row: 1, pos: 0, two_left: left_first, merge_first: true },
                F::BubbleDeath { row: 1 },
                F::BubbleBirth { row: 1, pos: 0, two_left: !left_first, merge_first: true },
                F::BubbleDeath { row: 1 },
            ]);
            let (_, m) = foam_matrix(&word, &space).unwrap();
            assert_eq!(
                m,
                SparseMatrix::identity(space.rank()).neg(),
                "square relation, left_first={left_first}"
            );
        }
    }

    // ---- relation suite: deformed (deformedbb1 .. deformedsl2NH_enh) -------

    #[test]
    fn deformed_sphere_idempotents() {
        for (plus, expect) in [(true, Coeff::from_frac(1, 2)), (false, Coeff::from_frac(-1, 2))] {
            let v = eval_closed(
                Theory::Deformed,
                vec![
                    F::Birth { row: 0, pos: 0, label: Label::One },
                    F::Idempotent { level: 1, pos: 0, plus },
                    F::Death { level: 1, pos: 0 },
                ],
            );
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn deformed_bubbles_bb1_bb2() {
        // deformedbb1 (up-flowing strand): [bubble, p+ on the enclosed arc]
        // = [p- on the sheet]; [bubble, p-] = [p+]
        for (arc_plus, sheet_plus) in [(true, false), (false, true)] {
            assert_words_equal(
                Theory::Deformed,
                &circle(),
                vec![
                    F::BubbleBirth { row: 1, pos: 0, two_left: true, merge_first: true },
                    F::Idempotent { level: 2, pos: 1, plus: arc_plus },
                    F::BubbleDeath { row: 1 },
                ],
                1,
                vec![F::Idempotent { level: 1, pos: 0, plus: sheet_plus }],
                1,
            );
        }
        // deformedbb2 (down-flowing strand): the same with a minus
        for (arc_plus, sheet_plus) in [(true, false), (false, true)] {
            assert_words_equal(
                Theory::Deformed,
                &circle_cw(),
                vec![
                    F::BubbleBirth { row: 1, pos: 0, two_left: true, merge_first: true },
                    F::Idempotent { level: 2, pos: 1, plus: arc_plus },
                    F::BubbleDeath { row: 1 },
                ],
                1,
                vec![F::Idempotent { level: 1, pos: 0, plus: sheet_plus }],
                -1,
            );
        }
    }

    #[test]
    fn deformed_cylinder() {
        // [tube with p+] = 2 [p+ cap then p+ cup]; p- version gives -2
        for (plus, scale) in [(true, 2), (false, -2)] {
            assert_words_equal(
                Theory::Deformed,
                &circle(),
                vec![F::Idempotent { level: 1, pos: 0, plus }],
                1,
                vec![
                    F::Idempotent { level: 1, pos: 0, plus },
                    F::Death { level: 1, pos: 0 },
                    F::Birth { row: 0, pos: 0, label: Label::One },
                    F::Idempotent { level: 1, pos: 0, plus },
                ],
                scale,
            );
        }
    }

    #[test]
    fn deformed_bb3() {
        let blister = |plus: bool| {
            eval_closed(
                Theory::Deformed,
                vec![
                    F::Birth { row: 0, pos: 0, label: Label::Two },
                    F::DigonBirth { row: 1, pos: 0 },
                    F::Idempotent { level: 2, pos: 0, plus },
                    F::DigonDeath { row: 1 },
                    F::Death { level: 1, pos: 0 },
                ],
            )
        };
        // on the closed 2-sphere the cap contributes its -1:
        // -(1/2)(-1) = 1/2 and (1/2)(-1) = -1/2
        assert_eq!(blister(true), Coeff::from_frac(1, 2));
        assert_eq!(blister(false), Coeff::from_frac(-1, 2));
    }

    #[test]
    fn deformed_sphere_values() {
        // deformedsphere is the idempotent sphere; dot squared = 1 check
        let v = eval_closed(
            Theory::Deformed,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Dot { level: 1, pos: 0 },
                F::Dot { level: 1, pos: 0 },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::zero(), "two dots = unit, sphere undotted");
        let v = eval_closed(
            Theory::Deformed,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Dot { level: 1, pos: 0 },
                F::Dot { level: 1, pos: 0 },
                F::Dot { level: 1, pos: 0 },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::one(), "three dots");
    }

    #[test]
    fn deformed_sheeted_cylinder() {
        // nested p+/p- tubes fused through a 2-ring = +/-2 x decorated id
        let w = nested_circles();
        for outer_plus in [true, false] {
            let decorate = |steps: &mut Vec<FoamStep>| {
                steps.push(F::Idempotent { level: 2, pos: 0, plus: outer_plus });
                steps.push(F::Idempotent { level: 2, pos: 1, plus: !outer_plus });
            };
            let mut lhs = Vec::new();
            decorate(&mut lhs);
            lhs.push(F::Zip { row: 2, pos: 0, flag: false });
            lhs.push(F::DigonDeath { row: 2 });
            lhs.push(F::DigonBirth { row: 2, pos: 0 });
            lhs.push(F::Unzip { row: 2, flag: false });
            let mut rhs = Vec::new();
            decorate(&mut rhs);
            assert_words_equal(
                Theory::Deformed,
                &w,
                lhs,
                1,
                rhs,
                if outer_plus { 2 } else { -2 },
            );
        }
    }

    #[test]
    fn deformed_nh() {
        // deformedsl2NH_enh: [p+ at L; death; birth; p- at R] = -2 x
        // [p+ at L; p- at R] on the digon factor
        assert_words_equal(
            Theory::Deformed,
            &theta(),
            vec![
                F::Idempotent { level: 2, pos: 0, plus: true },
                F::DigonDeath { row: 1 },
                F::DigonBirth { row: 1, pos: 0 },
                F::Idempotent { level: 2, pos: 1, plus: false },
            ],
            1,
            vec![
                F::Idempotent { level: 2, pos: 0, plus: true },
                F::Idempotent { level: 2, pos: 1, plus: false },
            ],
            -2,
        );
    }

    // ---- state space shape --------------------------------------------------

    #[test]
    fn ranks_and_degrees() {
        let s = state_space(&circle(), Theory::Plain).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.qdeg(0), 1);
        assert_eq!(s.qdeg(1), -1);
        let s2 = state_space(&two_circle(), Theory::Plain).unwrap();
        assert_eq!(s2.rank(), 1);
        assert_eq!(s2.qdeg(0), 0);
        let sn = state_space(&nested_circles(), Theory::Plain).unwrap();
        assert_eq!(sn.rank(), 4);
        let degs: Vec<i64> = (0..4).map(|i| sn.qdeg(i)).collect();
        assert_eq!(degs, vec![2, 0, 0, -2]);
        let st = state_space(&theta(), Theory::Plain).unwrap();
        assert_eq!(st.rank(), 2);
    }

    #[test]
    fn foam_action_is_functorial() {
        let w = two_disjoint_circles();
        let space = state_space(&w, Theory::Plain).unwrap();
        let g = FoamWord::new(vec![F::Dot { level: 2, pos: 0 }]);
        let f = FoamWord::new(vec![F::Dot { level: 2, pos: 2 }]);
        let (_, gm) = foam_matrix(&g, &space).unwrap();
        let (_, fm) = foam_matrix(&f, &space).unwrap();
        let mut both = g.steps.clone();
        both.extend(f.steps.clone());
        let (_, fg) = foam_matrix(&FoamWord::new(both), &space).unwrap();
        assert_eq!(fg, fm.mul(&gm));
    }

    #[test]
    fn lee_pairing() {
        let v = eval_closed(
            Theory::Deformed,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Idempotent { level: 1, pos: 0, plus: true },
                F::Idempotent { level: 1, pos: 0, plus: true },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::from_frac(1, 2), "<p+, p+> = 1/2");
        let v = eval_closed(
            Theory::Deformed,
            vec![
                F::Birth { row: 0, pos: 0, label: Label::One },
                F::Idempotent { level: 1, pos: 0, plus: true },
                F::Idempotent { level: 1, pos: 0, plus: false },
                F::Death { level: 1, pos: 0 },
            ],
        );
        assert_eq!(v, Coeff::zero(), "<p+, p-> = 0");
    }

    #[test]
    fn lee_canonical_change_of_basis() {
        let s = state_space(&nested_circles(), Theory::Deformed).unwrap();
        let (words, m) = lee_canonical_generators(&s);
        assert_eq!(words.len(), 4);
        // the change of basis is invertible over Z[1/2]
        assert_eq!(m.rank_rational(), 4);
    }
}
