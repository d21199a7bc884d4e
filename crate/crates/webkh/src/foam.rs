//! Foam words and their action on state spaces.
//!
//! A foam between closed crossingless webs is encoded as a sequence of
//! localized generators, each editing the slice word and acting on the
//! squeezed-circle tensor factors. The action rules implement the Blanchet
//! gl(2) relations; the relation suite in `statespace` is the source of
//! truth for every sign here.

use crate::ring::Coeff;
use crate::web::{
    connectivity, Bend, Connectivity, Dir, Label, StrandType, Token, TurnSide, WebDiagram,
    WebError,
};
use std::collections::BTreeMap;
use thiserror::Error;

/// Plain Blanchet theory or the Lee deformation (dot squared = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    Plain,
    Deformed,
}

#[derive(Debug, Error)]
pub enum FoamError {
    #[error("web error: {0}")]
    Web(#[from] WebError),
    #[error("type mismatch applying foam generator: {0}")]
    TypeMismatch(String),
}

/// Localized foam generators. Row and position indices refer to the web the
/// generator is applied to (the web before the edit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoamStep {
    /// Birth of a free circle: inserts a [cup; cap] pair of rows at `row`,
    /// horizontally at strand position `pos`.
    Birth { row: usize, pos: usize, label: Label },
    /// Death of the free circle through the wire point `(level, pos)`.
    Death { level: usize, pos: usize },
    /// Dot on the 1-labeled strand through `(level, pos)`.
    Dot { level: usize, pos: usize },
    /// Deformed idempotent decoration p+/p- on the strand at `(level, pos)`.
    Idempotent { level: usize, pos: usize, plus: bool },
    /// Orientation-compatible 1- or 2-labeled saddle between strand
    /// positions `pos, pos+1`, spliced as [cap; cup] rows at `row`.
    Saddle { row: usize, pos: usize },
    /// Zip: replace two id-rows carrying coherently oriented 1-strands at
    /// `pos, pos+1` by [merge; split]. `flag` flips the seam orientation
    /// (an overall sign).
    Zip { row: usize, pos: usize, flag: bool },
    /// Unzip: replace the [merge; split] rows starting at `row` by id-rows.
    Unzip { row: usize, flag: bool },
    /// Digon creation on a 2-strand at `pos`: splice [split; merge] at `row`.
    DigonBirth { row: usize, pos: usize },
    /// Digon removal: delete the [split; merge] rows starting at `row`.
    DigonDeath { row: usize },
    /// Collapse of a (1,2)-bigon (bubble) spanning rows `row, row+1`,
    /// which must be a pair of bent vertices.
    BubbleDeath { row: usize },
    /// Inverse of `BubbleDeath`: create a bubble on the 1-strand at `pos`.
    BubbleBirth { row: usize, pos: usize, two_left: bool, merge_first: bool },
    /// Conversion of a free 1-circle into a 2-circle through a 1-labeled
    /// membrane disk carrying `beta` dots (0 or 1).
    ConvertTo2 { level: usize, pos: usize, beta: u8 },
    /// Conversion of a free 2-circle into a 1-circle, membrane above.
    ConvertFrom2 { level: usize, pos: usize, beta: u8 },
    /// A 2-labeled membrane disk spanning a free 1-circle; acts as the
    /// identity.
    Membrane2 { level: usize, pos: usize },
}

/// Foam word with source and target webs implied by the edit sequence.
#[derive(Debug, Clone, Default)]
pub struct FoamWord {
    pub steps: Vec<FoamStep>,
}

impl FoamWord {
    pub fn new(steps: Vec<FoamStep>) -> Self {
        FoamWord { steps }
    }
}

/// Stable identifier of a tensor factor inside an evaluator run.
pub type FactorId = u32;

/// Basis word: which factors carry the dot class X.
pub type BasisWord = BTreeMap<FactorId, bool>;

/// Sparse vector over basis words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateVec {
    pub terms: BTreeMap<BasisWord, Coeff>,
}

impl StateVec {
    pub fn scalar(c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(BTreeMap::new(), c);
        }
        StateVec { terms }
    }
    pub fn zero() -> Self {
        StateVec::default()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add_term(&mut self, w: BasisWord, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w).or_insert_with(Coeff::zero);
        *e += c;
        if e.is_zero() {
            let w2: Vec<BasisWord> = self
                .terms
                .iter()
                .filter(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in w2 {
                self.terms.remove(&k);
            }
        }
    }
    pub fn scale(&mut self, k: &Coeff) {
        if k.is_zero() {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v *= k.clone();
        }
    }
    pub fn add(&mut self, other: &StateVec) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), c.clone());
        }
    }
}

/// Running evaluation of a foam word: the current web, its squeezed-curve
/// factorization, and the state vector.
pub struct Evaluator {
    pub theory: Theory,
    pub web: WebDiagram,
    pub conn: Connectivity,
    /// curve index (canonical order in `conn`) -> factor id
    pub factor_of_curve: Vec<FactorId>,
    next_factor: FactorId,
    pub state: StateVec,
}

impl Evaluator {
    /// Start on the empty web with scalar state 1.
    pub fn start_empty(theory: Theory) -> Self {
        let web = WebDiagram::empty();
        let conn = connectivity(&web).expect("empty web");
        Evaluator {
            theory,
            web,
            conn,
            factor_of_curve: Vec::new(),
            next_factor: 0,
            state: StateVec::scalar(Coeff::one()),
        }
    }

    /// Start on a closed web with the given basis word (one bool per curve
    /// in canonical order; true = X).
    pub fn start_basis(theory: Theory, web: &WebDiagram, word: &[bool]) -> Result<Self, FoamError> {
        let conn = connectivity(web)?;
        assert_eq!(word.len(), conn.curve_count());
        let mut factor_of_curve = Vec::new();
        let mut basis = BTreeMap::new();
        for (i, x) in word.iter().enumerate() {
            factor_of_curve.push(i as FactorId);
            basis.insert(i as FactorId, *x);
        }
        let mut state = StateVec::zero();
        state.add_term(basis, Coeff::one());
        Ok(Evaluator {
            theory,
            web: web.clone(),
            conn,
            factor_of_curve,
            next_factor: word.len() as FactorId,
            state,
        })
    }

    fn fresh_factor(&mut self) -> FactorId {
        let f = self.next_factor;
        self.next_factor += 1;
        f
    }

    /// The scalar value, when the current web is empty.
    pub fn scalar(&self) -> Option<Coeff> {
        if !self.web.is_closed() || self.conn.curve_count() > 0 {
            return None;
        }
        if self.state.is_zero() {
            return Some(Coeff::zero());
        }
        self.state.terms.get(&BTreeMap::new()).cloned().or(Some(Coeff::zero()))
    }

    /// Extract the state as coefficients over canonical basis words of the
    /// current web (curves in canonical order).
    pub fn extract(&self) -> Vec<(Vec<bool>, Coeff)> {
        let n = self.conn.curve_count();
        let mut out = Vec::new();
        for (w, c) in &self.state.terms {
            let mut word = vec![false; n];
            for (curve, fid) in self.factor_of_curve.iter().enumerate() {
                word[curve] = w.get(fid).copied().unwrap_or(false);
            }
            out.push((word, c.clone()));
        }
        out
    }

    pub fn apply_word(&mut self, word: &FoamWord) -> Result<(), FoamError> {
        for s in &word.steps {
            self.apply(s)?;
        }
        Ok(())
    }

    /// Drop empty rows (which only occur at heights where the web is empty)
    /// and recompute connectivity. Curve order is unaffected because no
    /// curve crosses an empty interface.
    pub fn normalize(&mut self) -> Result<(), FoamError> {
        let rows: Vec<Vec<Token>> = self
            .web
            .rows
            .iter()
            .filter(|r| !r.is_empty())
            .cloned()
            .collect();
        let web = WebDiagram { bottom: self.web.bottom.clone(), rows };
        let conn = connectivity(&web)?;
        assert_eq!(conn.curve_count(), self.conn.curve_count());
        self.web = web;
        self.conn = conn;
        Ok(())
    }

    /// Apply one generator.
    pub fn apply(&mut self, step: &FoamStep) -> Result<(), FoamError> {
        match step {
            FoamStep::Dot { level, pos } => self.apply_dot(*level, *pos),
            FoamStep::Idempotent { level, pos, plus } => self.apply_idempotent(*level, *pos, *plus),
            FoamStep::Birth { row, pos, label } => self.apply_birth(*row, *pos, *label),
            FoamStep::Death { level, pos } => self.apply_death(*level, *pos),
            FoamStep::Saddle { row, pos } => self.apply_saddle(*row, *pos),
            FoamStep::Zip { row, pos, flag } => self.apply_zip(*row, *pos, *flag),
            FoamStep::Unzip { row, flag } => self.apply_unzip(*row, *flag),
            FoamStep::DigonBirth { row, pos } => self.apply_digon_birth(*row, *pos),
            FoamStep::DigonDeath { row } => self.apply_digon_death(*row),
            FoamStep::BubbleDeath { row } => self.apply_bubble(*row, None),
            FoamStep::BubbleBirth { row, pos, two_left, merge_first } => {
                self.apply_bubble(*row, Some((*pos, *two_left, *merge_first)))
            }
            FoamStep::ConvertTo2 { level, pos, beta } => self.apply_convert(*level, *pos, true, *beta),
            FoamStep::ConvertFrom2 { level, pos, beta } => {
                self.apply_convert(*level, *pos, false, *beta)
            }
            FoamStep::Membrane2 { .. } => Ok(()),
        }
    }

    /// Relabel the free circle through `(level, pos)` between labels 1 and 2
    /// and apply the conversion functional through a `beta`-dotted membrane.
    fn apply_convert(
        &mut self,
        level: usize,
        pos: usize,
        to_two: bool,
        beta: u8,
    ) -> Result<(), FoamError> {
        let conn = connectivity(&self.web)?;
        let comp = conn
            .component_of((level, pos))
            .ok_or_else(|| FoamError::TypeMismatch("convert point out of range".into()))?;
        let old_label = conn.strand[conn.index[&(level, pos)]].label;
        let want = if to_two { Label::One } else { Label::Two };
        if old_label != want {
            return Err(FoamError::TypeMismatch("convert on the wrong label".into()));
        }
        let new_label = if to_two { Label::Two } else { Label::One };
        // relabel every token of the component; it must be a free circle
        let mut rows = self.web.rows.clone();
        for (ri, row) in self.web.rows.iter().enumerate() {
            let mut pos_in = 0usize;
            let mut out = 0usize;
            for (ti, t) in row.iter().enumerate() {
                let a = t.arity_in();
                let this_comp = if a > 0 {
                    conn.component_of((ri, pos_in))
                } else {
                    conn.component_of((ri + 1, out))
                };
                if this_comp == Some(comp) {
                    rows[ri][ti] = match t {
                        Token::Id(s) => Token::Id(StrandType::new(new_label, s.dir)),
                        Token::Cup { side, .. } => Token::Cup { label: new_label, side: *side },
                        Token::Cap { side, .. } => Token::Cap { label: new_label, side: *side },
                        Token::Twist { dir, sign, .. } => {
                            Token::Twist { label: new_label, dir: *dir, sign: *sign }
                        }
                        _ => {
                            return Err(FoamError::TypeMismatch(
                                "convert of a non-circle component".into(),
                            ))
                        }
                    };
                }
                pos_in += a;
                out += t.arity_out();
            }
        }
        let new_web = WebDiagram { bottom: self.web.bottom.clone(), rows };
        let new_conn = connectivity(&new_web)?;
        let mut state = std::mem::take(&mut self.state);
        let n_new = new_conn.curve_count();
        if to_two {
            // the 1-circle's factor dies through the membrane functional:
            // beta = 0: X -> -1, 1 -> 0;  beta = 1: 1 -> +1, X -> 0 (plain)
            // or X -> +1 deformed (dot squared)
            let old_curve = conn
                .curve_of((level, pos))
                .ok_or_else(|| FoamError::TypeMismatch("convert: no curve".into()))?;
            let f = self.factor_of_curve[old_curve];
            let deformed = self.theory == Theory::Deformed;
            let mut ns = StateVec::zero();
            for (w, c) in &state.terms {
                let x = w.get(&f).copied().unwrap_or(false);
                let mut w2 = w.clone();
                w2.remove(&f);
                let coeff = match (beta, x) {
                    (0, true) => Some(-c.clone()),
                    (0, false) => None,
                    (1, false) => Some(c.clone()),
                    (1, true) => {
                        if deformed {
                            Some(-c.clone())
                        } else {
                            None
                        }
                    }
                    _ => return Err(FoamError::TypeMismatch("beta must be 0 or 1".into())),
                };
                if let Some(k) = coeff {
                    ns.add_term(w2, k);
                }
            }
            state = ns;
            // rebuild factor map: curves of new web = old minus the circle
            let mut map = Vec::new();
            for (ci, pts) in new_conn.curves.iter().enumerate() {
                let p = pts[0];
                let oc = conn
                    .curve_of(p)
                    .ok_or_else(|| FoamError::TypeMismatch("convert: curve mismatch".into()))?;
                map.push(self.factor_of_curve[oc]);
                let _ = ci;
            }
            self.factor_of_curve = map;
        } else {
            // a new 1-circle appears: unit (beta = 0) or -X (beta = 1)
            let mut map = vec![u32::MAX; n_new];
            let mut born = None;
            for (ci, pts) in new_conn.curves.iter().enumerate() {
                let p = pts[0];
                match conn.curve_of(p) {
                    Some(oc) => map[ci] = self.factor_of_curve[oc],
                    None => born = Some(ci),
                }
            }
            let bc = born.ok_or_else(|| FoamError::TypeMismatch("convert created no curve".into()))?;
            let f = self.fresh_factor();
            map[bc] = f;
            match beta {
                0 => {} // unit: factor in state 1
                1 => {
                    // 1 -> -X
                    let mut ns = StateVec::zero();
                    for (w, c) in &state.terms {
                        let mut w2 = w.clone();
                        w2.insert(f, true);
                        ns.add_term(w2, -c.clone());
                    }
                    state = ns;
                }
                _ => return Err(FoamError::TypeMismatch("beta must be 0 or 1".into())),
            }
            self.factor_of_curve = map;
        }
        self.web = new_web;
        self.conn = new_conn;
        self.state = state;
        Ok(())
    }

    // -- dots ---------------------------------------------------------------

    /// Facet sign of a dotted strand: +1 on left digon paths and free
    /// circles, -1 on right paths. See `dot_sign`.
    fn apply_dot(&mut self, level: usize, pos: usize) -> Result<(), FoamError> {
        let sign = dot_sign(&self.web, level, pos)?;
        let curve = self
            .conn
            .curve_of((level, pos))
            .ok_or_else(|| FoamError::TypeMismatch("dot on a 2-labeled strand".into()))?;
        let fid = self.factor_of_curve[curve];
        let deformed = self.theory == Theory::Deformed;
        let mut new = StateVec::zero();
        for (w, c) in &self.state.terms {
            let mut w2 = w.clone();
            let x = w.get(&fid).copied().unwrap_or(false);
            let mut coeff = c.clone();
            if sign < 0 {
                coeff = -coeff;
            }
            if !x {
                w2.insert(fid, true);
                new.add_term(w2, coeff);
            } else if deformed {
                w2.insert(fid, false);
                new.add_term(w2, coeff);
            }
            // plain theory: X * X = 0, term dropped
        }
        self.state = new;
        Ok(())
    }

    fn apply_idempotent(&mut self, level: usize, pos: usize, plus: bool) -> Result<(), FoamError> {
        if self.theory != Theory::Deformed {
            return Err(FoamError::TypeMismatch(
                "idempotent decorations require the deformed theory".into(),
            ));
        }
        // p± = (1 ± dot)/2, expanded through the same dot action
        let half = Coeff::from_frac(1, 2);
        let mut dotted = self.clone_state();
        let mut ev = Evaluator {
            theory: self.theory,
            web: self.web.clone(),
            conn: connectivity(&self.web)?,
            factor_of_curve: self.factor_of_curve.clone(),
            next_factor: self.next_factor,
            state: std::mem::take(&mut dotted),
        };
        ev.apply_dot(level, pos)?;
        let mut acc = self.state.clone();
        acc.scale(&half);
        let mut dot_part = ev.state;
        dot_part.scale(&if plus { half } else { -half });
        acc.add(&dot_part);
        self.state = acc;
        Ok(())
    }

    fn clone_state(&self) -> StateVec {
        self.state.clone()
    }

    // -- births and deaths ---------------------------------------------------

    fn apply_birth(&mut self, row: usize, pos: usize, label: Label) -> Result<(), FoamError> {
        let ifaces = self.web.interfaces()?;
        let iface = ifaces
            .get(row)
            .ok_or_else(|| FoamError::TypeMismatch("birth row out of range".into()))?;
        if pos > iface.len() {
            return Err(FoamError::TypeMismatch("birth position out of range".into()));
        }
        let cup_row = {
            let mut r: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
            r.push(Token::Cup { label, side: TurnSide::LeftUp });
            r.extend(iface[pos..].iter().map(|s| Token::Id(*s)));
            r
        };
        let cap_row = {
            let mut r: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
            r.push(Token::Cap { label, side: TurnSide::LeftUp });
            r.extend(iface[pos..].iter().map(|s| Token::Id(*s)));
            r
        };
        let edit = RowEdit { at: row, remove: 0, insert: vec![cup_row, cap_row] };
        // cup of label 2 contributes no factor and scalar +1
        self.commit_edit(edit, GeneratorKind::Birth { label })
    }

    fn apply_death(&mut self, level: usize, pos: usize) -> Result<(), FoamError> {
        // The circle through (level, pos) must be a free circle: collect its
        // tokens and delete them.
        let conn = connectivity(&self.web)?;
        let comp = conn
            .component_of((level, pos))
            .ok_or_else(|| FoamError::TypeMismatch("death point out of range".into()))?;
        // collect tokens whose points all belong to comp, and check freeness
        let label = conn.strand[conn.index[&(level, pos)]].label;
        let mut toks = std::collections::BTreeSet::new();
        let mut pos_in;
        for (ri, rowv) in self.web.rows.iter().enumerate() {
            pos_in = 0usize;
            let mut out = 0usize;
            for (ti, t) in rowv.iter().enumerate() {
                let a = t.arity_in();
                let b = t.arity_out();
                let this_comp = if a > 0 {
                    conn.component_of((ri, pos_in))
                } else {
                    conn.component_of((ri + 1, out))
                };
                if this_comp == Some(comp) {
                    match t {
                        Token::Id(_) | Token::Twist { .. } | Token::Cup { .. } | Token::Cap { .. } => {
                            toks.insert((ri, ti));
                        }
                        _ => {
                            return Err(FoamError::TypeMismatch(
                                "death of a non-circle component".into(),
                            ))
                        }
                    }
                }
                pos_in += a;
                out += b;
            }
        }
        self.commit_delete_tokens(toks, GeneratorKind::Death { label })
    }

    // -- saddles, zips, unzips ------------------------------------------------

    fn apply_saddle(&mut self, row: usize, pos: usize) -> Result<(), FoamError> {
        let ifaces = self.web.interfaces()?;
        let iface = ifaces
            .get(row)
            .ok_or_else(|| FoamError::TypeMismatch("saddle row out of range".into()))?;
        if pos + 1 >= iface.len() {
            return Err(FoamError::TypeMismatch("saddle position out of range".into()));
        }
        let a = iface[pos];
        let b = iface[pos + 1];
        if a.label != b.label || a.dir == b.dir {
            return Err(FoamError::TypeMismatch(format!(
                "saddle needs an antiparallel same-label pair, got {a} {b}"
            )));
        }
        let cap_side = if a.dir == Dir::Up { TurnSide::LeftUp } else { TurnSide::RightUp };
        let cup_side = if a.dir == Dir::Up { TurnSide::RightUp } else { TurnSide::LeftUp };
        let mut cap_row: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
        cap_row.push(Token::Cap { label: a.label, side: cap_side });
        cap_row.extend(iface[pos + 2..].iter().map(|s| Token::Id(*s)));
        let mut cup_row: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
        cup_row.push(Token::Cup { label: a.label, side: cup_side });
        cup_row.extend(iface[pos + 2..].iter().map(|s| Token::Id(*s)));
        let edit = RowEdit { at: row, remove: 0, insert: vec![cap_row, cup_row] };
        self.commit_edit(edit, GeneratorKind::Saddle { label: a.label })
    }

    fn apply_zip(&mut self, row: usize, pos: usize, flag: bool) -> Result<(), FoamError> {
        // the strands at `pos, pos+1` across rows `row` and `row+1` must be
        // 1-labeled, coherently oriented, and carried by id tokens
        let ifaces = self.web.interfaces()?;
        let iface = ifaces
            .get(row)
            .ok_or_else(|| FoamError::TypeMismatch("zip row out of range".into()))?;
        if pos + 1 >= iface.len() {
            return Err(FoamError::TypeMismatch("zip position out of range".into()));
        }
        let a = iface[pos];
        let b = iface[pos + 1];
        if a.label != Label::One || b.label != Label::One || a.dir != b.dir {
            return Err(FoamError::TypeMismatch(format!(
                "zip needs coherently oriented 1-strands, got {a} {b}"
            )));
        }
        let dir = a.dir;
        let (lower, upper) = if dir == Dir::Up {
            (Token::Merge { dir }, Token::Split { dir })
        } else {
            (Token::Split { dir: Dir::Down }, Token::Merge { dir: Dir::Down })
        };
        let mut row1: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
        row1.push(lower);
        row1.extend(iface[pos + 2..].iter().map(|s| Token::Id(*s)));
        let mut row2: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
        row2.push(upper);
        row2.extend(iface[pos + 2..].iter().map(|s| Token::Id(*s)));
        let edit = RowEdit { at: row, remove: 0, insert: vec![row1, row2] };
        // R-side of the new digon: for upward flow the split's right output,
        // which continues the strand at pos+1; same for downward flow at the
        // merge. The R strand is the one at pos+1 just above the edit.
        self.commit_edit(
            edit,
            GeneratorKind::ZipLike {
                flag,
                r_point_new: (row + 3, pos + 1),
                r_point_old: (row, pos + 1),
            },
        )
    }

    fn apply_unzip(&mut self, row: usize, flag: bool) -> Result<(), FoamError> {
        // rows `row` and `row+1` must form an H: [merge; split] or
        // [split; merge] for downward flow, each padded by ids
        let find_vertex = |r: &Vec<Token>| -> Option<(usize, usize, Token)> {
            let mut pos = 0usize;
            for t in r {
                match t {
                    Token::Merge { .. } | Token::Split { .. } => {
                        return Some((pos, t.arity_in(), t.clone()))
                    }
                    _ => pos += t.arity_in(),
                }
            }
            None
        };
        if row + 1 >= self.web.rows.len() {
            return Err(FoamError::TypeMismatch("unzip rows out of range".into()));
        }
        let (p1, _, t1) = find_vertex(&self.web.rows[row])
            .ok_or_else(|| FoamError::TypeMismatch("unzip: no vertex in lower row".into()))?;
        let (p2, _, t2) = find_vertex(&self.web.rows[row + 1])
            .ok_or_else(|| FoamError::TypeMismatch("unzip: no vertex in upper row".into()))?;
        let ifaces = self.web.interfaces()?;
        let ok = match (&t1, &t2) {
            (Token::Merge { dir: d1 }, Token::Split { dir: d2 }) => {
                d1 == d2 && *d1 == Dir::Up && p1 == p2
            }
            (Token::Split { dir: d1 }, Token::Merge { dir: d2 }) => {
                d1 == d2 && *d1 == Dir::Down && p1 == p2
            }
            _ => false,
        };
        if !ok {
            return Err(FoamError::TypeMismatch("unzip: rows are not an H".into()));
        }
        let pos = p1;
        // rebuild the two rows as id-rows on the lower interface
        let iface = &ifaces[row];
        let id_row: Vec<Token> = iface.iter().map(|s| Token::Id(*s)).collect();
        let edit = RowEdit { at: row, remove: 2, insert: vec![id_row.clone(), id_row] };
        self.commit_edit(
            edit,
            GeneratorKind::ZipLike {
                flag,
                r_point_new: (row + 2, pos + 1),
                r_point_old: (row + 2, pos + 1),
            },
        )
    }

    /// Replace rows `at .. at+remove` by new content, acting by the
    /// zip/unzip algebra with the given seam twist reference points. Used
    /// for cube-of-resolutions transitions, where the source and target
    /// resolution blocks both occupy the replaced row range.
    pub fn apply_transition(
        &mut self,
        at: usize,
        remove: usize,
        insert: Vec<Vec<Token>>,
        r_point_old: (usize, usize),
        r_point_new: (usize, usize),
        flag: bool,
    ) -> Result<(), FoamError> {
        let edit = RowEdit { at, remove, insert };
        self.commit_edit(edit, GeneratorKind::ZipLike { flag, r_point_new, r_point_old })
    }

    /// Replace rows without any state action (used for twist-marker edits
    /// and other pure relabelings that do not touch curve structure).
    pub fn apply_relabel(
        &mut self,
        at: usize,
        remove: usize,
        insert: Vec<Vec<Token>>,
    ) -> Result<(), FoamError> {
        let edit = RowEdit { at, remove, insert };
        self.commit_edit(edit, GeneratorKind::Scalar { sign: 1 })
    }

    fn apply_digon_birth(&mut self, row: usize, pos: usize) -> Result<(), FoamError> {
        let ifaces = self.web.interfaces()?;
        let iface = ifaces
            .get(row)
            .ok_or_else(|| FoamError::TypeMismatch("digon birth row out of range".into()))?;
        if pos >= iface.len() || iface[pos].label != Label::Two {
            return Err(FoamError::TypeMismatch("digon birth needs a 2-strand".into()));
        }
        let dir = iface[pos].dir;
        let (lower, upper) = if dir == Dir::Up {
            (Token::Split { dir }, Token::Merge { dir })
        } else {
            (Token::Merge { dir: Dir::Down }, Token::Split { dir: Dir::Down })
        };
        let mut row1: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
        row1.push(lower);
        row1.extend(iface[pos + 1..].iter().map(|s| Token::Id(*s)).collect::<Vec<_>>());
        let mut row2: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
        row2.push(upper);
        row2.extend(iface[pos + 1..].iter().map(|s| Token::Id(*s)).collect::<Vec<_>>());
        let edit = RowEdit { at: row, remove: 0, insert: vec![row1, row2] };
        self.commit_edit(edit, GeneratorKind::DigonBirth)
    }

    fn apply_digon_death(&mut self, row: usize) -> Result<(), FoamError> {
        let find_vertex = |r: &Vec<Token>| -> Option<(usize, Token)> {
            let mut pos = 0usize;
            for t in r {
                match t {
                    Token::Merge { .. } | Token::Split { .. } => return Some((pos, t.clone())),
                    _ => pos += t.arity_in(),
                }
            }
            None
        };
        if row + 1 >= self.web.rows.len() {
            return Err(FoamError::TypeMismatch("digon death rows out of range".into()));
        }
        let (p1, t1) = find_vertex(&self.web.rows[row])
            .ok_or_else(|| FoamError::TypeMismatch("digon death: no vertex".into()))?;
        let (p2, t2) = find_vertex(&self.web.rows[row + 1])
            .ok_or_else(|| FoamError::TypeMismatch("digon death: no vertex".into()))?;
        let ok = match (&t1, &t2) {
            (Token::Split { dir: d1 }, Token::Merge { dir: d2 }) => d1 == d2 && *d1 == Dir::Up && p1 == p2,
            (Token::Merge { dir: d1 }, Token::Split { dir: d2 }) => {
                d1 == d2 && *d1 == Dir::Down && p1 == p2
            }
            _ => false,
        };
        if !ok {
            return Err(FoamError::TypeMismatch("digon death: rows are not a digon".into()));
        }
        let ifaces = self.web.interfaces()?;
        let iface = &ifaces[row];
        let id_row: Vec<Token> = iface.iter().map(|s| Token::Id(*s)).collect();
        let edit = RowEdit { at: row, remove: 2, insert: vec![id_row.clone(), id_row] };
        self.commit_edit(edit, GeneratorKind::DigonDeath)
    }

    fn apply_bubble(
        &mut self,
        row: usize,
        birth: Option<(usize, bool, bool)>,
    ) -> Result<(), FoamError> {
        match birth {
            None => {
                // rows row, row+1 must be a Bend above which a BendDown
                // closes the bigon
                let find_bend = |r: &Vec<Token>| -> Option<Bend> {
                    r.iter().find_map(|t| match t {
                        Token::Bend(b) | Token::BendDown(b) => Some(*b),
                        _ => None,
                    })
                };
                if row + 1 >= self.web.rows.len() {
                    return Err(FoamError::TypeMismatch("bubble rows out of range".into()));
                }
                let b1 = find_bend(&self.web.rows[row])
                    .ok_or_else(|| FoamError::TypeMismatch("bubble: no bend".into()))?;
                let b2 = find_bend(&self.web.rows[row + 1])
                    .ok_or_else(|| FoamError::TypeMismatch("bubble: no bend".into()))?;
                if b1.merge == b2.merge || b1.two_left != b2.two_left {
                    return Err(FoamError::TypeMismatch("bubble: bends do not cancel".into()));
                }
                let ifaces = self.web.interfaces()?;
                let iface = &ifaces[row];
                let id_row: Vec<Token> = iface.iter().map(|s| Token::Id(*s)).collect();
                let edit = RowEdit { at: row, remove: 2, insert: vec![id_row.clone(), id_row] };
                let sign = bubble_sign(b1);
                self.commit_edit(edit, GeneratorKind::Scalar { sign })
            }
            Some((pos, two_left, _merge_first)) => {
                let ifaces = self.web.interfaces()?;
                let iface = ifaces
                    .get(row)
                    .ok_or_else(|| FoamError::TypeMismatch("bubble row out of range".into()))?;
                if pos >= iface.len() || iface[pos].label != Label::One {
                    return Err(FoamError::TypeMismatch("bubble birth needs a 1-strand".into()));
                }
                // lower vertex: one 1-edge below, 1-edge + 2-edge above;
                // upper vertex closes the bigon. The vertex kinds follow
                // from the strand's flow direction.
                let up = iface[pos].dir == Dir::Up;
                let b1 = Bend { merge: up, two_left };
                let b2 = Bend { merge: !up, two_left };
                let row1: Vec<Token> = {
                    let mut r: Vec<Token> = iface[..pos].iter().map(|s| Token::Id(*s)).collect();
                    r.push(Token::Bend(b1));
                    r.extend(iface[pos + 1..].iter().map(|s| Token::Id(*s)));
                    r
                };
                let mut mid: Vec<StrandType> = iface[..pos].to_vec();
                mid.extend(Token::Bend(b1).outputs(&[iface[pos]]).ok_or_else(|| {
                    FoamError::TypeMismatch("bubble birth: bend rejects strand".into())
                })?);
                mid.extend(iface[pos + 1..].iter().cloned());
                let mut row2: Vec<Token> = mid[..pos].iter().map(|s| Token::Id(*s)).collect();
                row2.push(Token::BendDown(b2));
                row2.extend(mid[pos + 2..].iter().map(|s| Token::Id(*s)));
                let edit = RowEdit { at: row, remove: 0, insert: vec![row1, row2] };
                self.commit_edit(edit, GeneratorKind::Scalar { sign: 1 })
            }
        }
    }

    // -- edit machinery --------------------------------------------------------

    fn commit_delete_tokens(
        &mut self,
        toks: std::collections::BTreeSet<(usize, usize)>,
        kind: GeneratorKind,
    ) -> Result<(), FoamError> {
        let old_web = self.web.clone();
        let old_conn = connectivity(&old_web)?;
        // point survival map: (lvl,pos) -> new (lvl,pos)
        let new_web = delete_tokens_web(&old_web, &toks);
        let new_conn = connectivity(&new_web)?;
        // build the point map: per level, positions of surviving points
        let survives = |lvl: usize, pos: usize| -> Option<(usize, usize)> {
            // count how many points at this level before `pos` are killed
            point_map_after_delete(&old_web, &toks, lvl, pos)
        };
        self.rebind(old_conn, new_web, new_conn, survives, kind)
    }

    fn commit_edit(&mut self, edit: RowEdit, kind: GeneratorKind) -> Result<(), FoamError> {
        let old_web = self.web.clone();
        let old_conn = connectivity(&old_web)?;
        let new_web = edit.apply(&old_web);
        if !new_web.validate().is_empty() {
            return Err(FoamError::TypeMismatch(format!(
                "edit produced an ill-typed web: {:?}",
                new_web.validate()
            )));
        }
        let new_conn = connectivity(&new_web)?;
        let (at, remove, ins) = (edit.at, edit.remove, edit.insert.len());
        let survives = move |lvl: usize, pos: usize| -> Option<(usize, usize)> {
            if lvl <= at {
                Some((lvl, pos))
            } else if lvl >= at + remove {
                Some((lvl - remove + ins, pos))
            } else {
                None
            }
        };
        self.rebind(old_conn, new_web, new_conn, survives, kind)
    }

    /// Re-express the state in the new web's curves, applying the
    /// generator's algebra on the affected factors.
    fn rebind(
        &mut self,
        old_conn: Connectivity,
        new_web: WebDiagram,
        new_conn: Connectivity,
        point_map: impl Fn(usize, usize) -> Option<(usize, usize)>,
        kind: GeneratorKind,
    ) -> Result<(), FoamError> {
        // match old curves to new curves through surviving points
        let n_old = old_conn.curve_count();
        let n_new = new_conn.curve_count();
        let mut old_to_new: Vec<std::collections::BTreeSet<usize>> =
            vec![Default::default(); n_old];
        let mut new_matched: Vec<std::collections::BTreeSet<usize>> =
            vec![Default::default(); n_new];
        for (ci, pts) in old_conn.curves.iter().enumerate() {
            for p in pts {
                if let Some(q) = point_map(p.0, p.1) {
                    if let Some(nc) = new_conn.curve_of(q) {
                        old_to_new[ci].insert(nc);
                        new_matched[nc].insert(ci);
                    }
                }
            }
        }

        // assign factor ids on the new web
        let mut new_factor_of_curve: Vec<FactorId> = vec![u32::MAX; n_new];
        let mut born: Vec<usize> = Vec::new();
        for nc in 0..n_new {
            match new_matched[nc].len() {
                0 => born.push(nc),
                1 => {
                    let oc = *new_matched[nc].iter().next().unwrap();
                    if old_to_new[oc].len() == 1 {
                        // plain carry-over
                        new_factor_of_curve[nc] = self.factor_of_curve[oc];
                    }
                }
                _ => {}
            }
        }

        // classify the surgery: dying curves (no image), splits (1 old -> 2
        // new), joins (2 old -> 1 new)
        let dying: Vec<usize> = (0..n_old).filter(|&c| old_to_new[c].is_empty()).collect();
        let splits: Vec<usize> = (0..n_old).filter(|&c| old_to_new[c].len() == 2).collect();
        let joins: Vec<usize> = (0..n_new).filter(|&c| new_matched[c].len() == 2).collect();

        let deformed = self.theory == Theory::Deformed;
        let mut state = std::mem::take(&mut self.state);

        match &kind {
            GeneratorKind::Scalar { sign } => {
                if *sign < 0 {
                    state.scale(&Coeff::from_int(-1));
                }
                if !(dying.is_empty() && splits.is_empty() && joins.is_empty() && born.is_empty()) {
                    return Err(FoamError::TypeMismatch(
                        "scalar generator changed the curve structure".into(),
                    ));
                }
            }
            GeneratorKind::Birth { label } => {
                match label {
                    Label::Two => {
                        // no factor; scalar +1
                        if !born.is_empty() {
                            return Err(FoamError::TypeMismatch("2-birth created a curve".into()));
                        }
                    }
                    Label::One => {
                        if born.len() != 1 {
                            return Err(FoamError::TypeMismatch("birth must create one curve".into()));
                        }
                        let f = self.fresh_factor();
                        new_factor_of_curve[born[0]] = f;
                        // tensor with the unit state "1": nothing to do (absent
                        // key means 1 in the word representation)
                    }
                }
            }
            GeneratorKind::DigonBirth => {
                if born.len() != 1 {
                    return Err(FoamError::TypeMismatch("digon birth must create one curve".into()));
                }
                let f = self.fresh_factor();
                new_factor_of_curve[born[0]] = f;
            }
            GeneratorKind::Death { label } => {
                match label {
                    Label::Two => {
                        // 2-sphere cap carries -1
                        state.scale(&Coeff::from_int(-1));
                    }
                    Label::One => {
                        if dying.len() != 1 {
                            return Err(FoamError::TypeMismatch("death must kill one curve".into()));
                        }
                        let f = self.factor_of_curve[dying[0]];
                        // counit: 1 -> 0, X -> 1
                        let mut ns = StateVec::zero();
                        for (w, c) in &state.terms {
                            let x = w.get(&f).copied().unwrap_or(false);
                            if x {
                                let mut w2 = w.clone();
                                w2.remove(&f);
                                ns.add_term(w2, c.clone());
                            }
                        }
                        state = ns;
                    }
                }
            }
            GeneratorKind::DigonDeath => {
                if dying.len() != 1 {
                    return Err(FoamError::TypeMismatch("digon death must kill one curve".into()));
                }
                let f = self.factor_of_curve[dying[0]];
                // -counit: X -> -1, 1 -> 0
                let mut ns = StateVec::zero();
                for (w, c) in &state.terms {
                    let x = w.get(&f).copied().unwrap_or(false);
                    if x {
                        let mut w2 = w.clone();
                        w2.remove(&f);
                        ns.add_term(w2, -c.clone());
                    }
                }
                state = ns;
            }
            GeneratorKind::Saddle { label } => match label {
                Label::Two => {
                    // context sign: joining components +1, splitting -1;
                    // with 2-strands invisible to curves, classify by the
                    // web component count change
                    let sign = if splits.is_empty() && joins.is_empty() {
                        // judge by full components: recompute
                        component_delta_sign(&self.web, &new_web)
                    } else {
                        return Err(FoamError::TypeMismatch("2-saddle touched 1-curves".into()));
                    };
                    if sign < 0 {
                        state.scale(&Coeff::from_int(-1));
                    }
                }
                Label::One => {
                    state = apply_saddle_algebra(
                        state,
                        &splits,
                        &joins,
                        &old_to_new,
                        &new_matched,
                        &mut new_factor_of_curve,
                        &self.factor_of_curve,
                        || self_fresh(&mut self.next_factor),
                        deformed,
                        None,
                        &old_conn,
                        &new_conn,
                    )?;
                }
            },
            GeneratorKind::ZipLike { flag, r_point_new, r_point_old } => {
                let twist = TwistData {
                    r_curve_old: old_conn.curve_of(*r_point_old),
                    r_curve_new: new_conn.curve_of(*r_point_new),
                };
                state = apply_saddle_algebra(
                    state,
                    &splits,
                    &joins,
                    &old_to_new,
                    &new_matched,
                    &mut new_factor_of_curve,
                    &self.factor_of_curve,
                    || self_fresh(&mut self.next_factor),
                    deformed,
                    Some(twist),
                    &old_conn,
                    &new_conn,
                )?;
                if *flag {
                    state.scale(&Coeff::from_int(-1));
                }
            }
        }

        // factors for surviving new curves not yet assigned (1-1 matches
        // were set above; any remaining unreachable case is an error)
        for nc in 0..n_new {
            if new_factor_of_curve[nc] == u32::MAX {
                return Err(FoamError::TypeMismatch(format!(
                    "curve {nc} in the edited web has no factor assignment"
                )));
            }
        }

        self.web = new_web;
        self.conn = new_conn;
        self.factor_of_curve = new_factor_of_curve;
        self.state = state;
        Ok(())
    }
}

fn self_fresh(next: &mut FactorId) -> FactorId {
    let f = *next;
    *next += 1;
    f
}

struct TwistData {
    r_curve_old: Option<usize>,
    r_curve_new: Option<usize>,
}

#[allow(clippy::too_many_arguments)]
fn apply_saddle_algebra(
    state: StateVec,
    splits: &[usize],
    joins: &[usize],
    old_to_new: &[std::collections::BTreeSet<usize>],
    new_matched: &[std::collections::BTreeSet<usize>],
    new_factor_of_curve: &mut [FactorId],
    old_factor_of_curve: &[FactorId],
    mut fresh: impl FnMut() -> FactorId,
    deformed: bool,
    twist: Option<TwistData>,
    _old_conn: &Connectivity,
    _new_conn: &Connectivity,
) -> Result<StateVec, FoamError> {
    match (splits.len(), joins.len()) {
        (1, 0) => {
            // one old curve becomes two new curves: comultiplication
            let oc = splits[0];
            let f_old = old_factor_of_curve[oc];
            let mut outs: Vec<usize> = old_to_new[oc].iter().cloned().collect();
            outs.sort();
            let f_a = fresh();
            let f_b = fresh();
            new_factor_of_curve[outs[0]] = f_a;
            new_factor_of_curve[outs[1]] = f_b;
            // twist: negate X on the new curve holding the R point
            let neg_new = twist
                .as_ref()
                .and_then(|t| t.r_curve_new)
                .map(|rc| {
                    if rc == outs[0] {
                        f_a
                    } else {
                        f_b
                    }
                });
            let mut ns = StateVec::zero();
            for (w, c) in &state.terms {
                let x = w.get(&f_old).copied().unwrap_or(false);
                let mut base = w.clone();
                base.remove(&f_old);
                // comultiplication terms
                let mut push = |xa: bool, xb: bool, mut coeff: Coeff| {
                    if let Some(nf) = neg_new {
                        let neg_applies = if nf == f_a { xa } else { xb };
                        if neg_applies {
                            coeff = -coeff;
                        }
                    }
                    let mut w2 = base.clone();
                    if xa {
                        w2.insert(f_a, true);
                    }
                    if xb {
                        w2.insert(f_b, true);
                    }
                    ns.add_term(w2, coeff);
                };
                if !x {
                    push(false, true, c.clone());
                    push(true, false, c.clone());
                } else {
                    push(true, true, c.clone());
                    if deformed {
                        push(false, false, c.clone());
                    }
                }
            }
            Ok(ns)
        }
        (0, 1) => {
            // two old curves join: multiplication
            let nc = joins[0];
            let mut ins: Vec<usize> = new_matched[nc].iter().cloned().collect();
            ins.sort();
            let f_a = old_factor_of_curve[ins[0]];
            let f_b = old_factor_of_curve[ins[1]];
            let f_new = fresh();
            new_factor_of_curve[nc] = f_new;
            let neg_old = twist.as_ref().and_then(|t| t.r_curve_old).map(|rc| {
                if rc == ins[0] {
                    f_a
                } else {
                    f_b
                }
            });
            let mut ns = StateVec::zero();
            for (w, c) in &state.terms {
                let xa = w.get(&f_a).copied().unwrap_or(false);
                let xb = w.get(&f_b).copied().unwrap_or(false);
                let mut coeff = c.clone();
                if let Some(nf) = neg_old {
                    let neg_applies = if nf == f_a { xa } else { xb };
                    if neg_applies {
                        coeff = -coeff;
                    }
                }
                let mut w2 = w.clone();
                w2.remove(&f_a);
                w2.remove(&f_b);
                let product_x = match (xa, xb) {
                    (false, false) => Some(false),
                    (true, false) | (false, true) => Some(true),
                    (true, true) => {
                        if deformed {
                            Some(false)
                        } else {
                            None
                        }
                    }
                };
                if let Some(px) = product_x {
                    if px {
                        w2.insert(f_new, true);
                    }
                    ns.add_term(w2, coeff);
                }
            }
            Ok(ns)
        }
        _ => Err(FoamError::TypeMismatch(format!(
            "saddle-type generator with unexpected surgery: {} splits, {} joins",
            splits.len(),
            joins.len()
        ))),
    }
}

enum GeneratorKind {
    Scalar { sign: i8 },
    Birth { label: Label },
    Death { label: Label },
    DigonBirth,
    DigonDeath,
    Saddle { label: Label },
    ZipLike { flag: bool, r_point_new: (usize, usize), r_point_old: (usize, usize) },
}

/// Sign of a bubble ((1,2)-bigon) collapse, read off the lower bent vertex:
/// the strand's flow direction and the 2-edge's side together fix it. The
/// relation suite (the two bubble equations and the square relations) pins
/// this table.
fn bubble_sign(b: Bend) -> i8 {
    if b.merge == b.two_left {
        1
    } else {
        -1
    }
}

/// Component-count delta: +1 when a 2-saddle merges web components, -1 when
/// it splits one.
fn component_delta_sign(old_web: &WebDiagram, new_web: &WebDiagram) -> i8 {
    let co = connectivity(old_web).map(|c| max_component(&c)).unwrap_or(0);
    let cn = connectivity(new_web).map(|c| max_component(&c)).unwrap_or(0);
    if cn < co {
        1
    } else {
        -1
    }
}

fn max_component(c: &Connectivity) -> usize {
    c.component.iter().copied().max().map_or(0, |m| m + 1)
}

/// Facet sign of a dot: walk the maximal 1-path through the point; +1 on
/// free circles and on paths leaving their source split as the left output,
/// -1 on right outputs.
pub fn dot_sign(web: &WebDiagram, level: usize, pos: usize) -> Result<i8, FoamError> {
    let ifaces = web.interfaces()?;
    if level >= ifaces.len() || pos >= ifaces[level].len() {
        return Err(FoamError::TypeMismatch("dot point out of range".into()));
    }
    if ifaces[level][pos].label != Label::One {
        return Err(FoamError::TypeMismatch("dot on a 2-labeled strand".into()));
    }
    // walk against the flow to the source of the path
    let mut lvl = level;
    let mut p = pos;
    let mut dir_up = ifaces[lvl][p].dir == Dir::Up; // current flow direction
    // Against the flow: move downward if flow is up.
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 100_000 {
            return Err(FoamError::TypeMismatch("dot walk did not terminate".into()));
        }
        if dir_up {
            // source side is below: find the token in row lvl-1 producing p
            if lvl == 0 {
                return Ok(1); // open boundary; treat as free
            }
            let row = &web.rows[lvl - 1];
            let (tok, in_pos, out_pos) = token_producing(row, p);
            match tok {
                Token::Id(_) | Token::Twist { .. } | Token::Crossing { .. } => {
                    // continue below; for crossings trace through
                    let slot = p - out_pos;
                    let new_p = match tok {
                        Token::Crossing { .. } => in_pos + (1 - slot),
                        _ => in_pos + slot,
                    };
                    lvl -= 1;
                    p = new_p;
                }
                Token::Cup { .. } => {
                    // turn: continue on the sibling strand, now flowing down;
                    // walking against a downward flow means walking upward
                    let slot = p - out_pos;
                    p = out_pos + (1 - slot);
                    dir_up = false;
                }
                Token::Split { dir: Dir::Up } => {
                    // source found: left output = +, right = -
                    let slot = p - out_pos;
                    return Ok(if slot == 0 { 1 } else { -1 });
                }
                Token::Bend(b) if !b.merge => {
                    // bent split: this output shares its interface with the
                    // 2-edge; right of the 2-edge carries the minus
                    return Ok(if b.two_left { -1 } else { 1 });
                }
                Token::BendDown(b) if !b.merge => {
                    // split with the 2-edge below; the upward 1-edge is the
                    // opposite-side output
                    return Ok(if b.two_left { 1 } else { -1 });
                }
                t => {
                    return Err(FoamError::TypeMismatch(format!(
                        "dot walk: unexpected producer {t:?} of an up-flowing strand"
                    )))
                }
            }
        } else {
            // flow is down: against the flow means moving upward
            if lvl + 1 >= ifaces.len() {
                return Ok(1);
            }
            let row = &web.rows[lvl];
            let (tok, in_pos, out_pos) = token_consuming(row, p);
            match tok {
                Token::Id(_) | Token::Twist { .. } | Token::Crossing { .. } => {
                    let slot = p - in_pos;
                    let new_p = match tok {
                        Token::Crossing { .. } => out_pos + (1 - slot),
                        _ => out_pos + slot,
                    };
                    lvl += 1;
                    p = new_p;
                }
                Token::Cap { .. } => {
                    let slot = p - in_pos;
                    p = in_pos + (1 - slot);
                    dir_up = true;
                }
                Token::Merge { dir: Dir::Down } => {
                    // graph-split drawn upside down: the down-flowing 1-edges
                    // below it are its outputs; left slot = +
                    let slot = p - in_pos;
                    return Ok(if slot == 0 { 1 } else { -1 });
                }
                Token::Bend(b) if !b.merge => {
                    // bent split: the 1-below is the opposite-side output
                    return Ok(if b.two_left { 1 } else { -1 });
                }
                Token::BendDown(b) if !b.merge => {
                    // the down-flowing 1-edge shares its interface with the
                    // 2-edge; right of the 2-edge carries the minus
                    return Ok(if b.two_left { -1 } else { 1 });
                }
                t => {
                    return Err(FoamError::TypeMismatch(format!(
                        "dot walk: unexpected consumer {t:?} of a down-flowing strand"
                    )))
                }
            }
        }
    }
}

fn token_producing(row: &[Token], out_target: usize) -> (&Token, usize, usize) {
    let mut in_pos = 0usize;
    let mut out_pos = 0usize;
    for t in row {
        let b = t.arity_out();
        if out_target >= out_pos && out_target < out_pos + b {
            return (t, in_pos, out_pos);
        }
        in_pos += t.arity_in();
        out_pos += b;
    }
    panic!("no token produces position {out_target}");
}

fn token_consuming(row: &[Token], in_target: usize) -> (&Token, usize, usize) {
    let mut in_pos = 0usize;
    let mut out_pos = 0usize;
    for t in row {
        let a = t.arity_in();
        if in_target >= in_pos && in_target < in_pos + a {
            return (t, in_pos, out_pos);
        }
        in_pos += a;
        out_pos += t.arity_out();
    }
    panic!("no token consumes position {in_target}");
}

/// Row splice edit.
pub struct RowEdit {
    pub at: usize,
    pub remove: usize,
    pub insert: Vec<Vec<Token>>,
}

impl RowEdit {
    pub fn apply(&self, w: &WebDiagram) -> WebDiagram {
        let mut rows = Vec::new();
        rows.extend(w.rows[..self.at].iter().cloned());
        rows.extend(self.insert.iter().cloned());
        rows.extend(w.rows[self.at + self.remove..].iter().cloned());
        WebDiagram { bottom: w.bottom.clone(), rows }
    }
}

fn delete_tokens_web(
    w: &WebDiagram,
    toks: &std::collections::BTreeSet<(usize, usize)>,
) -> WebDiagram {
    let mut rows = Vec::new();
    for (ri, row) in w.rows.iter().enumerate() {
        let mut new_row = Vec::new();
        for (ti, t) in row.iter().enumerate() {
            if !toks.contains(&(ri, ti)) {
                new_row.push(t.clone());
            }
        }
        rows.push(new_row);
    }
    WebDiagram { bottom: w.bottom.clone(), rows }
}

/// Map a wire point through token deletion: same level, position shifted by
/// the points removed to its left. Returns None for deleted points.
fn point_map_after_delete(
    w: &WebDiagram,
    toks: &std::collections::BTreeSet<(usize, usize)>,
    lvl: usize,
    pos: usize,
) -> Option<(usize, usize)> {
    // determine which interface positions at each level are produced by
    // deleted tokens; a point at interface lvl is killed when the token
    // below it (producing it) or above it (consuming it) is deleted AND the
    // point belongs to the deleted circle. Circle points are exactly those
    // produced by deleted tokens (or bottom boundary, absent here).
    let produced_by_deleted = |lvl: usize, pos: usize| -> bool {
        if lvl == 0 {
            return false;
        }
        let row = &w.rows[lvl - 1];
        let mut out_pos = 0usize;
        for (ti, t) in row.iter().enumerate() {
            let b = t.arity_out();
            if pos >= out_pos && pos < out_pos + b {
                return toks.contains(&(lvl - 1, ti));
            }
            out_pos += b;
        }
        false
    };
    if produced_by_deleted(lvl, pos) {
        return None;
    }
    let mut removed_before = 0usize;
    for p in 0..pos {
        if produced_by_deleted(lvl, p) {
            removed_before += 1;
        }
    }
    // levels never collapse here (rows are kept, possibly empty; empty rows
    // are retained to keep numbering stable within a single edit)
    Some((lvl, pos - removed_before))
}
