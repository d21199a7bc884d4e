//! Slice-word representation of oriented gl(2) web-tangle diagrams with
//! crossings and framing twists: parsing, printing, validation, crossing
//! resolution, mirroring, closures, and reduction of closed crossingless
//! webs by circle and digon removal.

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Edge label: 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    One,
    Two,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::One => 1,
            Label::Two => 2,
        }
    }
    pub fn from_u8(n: u8) -> Option<Label> {
        match n {
            1 => Some(Label::One),
            2 => Some(Label::Two),
            _ => None,
        }
    }
}

/// Flow direction across a horizontal interface: `Up` flows bottom-to-top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Up,
    Down,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
        }
    }
    pub fn letter(self) -> char {
        match self {
            Dir::Up => 'u',
            Dir::Down => 'd',
        }
    }
}

/// One strand crossing an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrandType {
    pub label: Label,
    pub dir: Dir,
}

impl StrandType {
    pub fn new(label: Label, dir: Dir) -> Self {
        StrandType { label, dir }
    }
    pub fn flip(self) -> Self {
        StrandType { label: self.label, dir: self.dir.flip() }
    }
}

impl fmt::Display for StrandType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label.as_u8(), self.dir.letter())
    }
}

/// Which end of a cup/cap carries the upward flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurnSide {
    LeftUp,
    RightUp,
}

/// Bent trivalent vertex: one 1-edge below, the other 1-edge and the 2-edge
/// above. `two_left` places the 2-edge on the left of the upper interface.
/// `merge` distinguishes the merge vertex (both 1-edges flow in) from the
/// split (both flow out).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bend {
    pub merge: bool,
    pub two_left: bool,
}

/// Slice tokens, tiling one row of the diagram left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Id(StrandType),
    Cup { label: Label, side: TurnSide },
    Cap { label: Label, side: TurnSide },
    Merge { dir: Dir },
    Split { dir: Dir },
    /// `over_first`: the first (left-entering) strand passes over.
    Crossing { over_first: bool },
    Twist { label: Label, dir: Dir, sign: i8 },
    Bend(Bend),
    /// Bent vertex with the 2-edge and one 1-edge below, the other 1-edge
    /// above. `two_left` places the 2-edge on the left of the lower pair.
    BendDown(Bend),
}

impl Token {
    /// Number of strand slots consumed from the lower interface.
    pub fn arity_in(&self) -> usize {
        match self {
            Token::Id(_) | Token::Twist { .. } => 1,
            Token::Cup { .. } => 0,
            Token::Cap { .. } => 2,
            Token::Merge { .. } => 2,
            Token::Split { .. } => 1,
            Token::Crossing { .. } => 2,
            Token::Bend(_) => 1,
            Token::BendDown(_) => 2,
        }
    }
    pub fn arity_out(&self) -> usize {
        match self {
            Token::Id(_) | Token::Twist { .. } => 1,
            Token::Cup { .. } => 2,
            Token::Cap { .. } => 0,
            Token::Merge { .. } => 1,
            Token::Split { .. } => 2,
            Token::Crossing { .. } => 2,
            Token::Bend(_) => 2,
            Token::BendDown(_) => 1,
        }
    }

    /// The output strands, given the consumed input strands. `None` if the
    /// inputs violate the token's typing.
    pub fn outputs(&self, inputs: &[StrandType]) -> Option<Vec<StrandType>> {
        match self {
            Token::Id(s) => {
                if inputs == [*s] {
                    Some(vec![*s])
                } else {
                    None
                }
            }
            Token::Twist { label, dir, .. } => {
                let s = StrandType::new(*label, *dir);
                if inputs == [s] {
                    Some(vec![s])
                } else {
                    None
                }
            }
            Token::Cup { label, side } => {
                if !inputs.is_empty() {
                    return None;
                }
                let (l, r) = match side {
                    TurnSide::LeftUp => (Dir::Up, Dir::Down),
                    TurnSide::RightUp => (Dir::Down, Dir::Up),
                };
                Some(vec![StrandType::new(*label, l), StrandType::new(*label, r)])
            }
            Token::Cap { label, side } => {
                let (l, r) = match side {
                    TurnSide::LeftUp => (Dir::Up, Dir::Down),
                    TurnSide::RightUp => (Dir::Down, Dir::Up),
                };
                if inputs == [StrandType::new(*label, l), StrandType::new(*label, r)] {
                    Some(vec![])
                } else {
                    None
                }
            }
            Token::Merge { dir } => {
                let s = StrandType::new(Label::One, *dir);
                if inputs == [s, s] {
                    Some(vec![StrandType::new(Label::Two, *dir)])
                } else {
                    None
                }
            }
            Token::Split { dir } => {
                if inputs == [StrandType::new(Label::Two, *dir)] {
                    let s = StrandType::new(Label::One, *dir);
                    Some(vec![s, s])
                } else {
                    None
                }
            }
            Token::Crossing { .. } => {
                if inputs.len() == 2 {
                    Some(vec![inputs[1], inputs[0]])
                } else {
                    None
                }
            }
            Token::Bend(b) => {
                // below: one 1-edge; above: [1-edge, 2-edge] or [2-edge, 1-edge]
                let (below, above1, above2) = if b.merge {
                    (Dir::Up, Dir::Down, Dir::Up)
                } else {
                    (Dir::Down, Dir::Up, Dir::Down)
                };
                if inputs != [StrandType::new(Label::One, below)] {
                    return None;
                }
                let one = StrandType::new(Label::One, above1);
                let two = StrandType::new(Label::Two, above2);
                Some(if b.two_left { vec![two, one] } else { vec![one, two] })
            }
            Token::BendDown(b) => {
                // below: the 2-edge and one 1-edge; above: the other 1-edge.
                // merge: both 1-edges flow in (below 1 flows up, above 1
                // flows down); the 2-edge flows out downward.
                let (below1, two_dir, above1) = if b.merge {
                    (Dir::Up, Dir::Down, Dir::Down)
                } else {
                    (Dir::Down, Dir::Up, Dir::Up)
                };
                let one = StrandType::new(Label::One, below1);
                let two = StrandType::new(Label::Two, two_dir);
                let want = if b.two_left { vec![two, one] } else { vec![one, two] };
                if inputs != want.as_slice() {
                    return None;
                }
                Some(vec![StrandType::new(Label::One, above1)])
            }
        }
    }
}

/// Position of a token: row index and strand offset of its first input slot
/// on the lower interface of that row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub row: usize,
    pub pos: usize,
}

/// Crossing identifier (reading order: bottom-to-top, left-to-right).
pub type CrossingId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingInfo {
    pub id: CrossingId,
    pub site: Site,
    pub under: StrandType,
    pub over: StrandType,
    pub sign: i8,
}

impl CrossingInfo {
    /// Labels of the two strands, as an unordered pair (min, max).
    pub fn label_pair(&self) -> (u8, u8) {
        let a = self.over.label.as_u8();
        let b = self.under.label.as_u8();
        (a.min(b), a.max(b))
    }
    pub fn is_one_one(&self) -> bool {
        self.label_pair() == (1, 1)
    }
    /// Strands parallel (same flow direction) or antiparallel.
    pub fn parallel(&self) -> bool {
        self.over.dir == self.under.dir
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WebError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("type error at row {row}, position {pos}: {msg}")]
    Type { row: usize, pos: usize, msg: String },
    #[error("invalid resolution choice {choice} for crossing {id}")]
    InvalidChoice { id: CrossingId, choice: u8 },
    #[error("no such crossing: {0}")]
    NoSuchCrossing(CrossingId),
    #[error("web is not closed")]
    OpenBoundary,
    #[error("irreducible web: no circle or digon removal applies")]
    IrreducibleWeb,
    #[error("boundary mismatch between diagrams")]
    BoundaryMismatch,
}

/// A web-tangle diagram as a word of slice rows read bottom to top.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WebDiagram {
    pub bottom: Vec<StrandType>,
    pub rows: Vec<Vec<Token>>,
}

impl WebDiagram {
    pub fn new(bottom: Vec<StrandType>, rows: Vec<Vec<Token>>) -> Self {
        WebDiagram { bottom, rows }
    }

    pub fn empty() -> Self {
        WebDiagram { bottom: Vec::new(), rows: Vec::new() }
    }

    /// All interface sequences, bottom first; `rows.len() + 1` entries when
    /// every row typechecks.
    pub fn interfaces(&self) -> Result<Vec<Vec<StrandType>>, WebError> {
        let mut ifaces = vec![self.bottom.clone()];
        let mut cur = self.bottom.clone();
        for (ri, row) in self.rows.iter().enumerate() {
            let mut next = Vec::new();
            let mut pos = 0usize;
            for tok in row {
                let a = tok.arity_in();
                if pos + a > cur.len() {
                    return Err(WebError::Type {
                        row: ri,
                        pos,
                        msg: "row consumes more strands than the interface provides".into(),
                    });
                }
                let ins = &cur[pos..pos + a];
                match tok.outputs(ins) {
                    Some(outs) => next.extend(outs),
                    None => {
                        return Err(WebError::Type {
                            row: ri,
                            pos,
                            msg: format!("token {:?} rejects inputs {:?}", tok, ins),
                        })
                    }
                }
                pos += a;
            }
            if pos != cur.len() {
                return Err(WebError::Type {
                    row: ri,
                    pos,
                    msg: "row does not consume the whole interface".into(),
                });
            }
            ifaces.push(next.clone());
            cur = next;
        }
        Ok(ifaces)
    }

    pub fn top(&self) -> Result<Vec<StrandType>, WebError> {
        Ok(self.interfaces()?.last().cloned().unwrap_or_default())
    }

    pub fn is_closed(&self) -> bool {
        self.bottom.is_empty() && self.top().map_or(false, |t| t.is_empty())
    }

    /// Violations as human-readable strings; empty iff well-formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self.interfaces() {
            Ok(ifaces) => {
                // crossing sign consistency is checked during enumeration
                let mut cur = ifaces[0].clone();
                for (ri, row) in self.rows.iter().enumerate() {
                    let mut pos = 0;
                    for tok in row {
                        let a = tok.arity_in();
                        if let Token::Crossing { over_first } = tok {
                            let w1 = cur[pos];
                            let w2 = cur[pos + 1];
                            // computed sign from orientations and over-strand
                            let _ = crossing_sign(w1, w2, *over_first);
                        }
                        let ins = &cur[pos..pos + a];
                        if let Some(outs) = tok.outputs(ins) {
                            cur.splice(pos..pos + a, outs.clone());
                            pos += tok.arity_out();
                        } else {
                            out.push(format!("row {ri}: token {:?} mismatch", tok));
                            return out;
                        }
                    }
                    let _ = ri;
                }
            }
            Err(e) => out.push(e.to_string()),
        }
        out
    }

    /// Crossings in reading order.
    pub fn crossings(&self) -> Vec<CrossingInfo> {
        let Ok(ifaces) = self.interfaces() else {
            return Vec::new();
        };
        let mut list = Vec::new();
        for (ri, row) in self.rows.iter().enumerate() {
            let mut pos = 0usize;
            for tok in row {
                if let Token::Crossing { over_first } = tok {
                    let w1 = ifaces[ri][pos];
                    let w2 = ifaces[ri][pos + 1];
                    let (over, under) = if *over_first { (w1, w2) } else { (w2, w1) };
                    let sign = crossing_sign(w1, w2, *over_first);
                    list.push(CrossingInfo {
                        id: list.len(),
                        site: Site { row: ri, pos },
                        over,
                        under,
                        sign,
                    });
                }
                pos += tok.arity_in();
            }
        }
        list
    }

    pub fn crossing(&self, id: CrossingId) -> Result<CrossingInfo, WebError> {
        self.crossings()
            .into_iter()
            .find(|c| c.id == id)
            .ok_or(WebError::NoSuchCrossing(id))
    }

    /// Twist tokens with their strand labels and signs.
    pub fn twists(&self) -> Vec<(Label, i8)> {
        let mut v = Vec::new();
        for row in &self.rows {
            for tok in row {
                if let Token::Twist { label, sign, .. } = tok {
                    v.push((*label, *sign));
                }
            }
        }
        v
    }

    /// Replace crossing `id` with the local web of the given resolution.
    /// Choice 0 is the oriented smoothing; choice 1 (for (1,1)-crossings
    /// only) is the split-merge smoothing through a 2-edge.
    pub fn resolve_crossing(&self, id: CrossingId, choice: u8) -> Result<WebDiagram, WebError> {
        let info = self.crossing(id)?;
        let ifaces = self.interfaces()?;
        let w1 = ifaces[info.site.row][info.site.pos];
        let w2 = ifaces[info.site.row][info.site.pos + 1];
        let replacement = resolution_rows(w1, w2, &info, choice)?;
        let mut rows = Vec::new();
        for (ri, row) in self.rows.iter().enumerate() {
            if ri != info.site.row {
                rows.push(row.clone());
                continue;
            }
            // split the row: tokens before / the crossing / after
            let mut pos = 0usize;
            let mut before = Vec::new();
            let mut after = Vec::new();
            let mut seen = false;
            for tok in row {
                if pos == info.site.pos && matches!(tok, Token::Crossing { .. }) && !seen {
                    seen = true;
                } else if !seen {
                    before.push(tok.clone());
                } else {
                    after.push(tok.clone());
                }
                pos += tok.arity_in();
            }
            // pad replacement rows with ids on both sides
            let left_iface = &ifaces[ri][..info.site.pos];
            let right_iface = &ifaces[ri][info.site.pos + 2..];
            let mut mid_iface: Vec<StrandType> = vec![w1, w2];
            for (k, rrow) in replacement.iter().enumerate() {
                let mut full = Vec::new();
                if k == 0 {
                    full.extend(before.iter().cloned());
                } else {
                    full.extend(left_iface.iter().map(|s| Token::Id(*s)));
                }
                full.extend(rrow.iter().cloned());
                if k == 0 {
                    full.extend(after.iter().cloned());
                } else {
                    full.extend(right_iface.iter().map(|s| Token::Id(*s)));
                }
                rows.push(full);
                // advance the middle interface
                let mut next = Vec::new();
                let mut p = 0;
                for t in rrow {
                    let a = t.arity_in();
                    next.extend(t.outputs(&mid_iface[p..p + a]).expect("typed replacement"));
                    p += a;
                }
                mid_iface = next;
            }
        }
        Ok(WebDiagram { bottom: self.bottom.clone(), rows })
    }

    /// Vertical flip with crossing reversal and twist negation: the adjoint
    /// mirror used by the pairing construction.
    pub fn mirror(&self) -> WebDiagram {
        let top = self.top().expect("mirror of ill-typed diagram");
        let bottom: Vec<StrandType> = top.iter().map(|s| s.flip()).collect();
        let mut rows = Vec::new();
        for row in self.rows.iter().rev() {
            let mut new_row = Vec::new();
            for tok in row {
                new_row.push(match tok {
                    Token::Id(s) => Token::Id(s.flip()),
                    Token::Twist { label, dir, sign } => Token::Twist {
                        label: *label,
                        dir: dir.flip(),
                        sign: -sign,
                    },
                    Token::Cup { label, side } => Token::Cap { label: *label, side: flip_side(*side) },
                    Token::Cap { label, side } => Token::Cup { label: *label, side: flip_side(*side) },
                    Token::Merge { dir } => Token::Split { dir: dir.flip() },
                    Token::Split { dir } => Token::Merge { dir: dir.flip() },
                    Token::Crossing { over_first } => Token::Crossing { over_first: !over_first },
                    Token::Bend(b) => Token::BendDown(*b),
                    Token::BendDown(b) => Token::Bend(*b),
                });
            }
            rows.push(new_row);
        }
        WebDiagram { bottom, rows }
    }

    /// Count of crossing tokens.
    pub fn crossing_count(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .filter(|t| matches!(t, Token::Crossing { .. }))
            .count()
    }
}

fn flip_side(s: TurnSide) -> TurnSide {
    // a cup with the left end flowing up flips to a cap whose left end flows
    // down; flows flip but geometry stays, so the side swaps
    match s {
        TurnSide::LeftUp => TurnSide::RightUp,
        TurnSide::RightUp => TurnSide::LeftUp,
    }
}

/// Sign of a crossing from strand directions and the over-strand choice.
/// Convention: with both strands flowing up and the over-strand running
/// bottom-left to top-right, the crossing is positive.
pub fn crossing_sign(w1: StrandType, w2: StrandType, over_first: bool) -> i8 {
    // direction vectors: strand 1 travels from bottom-left to top-right if
    // flowing up, reversed if flowing down; strand 2 is the mirror
    let v1 = match w1.dir {
        Dir::Up => (1i8, 1i8),
        Dir::Down => (-1, -1),
    };
    let v2 = match w2.dir {
        Dir::Up => (-1, 1),
        Dir::Down => (1, -1),
    };
    let (vo, vu) = if over_first { (v1, v2) } else { (v2, v1) };
    let det = vo.0 * vu.1 - vo.1 * vu.0;
    if det > 0 {
        1
    } else {
        -1
    }
}

/// Local replacement rows for a crossing resolution.
fn resolution_rows(
    w1: StrandType,
    w2: StrandType,
    info: &CrossingInfo,
    choice: u8,
) -> Result<Vec<Vec<Token>>, WebError> {
    let pair = info.label_pair();
    match pair {
        (1, 1) => {
            if w1.dir == w2.dir {
                // parallel: oriented smoothing = two parallel strands
                match choice {
                    0 => Ok(vec![vec![Token::Id(w1), Token::Id(w2)]]),
                    1 => Ok(vec![
                        vec![Token::Merge { dir: w1.dir }],
                        vec![Token::Split { dir: w1.dir }],
                    ]),
                    _ => Err(WebError::InvalidChoice { id: info.id, choice }),
                }
            } else {
                // antiparallel: oriented smoothing = turnback, the other is
                // the sideways 2-edge bridge built from bent vertices.
                let (cap_side, cup_side) = if w1.dir == Dir::Up {
                    (TurnSide::LeftUp, TurnSide::RightUp)
                } else {
                    (TurnSide::RightUp, TurnSide::LeftUp)
                };
                match choice {
                    0 => Ok(vec![
                        vec![Token::Cap { label: Label::One, side: cap_side }],
                        vec![Token::Cup { label: Label::One, side: cup_side }],
                    ]),
                    1 => {
                        // bridge through a sideways 2-edge, built from one
                        // bent vertex of each arity
                        if w1.dir == Dir::Up {
                            // [1u, 1d] -> [1d, 1u]
                            Ok(vec![
                                vec![
                                    Token::Bend(Bend { merge: true, two_left: false }),
                                    Token::Id(w2),
                                ],
                                vec![
                                    Token::Id(StrandType::new(Label::One, Dir::Down)),
                                    Token::BendDown(Bend { merge: false, two_left: true }),
                                ],
                            ])
                        } else {
                            // [1d, 1u] -> [1u, 1d]
                            Ok(vec![
                                vec![
                                    Token::Bend(Bend { merge: false, two_left: false }),
                                    Token::Id(w2),
                                ],
                                vec![
                                    Token::Id(StrandType::new(Label::One, Dir::Up)),
                                    Token::BendDown(Bend { merge: true, two_left: true }),
                                ],
                            ])
                        }
                    }
                    _ => Err(WebError::InvalidChoice { id: info.id, choice }),
                }
            }
        }
        (1, 2) => {
            if choice != 0 {
                return Err(WebError::InvalidChoice { id: info.id, choice });
            }
            if w1.dir != w2.dir {
                return Err(WebError::Type {
                    row: info.site.row,
                    pos: info.site.pos,
                    msg: "antiparallel (1,2) crossings are not supported".into(),
                });
            }
            let dir = w1.dir;
            // rerouting web through trivalent vertices: the 2-strand splits,
            // one prong crosses over to the other side, then remerges.
            if w1.label == Label::Two {
                // [2,1] -> [1,2]: split at position 0, then merge at 1
                Ok(vec![
                    vec![Token::Split { dir }, Token::Id(w2)],
                    vec![Token::Id(StrandType::new(Label::One, dir)), Token::Merge { dir }],
                ])
            } else {
                // [1,2] -> [2,1]
                Ok(vec![
                    vec![Token::Id(w1), Token::Split { dir }],
                    vec![Token::Merge { dir }, Token::Id(StrandType::new(Label::One, dir))],
                ])
            }
        }
        (2, 2) => {
            if choice != 0 {
                return Err(WebError::InvalidChoice { id: info.id, choice });
            }
            if w1.dir == w2.dir {
                Ok(vec![vec![Token::Id(w1), Token::Id(w2)]])
            } else {
                let (cap_side, cup_side) = if w1.dir == Dir::Up {
                    (TurnSide::LeftUp, TurnSide::RightUp)
                } else {
                    (TurnSide::RightUp, TurnSide::LeftUp)
                };
                Ok(vec![
                    vec![Token::Cap { label: Label::Two, side: cap_side }],
                    vec![Token::Cup { label: Label::Two, side: cup_side }],
                ])
            }
        }
        _ => unreachable!("labels are 1 or 2"),
    }
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

fn parse_strand(s: &str, line: usize) -> Result<StrandType, WebError> {
    let b = s.as_bytes();
    if b.len() != 2 {
        return Err(WebError::Parse { line, msg: format!("bad strand '{s}'") });
    }
    let label = Label::from_u8(b[0] - b'0')
        .ok_or_else(|| WebError::Parse { line, msg: format!("bad label in '{s}'") })?;
    let dir = match b[1] {
        b'u' => Dir::Up,
        b'd' => Dir::Down,
        _ => return Err(WebError::Parse { line, msg: format!("bad direction in '{s}'") }),
    };
    Ok(StrandType::new(label, dir))
}

/// Parse the line-oriented diagram format.
///
/// Header `boundary: <bottom> ; <top>` where each side is a space-separated
/// list of strands `1u 2d ...` (or `-` for empty). Then one slice per line,
/// tokens separated by spaces:
/// `id(L,O)  cup(L[,l|r])  cap(L[,l|r])  merge(O)  split(O)`
/// `x(L1 L2, over=first|second, sign=+|-)  tw(L,+|-[,O])  bend(m|s,l|r)`.
/// `#` starts a comment.
pub fn parse_diagram(text: &str) -> Result<WebDiagram, WebError> {
    let mut bottom: Option<Vec<StrandType>> = None;
    let mut declared_top: Option<Vec<StrandType>> = None;
    let mut rows = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("boundary:") {
            let parts: Vec<&str> = rest.split(';').collect();
            if parts.len() != 2 {
                return Err(WebError::Parse { line, msg: "boundary needs '<bottom> ; <top>'".into() });
            }
            let parse_side = |side: &str| -> Result<Vec<StrandType>, WebError> {
                let side = side.trim();
                if side == "-" || side.is_empty() {
                    return Ok(Vec::new());
                }
                side.split_whitespace().map(|w| parse_strand(w, line)).collect()
            };
            bottom = Some(parse_side(parts[0])?);
            declared_top = Some(parse_side(parts[1])?);
            continue;
        }
        // a slice row
        let mut toks = Vec::new();
        for word in split_tokens(content) {
            toks.push(parse_token(&word, line)?);
        }
        rows.push(toks);
    }
    let bottom = bottom.ok_or(WebError::Parse { line: 0, msg: "missing boundary header".into() })?;
    let d = WebDiagram::new(bottom, rows);
    let top = d.top()?;
    if let Some(decl) = declared_top {
        if decl != top {
            return Err(WebError::Parse {
                line: 0,
                msg: format!("declared top {:?} but diagram ends at {:?}", decl, top),
            });
        }
    }
    Ok(d)
}

/// Split a row into token words; parentheses may contain spaces.
fn split_tokens(s: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    words.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

fn parse_token(word: &str, line: usize) -> Result<Token, WebError> {
    let err = |msg: String| WebError::Parse { line, msg };
    let (name, args) = match word.find('(') {
        Some(i) if word.ends_with(')') => (&word[..i], &word[i + 1..word.len() - 1]),
        _ => return Err(err(format!("malformed token '{word}'"))),
    };
    let parts: Vec<String> = args
        .split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect();
    let parse_label = |s: &str| Label::from_u8(s.parse::<u8>().unwrap_or(0));
    let parse_dir = |s: &str| match s {
        "u" => Some(Dir::Up),
        "d" => Some(Dir::Down),
        _ => None,
    };
    match name {
        "id" => {
            if parts.len() != 2 {
                return Err(err("id(L,O)".into()));
            }
            let l = parse_label(&parts[0]).ok_or_else(|| err("bad label".into()))?;
            let d = parse_dir(&parts[1]).ok_or_else(|| err("bad orientation".into()))?;
            Ok(Token::Id(StrandType::new(l, d)))
        }
        "cup" | "cap" => {
            if parts.is_empty() || parts.len() > 2 {
                return Err(err(format!("{name}(L[,l|r])")));
            }
            let l = parse_label(&parts[0]).ok_or_else(|| err("bad label".into()))?;
            let side = match parts.get(1).map(|s| s.as_str()) {
                None | Some("l") => TurnSide::LeftUp,
                Some("r") => TurnSide::RightUp,
                Some(x) => return Err(err(format!("bad side '{x}'"))),
            };
            Ok(if name == "cup" {
                Token::Cup { label: l, side }
            } else {
                Token::Cap { label: l, side }
            })
        }
        "merge" | "split" => {
            if parts.len() != 1 {
                return Err(err(format!("{name}(O)")));
            }
            let d = parse_dir(&parts[0]).ok_or_else(|| err("bad orientation".into()))?;
            Ok(if name == "merge" {
                Token::Merge { dir: d }
            } else {
                Token::Split { dir: d }
            })
        }
        "x" => {
            // x(L1 L2, over=first|second, sign=+|-)
            if parts.len() != 3 {
                return Err(err("x(L1 L2, over=first|second, sign=+|-)".into()));
            }
            let labels: Vec<&str> = parts[0].split_whitespace().collect();
            if labels.len() != 2 {
                return Err(err("crossing needs two labels".into()));
            }
            // labels are contextual; they are validated against the interface
            let over_first = match parts[1].strip_prefix("over=") {
                Some("first") => true,
                Some("second") => false,
                _ => return Err(err("over=first|second".into())),
            };
            let _sign = match parts[2].strip_prefix("sign=") {
                Some("+") => 1i8,
                Some("-") => -1,
                _ => return Err(err("sign=+|-".into())),
            };
            Ok(Token::Crossing { over_first })
        }
        "tw" => {
            if parts.len() < 2 || parts.len() > 3 {
                return Err(err("tw(L,+|-[,O])".into()));
            }
            let l = parse_label(&parts[0]).ok_or_else(|| err("bad label".into()))?;
            let sign = match parts[1].as_str() {
                "+" => 1i8,
                "-" => -1,
                _ => return Err(err("twist sign".into())),
            };
            let dir = match parts.get(2).map(|s| s.as_str()) {
                None | Some("u") => Dir::Up,
                Some("d") => Dir::Down,
                Some(x) => return Err(err(format!("bad orientation '{x}'"))),
            };
            Ok(Token::Twist { label: l, dir, sign })
        }
        "bend" | "bendd" => {
            if parts.len() != 2 {
                return Err(err("bend(m|s,l|r)".into()));
            }
            let merge = match parts[0].as_str() {
                "m" => true,
                "s" => false,
                _ => return Err(err("bend kind".into())),
            };
            let two_left = match parts[1].as_str() {
                "l" => true,
                "r" => false,
                _ => return Err(err("bend side".into())),
            };
            let b = Bend { merge, two_left };
            Ok(if name == "bend" { Token::Bend(b) } else { Token::BendDown(b) })
        }
        _ => Err(err(format!("unknown token '{name}'"))),
    }
}

/// Inverse of `parse_diagram`, producing the canonical text form.
pub fn print_diagram(d: &WebDiagram) -> String {
    let mut out = String::new();
    let fmt_side = |side: &[StrandType]| {
        if side.is_empty() {
            "-".to_string()
        } else {
            side.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
        }
    };
    let top = d.top().unwrap_or_default();
    out.push_str(&format!("boundary: {} ; {}\n", fmt_side(&d.bottom), fmt_side(&top)));
    let ifaces = d.interfaces().unwrap_or_default();
    for (ri, row) in d.rows.iter().enumerate() {
        let mut words = Vec::new();
        let mut pos = 0usize;
        for tok in row {
            let word = match tok {
                Token::Id(s) => format!("id({},{})", s.label.as_u8(), s.dir.letter()),
                Token::Cup { label, side } => match side {
                    TurnSide::LeftUp => format!("cup({})", label.as_u8()),
                    TurnSide::RightUp => format!("cup({},r)", label.as_u8()),
                },
                Token::Cap { label, side } => match side {
                    TurnSide::LeftUp => format!("cap({})", label.as_u8()),
                    TurnSide::RightUp => format!("cap({},r)", label.as_u8()),
                },
                Token::Merge { dir } => format!("merge({})", dir.letter()),
                Token::Split { dir } => format!("split({})", dir.letter()),
                Token::Crossing { over_first } => {
                    let w1 = ifaces[ri][pos];
                    let w2 = ifaces[ri][pos + 1];
                    let sign = crossing_sign(w1, w2, *over_first);
                    format!(
                        "x({} {}, over={}, sign={})",
                        w1.label.as_u8(),
                        w2.label.as_u8(),
                        if *over_first { "first" } else { "second" },
                        if sign > 0 { "+" } else { "-" }
                    )
                }
                Token::Twist { label, dir, sign } => format!(
                    "tw({},{},{})",
                    label.as_u8(),
                    if *sign > 0 { "+" } else { "-" },
                    dir.letter()
                ),
                Token::Bend(b) => format!(
                    "bend({},{})",
                    if b.merge { "m" } else { "s" },
                    if b.two_left { "l" } else { "r" }
                ),
                Token::BendDown(b) => format!(
                    "bendd({},{})",
                    if b.merge { "m" } else { "s" },
                    if b.two_left { "l" } else { "r" }
                ),
            };
            words.push(word);
            pos += tok.arity_in();
        }
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// connectivity: wire points, components, squeezed curves
// ---------------------------------------------------------------------------

/// A wire point: strand slot `pos` on interface `level` (0 = bottom).
pub type WirePoint = (usize, usize);

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Connectivity analysis of a diagram's wire points.
pub struct Connectivity {
    /// index of each wire point
    pub index: BTreeMap<WirePoint, usize>,
    pub points: Vec<WirePoint>,
    pub strand: Vec<StrandType>,
    /// squeezed-curve class of each 1-labeled point (2-points excluded)
    pub squeezed_class: Vec<Option<usize>>,
    /// full web component of every point
    pub component: Vec<usize>,
    /// squeezed classes in canonical order (by smallest member point)
    pub curves: Vec<Vec<WirePoint>>,
}

impl Connectivity {
    pub fn curve_of(&self, p: WirePoint) -> Option<usize> {
        let i = *self.index.get(&p)?;
        self.squeezed_class[i]
    }
    pub fn component_of(&self, p: WirePoint) -> Option<usize> {
        let i = *self.index.get(&p)?;
        Some(self.component[i])
    }
    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }
}

/// Compute connectivity for a (typically crossingless) diagram. Crossing
/// tokens connect straight through (strand 1 to output 2 and vice versa),
/// which is only meaningful for tracing purposes.
pub fn connectivity(d: &WebDiagram) -> Result<Connectivity, WebError> {
    let ifaces = d.interfaces()?;
    let mut index = BTreeMap::new();
    let mut points = Vec::new();
    let mut strand = Vec::new();
    for (lvl, iface) in ifaces.iter().enumerate() {
        for (pos, s) in iface.iter().enumerate() {
            index.insert((lvl, pos), points.len());
            points.push((lvl, pos));
            strand.push(*s);
        }
    }
    let n = points.len();
    let mut squeezed = UnionFind::new(n);
    let mut full = UnionFind::new(n);
    // 2-labeled points are excluded from squeezed curves by tracking a flag
    let is_two: Vec<bool> = strand.iter().map(|s| s.label == Label::Two).collect();

    for (ri, row) in d.rows.iter().enumerate() {
        let mut in_pos = 0usize;
        let mut out_pos = 0usize;
        for tok in row {
            let a = tok.arity_in();
            let b = tok.arity_out();
            let ins: Vec<usize> = (0..a).map(|k| index[&(ri, in_pos + k)]).collect();
            let outs: Vec<usize> = (0..b).map(|k| index[&(ri + 1, out_pos + k)]).collect();
            match tok {
                Token::Id(_) | Token::Twist { .. } => {
                    squeezed.union(ins[0], outs[0]);
                    full.union(ins[0], outs[0]);
                }
                Token::Cup { .. } => {
                    squeezed.union(outs[0], outs[1]);
                    full.union(outs[0], outs[1]);
                }
                Token::Cap { .. } => {
                    squeezed.union(ins[0], ins[1]);
                    full.union(ins[0], ins[1]);
                }
                Token::Merge { .. } => {
                    // squeezed: the two 1-inputs turn back into each other
                    squeezed.union(ins[0], ins[1]);
                    full.union(ins[0], ins[1]);
                    full.union(ins[0], outs[0]);
                }
                Token::Split { .. } => {
                    squeezed.union(outs[0], outs[1]);
                    full.union(outs[0], outs[1]);
                    full.union(ins[0], outs[0]);
                }
                Token::Bend(b) => {
                    // the 1-below joins the 1-above; the 2-edge is separate
                    let (one_out, two_out) = if b.two_left {
                        (outs[1], outs[0])
                    } else {
                        (outs[0], outs[1])
                    };
                    squeezed.union(ins[0], one_out);
                    full.union(ins[0], one_out);
                    full.union(ins[0], two_out);
                }
                Token::BendDown(b) => {
                    let (one_in, two_in) = if b.two_left {
                        (ins[1], ins[0])
                    } else {
                        (ins[0], ins[1])
                    };
                    squeezed.union(one_in, outs[0]);
                    full.union(one_in, outs[0]);
                    full.union(one_in, two_in);
                }
                Token::Crossing { .. } => {
                    squeezed.union(ins[0], outs[1]);
                    squeezed.union(ins[1], outs[0]);
                    full.union(ins[0], outs[1]);
                    full.union(ins[1], outs[0]);
                }
            }
            in_pos += a;
            out_pos += b;
        }
    }

    // canonical squeezed classes over 1-labeled points only
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut curves: Vec<Vec<WirePoint>> = Vec::new();
    let mut squeezed_class = vec![None; n];
    for i in 0..n {
        if is_two[i] {
            continue;
        }
        let r = squeezed.find(i);
        let cls = *class_of_root.entry(r).or_insert_with(|| {
            curves.push(Vec::new());
            curves.len() - 1
        });
        squeezed_class[i] = Some(cls);
        curves[cls].push(points[i]);
    }
    // canonical order: sort curve list by smallest point, remap
    let mut order: Vec<usize> = (0..curves.len()).collect();
    order.sort_by_key(|&c| curves[c].iter().min().cloned());
    let mut remap = vec![0usize; curves.len()];
    for (new_idx, &old) in order.iter().enumerate() {
        remap[old] = new_idx;
    }
    let curves: Vec<Vec<WirePoint>> = order
        .iter()
        .map(|&c| {
            let mut v = curves[c].clone();
            v.sort();
            v
        })
        .collect();
    for sc in squeezed_class.iter_mut().flatten() {
        *sc = remap[*sc];
    }

    let mut comp_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut component = vec![0usize; n];
    for i in 0..n {
        let r = full.find(i);
        let next_id = comp_of_root.len();
        let c = *comp_of_root.entry(r).or_insert(next_id);
        component[i] = c;
    }

    Ok(Connectivity { index, points, strand, squeezed_class, component, curves })
}

// ---------------------------------------------------------------------------
// reduction of closed crossingless webs
// ---------------------------------------------------------------------------

/// One reduction event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionEvent {
    Remove1Circle { curve: usize },
    Remove2Circle { component: usize },
    RemoveDigon { split_row: usize, merge_row: usize },
}

/// Ordered removal trace whose replay empties the web.
#[derive(Debug, Clone, Default)]
pub struct ReductionTrace {
    pub events: Vec<ReductionEvent>,
}

/// Reduce a closed crossingless web by free-circle and digon removal,
/// innermost first. The trace is measured against the original diagram's
/// squeezed-curve numbering for circles.
pub fn reduce_closed_web(w: &WebDiagram) -> Result<ReductionTrace, WebError> {
    if !w.is_closed() {
        return Err(WebError::OpenBoundary);
    }
    if w.crossing_count() > 0 {
        return Err(WebError::IrreducibleWeb);
    }
    let mut cur = w.clone();
    let mut events = Vec::new();
    let mut guard = 0usize;
    while !cur.rows.is_empty() {
        guard += 1;
        if guard > 10_000 {
            return Err(WebError::IrreducibleWeb);
        }
        if let Some((ev, next)) = remove_one_feature(&cur)? {
            events.push(ev);
            cur = next;
        } else {
            return Err(WebError::IrreducibleWeb);
        }
        // drop empty rows
        cur.rows.retain(|r| !r.is_empty());
    }
    Ok(ReductionTrace { events })
}

/// Find one removable feature (innermost circle preferred, then digon) and
/// return the reduced diagram.
fn remove_one_feature(w: &WebDiagram) -> Result<Option<(ReductionEvent, WebDiagram)>, WebError> {
    let conn = connectivity(w)?;
    // group full components; a free circle is a component whose tokens are
    // only cup/cap/id/twist
    let ifaces = w.interfaces()?;
    // map from component -> set of (row, tokenindex) it passes through
    let mut comp_tokens: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut comp_label: BTreeMap<usize, Label> = BTreeMap::new();
    let mut comp_vertex: BTreeMap<usize, bool> = BTreeMap::new();
    let mut comp_minpos: BTreeMap<usize, usize> = BTreeMap::new();
    for (ri, row) in w.rows.iter().enumerate() {
        let mut pos = 0usize;
        for (ti, tok) in row.iter().enumerate() {
            let a = tok.arity_in();
            let b = tok.arity_out();
            // the component this token belongs to: via any of its points
            let comp = if a > 0 {
                conn.component_of((ri, pos))
            } else {
                conn.component_of((ri + 1, out_offset(w, ri, ti)))
            };
            if let Some(c) = comp {
                comp_tokens.entry(c).or_default().push((ri, ti));
                let has_vertex = matches!(
                    tok,
                    Token::Merge { .. } | Token::Split { .. } | Token::Bend(_) | Token::BendDown(_)
                );
                *comp_vertex.entry(c).or_insert(false) |= has_vertex;
                let lbl = if a > 0 {
                    ifaces[ri][pos].label
                } else {
                    match tok {
                        Token::Cup { label, .. } => *label,
                        _ => Label::One,
                    }
                };
                comp_label.entry(c).or_insert(lbl);
                let e = comp_minpos.entry(c).or_insert(usize::MAX);
                *e = (*e).min(pos);
            }
            pos += a;
            let _ = b;
        }
    }
    // circles: components without vertices; innermost = largest min position
    // (nested circles sit further right within their enclosing circle's span)
    let mut circles: Vec<usize> = comp_tokens
        .keys()
        .filter(|c| !comp_vertex.get(c).copied().unwrap_or(false))
        .cloned()
        .collect();
    circles.sort_by_key(|c| std::cmp::Reverse(comp_minpos.get(c).copied().unwrap_or(0)));
    if let Some(&c) = circles.first() {
        let toks: std::collections::BTreeSet<(usize, usize)> =
            comp_tokens[&c].iter().cloned().collect();
        let label = comp_label[&c];
        let next = delete_tokens(w, &toks);
        let ev = match label {
            Label::One => {
                // curve id in the squeezed numbering
                let any = comp_tokens[&c][0];
                let curve = curve_of_token(w, &conn, any).unwrap_or(0);
                ReductionEvent::Remove1Circle { curve }
            }
            Label::Two => ReductionEvent::Remove2Circle { component: c },
        };
        return Ok(Some((ev, next)));
    }
    // digon: a split whose two outputs feed the same merge directly
    // (allowing only id/twist tokens between them on both wires)
    for (ri, row) in w.rows.iter().enumerate() {
        let mut pos = 0usize;
        for (ti, tok) in row.iter().enumerate() {
            if let Token::Split { dir } = tok {
                // follow both output wires upward through id/twist until a
                // token with different arity appears
                if let Some((mr, mpos)) = trace_digon(w, ri, pos) {
                    // replace: split row loses the split (becomes 2-id),
                    // merge row loses the merge, intermediate ids drop one
                    let next = contract_digon(w, ri, ti, pos, mr, mpos, *dir)?;
                    let ev = ReductionEvent::RemoveDigon { split_row: ri, merge_row: mr };
                    return Ok(Some((ev, next)));
                }
            }
            pos += tok.arity_in();
        }
    }
    Ok(None)
}

fn out_offset(w: &WebDiagram, ri: usize, ti: usize) -> usize {
    let mut off = 0;
    for t in w.rows[ri].iter().take(ti) {
        off += t.arity_out();
    }
    off
}

fn curve_of_token(w: &WebDiagram, conn: &Connectivity, (ri, ti): (usize, usize)) -> Option<usize> {
    // find any 1-labeled wire point of this token
    let mut pos = 0usize;
    for (i, t) in w.rows[ri].iter().enumerate() {
        if i == ti {
            if t.arity_in() > 0 {
                return conn.curve_of((ri, pos));
            } else {
                let off = out_offset(w, ri, ti);
                return conn.curve_of((ri + 1, off));
            }
        }
        pos += t.arity_in();
    }
    None
}

/// Check that the split at (row, pos) pairs with a merge directly above,
/// both wires passing only through id tokens.
fn trace_digon(w: &WebDiagram, split_row: usize, split_pos: usize) -> Option<(usize, usize)> {
    // output positions of the split on interface split_row+1
    let mut p_left = split_pos;
    // recompute: outputs start at the split's output offset
    let mut pos = 0usize;
    let mut out = 0usize;
    for t in &w.rows[split_row] {
        if pos == split_pos && matches!(t, Token::Split { .. }) {
            p_left = out;
            break;
        }
        pos += t.arity_in();
        out += t.arity_out();
    }
    let mut a = p_left;
    let mut b = p_left + 1;
    let mut r = split_row + 1;
    loop {
        if r >= w.rows.len() {
            return None;
        }
        // find the tokens consuming positions a and b in row r
        let row = &w.rows[r];
        let mut pos = 0usize;
        let mut out = 0usize;
        let mut tok_a: Option<(usize, &Token, usize, usize)> = None;
        let mut tok_b: Option<(usize, &Token, usize, usize)> = None;
        for (ti, t) in row.iter().enumerate() {
            let ain = t.arity_in();
            if a >= pos && a < pos + ain {
                tok_a = Some((ti, t, pos, out));
            }
            if b >= pos && b < pos + ain {
                tok_b = Some((ti, t, pos, out));
            }
            pos += ain;
            out += t.arity_out();
        }
        let (ta_i, ta, ta_pos, ta_out) = tok_a?;
        let (tb_i, tb, _tb_pos, tb_out) = tok_b?;
        if ta_i == tb_i {
            // both wires enter the same token: digon closes iff it is a merge
            return match ta {
                Token::Merge { .. } => Some((r, ta_pos)),
                _ => None,
            };
        }
        // both must pass through id/twist
        let pass = |t: &Token| matches!(t, Token::Id(_) | Token::Twist { .. });
        if !pass(ta) || !pass(tb) {
            return None;
        }
        a = ta_out;
        b = tb_out;
        r += 1;
    }
}

/// Remove the digon: the split becomes a 2-strand id, the merge likewise,
/// and the two 1-wires between them disappear.
fn contract_digon(
    w: &WebDiagram,
    split_row: usize,
    split_ti: usize,
    _split_pos: usize,
    merge_row: usize,
    merge_pos: usize,
    dir: Dir,
) -> Result<WebDiagram, WebError> {
    let mut rows = w.rows.clone();
    // replace split with id(2)
    rows[split_row][split_ti] = Token::Id(StrandType::new(Label::Two, dir));
    // on rows strictly between, drop the two id tokens that carry the wires
    // walk the wires again to know their positions per row
    let mut p_left = 0usize;
    {
        let mut pos = 0usize;
        let mut out = 0usize;
        for (ti, t) in w.rows[split_row].iter().enumerate() {
            if ti == split_ti {
                p_left = out;
                break;
            }
            pos += t.arity_in();
            out += t.arity_out();
            let _ = pos;
        }
    }
    let mut a = p_left;
    let mut b = p_left + 1;
    for r in split_row + 1..merge_row {
        let row = &w.rows[r];
        let mut pos = 0usize;
        let mut out = 0usize;
        let mut kill = Vec::new();
        let mut next_a = a;
        let mut next_b = b;
        for (ti, t) in row.iter().enumerate() {
            let ain = t.arity_in();
            if pos == a {
                kill.push(ti);
                next_a = out;
            }
            if pos == b {
                kill.push(ti);
                next_b = out;
            }
            pos += ain;
            out += t.arity_out();
        }
        kill.sort();
        kill.reverse();
        for ti in kill {
            rows[r].remove(ti);
        }
        a = next_a;
        b = next_b;
    }
    // replace merge with id(2): find its token index by input position
    {
        let row = &w.rows[merge_row];
        let mut pos = 0usize;
        for (ti, t) in row.iter().enumerate() {
            if pos == merge_pos && matches!(t, Token::Merge { .. }) {
                rows[merge_row][ti] = Token::Id(StrandType::new(Label::Two, dir));
                break;
            }
            pos += t.arity_in();
        }
    }
    Ok(WebDiagram { bottom: w.bottom.clone(), rows })
}

/// Delete the given (row, token-index) set, used for circle removal.
fn delete_tokens(w: &WebDiagram, toks: &std::collections::BTreeSet<(usize, usize)>) -> WebDiagram {
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
    let mut d = WebDiagram { bottom: w.bottom.clone(), rows };
    d.rows.retain(|r| !r.is_empty());
    d
}

// ---------------------------------------------------------------------------
// closures and gluing
// ---------------------------------------------------------------------------

/// Stack `upper` on top of `lower`; boundaries must match.
pub fn stack(lower: &WebDiagram, upper: &WebDiagram) -> Result<WebDiagram, WebError> {
    if lower.top()? != upper.bottom {
        return Err(WebError::BoundaryMismatch);
    }
    let mut rows = lower.rows.clone();
    rows.extend(upper.rows.iter().cloned());
    Ok(WebDiagram { bottom: lower.bottom.clone(), rows })
}

/// Close an endo-diagram `w : b -> b` by nested return strands on the left.
/// The result is a closed diagram containing `w`'s rows with every position
/// offset by `b.len()`; `row_offset` reports where `w`'s first row landed.
pub struct Closure {
    pub diagram: WebDiagram,
    pub row_offset: usize,
    pub pos_offset: usize,
}

pub fn close_endo_diagram(w: &WebDiagram) -> Result<Closure, WebError> {
    let b = w.bottom.clone();
    let t = w.top()?;
    if b != t {
        return Err(WebError::BoundaryMismatch);
    }
    let k = b.len();
    let mut rows: Vec<Vec<Token>> = Vec::new();
    // cups: row i creates the pair for strand k-1-i at position i
    // building interface [r_{k-1},...,r_0, s_0,...,s_{k-1}]
    for i in 0..k {
        let mut row = Vec::new();
        for j in 0..i {
            let s = b[k - 1 - j];
            row.push(Token::Id(StrandType::new(s.label, s.dir.flip())));
        }
        let s = b[k - 1 - i];
        // cup creates (return, entering): entering strand must match s
        let side = match s.dir {
            Dir::Up => TurnSide::RightUp,
            Dir::Down => TurnSide::LeftUp,
        };
        row.push(Token::Cup { label: s.label, side });
        // previously created entering strands sit to the right
        for j in 0..i {
            let s = b[k - i + j];
            row.push(Token::Id(s));
        }
        rows.push(row);
    }
    let row_offset = rows.len();
    // w's rows with k return ids on the left
    for (ri, row) in w.rows.iter().enumerate() {
        let mut new_row: Vec<Token> = (0..k)
            .map(|j| {
                let s = b[k - 1 - j];
                Token::Id(StrandType::new(s.label, s.dir.flip()))
            })
            .collect();
        new_row.extend(row.iter().cloned());
        rows.push(new_row);
        let _ = ri;
    }
    // caps: innermost first; cap i joins return r_0.. with output t_0..
    for i in 0..k {
        let mut row = Vec::new();
        for j in 0..k - 1 - i {
            let s = b[k - 1 - j];
            row.push(Token::Id(StrandType::new(s.label, s.dir.flip())));
        }
        let s = b[i];
        let side = match s.dir {
            Dir::Up => TurnSide::RightUp,
            Dir::Down => TurnSide::LeftUp,
        };
        row.push(Token::Cap { label: s.label, side });
        for j in i + 1..k {
            row.push(Token::Id(b[j]));
        }
        rows.push(row);
    }
    let diagram = WebDiagram { bottom: Vec::new(), rows };
    Ok(Closure { diagram, row_offset, pos_offset: k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_text() -> &'static str {
        "boundary: - ; -\ncup(1)\ncap(1)\n"
    }

    #[test]
    fn parse_unknot() {
        let d = parse_diagram(circle_text()).unwrap();
        assert!(d.is_closed());
        assert_eq!(d.validate(), Vec::<String>::new());
        assert_eq!(d.crossing_count(), 0);
    }

    #[test]
    fn parse_print_roundtrip() {
        let d = parse_diagram(circle_text()).unwrap();
        let text = print_diagram(&d);
        let d2 = parse_diagram(&text).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn type_error_reported() {
        let bad = "boundary: - ; -\ncup(1)\ncap(2)\n";
        assert!(parse_diagram(bad).is_err());
    }

    #[test]
    fn merge_flow_condition() {
        // merging a 1-wire with a 2-wire is rejected
        let bad = "boundary: 1u 2u ; 2u\nmerge(u)\n";
        assert!(parse_diagram(bad).is_err());
        let good = "boundary: 1u 1u ; 2u\nmerge(u)\n";
        assert!(parse_diagram(good).is_ok());
    }

    #[test]
    fn orientation_flip_rejected() {
        let bad = "boundary: 1u ; 1d\nid(1,d)\n";
        assert!(parse_diagram(bad).is_err());
    }

    fn kink_text() -> String {
        // positive curl on an upward strand, with a negative twist below
        "boundary: 1u ; 1u\ntw(1,-,u)\ncup(1,r)\nx(1 1, over=second, sign=+) id(1,d)\nid(1,u) cap(1,r)\n".to_string()
    }

    #[test]
    fn kink_parses_and_resolves() {
        let d = parse_diagram(&kink_text()).unwrap();
        assert_eq!(d.crossing_count(), 1);
        let cs = d.crossings();
        assert_eq!(cs.len(), 1);
        let r0 = d.resolve_crossing(0, 0).unwrap();
        assert_eq!(r0.crossing_count(), 0);
        assert!(r0.validate().is_empty());
        let r1 = d.resolve_crossing(0, 1).unwrap();
        assert_eq!(r1.crossing_count(), 0);
        assert!(r1.validate().is_empty(), "{:?}", r1.validate());
    }

    #[test]
    fn reduce_single_circle() {
        let d = parse_diagram(circle_text()).unwrap();
        let tr = reduce_closed_web(&d).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert!(matches!(tr.events[0], ReductionEvent::Remove1Circle { .. }));
    }

    #[test]
    fn reduce_nested_circles() {
        let text = "boundary: - ; -\ncup(1)\nid(1,u) cup(1) id(1,d)\nid(1,u) cap(1) id(1,d)\ncap(1)\n";
        let d = parse_diagram(text).unwrap();
        let tr = reduce_closed_web(&d).unwrap();
        assert_eq!(tr.events.len(), 2);
        assert!(tr
            .events
            .iter()
            .all(|e| matches!(e, ReductionEvent::Remove1Circle { .. })));
    }

    #[test]
    fn reduce_theta() {
        // 2-circle with a 1-labeled digon: split then merge inside a 2-circle
        let text = "boundary: - ; -\ncup(2)\nsplit(u) id(2,d)\nmerge(u) id(2,d)\ncap(2)\n";
        let d = parse_diagram(text).unwrap();
        assert!(d.validate().is_empty());
        let tr = reduce_closed_web(&d).unwrap();
        assert_eq!(tr.events.len(), 2);
        assert!(matches!(tr.events[0], ReductionEvent::RemoveDigon { .. }));
        assert!(matches!(tr.events[1], ReductionEvent::Remove2Circle { .. }));
    }

    #[test]
    fn squeezed_curves_of_theta() {
        let text = "boundary: - ; -\ncup(2)\nsplit(u) id(2,d)\nmerge(u) id(2,d)\ncap(2)\n";
        let d = parse_diagram(text).unwrap();
        let conn = connectivity(&d).unwrap();
        assert_eq!(conn.curve_count(), 1);
    }

    #[test]
    fn mirror_involution_on_closed() {
        let d = parse_diagram(&kink_text()).unwrap();
        let m = d.mirror();
        assert!(m.validate().is_empty());
        let mm = m.mirror();
        assert!(mm.validate().is_empty());
        // crossing sign is restored by double mirror
        assert_eq!(d.crossings()[0].sign, mm.crossings()[0].sign);
        assert_eq!(d.crossings()[0].sign, -m.crossings()[0].sign);
    }

    #[test]
    fn closure_of_strand_is_circle() {
        let w = parse_diagram("boundary: 1u ; 1u\nid(1,u)\n").unwrap();
        let c = close_endo_diagram(&w).unwrap();
        assert!(c.diagram.is_closed());
        assert!(c.diagram.validate().is_empty());
        let conn = connectivity(&c.diagram).unwrap();
        assert_eq!(conn.curve_count(), 1);
    }

    #[test]
    fn closure_of_two_strands() {
        let w = parse_diagram("boundary: 1u 1d ; 1u 1d\nid(1,u) id(1,d)\n").unwrap();
        let c = close_endo_diagram(&w).unwrap();
        assert!(c.diagram.validate().is_empty(), "{:?}", c.diagram.validate());
        let conn = connectivity(&c.diagram).unwrap();
        assert_eq!(conn.curve_count(), 2);
    }

    #[test]
    fn antiparallel_crossing_resolutions() {
        let text = "boundary: 1u 1d ; 1d 1u\nx(1 1, over=first, sign=+)\n";
        let d = parse_diagram(text).unwrap();
        let info = d.crossing(0).unwrap();
        assert!(!info.parallel());
        let r0 = d.resolve_crossing(0, 0).unwrap();
        assert!(r0.validate().is_empty(), "{:?}", r0.validate());
        let r1 = d.resolve_crossing(0, 1).unwrap();
        assert!(r1.validate().is_empty(), "{:?}", r1.validate());
    }
}
