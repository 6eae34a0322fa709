//! Text grammars for groups, elements, words, measures and family references.
//!
//! ```text
//! group    := Z | Z^d | Cq | Fd | Dinf | BS(1,-1) | S(d,m)
//!           | product(group, group) | wreath(group, group)
//!           | tower(group; group; …; group)          last entry is the base
//! word     := factor*            factor := atom ('^' int)?
//! atom     := x<i> | X<i> | a | A | b | B | e | '(' word ')' | '[' word ',' word ']'
//! element  := int | '(' int, … ')' | word | dinf(n,f) | bs(m,n)
//!           | '<' element '|' element '>'           product groups
//!           | '({' pos '->' value, … '},' element ')'  wreath groups
//! measure  := measure { atom "element" weight; … }
//! family   := [family] name(key=value, …)
//! ```
//!
//! `tower(A_m; …; A_1; B)` reads right to left like nested wreaths:
//! it is `A_m ≀ (… ≀ (A_1 ≀ B))`, so `tower(A; B)` equals `wreath(A, B)`.

use crate::error::{Error, Result};
use crate::group::{element, FreeWord, GroupElement, GroupSpec, WreathElement};
use crate::magnus;
use crate::measures::{families, parse_weight, FiniteMeasure, MeasureFamily, Weight};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Splits at `sep` outside brackets and quotes. `->` does not close `<`.
pub fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut in_quote = false;
    let mut start = 0;
    let mut prev = '\0';
    for (i, c) in s.char_indices() {
        match c {
            '"' => in_quote = !in_quote,
            _ if in_quote => {}
            '(' | '[' | '{' | '<' => depth += 1,
            '>' if prev == '-' => {}
            ')' | ']' | '}' | '>' => depth -= 1,
            _ if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
        prev = c;
    }
    out.push(&s[start..]);
    out
}

/// `name(body)` → `(name, body)`.
fn call(s: &str) -> Option<(&str, &str)> {
    let s = s.trim();
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    Some((s[..open].trim(), &s[open + 1..s.len() - 1]))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| perr(format!("expected a nonnegative integer for {what}, got `{}`", s.trim())))
}

pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    parse_spec_compact(&s)
}

fn parse_spec_compact(s: &str) -> Result<GroupSpec> {
    match s {
        "Z" => return Ok(GroupSpec::Lattice(1)),
        "Dinf" | "D∞" => return Ok(GroupSpec::Dihedral),
        "BS(1,-1)" => return Ok(GroupSpec::BaumslagSolitar),
        _ => {}
    }
    if let Some(d) = s.strip_prefix("Z^") {
        return GroupSpec::lattice(parse_usize(d, "Z^d")?);
    }
    if let Some((name, body)) = call(s) {
        let parts = split_top(body, if name == "tower" { ';' } else { ',' });
        return match (name, parts.as_slice()) {
            ("product", [a, b]) => Ok(GroupSpec::product(parse_spec_compact(a)?, parse_spec_compact(b)?)),
            ("wreath", [a, b]) => Ok(GroupSpec::wreath(parse_spec_compact(a)?, parse_spec_compact(b)?)),
            ("S", [d, m]) => GroupSpec::free_solvable(parse_usize(d, "rank")?, parse_usize(m, "derived length")?),
            ("tower", [.., _]) => {
                let mut specs = parts.iter().map(|p| parse_spec_compact(p)).collect::<Result<Vec<_>>>()?;
                let base = specs.pop().expect("nonempty");
                specs.reverse();
                Ok(GroupSpec::tower(specs, base))
            }
            _ => Err(perr(format!("unknown group `{s}`"))),
        };
    }
    if let Some(q) = s.strip_prefix('C') {
        return GroupSpec::cyclic(q.parse().map_err(|_| perr(format!("bad cyclic group `{s}`")))?);
    }
    if let Some(d) = s.strip_prefix('F') {
        return GroupSpec::free(parse_usize(d, "free rank")?);
    }
    Err(perr(format!("unknown group `{s}`")))
}

/// Which letters a word may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Alphabet {
    /// `x1..xd`, `X1..Xd`
    Indexed,
    /// `a, b, A, B`
    Ab,
}

struct WordParser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: Option<Alphabet>,
    text: &'a str,
}

impl<'a> WordParser<'a> {
    fn new(text: &'a str) -> Self {
        WordParser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, alphabet: None, text }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        perr(format!("{what} at position {} in word `{}`", self.pos, self.text))
    }

    fn use_alphabet(&mut self, a: Alphabet) -> Result<()> {
        match self.alphabet {
            Some(b) if b != a => Err(self.err("mixed x-letters and a/b letters")),
            _ => {
                self.alphabet = Some(a);
                Ok(())
            }
        }
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("expected an integer"))
    }

    fn word(&mut self) -> Result<FreeWord> {
        let mut w = FreeWord::identity();
        while let Some(c) = self.peek() {
            if c == ')' || c == ']' || c == ',' {
                break;
            }
            w = w.mul(&self.factor()?);
        }
        Ok(w)
    }

    fn factor(&mut self) -> Result<FreeWord> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.int()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FreeWord> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match c {
            'x' | 'X' => {
                self.use_alphabet(Alphabet::Indexed)?;
                let i = self.int()?;
                if i < 1 || i > i32::MAX as i64 {
                    return Err(self.err("generator index must be >= 1"));
                }
                Ok(FreeWord::generator(if c == 'x' { i as i32 } else { -(i as i32) }))
            }
            'a' | 'A' | 'b' | 'B' => {
                self.use_alphabet(Alphabet::Ab)?;
                let l = match c {
                    'a' => 1,
                    'A' => -1,
                    'b' => 2,
                    _ => -2,
                };
                Ok(FreeWord::generator(l))
            }
            'e' => Ok(FreeWord::identity()),
            '(' => {
                let w = self.word()?;
                self.expect(')')?;
                Ok(w)
            }
            '[' => {
                let u = self.word()?;
                self.expect(',')?;
                let v = self.word()?;
                self.expect(']')?;
                Ok(FreeWord::commutator(&u, &v))
            }
            _ => {
                self.pos -= 1;
                Err(self.err(&format!("unexpected `{c}`")))
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn finish(mut self) -> Result<(FreeWord, Option<Alphabet>)> {
        let w = self.word()?;
        if self.pos != self.chars.len() {
            return Err(self.err("trailing input"));
        }
        Ok((w, self.alphabet))
    }
}

/// Parses a word over `x1..xd` (inverses `X1` or `x1^-1`) with commutators
/// `[u,v] = u v u⁻¹ v⁻¹`. The letters `a`, `b` are read as `x1`, `x2`.
pub fn parse_word(text: &str) -> Result<FreeWord> {
    Ok(WordParser::new(text).finish()?.0)
}

fn eval_in(spec: &GroupSpec, w: &FreeWord, gens: [GroupElement; 2]) -> Result<GroupElement> {
    let mut g = element::identity(spec);
    for &l in w.letters() {
        let i = l.unsigned_abs() as usize;
        if i > 2 {
            return Err(Error::LetterOutOfRange { letter: l, rank: 2 });
        }
        let x = &gens[i - 1];
        let x = if l > 0 { x.clone() } else { element::inverse(spec, x)? };
        element::mul_assign(spec, &mut g, &x)?;
    }
    Ok(g)
}

fn parse_ints(body: &str) -> Result<Vec<i64>> {
    split_top(body, ',').iter().map(|x| x.trim().parse().map_err(|_| perr(format!("bad integer `{}`", x.trim())))).collect()
}

/// Parses an element of `spec`.
pub fn parse_element(spec: &GroupSpec, text: &str) -> Result<GroupElement> {
    let t = text.trim();
    let g = match spec {
        GroupSpec::Lattice(d) => {
            let v = if let Some(body) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
                parse_ints(body)?
            } else if t == "e" {
                vec![0; *d]
            } else {
                vec![t.parse().map_err(|_| perr(format!("bad integer `{t}`")))?]
            };
            GroupElement::Vector(v)
        }
        GroupSpec::Cyclic(q) => {
            let r: i64 = if t == "e" { 0 } else { t.parse().map_err(|_| perr(format!("bad residue `{t}`")))? };
            GroupElement::Residue(r.rem_euclid(*q as i64) as u64)
        }
        GroupSpec::Free(_) => GroupElement::Word(parse_word(t)?),
        GroupSpec::FreeSolvable { rank, length } => {
            GroupElement::Solvable(magnus::magnus_embed(&parse_word(t)?, *rank, *length)?)
        }
        GroupSpec::Dihedral => match call(t) {
            Some(("dinf", body)) => match parse_ints(body)?.as_slice() {
                [n, f @ (0 | 1)] => GroupElement::Dihedral { shift: *n, flip: *f == 1 },
                _ => return Err(perr(format!("bad dihedral normal form `{t}`"))),
            },
            _ => eval_in(spec, &parse_word(t)?, [GroupElement::dihedral_a(), GroupElement::dihedral_b()])?,
        },
        GroupSpec::BaumslagSolitar => match call(t) {
            Some(("bs", body)) => match parse_ints(body)?.as_slice() {
                [m, n] => GroupElement::Bs { a_exp: *m, b_exp: *n },
                _ => return Err(perr(format!("bad BS normal form `{t}`"))),
            },
            _ => eval_in(spec, &parse_word(t)?, [GroupElement::bs_a(), GroupElement::bs_b()])?,
        },
        GroupSpec::Product(a, b) => {
            let body = t
                .strip_prefix('<')
                .and_then(|r| r.strip_suffix('>'))
                .ok_or_else(|| perr(format!("product elements are written <left | right>, got `{t}`")))?;
            match split_top(body, '|').as_slice() {
                [l, r] => GroupElement::pair(parse_element(a, l)?, parse_element(b, r)?),
                _ => return Err(perr(format!("bad product element `{t}`"))),
            }
        }
        GroupSpec::Wreath { lamp, base } => {
            let body = t
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| perr(format!("wreath elements are written ({{pos->value, …}}, base), got `{t}`")))?;
            let parts = split_top(body, ',');
            let [lamps_text, pos_text] = parts.as_slice() else {
                return Err(perr(format!("bad wreath element `{t}`")));
            };
            let inner = lamps_text
                .trim()
                .strip_prefix('{')
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(|| perr(format!("bad lamp map `{lamps_text}`")))?;
            let mut lamps = crate::group::LampMap::new();
            for entry in split_top(inner, ',').into_iter().filter(|e| !e.trim().is_empty()) {
                let (p, v) = entry.split_once("->").ok_or_else(|| perr(format!("bad lamp entry `{entry}`")))?;
                let p = parse_element(base, p)?;
                let v = parse_element(lamp, v)?;
                if lamps.insert(p, v).is_some() {
                    return Err(perr(format!("duplicate lamp position in `{t}`")));
                }
            }
            let position = parse_element(base, pos_text)?;
            GroupElement::Wreath(Box::new(WreathElement::new(lamp, lamps, position)))
        }
    };
    element::validate(spec, &g)?;
    Ok(g)
}

/// `measure { atom "g" w; … }`.
pub fn parse_measure<W: Weight>(spec: &GroupSpec, text: &str) -> Result<FiniteMeasure<W>> {
    let t = text.trim();
    let body = t
        .strip_prefix("measure")
        .map(str::trim)
        .and_then(|r| r.strip_prefix('{'))
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| perr(format!("measure literals look like measure {{ atom \"g\" w; … }}, got `{t}`")))?;
    let mut atoms = Vec::new();
    for stmt in split_top(body, ';').into_iter().map(str::trim).filter(|s| !s.is_empty()) {
        let rest = stmt.strip_prefix("atom").map(str::trim).ok_or_else(|| perr(format!("expected `atom`, got `{stmt}`")))?;
        let rest = rest.strip_prefix('"').ok_or_else(|| perr(format!("atom element must be quoted in `{stmt}`")))?;
        let close = rest.find('"').ok_or_else(|| perr(format!("unterminated quote in `{stmt}`")))?;
        let g = parse_element(spec, &rest[..close])?;
        let w: W = parse_weight(&rest[close + 1..])?;
        atoms.push((g, w));
    }
    FiniteMeasure::new(spec.clone(), atoms)
}

/// A family and, optionally, a fixed member index (`None` is the limit).
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRef<W: Weight> {
    pub family: MeasureFamily<W>,
    pub k: Option<u64>,
}

fn kv_args(body: &str) -> Result<Vec<(String, String)>> {
    split_top(body, ',')
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|a| {
            let (k, v) = a.split_once('=').ok_or_else(|| perr(format!("expected key=value, got `{a}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// `[family] name(key=value, …)`. Every family accepts `k` (an integer or
/// `inf` for the limit). Parameters:
///
/// * `dinf(p)`, `bs11(p)`, `z-drift`, `z-fixed`, `z2-fixed`;
/// * `lamplighter-mix(lamp=Cq, inner=<family>)`, with lamp measure the
///   toggle `δ_1` on `C_q`;
/// * `product(eta=Fd, inner=<family>)`, with `η` uniform on the free
///   generators and their inverses.
pub fn parse_family<W: Weight>(text: &str) -> Result<FamilyRef<W>> {
    let t = text.trim();
    let t = t.strip_prefix("family").map(str::trim).unwrap_or(t);
    let (name, body) = call(t).unwrap_or((t, ""));
    let mut k = None;
    let mut p: Option<W> = None;
    let mut lamp = None;
    let mut eta = None;
    let mut inner = None;
    for (key, value) in kv_args(body)? {
        match key.as_str() {
            "k" => {
                k = match value.as_str() {
                    "inf" | "∞" | "limit" => None,
                    v => Some(v.parse().map_err(|_| perr(format!("bad k `{v}`")))?),
                }
            }
            "p" => p = Some(parse_weight(&value)?),
            "lamp" => lamp = Some(parse_group_spec(&value)?),
            "eta" => eta = Some(parse_group_spec(&value)?),
            "inner" => inner = Some(parse_family::<W>(&value)?.family),
            other => return Err(perr(format!("unknown family parameter `{other}` in `{t}`"))),
        }
    }
    let need_p = |p: Option<W>| p.ok_or_else(|| perr(format!("family `{name}` needs p")));
    let need_inner = |i: Option<MeasureFamily<W>>| i.ok_or_else(|| perr(format!("family `{name}` needs inner")));
    let family = match name {
        "dinf" => MeasureFamily::Dinf { p: need_p(p)? },
        "bs11" => MeasureFamily::Bs11 { p: need_p(p)? },
        "z-drift" => MeasureFamily::ZDrift,
        "z-fixed" => MeasureFamily::ZFixed,
        "z2-fixed" => MeasureFamily::Z2Fixed,
        "lamplighter-mix" => {
            let q = match lamp.unwrap_or(GroupSpec::Cyclic(2)) {
                GroupSpec::Cyclic(q) => q,
                other => return Err(perr(format!("lamplighter-mix lamp must be cyclic, got {other}"))),
            };
            MeasureFamily::LamplighterMix { eta: families::toggle(q)?, inner: Box::new(need_inner(inner)?) }
        }
        "product" => {
            let d = match eta.unwrap_or(GroupSpec::Free(2)) {
                GroupSpec::Free(d) => d,
                other => return Err(perr(format!("product eta must be a free group, got {other}"))),
            };
            MeasureFamily::Product { eta: families::free_generators_uniform(d)?, inner: Box::new(need_inner(inner)?) }
        }
        other => return Err(perr(format!("unknown family `{other}`"))),
    };
    Ok(FamilyRef { family, k })
}

/// A measure given either as a literal (needs `spec`) or a family reference.
pub fn parse_measure_source<W: Weight>(spec: Option<&GroupSpec>, text: &str) -> Result<FiniteMeasure<W>> {
    let t = text.trim();
    if t.starts_with("measure") {
        let spec = spec.ok_or_else(|| perr("a measure literal needs a group"))?;
        return parse_measure(spec, t);
    }
    let f = parse_family::<W>(t)?;
    let m = f.family.at(f.k)?;
    if let Some(s) = spec {
        if s != m.spec() {
            return Err(perr(format!("family lives on {}, not {s}", m.spec())));
        }
    }
    Ok(m)
}
