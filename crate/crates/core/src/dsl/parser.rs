//! Recursive-descent parser from tokens to declarations.

use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::action::{name, Action, ChannelClass, EncapSet, Name, Shape};
use crate::effect::{ActionPattern, EffectDesc};
use crate::formula::Formula;
use crate::renaming::RenamingMap;
use crate::requirements::Requirement;
use crate::term::Term;

/// Words that cannot name channels, data, definitions or symbols.
pub const RESERVED: &[&str] = &["bot", "true", "false", "encap", "oneof"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SupervisorMode {
    Event,
    State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Channels(ChannelClass, Vec<Name>),
    Data(Vec<Name>),
    Group(Name, Vec<Name>),
    Def(Name, Term),
    Plant(Name, Term),
    Supervisor(Option<SupervisorMode>, Name, Term),
    Encap(Name, EncapSet),
    Rename(Name, RenamingMap),
    Effect(Option<ActionPattern>, EffectDesc),
    Init(Formula),
    Req(Option<Name>, Requirement),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub line: usize,
    pub col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    groups: HashMap<String, Vec<Name>>,
}

type PResult<T> = Result<T, ParseError>;

pub fn parse_decls(text: &str) -> PResult<Vec<Decl>> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, groups: HashMap::new() };
    let mut out = Vec::new();
    while p.peek() != &Tok::Eof {
        out.push(p.decl()?);
    }
    Ok(out)
}

/// Parses a standalone term, with no groups in scope.
pub fn parse_term(text: &str) -> PResult<Term> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, groups: HashMap::new() };
    let t = p.term()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

pub fn parse_formula(text: &str) -> PResult<Formula> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, groups: HashMap::new() };
    let f = p.formula()?;
    p.expect(&Tok::Eof)?;
    Ok(f)
}

/// Parses a single action such as `c!?(d)`.
pub fn parse_action(text: &str) -> PResult<Action> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, groups: HashMap::new() };
    let a = p.action()?;
    p.expect(&Tok::Eof)?;
    Ok(a)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = self.here();
        Err(ParseError::new(t.line, t.col, msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            let wanted = match t {
                Tok::Eof => "end of input".to_string(),
                other => other.describe(),
            };
            self.unexpected(&wanted)
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => self.error(format!("`{s}` is reserved")),
            Tok::Ident(s) => {
                self.bump();
                Ok(name(&s))
            }
            _ => self.unexpected(what),
        }
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<Name>> {
        let mut out = vec![self.ident(what)?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let (line, col) = (self.here().line, self.here().col);
        let Tok::Ident(word) = self.peek().clone() else {
            return self.unexpected("a declaration");
        };
        self.bump();
        let kind = match word.as_str() {
            "uncontrollable" => DeclKind::Channels(ChannelClass::Uncontrollable, self.ident_list("a channel name")?),
            "controllable" => DeclKind::Channels(ChannelClass::Controllable, self.ident_list("a channel name")?),
            "data" => DeclKind::Data(self.ident_list("a data element")?),
            "group" => {
                let g = self.ident("a group name")?;
                self.expect(&Tok::Eq)?;
                let members = self.symbol_set()?;
                if members.is_empty() {
                    return Err(ParseError::new(line, col, format!("group `{g}` is empty")));
                }
                if self.groups.insert(g.to_string(), members.clone()).is_some() {
                    return Err(ParseError::new(line, col, format!("group `{g}` declared twice")));
                }
                DeclKind::Group(g, members)
            }
            "def" | "plant" => {
                let n = self.ident("a name")?;
                self.expect(&Tok::Eq)?;
                let t = self.term()?;
                if word == "def" {
                    DeclKind::Def(n, t)
                } else {
                    DeclKind::Plant(n, t)
                }
            }
            "supervisor" => {
                let mode = match self.peek() {
                    Tok::Ident(m) if (m == "event" || m == "state") && matches!(self.peek_at(1), Tok::Ident(_)) => {
                        let m = if m == "event" { SupervisorMode::Event } else { SupervisorMode::State };
                        self.bump();
                        Some(m)
                    }
                    _ => None,
                };
                let n = self.ident("a supervisor name")?;
                self.expect(&Tok::Eq)?;
                DeclKind::Supervisor(mode, n, self.term()?)
            }
            "encap" => {
                let n = self.ident("an encapsulation name")?;
                self.expect(&Tok::Eq)?;
                DeclKind::Encap(n, self.pattern_set()?)
            }
            "rename" => {
                let n = self.ident("a renaming name")?;
                self.expect(&Tok::Colon)?;
                let mut pairs = Vec::new();
                loop {
                    let from = self.shape()?;
                    self.expect(&Tok::Arrow)?;
                    let to = self.shape()?;
                    pairs.push((from, to));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                DeclKind::Rename(n, RenamingMap::new(pairs))
            }
            "effect" => {
                let pattern = if self.is_word("default") {
                    self.bump();
                    None
                } else {
                    let a = self.action()?;
                    Some(ActionPattern { shape: a.shape(), datum: a.datum })
                };
                self.expect(&Tok::Colon)?;
                DeclKind::Effect(pattern, self.effect_desc()?)
            }
            "init" => DeclKind::Init(self.formula()?),
            "req" => {
                let n = if matches!(self.peek(), Tok::Ident(_)) { Some(self.ident("a requirement name")?) } else { None };
                self.expect(&Tok::Colon)?;
                DeclKind::Req(n, self.requirement()?)
            }
            other => return Err(ParseError::new(line, col, format!("unknown declaration `{other}`"))),
        };
        Ok(Decl { kind, line, col })
    }

    fn effect_desc(&mut self) -> PResult<EffectDesc> {
        let Tok::Ident(w) = self.peek().clone() else {
            return self.unexpected("an effect (any, keep, set, unset, where)");
        };
        self.bump();
        Ok(match w.as_str() {
            "any" => EffectDesc::Any,
            "keep" => EffectDesc::Keep,
            "set" | "unset" => {
                self.expect(&Tok::LParen)?;
                let mut syms = vec![self.symbol()?];
                while self.eat(&Tok::Comma) {
                    syms.push(self.symbol()?);
                }
                self.expect(&Tok::RParen)?;
                if w == "set" {
                    EffectDesc::SetTrue(syms)
                } else {
                    EffectDesc::SetFalse(syms)
                }
            }
            "where" => {
                self.expect(&Tok::LParen)?;
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                EffectDesc::ConstrainedBy(f)
            }
            other => return self.error(format!("unknown effect `{other}`")),
        })
    }

    fn requirement(&mut self) -> PResult<Requirement> {
        if self.is_word("enables") && self.peek_at(1) == &Tok::LParen {
            self.bump();
            self.bump();
            let a = self.action()?;
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Implies)?;
            return Ok(Requirement::EventImplies(a, self.formula()?));
        }
        let mut parts = vec![self.disjunction()?];
        while self.eat(&Tok::Implies) {
            if self.is_word("disabled") && self.peek_at(1) == &Tok::LParen {
                self.bump();
                self.bump();
                let a = self.action()?;
                self.expect(&Tok::RParen)?;
                let phi = fold_implies(parts);
                return Ok(Requirement::Disables(phi, a));
            }
            parts.push(self.disjunction()?);
        }
        Ok(Requirement::Pure(fold_implies(parts)))
    }

    /// `c`, `c!`, `c?`, `c!?` or `c!m?n`.
    fn shape(&mut self) -> PResult<Shape> {
        let c = self.ident("a channel name")?;
        let (sends, receives) = self.counts()?;
        Ok(Shape { channel: c, sends, receives })
    }

    fn counts(&mut self) -> PResult<(u32, u32)> {
        let mut sends = 0;
        let mut receives = 0;
        if self.eat(&Tok::Bang) {
            sends = 1;
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                sends = n;
            }
        }
        if self.eat(&Tok::Query) {
            receives = 1;
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                receives = n;
            }
        }
        Ok((sends, receives))
    }

    /// A shape with an optional `(datum)`.
    fn action(&mut self) -> PResult<Action> {
        let s = self.shape()?;
        let datum = if self.eat(&Tok::LParen) {
            let d = self.ident("a data element")?;
            self.expect(&Tok::RParen)?;
            Some(d)
        } else {
            None
        };
        Ok(s.with_datum(datum))
    }

    fn pattern_set(&mut self) -> PResult<EncapSet> {
        self.expect(&Tok::LBrace)?;
        let mut set = EncapSet::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                set.insert(self.shape()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBrace)?;
        }
        Ok(set)
    }

    fn symbol_set(&mut self) -> PResult<Vec<Name>> {
        self.expect(&Tok::LBrace)?;
        let mut out: Vec<Name> = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                let s = self.symbol()?;
                if out.contains(&s) {
                    return self.error(format!("symbol `{s}` listed twice"));
                }
                out.push(s);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBrace)?;
        }
        Ok(out)
    }

    /// `p` or `p(arg)`, named by its full text.
    fn symbol(&mut self) -> PResult<Name> {
        let base = self.ident("a propositional symbol")?;
        if self.peek() == &Tok::LParen {
            self.bump();
            let arg = self.ident("a symbol argument")?;
            self.expect(&Tok::RParen)?;
            return Ok(name(&format!("{base}({arg})")));
        }
        Ok(base)
    }

    pub fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut f = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut f = self.negation()?;
        while self.eat(&Tok::Amp) {
            f = Formula::and(f, self.negation()?);
        }
        Ok(f)
    }

    fn negation(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.negation()?));
        }
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(w) if w == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(w) if w == "oneof" => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let members = if self.peek() == &Tok::LBrace {
                    self.symbol_set()?
                } else {
                    let g = self.ident("a group name")?;
                    match self.groups.get(&*g) {
                        Some(m) => m.clone(),
                        None => return self.error(format!("unknown group `{g}`")),
                    }
                };
                if members.is_empty() {
                    return self.error("oneof needs at least one symbol");
                }
                self.expect(&Tok::RParen)?;
                Ok(Formula::OneOf(members))
            }
            Tok::Ident(_) => Ok(Formula::Symbol(self.symbol()?)),
            _ => self.unexpected("a formula"),
        }
    }

    pub fn term(&mut self) -> PResult<Term> {
        let lhs = self.par()?;
        if self.eat(&Tok::Plus) {
            return Ok(Term::alt(lhs, self.term()?));
        }
        Ok(lhs)
    }

    fn par(&mut self) -> PResult<Term> {
        let lhs = self.seq()?;
        if self.eat(&Tok::Par) {
            return Ok(Term::par(lhs, self.par()?));
        }
        Ok(lhs)
    }

    fn seq(&mut self) -> PResult<Term> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Semi) {
            return Ok(Term::seq(lhs, self.seq()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::LBracket) {
            let phi = self.formula()?;
            self.expect(&Tok::RBracket)?;
            self.expect(&Tok::Arrow)?;
            return Ok(Term::guard(phi, self.unary()?));
        }
        let surely_formula = matches!(self.peek(), Tok::Tilde)
            || matches!(self.peek(), Tok::Ident(w) if w == "true" || w == "false" || w == "oneof");
        if surely_formula {
            let phi = self.formula()?;
            self.expect(&Tok::Emit)?;
            return Ok(Term::emit(phi, self.unary()?));
        }
        // Emission is tried first and abandoned if no `^^` follows.
        let save = self.pos;
        if let Ok(phi) = self.formula() {
            if self.eat(&Tok::Emit) {
                return Ok(Term::emit(phi, self.unary()?));
            }
        }
        self.pos = save;
        if let Tok::Ident(w) = self.peek().clone() {
            let is_action = !RESERVED.contains(&w.as_str())
                && matches!(self.peek_at(1), Tok::Bang | Tok::Query | Tok::LParen | Tok::Dot);
            if is_action {
                let a = self.action()?;
                self.expect(&Tok::Dot)?;
                return Ok(Term::prefix(a, self.unary()?));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Term> {
        let mut t = self.atom()?;
        while self.eat(&Tok::Star) {
            t = Term::star(t);
        }
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Term::Deadlock)
            }
            Tok::Int(1) => {
                self.bump();
                Ok(Term::Empty)
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(w) if w == "bot" => {
                self.bump();
                Ok(Term::Inaccessible)
            }
            Tok::Ident(w) if w == "encap" => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let set = self.pattern_set()?;
                self.expect(&Tok::Comma)?;
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(Term::encap(set, t))
            }
            Tok::Ident(_) => Ok(Term::Ref(self.ident("a process")?)),
            _ => self.unexpected("a process term"),
        }
    }
}

fn fold_implies(mut parts: Vec<Formula>) -> Formula {
    let mut f = parts.pop().expect("at least one formula");
    while let Some(lhs) = parts.pop() {
        f = Formula::implies(lhs, f);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn constants_and_prefix() {
        assert_eq!(t("a.1"), Term::prefix(Action::event("a", None), Term::Empty));
        assert_eq!(t("0*"), Term::star(Term::Deadlock));
        assert_eq!(t("a.1 + 0"), Term::alt(t("a.1"), Term::Deadlock));
        assert_eq!(t("bot"), Term::Inaccessible);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(t("a.b.1*"), Term::prefix(Action::event("a", None), Term::prefix(Action::event("b", None), Term::star(Term::Empty))));
        assert_eq!(t("1 ; 1 || 0 + 1"), Term::alt(Term::par(Term::seq(Term::Empty, Term::Empty), Term::Deadlock), Term::Empty));
        assert_eq!(t("1 + 0 + 1"), Term::alt(Term::Empty, Term::alt(Term::Deadlock, Term::Empty)));
    }

    #[test]
    fn generic_actions() {
        assert_eq!(t("n!1?2(product).1"), Term::prefix(Action::new("n", 1, 2, Some("product")), Term::Empty));
        assert_eq!(t("s!?(make).1"), Term::prefix(Action::comm("s", Some("make")), Term::Empty));
        assert_eq!(t("c!0?2.1"), Term::prefix(Action::new("c", 0, 2, None), Term::Empty));
    }

    #[test]
    fn guards_and_emissions() {
        assert_eq!(t("[p] -> a.1"), Term::guard(Formula::sym("p"), t("a.1")));
        assert_eq!(t("in(Run) ^^ 1"), Term::emit(Formula::sym("in(Run)"), Term::Empty));
        assert_eq!(t("(p & q) ^^ 1"), Term::emit(Formula::and(Formula::sym("p"), Formula::sym("q")), Term::Empty));
        assert_eq!(t("(p)"), Term::reference("p"));
        assert_eq!(t("x ^^ 1 ; y ^^ 1"), Term::seq(Term::emit(Formula::sym("x"), Term::Empty), Term::emit(Formula::sym("y"), Term::Empty)));
    }

    #[test]
    fn encapsulation() {
        let set: EncapSet = [Shape::new("s", 0, 1), Shape::new("s", 1, 0)].into_iter().collect();
        assert_eq!(t("encap({s?, s!}, S || U)"), Term::encap(set, Term::par(Term::reference("S"), Term::reference("U"))));
    }

    #[test]
    fn formulas() {
        let f = parse_formula("a | b & c => ~(a | b)").unwrap();
        assert_eq!(f.to_string(), "a | b & c => ~(a | b)");
        assert_eq!(parse_formula("oneof({p, q})").unwrap(), Formula::OneOf(vec![name("p"), name("q")]));
    }

    #[test]
    fn requirement_forms() {
        let d = parse_decls("req R1: in(A) => in(B)\nreq: enables(c!?) => p\nreq R4: p & q => disabled(c!?(d))").unwrap();
        assert_eq!(d[0].kind, DeclKind::Req(Some(name("R1")), Requirement::Pure(Formula::implies(Formula::sym("in(A)"), Formula::sym("in(B)")))));
        assert_eq!(d[1].kind, DeclKind::Req(None, Requirement::EventImplies(Action::comm("c", None), Formula::sym("p"))));
        assert_eq!(
            d[2].kind,
            DeclKind::Req(Some(name("R4")), Requirement::Disables(Formula::and(Formula::sym("p"), Formula::sym("q")), Action::comm("c", Some("d"))))
        );
    }

    #[test]
    fn groups_feed_oneof() {
        let d = parse_decls("group G = {a, b}\ndef I = oneof(G) ^^ 0").unwrap();
        assert_eq!(d[1].kind, DeclKind::Def(name("I"), Term::emit(Formula::OneOf(vec![name("a"), name("b")]), Term::Deadlock)));
        let e = parse_decls("def I = oneof(H) ^^ 0").unwrap_err();
        assert_eq!((e.line, e.col), (1, 16));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_decls("plant U =\n  a.(1 +").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("process term"));
        let e = parse_decls("bogus x").unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
    }
}
