//! Untyped block tree: `name label? { items }` and `key values… ;`.

use super::lexer::{tokenize, Pos, Token, TokenKind};
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Ident(String),
    Number(String),
    Str(String),
}

impl Value {
    pub fn describe(&self) -> String {
        match self {
            Value::Ident(s) => format!("identifier `{s}`"),
            Value::Number(s) => format!("number `{s}`"),
            Value::Str(s) => format!("string {s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub value: Value,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub key: String,
    pub pos: Pos,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub pos: Pos,
    pub label: Option<Arg>,
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Stmt(Stmt),
    Block(Block),
}

impl Item {
    pub fn pos(&self) -> Pos {
        match self {
            Item::Stmt(s) => s.pos,
            Item::Block(b) => b.pos,
        }
    }

    pub fn key(&self) -> &str {
        match self {
            Item::Stmt(s) => &s.key,
            Item::Block(b) => &b.name,
        }
    }
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    i: usize,
    end: Pos,
}

impl<'s> Parser<'s> {
    fn err(&self, pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.src, pos, msg.into())
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.i)
    }

    fn items(&mut self, nested: Option<Pos>) -> Result<Vec<Item>, ParseError> {
        let mut items = Vec::new();
        loop {
            let Some(tok) = self.peek().cloned() else {
                return match nested {
                    Some(open) => Err(self.err(self.end, format!("unclosed `{{` opened at line {}", open.line))),
                    None => Ok(items),
                };
            };
            match tok.kind {
                TokenKind::RBrace => {
                    if nested.is_some() {
                        self.i += 1;
                        return Ok(items);
                    }
                    return Err(self.err(tok.pos, "unexpected `}`"));
                }
                TokenKind::Ident(name) => {
                    self.i += 1;
                    items.push(self.item(name, tok.pos)?);
                }
                other => return Err(self.err(tok.pos, format!("expected a key, found {}", other.describe()))),
            }
        }
    }

    fn item(&mut self, key: String, pos: Pos) -> Result<Item, ParseError> {
        let mut args = Vec::new();
        loop {
            let Some(tok) = self.peek().cloned() else {
                return Err(self.err(self.end, format!("expected `;` or `{{` after `{key}`")));
            };
            self.i += 1;
            let value = match tok.kind {
                TokenKind::Semi => return Ok(Item::Stmt(Stmt { key, pos, args })),
                TokenKind::LBrace => {
                    if args.len() > 1 {
                        return Err(self.err(args[1].pos, format!("block `{key}` takes at most one name")));
                    }
                    let label = args.pop();
                    if let Some(l) = &label {
                        if !matches!(l.value, Value::Ident(_)) {
                            return Err(self.err(l.pos, format!("block name must be an identifier, found {}", l.value.describe())));
                        }
                    }
                    let items = self.items(Some(tok.pos))?;
                    return Ok(Item::Block(Block { name: key, pos, label, items }));
                }
                TokenKind::RBrace => return Err(self.err(tok.pos, format!("expected `;` after `{key}`"))),
                TokenKind::Ident(s) => Value::Ident(s),
                TokenKind::Number(s) => Value::Number(s),
                TokenKind::Str(s) => Value::Str(s),
            };
            args.push(Arg { value, pos: tok.pos });
        }
    }
}

pub fn parse_tree(src: &str) -> Result<Vec<Item>, ParseError> {
    let (toks, end) = tokenize(src)?;
    let mut p = Parser { src, toks, i: 0, end };
    p.items(None)
}
