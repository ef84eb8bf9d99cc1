use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    Semi,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Str(s) => format!("string {s:?}"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Semi => "`;`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<(Vec<Token>, Pos), ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let err = |line, column, msg: String| ParseError::at(src, Pos { line, column }, msg);

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column: col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '{' | '}' | ';' => {
                chars.next();
                col += 1;
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    _ => TokenKind::Semi,
                };
                out.push(Token { kind, pos });
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None | Some('\n') => return Err(err(pos.line, pos.column, "unterminated string".into())),
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            col += 1;
                            let esc_col = col;
                            match chars.next() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some('\n') | None => {
                                    return Err(err(pos.line, pos.column, "unterminated string".into()))
                                }
                                Some(other) => {
                                    return Err(err(line, esc_col, format!("unknown escape `\\{other}`")));
                                }
                            }
                            col += 1;
                        }
                        Some(ch) => {
                            s.push(ch);
                            col += 1;
                        }
                    }
                }
                out.push(Token { kind: TokenKind::Str(s), pos });
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    let continues = ch.is_ascii_alphanumeric()
                        || ch == '.'
                        || ch == '_'
                        || ((ch == '-' || ch == '+') && (s.is_empty() || s.ends_with(['e', 'E'])));
                    if !continues {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                    col += 1;
                }
                if !is_number(&s) {
                    return Err(err(pos.line, pos.column, format!("malformed number `{s}`")));
                }
                out.push(Token { kind: TokenKind::Number(s), pos });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if !(ch.is_ascii_alphanumeric() || ch == '_') {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                    col += 1;
                }
                out.push(Token { kind: TokenKind::Ident(s), pos });
            }
            other => {
                return Err(err(pos.line, pos.column, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok((out, Pos { line, column: col }))
}

/// `[+-]? digits ('.' digits?)? ([eE] [+-]? digits)?` or a leading-dot
/// fraction.
fn is_number(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'-' || b[i] == b'+') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'-' || b[i] == b'+') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}
