use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    IriRef(String),
    /// `prefix:local`; either side may be empty.
    PName(String, String),
    Var(String),
    BlankLabel(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    /// A bare word: keyword, function name, `a`, `true`, `false`.
    Word(String),
    DoubleCaret,
    AndAnd,
    OrOr,
    Le,
    Ge,
    Ne,
    Punct(char),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, QueryError> {
    let mut lx = Lexer { src, pos: 0, out: Vec::new() };
    lx.run()?;
    Ok(lx.out)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    out: Vec<Token>,
}

fn syntax(pos: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        position: pos,
        message: message.into(),
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{b7}'
}

impl Lexer<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.rest().chars().nth(1)
    }

    fn push(&mut self, tok: Tok, pos: usize) {
        self.out.push(Token { tok, pos });
    }

    fn run(&mut self) -> Result<(), QueryError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                c if c.is_whitespace() => self.pos += c.len_utf8(),
                '#' => {
                    let end = self.rest().find('\n').map_or(self.src.len(), |i| self.pos + i);
                    self.pos = end;
                }
                '<' => {
                    if let Some(iri) = self.iri_ref() {
                        self.push(Tok::IriRef(iri), start);
                    } else if self.peek2() == Some('=') {
                        self.pos += 2;
                        self.push(Tok::Le, start);
                    } else {
                        self.pos += 1;
                        self.push(Tok::Punct('<'), start);
                    }
                }
                '>' if self.peek2() == Some('=') => {
                    self.pos += 2;
                    self.push(Tok::Ge, start);
                }
                '!' if self.peek2() == Some('=') => {
                    self.pos += 2;
                    self.push(Tok::Ne, start);
                }
                '&' if self.peek2() == Some('&') => {
                    self.pos += 2;
                    self.push(Tok::AndAnd, start);
                }
                '|' if self.peek2() == Some('|') => {
                    self.pos += 2;
                    self.push(Tok::OrOr, start);
                }
                '^' if self.peek2() == Some('^') => {
                    self.pos += 2;
                    self.push(Tok::DoubleCaret, start);
                }
                '?' | '$' if self.peek2().is_some_and(|c| is_name_char(c) && c != '-') => {
                    self.pos += 1;
                    let name = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '\u{b7}');
                    self.push(Tok::Var(name), start);
                }
                '_' if self.peek2() == Some(':') => {
                    self.pos += 2;
                    let label = self.take_local();
                    if label.is_empty() {
                        return Err(syntax(start, "empty blank node label"));
                    }
                    self.push(Tok::BlankLabel(label), start);
                }
                '"' | '\'' => {
                    let s = self.string(c)?;
                    self.push(Tok::Str(s), start);
                }
                '@' => {
                    self.pos += 1;
                    let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    if tag.is_empty() {
                        return Err(syntax(start, "empty language tag"));
                    }
                    self.push(Tok::LangTag(tag), start);
                }
                '0'..='9' => self.number(start),
                '.' if self.peek2().is_some_and(|c| c.is_ascii_digit()) => self.number(start),
                '+' | '-'
                    if self.peek2().is_some_and(|c| c.is_ascii_digit() || c == '.')
                        && self.sign_allowed() =>
                {
                    self.pos += 1;
                    self.number(start);
                }
                ':' => {
                    self.pos += 1;
                    let local = self.take_local();
                    self.push(Tok::PName(String::new(), local), start);
                }
                c if is_name_start(c) => {
                    let word = self.take_while(is_name_char_or_dot);
                    let word = trim_trailing_dots(self, word);
                    if self.peek() == Some(':') {
                        self.pos += 1;
                        let local = self.take_local();
                        self.push(Tok::PName(word, local), start);
                    } else {
                        self.push(Tok::Word(word), start);
                    }
                }
                c => {
                    self.pos += c.len_utf8();
                    self.push(Tok::Punct(c), start);
                }
            }
        }
        Ok(())
    }

    /// A leading sign belongs to a number only where an operand may start;
    /// after an operand it would be an arithmetic operator.
    fn sign_allowed(&self) -> bool {
        !matches!(
            self.out.last().map(|t| &t.tok),
            Some(
                Tok::Var(_)
                    | Tok::Integer(_)
                    | Tok::Decimal(_)
                    | Tok::Double(_)
                    | Tok::Str(_)
                    | Tok::IriRef(_)
                    | Tok::PName(..)
                    | Tok::LangTag(_)
                    | Tok::Punct(')')
            )
        )
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let len: usize = self.rest().chars().take_while(|&c| f(c)).map(char::len_utf8).sum();
        let s = self.rest()[..len].to_string();
        self.pos += len;
        s
    }

    /// The local part of a prefixed name; a trailing `.` ends the triple.
    fn take_local(&mut self) -> String {
        let s = self.take_while(|c| is_name_char_or_dot(c) || c == ':');
        trim_trailing_dots(self, s)
    }

    fn iri_ref(&mut self) -> Option<String> {
        let rest = &self.rest()[1..];
        let end = rest.find(|c: char| {
            c == '>' || c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        })?;
        if rest[end..].starts_with('>') {
            let iri = rest[..end].to_string();
            self.pos += end + 2;
            Some(iri)
        } else {
            None
        }
    }

    fn string(&mut self, quote: char) -> Result<String, QueryError> {
        let start = self.pos;
        let long: String = std::iter::repeat_n(quote, 3).collect();
        let is_long = self.rest().starts_with(&long);
        self.pos += if is_long { 3 } else { 1 };
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(syntax(start, "unterminated string"));
            };
            if is_long && self.rest().starts_with(&long) {
                self.pos += 3;
                return Ok(out);
            }
            self.pos += c.len_utf8();
            match c {
                c if c == quote && !is_long => return Ok(out),
                '\n' | '\r' if !is_long => return Err(syntax(start, "newline in string")),
                '\\' => out.push(self.escape(start)?),
                c => out.push(c),
            }
        }
    }

    fn escape(&mut self, start: usize) -> Result<char, QueryError> {
        let Some(c) = self.peek() else {
            return Err(syntax(start, "unterminated string"));
        };
        self.pos += c.len_utf8();
        Ok(match c {
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            'b' => '\u{8}',
            'f' => '\u{c}',
            '"' | '\'' | '\\' => c,
            'u' | 'U' => {
                let n = if c == 'u' { 4 } else { 8 };
                let hex = self.rest().get(..n).ok_or_else(|| syntax(self.pos, "short \\u escape"))?;
                let ch = u32::from_str_radix(hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| syntax(self.pos, format!("bad escape \\{c}{hex}")))?;
                self.pos += n;
                ch
            }
            other => return Err(syntax(self.pos - 1, format!("unknown escape \\{other}"))),
        })
    }

    fn number(&mut self, start: usize) {
        self.take_while(|c| c.is_ascii_digit());
        let mut frac = false;
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            self.take_while(|c| c.is_ascii_digit());
            frac = true;
        }
        let mut exp = false;
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = save;
            } else {
                exp = true;
            }
        }
        let lexeme = self.src[start..self.pos].to_string();
        let tok = if exp {
            Tok::Double(lexeme)
        } else if frac {
            Tok::Decimal(lexeme)
        } else {
            Tok::Integer(lexeme)
        };
        self.push(tok, start);
    }
}

fn is_name_char_or_dot(c: char) -> bool {
    is_name_char(c) || c == '.'
}

fn trim_trailing_dots(lx: &mut Lexer<'_>, mut s: String) -> String {
    while s.ends_with('.') {
        s.pop();
        lx.pos -= 1;
    }
    s
}
