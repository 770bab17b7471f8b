use super::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Identifier, possibly primed (`n'`).
    Ident(String),
    Num(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Dot,
    Assign,
    SuchThat,
    Box,
    Dia,
    Arrow,
    Amp,
    Bar,
    Bang,
    Eq,
    Neq,
    Lt,
    Le,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Assign => ":=",
            Tok::SuchThat => ":|",
            Tok::Box => "[]",
            Tok::Dia => "<>",
            Tok::Arrow => "->",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Bang => "!",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            _ => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *i += width;
            *col += width;
        };
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '\'' {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                match s.parse::<usize>() {
                    Ok(n) if n <= 10_000 => out.push(Token { tok: Tok::Num(n), line: tl, col: tc }),
                    _ => errs.push(Diagnostic::new(tl, tc, format!("numeral `{s}` is too large"))),
                }
            }
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ':' if next == Some('=') => push(Tok::Assign, 2, &mut i, &mut col),
            ':' if next == Some('|') => push(Tok::SuchThat, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '[' if next == Some(']') => push(Tok::Box, 2, &mut i, &mut col),
            '<' if next == Some('>') => push(Tok::Dia, 2, &mut i, &mut col),
            '<' if next == Some('=') => push(Tok::Le, 2, &mut i, &mut col),
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '-' if next == Some('>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            '!' if next == Some('=') => push(Tok::Neq, 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '□' => push(Tok::Box, 1, &mut i, &mut col),
            '◇' => push(Tok::Dia, 1, &mut i, &mut col),
            '→' => push(Tok::Arrow, 1, &mut i, &mut col),
            '∧' => push(Tok::Amp, 1, &mut i, &mut col),
            '∨' => push(Tok::Bar, 1, &mut i, &mut col),
            '¬' => push(Tok::Bang, 1, &mut i, &mut col),
            '≠' => push(Tok::Neq, 1, &mut i, &mut col),
            '≤' => push(Tok::Le, 1, &mut i, &mut col),
            '∈' => push(Tok::Ident("in".into()), 1, &mut i, &mut col),
            other => {
                errs.push(Diagnostic::new(tl, tc, format!("unexpected character `{other}`")));
                i += 1;
                col += 1;
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}
