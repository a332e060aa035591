//! Lexing shared by the Prolog-style file formats.

use std::fmt::Write;

/// The line with any `%` comment outside quotes removed, trimmed.
pub(crate) fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match quote {
            Some(q) => {
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == '%' => return line[..i].trim(),
            None => {}
        }
    }
    line.trim()
}

/// One argument of a parsed atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Arg {
    pub text: String,
    pub quoted: bool,
}

/// `name(arg, ...)` at the start of `input`. Returns the name, the arguments
/// and the unconsumed remainder.
pub(crate) fn parse_atom(input: &str) -> Result<(String, Vec<Arg>, &str), String> {
    let input = input.trim_start();
    let open = input.find('(').ok_or_else(|| "expected `(`".to_string())?;
    let name = input[..open].trim();
    if name.is_empty() || !name.chars().all(is_name_char) {
        return Err(format!("invalid predicate name `{name}`"));
    }
    let mut args = Vec::new();
    let mut rest = &input[open + 1..];
    loop {
        rest = rest.trim_start();
        let (arg, after) = parse_arg(rest)?;
        args.push(arg);
        let after = after.trim_start();
        match after.chars().next() {
            Some(',') => rest = &after[1..],
            Some(')') => return Ok((name.to_string(), args, &after[1..])),
            _ => return Err("expected `,` or `)`".into()),
        }
    }
}

fn parse_arg(input: &str) -> Result<(Arg, &str), String> {
    let mut chars = input.char_indices();
    match chars.next() {
        Some((_, q)) if q == '\'' || q == '"' => {
            let mut text = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    text.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((Arg { text, quoted: true }, &input[i + 1..]));
                } else {
                    text.push(c);
                }
            }
            Err("unterminated quote".into())
        }
        _ => {
            let end = input.find(|c: char| c == ',' || c == ')' || c.is_whitespace()).unwrap_or(input.len());
            let text = &input[..end];
            if text.is_empty() {
                return Err("empty argument".into());
            }
            Ok((Arg { text: text.to_string(), quoted: false }, &input[end..]))
        }
    }
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether an unquoted token may name a constant: it starts with a lowercase
/// letter or a digit. Capitalized tokens and `_` are variables.
pub(crate) fn is_plain_constant(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit())
        && s.chars().all(|c| is_name_char(c) || c == '-' || c == '.')
}

/// Writes a constant, quoting it when it would not lex back as itself.
pub(crate) fn write_constant(out: &mut String, name: &str) {
    if is_plain_constant(name) {
        out.push_str(name);
    } else {
        out.push('\'');
        for c in name.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
    }
}

pub(crate) fn write_atom<'a>(out: &mut String, name: &str, args: impl IntoIterator<Item = &'a str>) {
    let _ = write!(out, "{name}(");
    for (i, a) in args.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_constant(out, a);
    }
    out.push(')');
}

/// Expects a terminating `.` and nothing after it.
pub(crate) fn expect_end(rest: &str) -> Result<(), String> {
    match rest.trim().strip_prefix('.') {
        Some(r) if r.trim().is_empty() => Ok(()),
        _ => Err("expected `.` at end of statement".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_inside_quotes_are_kept() {
        assert_eq!(strip_comment("p('a%b'). % note"), "p('a%b').");
        assert_eq!(strip_comment("% whole line"), "");
    }

    #[test]
    fn atoms_with_quoted_arguments() {
        let (name, args, rest) = parse_atom("likes( ann , 'Big Co', \"x\\\"y\").").unwrap();
        assert_eq!(name, "likes");
        let texts: Vec<&str> = args.iter().map(|a| a.text.as_str()).collect();
        assert_eq!(texts, ["ann", "Big Co", "x\"y"]);
        assert!(args[1].quoted && !args[0].quoted);
        expect_end(rest).unwrap();
    }

    #[test]
    fn malformed_atoms_are_rejected() {
        for bad in ["p", "p(", "p(a", "p(a,)", "(a)", "p q(a)"] {
            assert!(parse_atom(bad).is_err(), "{bad}");
        }
        assert!(expect_end(") x").is_err());
    }

    #[test]
    fn constants_round_trip_through_quoting() {
        for name in ["ann", "m01", "Big Co", "it's", "back\\slash", "_"] {
            let mut s = String::new();
            write_atom(&mut s, "p", [name]);
            let (_, args, _) = parse_atom(&s).unwrap();
            assert_eq!(args[0].text, name);
            assert_eq!(args[0].quoted, !is_plain_constant(name));
        }
    }
}
