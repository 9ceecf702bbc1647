//! Line-oriented textual circuit format.
//!
//! ```text
//! circuit <name>
//! nvars <n>
//! gate <id> = input x<i>
//! gate <id> = const <integer>
//! gate <id> = add <id> <id> ...
//! gate <id> = mul <id> <id> ...
//! output <id>
//! ```
//!
//! `#` starts a comment. Gate ids must be `0, 1, 2, ...` in file order.
//! Constants are reduced modulo the field prime while loading. Parsing
//! checks syntax only; structural problems (forward references, unknown
//! children) are left to [`crate::circuit::validate`].

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::field::Field;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| err(line, format!("expected a gate id, found `{tok}`")))
}

pub fn parse(src: &str, field: Field) -> Result<Circuit> {
    let mut name = None;
    let mut n = None;
    let mut output = None;
    let mut gates = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks[0] {
            "circuit" => {
                if toks.len() != 2 {
                    return Err(err(line, "expected `circuit <name>`"));
                }
                name = Some(toks[1].to_string());
            }
            "nvars" => {
                if toks.len() != 2 {
                    return Err(err(line, "expected `nvars <n>`"));
                }
                n = Some(toks[1].parse::<usize>().map_err(|_| err(line, "bad variable count"))?);
            }
            "output" => {
                if toks.len() != 2 {
                    return Err(err(line, "expected `output <id>`"));
                }
                output = Some(parse_id(toks[1], line)?);
            }
            "gate" => {
                if toks.len() < 4 || toks[2] != "=" {
                    return Err(err(line, "expected `gate <id> = <kind> ...`"));
                }
                let id = parse_id(toks[1], line)?;
                if id != gates.len() {
                    return Err(err(line, format!("gate id {id} out of sequence, expected {}", gates.len())));
                }
                let args = &toks[4..];
                let gate = match toks[3] {
                    "input" => {
                        let var = match args {
                            [v] => v
                                .strip_prefix('x')
                                .and_then(|i| i.parse::<usize>().ok())
                                .filter(|&i| i >= 1)
                                .ok_or_else(|| err(line, format!("bad variable `{v}`")))?,
                            _ => return Err(err(line, "expected `input x<i>`")),
                        };
                        Gate::Input(var - 1)
                    }
                    "const" => match args {
                        [v] => Gate::Const(
                            field.parse_integer(v).ok_or_else(|| err(line, format!("bad integer `{v}`")))?,
                        ),
                        _ => return Err(err(line, "expected `const <integer>`")),
                    },
                    kind @ ("add" | "mul") => {
                        let children = args.iter().map(|t| parse_id(t, line)).collect::<Result<Vec<_>>>()?;
                        if kind == "add" {
                            Gate::Add(children)
                        } else {
                            Gate::Mul(children)
                        }
                    }
                    other => return Err(err(line, format!("unknown gate kind `{other}`"))),
                };
                gates.push(gate);
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| err(0, "missing `nvars`"))?;
    let output = output.ok_or_else(|| err(0, "missing `output`"))?;
    Ok(Circuit::new_unchecked(name.unwrap_or_else(|| "unnamed".into()), n, gates, output, field))
}

/// Canonical serialization: gates in id order, single spaces.
pub fn serialize(c: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "circuit {}", c.name()).unwrap();
    writeln!(s, "nvars {}", c.num_vars()).unwrap();
    for (id, g) in c.gates().iter().enumerate() {
        write!(s, "gate {id} = ").unwrap();
        match g {
            Gate::Input(i) => write!(s, "input x{}", i + 1).unwrap(),
            Gate::Const(v) => write!(s, "const {v}").unwrap(),
            Gate::Add(ch) | Gate::Mul(ch) => {
                s.push_str(g.kind_name());
                for c in ch {
                    write!(s, " {c}").unwrap();
                }
            }
        }
        s.push('\n');
    }
    writeln!(s, "output {}", c.output()).unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate;

    const SRC: &str = "\
# (x1 + x2) * 7
circuit demo
nvars 2
gate 0 = input x1
gate 1 = input x2   # second variable
gate 2 = add 0 1
gate 3 = const -3
gate 4 = mul 2 3
output 4
";

    #[test]
    fn parses_and_reduces_constants() {
        let f = Field::new(10007).unwrap();
        let c = parse(SRC, f).unwrap();
        assert!(validate(&c).is_empty());
        assert_eq!(c.gate(3), &Gate::Const(10004));
        assert_eq!(c.gate(0), &Gate::Input(0));
        assert_eq!(c.evaluate(&[1, 2]), f.from_i128(-9));
    }

    #[test]
    fn serialization_is_canonical() {
        let c = parse(SRC, Field::default()).unwrap();
        let out = serialize(&c);
        assert!(out.starts_with("circuit demo\nnvars 2\ngate 0 = input x1\n"));
        assert_eq!(parse(&out, Field::default()).unwrap(), c);
        assert_eq!(serialize(&parse(&out, Field::default()).unwrap()), out);
    }

    #[test]
    fn structural_errors_survive_parsing() {
        let c = parse("nvars 1\ngate 0 = input x1\ngate 1 = add 2\noutput 1\n", Field::default()).unwrap();
        assert_eq!(validate(&c).len(), 1);
    }

    #[test]
    fn syntax_errors() {
        let f = Field::default();
        assert!(parse("nvars 1\ngate 1 = input x1\noutput 1", f).is_err());
        assert!(parse("nvars 1\ngate 0 = input y1\noutput 0", f).is_err());
        assert!(parse("nvars 1\ngate 0 = input x0\noutput 0", f).is_err());
        assert!(parse("nvars 1\ngate 0 = frob 1\noutput 0", f).is_err());
        assert!(parse("gate 0 = input x1\noutput 0", f).is_err());
        let e = parse("nvars 1\ngate 0 = const abc\noutput 0", f).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }
}
