//! Architecture strings.
//!
//! ```text
//! arch   := layer ('-' layer)*
//! layer  := NAME '[' int (',' int)? ']'
//! NAME   := 'SC' | 'DP' | 'S' | 'FC'
//! ```
//!
//! `SC[K, M]` is a spectral convolution with `K` filters of degree `M`,
//! `DP[J]` a dynamic pooling keeping `J` vertices per map, `S[K]` the
//! statistical layer with Chebyshev orders `0..=K`, and `FC[U]` a
//! fully-connected layer with `U` units. Convolutions and poolings
//! alternate (starting with a convolution), then comes exactly one `S`,
//! then at least one `FC`; the last `FC` has one unit per class.
//! Whitespace around tokens and inside brackets is ignored.

use std::fmt;

use crate::error::{Error, Result};
use crate::layers::stat_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv { filters: usize, degree: usize },
    Pool { keep: usize },
    Stat { k_max: usize },
    Fc { units: usize },
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerSpec::Conv { filters, degree } => write!(f, "SC[{filters},{degree}]"),
            LayerSpec::Pool { keep } => write!(f, "DP[{keep}]"),
            LayerSpec::Stat { k_max } => write!(f, "S[{k_max}]"),
            LayerSpec::Fc { units } => write!(f, "FC[{units}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
    pub height: usize,
    pub width: usize,
    pub num_classes: usize,
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{layer}")?;
        }
        Ok(())
    }
}

impl NetworkSpec {
    pub fn num_vertices(&self) -> usize {
        self.height * self.width
    }

    /// Number of maps entering the statistical layer.
    pub fn stat_maps(&self) -> usize {
        self.layers
            .iter()
            .rev()
            .find_map(|l| match l {
                LayerSpec::Conv { filters, .. } => Some(*filters),
                _ => None,
            })
            .unwrap_or(1)
    }

    pub fn k_max(&self) -> usize {
        self.layers
            .iter()
            .find_map(|l| match l {
                LayerSpec::Stat { k_max } => Some(*k_max),
                _ => None,
            })
            .expect("validated spec has a statistical layer")
    }

    /// Width of the vector handed to the first fully-connected layer.
    pub fn feature_len(&self) -> usize {
        self.stat_maps() * stat_len(self.k_max())
    }
}

struct Token {
    name: String,
    args: Vec<usize>,
    start: usize,
}

fn perr(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut tokens = Vec::new();
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    loop {
        skip_ws(&mut pos);
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
            pos += 1;
        }
        if start == pos {
            return Err(perr(start, "expected a layer name"));
        }
        let name = text[start..pos].to_string();
        skip_ws(&mut pos);
        if bytes.get(pos) != Some(&b'[') {
            return Err(perr(pos, format!("expected '[' after {name}")));
        }
        pos += 1;
        let mut args = Vec::new();
        loop {
            skip_ws(&mut pos);
            let num_start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if num_start == pos {
                return Err(perr(pos, "expected an unsigned integer"));
            }
            let value = text[num_start..pos]
                .parse::<usize>()
                .map_err(|_| perr(num_start, "integer out of range"))?;
            args.push(value);
            skip_ws(&mut pos);
            match bytes.get(pos) {
                Some(b',') => pos += 1,
                Some(b']') => {
                    pos += 1;
                    break;
                }
                _ => return Err(perr(pos, "expected ',' or ']'")),
            }
        }
        tokens.push(Token { name, args, start });
        skip_ws(&mut pos);
        match bytes.get(pos) {
            None => break,
            Some(b'-') => pos += 1,
            Some(_) => return Err(perr(pos, "expected '-' between layers")),
        }
    }
    Ok(tokens)
}

fn positive(value: usize, what: &str, at: usize) -> Result<usize> {
    if value == 0 {
        Err(perr(at, format!("{what} must be at least 1")))
    } else {
        Ok(value)
    }
}

pub fn parse_architecture(
    text: &str,
    input: (usize, usize),
    num_classes: usize,
) -> Result<NetworkSpec> {
    let (height, width) = input;
    if height == 0 || width == 0 || height * width < 2 {
        return Err(Error::InvalidArgument(format!(
            "bad input size {height}x{width}"
        )));
    }
    if num_classes < 2 {
        return Err(Error::InvalidArgument("need at least two classes".into()));
    }
    if text.trim().is_empty() {
        return Err(perr(0, "empty architecture string"));
    }
    let tokens = lex(text)?;
    let mut layers = Vec::with_capacity(tokens.len());
    let mut seen_stat = false;
    for tok in &tokens {
        let arity = |n: usize| -> Result<()> {
            if tok.args.len() == n {
                Ok(())
            } else {
                Err(perr(
                    tok.start,
                    format!("{} takes {n} argument(s), got {}", tok.name, tok.args.len()),
                ))
            }
        };
        let prev = layers.last().copied();
        let layer = match tok.name.as_str() {
            "SC" => {
                arity(2)?;
                if seen_stat {
                    return Err(perr(tok.start, "SC after the statistical layer"));
                }
                if matches!(prev, Some(LayerSpec::Conv { .. })) {
                    return Err(perr(
                        tok.start,
                        "two SC layers in a row; SC and DP must alternate",
                    ));
                }
                LayerSpec::Conv {
                    filters: positive(tok.args[0], "SC filter count", tok.start)?,
                    degree: tok.args[1],
                }
            }
            "DP" => {
                arity(1)?;
                if seen_stat {
                    return Err(perr(tok.start, "DP after the statistical layer"));
                }
                if !matches!(prev, Some(LayerSpec::Conv { .. })) {
                    return Err(perr(tok.start, "DP must follow an SC layer"));
                }
                LayerSpec::Pool {
                    keep: positive(tok.args[0], "DP size", tok.start)?,
                }
            }
            "S" => {
                arity(1)?;
                if seen_stat {
                    return Err(perr(tok.start, "more than one statistical layer"));
                }
                seen_stat = true;
                LayerSpec::Stat { k_max: tok.args[0] }
            }
            "FC" => {
                arity(1)?;
                if !seen_stat {
                    return Err(perr(tok.start, "FC before the statistical layer"));
                }
                LayerSpec::Fc {
                    units: positive(tok.args[0], "FC width", tok.start)?,
                }
            }
            other => return Err(perr(tok.start, format!("unknown layer `{other}`"))),
        };
        layers.push(layer);
    }
    let last = tokens.last().expect("lexer returns at least one token");
    match layers.last() {
        Some(LayerSpec::Fc { units }) if *units == num_classes => {}
        Some(LayerSpec::Fc { units }) => {
            return Err(perr(
                last.start,
                format!("last FC has {units} units but there are {num_classes} classes"),
            ))
        }
        _ if !seen_stat => return Err(perr(text.len(), "missing statistical layer S[K]")),
        _ => return Err(perr(text.len(), "the network must end with an FC layer")),
    }
    Ok(NetworkSpec {
        layers,
        height,
        width,
        num_classes,
    })
}

/// Like [`parse_architecture`], with the class count taken from the width
/// of the final `FC` layer.
pub fn parse_architecture_inferred(text: &str, input: (usize, usize)) -> Result<NetworkSpec> {
    let tokens = if text.trim().is_empty() {
        Vec::new()
    } else {
        lex(text)?
    };
    let classes = match tokens.last() {
        Some(t) if t.name == "FC" && t.args.len() == 1 => t.args[0].max(2),
        _ => 2,
    };
    parse_architecture(text, input, classes)
}
