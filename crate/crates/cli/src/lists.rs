//! Integer and float list arguments: `2,3,5`, `2..6` (exclusive), `2..=6`, or a mix.

use std::str::FromStr;

/// One command-line value holding a whole list.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_item<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse::<T>()
        .map_err(|_| format!("cannot parse {s:?}"))
}

fn integer_list(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (b, inclusive) = match b.strip_prefix('=') {
                Some(rest) => (rest, true),
                None => (b, false),
            };
            let lo: u64 = parse_item(a)?;
            let hi: u64 = parse_item(b)?;
            let end = if inclusive {
                hi.checked_add(1).ok_or("range overflow")?
            } else {
                hi
            };
            if lo >= end {
                return Err(format!("empty range {part:?}"));
            }
            if end - lo > 1_000_000 {
                return Err(format!("range {part:?} is too long"));
            }
            out.extend(lo..end);
        } else {
            out.push(parse_item(part)?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn usize_list(text: &str) -> Result<List<usize>, String> {
    Ok(List(
        integer_list(text)?
            .into_iter()
            .map(|v| v as usize)
            .collect(),
    ))
}

pub fn u64_list(text: &str) -> Result<List<u64>, String> {
    integer_list(text).map(List)
}

pub fn f64_list(text: &str) -> Result<List<f64>, String> {
    let out: Vec<f64> = text
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_item::<f64>)
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_lists() {
        assert_eq!(usize_list("2,4..6,8..=9").unwrap().0, vec![2, 4, 5, 8, 9]);
        assert_eq!(u64_list("0..3").unwrap().0, vec![0, 1, 2]);
        assert_eq!(f64_list("1e-2, 1e-3").unwrap().0, vec![1e-2, 1e-3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(usize_list("").is_err());
        assert!(usize_list("5..5").is_err());
        assert!(usize_list("a").is_err());
        assert!(f64_list("1,,x").is_err());
    }
}
