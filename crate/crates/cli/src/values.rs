//! Text forms of list, range, fraction and latency arguments. The same
//! parsers serve flags and config-file values.

use std::str::FromStr;

use mvcode::analysis::{Fraction, Memory};
use mvcode::sim::LatencyModel;

/// Comma-separated integers and inclusive ranges: `5,10`, `2..50`, `1..4,8`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntList(pub Vec<u64>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            if let Some((lo, hi)) = item.split_once("..") {
                let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range start in '{item}'"))?;
                let hi = hi.trim().trim_start_matches('=');
                let hi: u64 = hi.parse().map_err(|_| format!("bad range end in '{item}'"))?;
                if lo > hi {
                    return Err(format!("empty range '{item}'"));
                }
                out.extend(lo..=hi);
            } else if !item.is_empty() {
                out.push(item.parse().map_err(|_| format!("'{item}' is not a non-negative integer"))?);
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(IntList(out))
    }
}

impl IntList {
    pub fn usizes(&self) -> Vec<usize> {
        self.0.iter().map(|&v| v as usize).collect()
    }
}

/// Comma-separated fractions such as `1/2,1/2` or `1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionList(pub Vec<Fraction>);

impl FromStr for FractionList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(str::trim)
            .map(|item| match item.split_once('/') {
                Some((n, d)) => {
                    let n: u64 = n.trim().parse().map_err(|_| format!("bad fraction '{item}'"))?;
                    let d: u64 = d.trim().parse().map_err(|_| format!("bad fraction '{item}'"))?;
                    if d == 0 {
                        return Err(format!("zero denominator in '{item}'"));
                    }
                    Ok(Fraction::new(n, d))
                }
                None => item.parse().map(Fraction::from_integer).map_err(|_| format!("bad fraction '{item}'")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FractionList(items))
    }
}

/// `shifted-exp:SHIFT,RATE` or `det:TIME`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Latency(pub LatencyModel);

impl FromStr for Latency {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let nums = params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad latency parameter '{p}'")))
            .collect::<Result<Vec<_>, _>>()?;
        let model = match (family.trim(), nums.as_slice()) {
            ("shifted-exp", []) => LatencyModel::default(),
            ("shifted-exp", [shift, rate]) => LatencyModel::ShiftedExponential { shift: *shift, rate: *rate },
            ("det" | "deterministic", [t]) => LatencyModel::Deterministic { task_time: *t },
            _ => return Err(format!("unknown latency model '{s}' (use shifted-exp:SHIFT,RATE or det:TIME)")),
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(Latency(model))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryList(pub Vec<Memory>);

impl FromStr for MemoryList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(str::trim)
            .map(|m| match m {
                "shared" | "s" | "S" => Ok(Memory::Shared),
                "dedicated" | "d" | "D" => Ok(Memory::Dedicated),
                _ => Err(format!("unknown memory mode '{m}'")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MemoryList(items))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Convention {
    Minus,
    Plus,
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

impl From<Convention> for mvcode::placement::GridConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Minus => Self::Minus,
            Convention::Plus => Self::Plus,
        }
    }
}

/// Exact `n`-th root of a worker count, if any: the symmetric storage
/// fraction `N^{-1/n}` is `1/root`.
pub fn symmetric_fraction(workers: u64, n: usize) -> Option<Fraction> {
    let guess = (workers as f64).powf(1.0 / n as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1)
        .find(|&r| r > 0 && r.checked_pow(n as u32) == Some(workers))
        .map(|r| Fraction::new(1, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists() {
        assert_eq!("5,10".parse::<IntList>().unwrap().0, vec![5, 10]);
        assert_eq!("2..4,8".parse::<IntList>().unwrap().0, vec![2, 3, 4, 8]);
        assert_eq!("1..=2".parse::<IntList>().unwrap().0, vec![1, 2]);
        assert!("10..2".parse::<IntList>().is_err());
        assert!("".parse::<IntList>().is_err());
        assert!("x".parse::<IntList>().is_err());
    }

    #[test]
    fn fractions_and_latency() {
        assert_eq!("1/2, 1".parse::<FractionList>().unwrap().0, vec![Fraction::new(1, 2), Fraction::from_integer(1)]);
        assert!("1/0".parse::<FractionList>().is_err());
        assert_eq!("det:2".parse::<Latency>().unwrap().0, LatencyModel::Deterministic { task_time: 2.0 });
        assert_eq!("shifted-exp".parse::<Latency>().unwrap().0, LatencyModel::default());
        assert!("shifted-exp:1,0".parse::<Latency>().is_err());
        assert!("gamma:1".parse::<Latency>().is_err());
    }

    #[test]
    fn symmetric_roots() {
        assert_eq!(symmetric_fraction(4, 2), Some(Fraction::new(1, 2)));
        assert_eq!(symmetric_fraction(8, 3), Some(Fraction::new(1, 2)));
        assert_eq!(symmetric_fraction(1, 3), Some(Fraction::from_integer(1)));
        assert_eq!(symmetric_fraction(5, 2), None);
    }
}
