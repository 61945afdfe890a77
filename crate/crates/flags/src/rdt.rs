//! The refined derived type `[[m0, c0], [m1, c1_0, c1], ..., [mk, ck]]`.

use std::fmt;
use std::str::FromStr;

/// Refined derived type. Interior entries are `[m_i, chi^i_{i-1}, chi^i]`;
/// the first is `[m_0, chi^0]` and the last `[m_k, chi^k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RefinedDerivedType(pub Vec<Vec<usize>>);

impl RefinedDerivedType {
    /// Assemble from ranks `m_0..m_k`, Cauchy ranks `chi^0..chi^k` and
    /// intersection ranks `chi^1_0..chi^k_{k-1}`.
    pub fn from_parts(m: &[usize], chi: &[usize], inter: &[usize]) -> RefinedDerivedType {
        let k = m.len() - 1;
        let mut out = Vec::with_capacity(k + 1);
        for i in 0..=k {
            if i == 0 || i == k {
                out.push(vec![m[i], chi[i]]);
            } else {
                out.push(vec![m[i], inter[i - 1], chi[i]]);
            }
        }
        RefinedDerivedType(out)
    }

    /// Derived length `k`.
    pub fn derived_length(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// `m_i`.
    pub fn ranks(&self) -> Vec<usize> {
        self.0.iter().map(|e| e[0]).collect()
    }

    /// `chi^i` (Cauchy bundle ranks).
    pub fn chars(&self) -> Vec<usize> {
        self.0.iter().map(|e| *e.last().unwrap()).collect()
    }

    /// `chi^i_{i-1}` for the interior entries `1 <= i < k`.
    pub fn intersections(&self) -> Vec<usize> {
        self.0
            .iter()
            .filter(|e| e.len() == 3)
            .map(|e| e[1])
            .collect()
    }
}

impl fmt::Display for RefinedDerivedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let parts: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            write!(f, "[{}]", parts.join(","))?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRdtError(pub String);

impl fmt::Display for ParseRdtError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed refined derived type: {}", self.0)
    }
}

impl std::error::Error for ParseRdtError {}

impl FromStr for RefinedDerivedType {
    type Err = ParseRdtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix("[[")
            .and_then(|r| r.strip_suffix("]]"))
            .ok_or_else(|| ParseRdtError(s.to_string()))?;
        let mut out = Vec::new();
        for group in inner.split("],[") {
            let nums = group
                .split(',')
                .map(|n| n.parse::<usize>().map_err(|_| ParseRdtError(s.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if !(1..=3).contains(&nums.len()) {
                return Err(ParseRdtError(s.to_string()));
            }
            out.push(nums);
        }
        Ok(RefinedDerivedType(out))
    }
}
