//! Goursat signatures `<rho_1, ..., rho_k>` and the type numbers of the
//! Brunovsky normal form they determine.

use std::fmt;
use std::str::FromStr;

use flags::RefinedDerivedType;
use geomcore::{Chart, Ctx, Distribution, GeomError, Role, VectorField};

/// `kappa = <rho_1, ..., rho_k>`: `rho_j` chains of order `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GoursatSignature {
    pub rho: Vec<usize>,
}

impl GoursatSignature {
    /// Checked constructor: non-empty with `rho_k >= 1`.
    pub fn new(rho: Vec<usize>) -> Result<GoursatSignature, ParseSignatureError> {
        match rho.last() {
            None => Err(ParseSignatureError("empty signature".into())),
            Some(0) => Err(ParseSignatureError("the last entry must be at least 1".into())),
            _ => Ok(GoursatSignature { rho }),
        }
    }

    /// From a list of chain orders `sigma_i >= 1`, in any order.
    pub fn from_chain_orders(orders: &[usize]) -> Result<GoursatSignature, ParseSignatureError> {
        let k = orders.iter().copied().max().unwrap_or(0);
        if orders.contains(&0) {
            return Err(ParseSignatureError("chain orders must be at least 1".into()));
        }
        let mut rho = vec![0; k];
        for &s in orders {
            rho[s - 1] += 1;
        }
        GoursatSignature::new(rho)
    }

    /// Derived length `k`.
    pub fn derived_length(&self) -> usize {
        self.rho.len()
    }

    /// Number of chains `m = sum rho_l`.
    pub fn chains(&self) -> usize {
        self.rho.iter().sum()
    }

    /// `Delta_i = sum_{l >= i} rho_l` for `1 <= i <= k`, stored at `i - 1`.
    pub fn deltas(&self) -> Vec<usize> {
        let mut out = vec![0; self.rho.len()];
        let mut acc = 0;
        for i in (0..self.rho.len()).rev() {
            acc += self.rho[i];
            out[i] = acc;
        }
        out
    }

    /// Chain orders in ascending order, one entry per chain.
    pub fn chain_orders(&self) -> Vec<usize> {
        self.rho
            .iter()
            .enumerate()
            .flat_map(|(j, &r)| std::iter::repeat_n(j + 1, r))
            .collect()
    }

    /// Dimension of `J^kappa`: `1 + sum (sigma_i + 1)`.
    pub fn jet_dimension(&self) -> usize {
        1 + self.chain_orders().iter().map(|s| s + 1).sum::<usize>()
    }

    /// Refined derived type of the Brunovsky normal form of this type.
    pub fn refined_derived_type(&self) -> RefinedDerivedType {
        let k = self.rho.len();
        let deltas = self.deltas();
        let mut m = vec![1 + self.chains()];
        for d in &deltas {
            m.push(m.last().unwrap() + d);
        }
        let mut chi: Vec<usize> = (0..k).map(|j| 2 * m[j] - m[j + 1] - 1).collect();
        chi.push(m[k]);
        let inter: Vec<usize> = (1..=k).map(|i| if i < k { m[i - 1] - 1 } else { m[k - 1] }).collect();
        RefinedDerivedType::from_parts(&m, &chi, &inter)
    }

    /// The Brunovsky contact distribution on `J^kappa` with coordinates
    /// `t, z<c>_<l>`; chains are numbered by ascending order.
    pub fn contact_distribution(&self, ctx: &Ctx) -> Result<Distribution, GeomError> {
        let orders = self.chain_orders();
        let mut pairs: Vec<(String, Role)> = vec![("t".into(), Role::Time)];
        for (c, &len) in orders.iter().enumerate() {
            for l in 0..=len {
                pairs.push((format!("z{}_{}", c + 1, l), Role::Jet { chain: c + 1, order: l }));
            }
        }
        let refs: Vec<(&str, Role)> = pairs.iter().map(|(n, r)| (n.as_str(), *r)).collect();
        let chart = Chart::from_pairs(&refs)?;
        let mut total = VectorField::coordinate_named(&chart, "t")?;
        let mut fields = Vec::new();
        for (c, &len) in orders.iter().enumerate() {
            for l in 0..len {
                let d = VectorField::coordinate_named(&chart, &format!("z{}_{}", c + 1, l))?;
                total = total.add(&d.scale(&symexpr::NormalForm::var(&format!("z{}_{}", c + 1, l + 1))));
            }
            fields.push(VectorField::coordinate_named(&chart, &format!("z{}_{}", c + 1, len))?);
        }
        fields.insert(0, total);
        Distribution::new(&chart, &fields, ctx)
    }
}

impl fmt::Display for GoursatSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rho.iter().map(|r| r.to_string()).collect();
        write!(f, "<{}>", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSignatureError(pub String);

impl fmt::Display for ParseSignatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed signature: {}", self.0)
    }
}

impl std::error::Error for ParseSignatureError {}

impl FromStr for GoursatSignature {
    type Err = ParseSignatureError;

    /// Accepts `<0,1,1>`, `⟨0,1,1⟩` or `0,1,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix('<')
            .or_else(|| t.strip_prefix('⟨'))
            .unwrap_or(t);
        let t = t.strip_suffix('>').or_else(|| t.strip_suffix('⟩')).unwrap_or(t);
        let rho = t
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| ParseSignatureError(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        GoursatSignature::new(rho)
    }
}

/// The first relation between refined derived type numbers that fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureMismatch {
    /// Human-readable relation, e.g. `chi^2 = 2 m_2 - m_3 - 1`.
    pub relation: String,
    pub expected: i64,
    pub got: i64,
}

impl fmt::Display for SignatureMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails: expected {}, got {}", self.relation, self.expected, self.got)
    }
}

impl std::error::Error for SignatureMismatch {}

/// Invert the type-number relations of a partial prolongation: returns
/// `kappa = decel(V)` when every relation holds, otherwise the first
/// violated one. With `relative` the relation `m_0 = 1 + m` is skipped,
/// which is the form used for relative Goursat bundles.
pub fn signature_from_rdt(rdt: &RefinedDerivedType, relative: bool) -> Result<GoursatSignature, SignatureMismatch> {
    let fail = |relation: String, expected: i64, got: i64| Err(SignatureMismatch { relation, expected, got });
    let k = rdt.derived_length();
    let m: Vec<i64> = rdt.ranks().iter().map(|&x| x as i64).collect();
    let chi: Vec<i64> = rdt.chars().iter().map(|&x| x as i64).collect();
    let inter: Vec<i64> = rdt.intersections().iter().map(|&x| x as i64).collect();
    if k == 0 {
        return fail("derived length k >= 1".into(), 1, 0);
    }
    let delta: Vec<i64> = (1..=k).map(|i| m[i] - m[i - 1]).collect();
    let mut rho = Vec::with_capacity(k);
    for i in 1..=k {
        let r = if i < k { delta[i - 1] - delta[i] } else { delta[k - 1] };
        let min = if i < k { 0 } else { 1 };
        if r < min {
            let relation = if i < k {
                format!("rho_{i} = Delta_{i} - Delta_{} >= 0", i + 1)
            } else {
                format!("rho_{k} = Delta_{k} >= 1")
            };
            return fail(relation, min, r);
        }
        rho.push(r as usize);
    }
    let chains: i64 = rho.iter().map(|&r| r as i64).sum();
    if !relative && m[0] != 1 + chains {
        return fail("m_0 = 1 + m".into(), 1 + chains, m[0]);
    }
    for j in 0..k {
        let expected = 2 * m[j] - m[j + 1] - 1;
        if chi[j] != expected {
            return fail(format!("chi^{j} = 2 m_{j} - m_{} - 1", j + 1), expected, chi[j]);
        }
    }
    for i in 1..k {
        let expected = m[i - 1] - 1;
        if inter[i - 1] != expected {
            return fail(format!("chi^{i}_{} = m_{} - 1", i - 1, i - 1), expected, inter[i - 1]);
        }
    }
    if chi[k] != m[k] {
        return fail(format!("chi^{k} = m_{k}"), m[k], chi[k]);
    }
    Ok(GoursatSignature { rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rdt(s: &str) -> RefinedDerivedType {
        s.parse().unwrap()
    }

    #[test]
    fn display_and_parse() {
        let s: GoursatSignature = "<0,1,1>".parse().unwrap();
        assert_eq!(s.rho, vec![0, 1, 1]);
        assert_eq!(s.to_string(), "<0,1,1>");
        assert_eq!("⟨2,1⟩".parse::<GoursatSignature>().unwrap().rho, vec![2, 1]);
        assert!("<1,0>".parse::<GoursatSignature>().is_err());
        assert!("<>".parse::<GoursatSignature>().is_err());
    }

    #[test]
    fn relations() {
        assert_eq!(signature_from_rdt(&rdt("[[4,0],[7,3,5],[8,8]]"), false).unwrap().rho, vec![2, 1]);
        assert_eq!(signature_from_rdt(&rdt("[[3,0],[5,2,2],[7,4,5],[8,8]]"), false).unwrap().rho, vec![0, 1, 1]);
        let bc = signature_from_rdt(&rdt("[[4,0],[7,3,4],[9,5,5],[11,11]]"), false).unwrap_err();
        assert_eq!((bc.expected, bc.got), (6, 5));
        assert_eq!(bc.relation, "chi^2 = 2 m_2 - m_3 - 1");
        assert!(signature_from_rdt(&rdt("[[5,2],[7,4,5],[8,8]]"), false).is_err());
        assert_eq!(signature_from_rdt(&rdt("[[5,2],[7,4,5],[8,8]]"), true).unwrap().rho, vec![1, 1]);
    }

    #[test]
    fn expected_type_numbers() {
        let s = GoursatSignature::new(vec![0, 1, 1]).unwrap();
        assert_eq!(s.refined_derived_type().to_string(), "[[3,0],[5,2,2],[7,4,5],[8,8]]");
        assert_eq!(s.chain_orders(), vec![2, 3]);
        assert_eq!(s.jet_dimension(), 8);
        assert_eq!(GoursatSignature::from_chain_orders(&[3, 2]).unwrap(), s);
    }
}
