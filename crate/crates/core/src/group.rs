//! Group kernel: canonical element encodings, concrete group families and
//! finite multiplication tables.
//!
//! Every element is a [`GroupElement`], a short vector of integers whose
//! layout depends on the family. Encodings are canonical, so equality and
//! hashing of elements is equality and hashing of their payloads.

use std::fmt;
use std::str::FromStr;

use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;
use thiserror::Error;

use crate::freegroup::{self, ReducedWord};

/// Groups with more elements than this are never enumerated.
pub const ENUMERATION_CAP: u64 = 1 << 22;

/// Largest group for which a full multiplication table is built.
pub const TABLE_CAP: usize = 4096;

/// Default size bound for exhaustive automorphism search.
pub const AUTOMORPHISM_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },
    #[error("{0} is infinite and has no element enumerator")]
    Infinite(String),
    #[error("{group} has {order} elements, above the cap of {cap}")]
    TooLarge { group: String, order: String, cap: u64 },
    #[error("cannot parse group descriptor `{0}`")]
    BadDescriptor(String),
    #[error("cannot parse element `{text}` of {group}")]
    BadElement { group: String, text: String },
    #[error("element does not belong to {0}")]
    NotAnElement(String),
    #[error("map is not a group automorphism: {0}")]
    NotAutomorphism(String),
}

pub type Payload = SmallVec<[i64; 4]>;

/// A group element in canonical encoding.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroupElement(Payload);

impl GroupElement {
    pub fn new(payload: &[i64]) -> Self {
        GroupElement(SmallVec::from_slice(payload))
    }

    pub fn from_payload(payload: Payload) -> Self {
        GroupElement(payload)
    }

    pub fn payload(&self) -> &[i64] {
        &self.0
    }

    /// Little-endian byte encoding; two elements are equal iff their
    /// encodings are.
    pub fn encode(&self) -> Vec<u8> {
        self.0.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

/// Element algebra shared by finite and infinite groups.
pub trait GroupOps: Send + Sync {
    fn identity(&self) -> GroupElement;
    fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement;
    fn inverse(&self, a: &GroupElement) -> GroupElement;
    /// `None` for infinite groups.
    fn order(&self) -> Option<u64>;
    /// All elements, identity not necessarily first.
    fn elements(&self) -> Result<Vec<GroupElement>, GroupError>;
    fn format_element(&self, a: &GroupElement) -> String;
    fn descriptor(&self) -> String;

    fn pow(&self, a: &GroupElement, n: i64) -> GroupElement {
        let base = if n < 0 { self.inverse(a) } else { a.clone() };
        let mut acc = self.identity();
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.multiply(&sq, &sq);
            }
        }
        acc
    }

    fn element_order(&self, a: &GroupElement) -> Option<u64> {
        let id = self.identity();
        let bound = self.order()?;
        let mut x = a.clone();
        for k in 1..=bound {
            if x == id {
                return Some(k);
            }
            x = self.multiply(&x, a);
        }
        None
    }
}

/// Family tags accepted by [`make_group`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupFamily {
    Cyclic,
    Integers,
    ElementaryAbelian,
    Symmetric,
    Dihedral,
    Quaternion,
    SpecialLinear2,
    Free,
}

/// Concrete groups. Products are direct products of finite or integer
/// factors; free groups cannot be factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    Cyclic { n: u64 },
    Integers,
    ElementaryAbelian { p: u64, k: u32 },
    Symmetric { n: usize },
    Dihedral { n: u64 },
    Quaternion,
    SpecialLinear2 { p: u64 },
    Free { rank: usize },
    Product(Vec<Group>),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn invalid(family: &'static str, reason: impl Into<String>) -> GroupError {
    GroupError::InvalidParameter { family, reason: reason.into() }
}

/// Builds a group of the given family. Parameters: `[n]` for cyclic,
/// symmetric and dihedral, `[p, k]` for elementary abelian, `[p]` for SL₂,
/// `[rank]` for free groups, nothing for ℤ and Q₈.
pub fn make_group(family: GroupFamily, params: &[u64]) -> Result<Group, GroupError> {
    let want = |name: &'static str, count: usize| -> Result<(), GroupError> {
        if params.len() != count {
            Err(invalid(name, format!("expected {count} parameter(s), got {}", params.len())))
        } else {
            Ok(())
        }
    };
    match family {
        GroupFamily::Cyclic => {
            want("cyclic", 1)?;
            Group::cyclic(params[0])
        }
        GroupFamily::Integers => {
            want("integers", 0)?;
            Ok(Group::Integers)
        }
        GroupFamily::ElementaryAbelian => {
            want("elementary abelian", 2)?;
            Group::elementary_abelian(params[0], params[1] as u32)
        }
        GroupFamily::Symmetric => {
            want("symmetric", 1)?;
            Group::symmetric(params[0] as usize)
        }
        GroupFamily::Dihedral => {
            want("dihedral", 1)?;
            Group::dihedral(params[0])
        }
        GroupFamily::Quaternion => {
            want("quaternion", 0)?;
            Ok(Group::Quaternion)
        }
        GroupFamily::SpecialLinear2 => {
            want("SL2", 1)?;
            Group::sl2(params[0])
        }
        GroupFamily::Free => {
            want("free", 1)?;
            Group::free(params[0] as usize)
        }
    }
}

impl Group {
    pub fn cyclic(n: u64) -> Result<Group, GroupError> {
        if n == 0 {
            return Err(invalid("cyclic", "n must be at least 1"));
        }
        if n > i32::MAX as u64 {
            return Err(invalid("cyclic", "n too large"));
        }
        Ok(Group::Cyclic { n })
    }

    pub fn elementary_abelian(p: u64, k: u32) -> Result<Group, GroupError> {
        if !is_prime(p) {
            return Err(invalid("elementary abelian", format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(invalid("elementary abelian", "rank must be at least 1"));
        }
        Ok(Group::ElementaryAbelian { p, k })
    }

    pub fn symmetric(n: usize) -> Result<Group, GroupError> {
        if n == 0 || n > 20 {
            return Err(invalid("symmetric", "degree must be in 1..=20"));
        }
        Ok(Group::Symmetric { n })
    }

    pub fn dihedral(n: u64) -> Result<Group, GroupError> {
        if n == 0 || n > i32::MAX as u64 {
            return Err(invalid("dihedral", "n must be at least 1"));
        }
        Ok(Group::Dihedral { n })
    }

    pub fn sl2(p: u64) -> Result<Group, GroupError> {
        if !is_prime(p) {
            return Err(invalid("SL2", format!("{p} is not prime")));
        }
        if p > (1 << 31) {
            return Err(invalid("SL2", "p must be below 2^31"));
        }
        Ok(Group::SpecialLinear2 { p })
    }

    pub fn free(rank: usize) -> Result<Group, GroupError> {
        if rank == 0 || rank > freegroup::MAX_RANK {
            return Err(invalid("free", format!("rank must be in 1..={}", freegroup::MAX_RANK)));
        }
        Ok(Group::Free { rank })
    }

    pub fn product(factors: Vec<Group>) -> Result<Group, GroupError> {
        if factors.is_empty() {
            return Err(invalid("product", "needs at least one factor"));
        }
        if factors.iter().any(|f| matches!(f, Group::Free { .. })) {
            return Err(invalid("product", "free groups cannot be factors"));
        }
        Ok(Group::Product(factors))
    }

    /// Number of payload slots; `None` for variable-length encodings.
    fn width(&self) -> Option<usize> {
        match self {
            Group::Cyclic { .. } | Group::Integers | Group::Quaternion => Some(1),
            Group::ElementaryAbelian { k, .. } => Some(*k as usize),
            Group::Symmetric { n } => Some(*n),
            Group::Dihedral { .. } => Some(2),
            Group::SpecialLinear2 { .. } => Some(4),
            Group::Free { .. } => None,
            Group::Product(fs) => fs.iter().map(|f| f.width()).sum(),
        }
    }

    fn order_u128(&self) -> Option<u128> {
        match self {
            Group::Cyclic { n } => Some(*n as u128),
            Group::Integers | Group::Free { .. } => None,
            Group::ElementaryAbelian { p, k } => (*p as u128).checked_pow(*k),
            Group::Symmetric { n } => Some((1..=*n as u128).product()),
            Group::Dihedral { n } => Some(2 * *n as u128),
            Group::Quaternion => Some(8),
            Group::SpecialLinear2 { p } => {
                let p = *p as u128;
                Some(p * (p * p - 1))
            }
            Group::Product(fs) => {
                let mut acc: u128 = 1;
                for f in fs {
                    acc = acc.checked_mul(f.order_u128()?)?;
                }
                Some(acc)
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            Group::Cyclic { .. } | Group::Integers | Group::ElementaryAbelian { .. } => true,
            Group::Symmetric { n } => *n <= 2,
            Group::Dihedral { n } => *n <= 2,
            Group::Quaternion => false,
            Group::SpecialLinear2 { .. } => false,
            Group::Free { rank } => *rank == 1,
            Group::Product(fs) => fs.iter().all(|f| f.is_abelian()),
        }
    }

    fn split<'a>(&self, a: &'a [i64]) -> Vec<&'a [i64]> {
        let Group::Product(fs) = self else { return vec![a] };
        let mut out = Vec::with_capacity(fs.len());
        let mut at = 0;
        for f in fs {
            let w = f.width().expect("product factors have fixed width");
            out.push(&a[at..at + w]);
            at += w;
        }
        out
    }

    fn mul_raw(&self, a: &[i64], b: &[i64], out: &mut Payload) {
        match self {
            Group::Cyclic { n } => out.push((a[0] + b[0]) % *n as i64),
            Group::Integers => out.push(a[0] + b[0]),
            Group::ElementaryAbelian { p, .. } => {
                out.extend(a.iter().zip(b).map(|(x, y)| (x + y) % *p as i64))
            }
            // (a·b)(i) = a(b(i))
            Group::Symmetric { .. } => out.extend(b.iter().map(|&bi| a[bi as usize])),
            Group::Dihedral { n } => {
                let n = *n as i64;
                let r = if a[1] == 0 { a[0] + b[0] } else { a[0] - b[0] };
                out.push(r.rem_euclid(n));
                out.push((a[1] + b[1]) % 2);
            }
            Group::Quaternion => out.push(quaternion_mul(a[0], b[0])),
            Group::SpecialLinear2 { p } => {
                let p = *p as i64;
                let m = |x: i64, y: i64, z: i64, w: i64| ((x * y) % p + (z * w) % p) % p;
                out.push(m(a[0], b[0], a[1], b[2]));
                out.push(m(a[0], b[1], a[1], b[3]));
                out.push(m(a[2], b[0], a[3], b[2]));
                out.push(m(a[2], b[1], a[3], b[3]));
            }
            Group::Free { rank } => {
                let wa = freegroup::unpack(*rank, a);
                let wb = freegroup::unpack(*rank, b);
                out.extend_from_slice(freegroup::pack(*rank, &wa.concat(&wb)).payload());
            }
            Group::Product(fs) => {
                let pa = self.split(a);
                let pb = self.split(b);
                for ((f, x), y) in fs.iter().zip(pa).zip(pb) {
                    f.mul_raw(x, y, out);
                }
            }
        }
    }

    fn inv_raw(&self, a: &[i64], out: &mut Payload) {
        match self {
            Group::Cyclic { n } => out.push((*n as i64 - a[0]) % *n as i64),
            Group::Integers => out.push(-a[0]),
            Group::ElementaryAbelian { p, .. } => {
                out.extend(a.iter().map(|x| (*p as i64 - x) % *p as i64))
            }
            Group::Symmetric { n } => {
                let start = out.len();
                out.extend(std::iter::repeat(0).take(*n));
                for (i, &ai) in a.iter().enumerate() {
                    out[start + ai as usize] = i as i64;
                }
            }
            Group::Dihedral { n } => {
                if a[1] == 0 {
                    out.push((*n as i64 - a[0]) % *n as i64);
                    out.push(0);
                } else {
                    out.extend_from_slice(a);
                }
            }
            Group::Quaternion => out.push(if a[0] < 2 { a[0] } else { a[0] ^ 1 }),
            Group::SpecialLinear2 { p } => {
                let p = *p as i64;
                out.push(a[3]);
                out.push((p - a[1]) % p);
                out.push((p - a[2]) % p);
                out.push(a[0]);
            }
            Group::Free { rank } => {
                let w = freegroup::unpack(*rank, a);
                out.extend_from_slice(freegroup::pack(*rank, &w.inverse()).payload());
            }
            Group::Product(fs) => {
                for (f, x) in fs.iter().zip(self.split(a)) {
                    f.inv_raw(x, out);
                }
            }
        }
    }

    fn identity_raw(&self, out: &mut Payload) {
        match self {
            Group::Cyclic { .. } | Group::Integers | Group::Quaternion => out.push(0),
            Group::ElementaryAbelian { k, .. } => out.extend(std::iter::repeat(0).take(*k as usize)),
            Group::Symmetric { n } => out.extend(0..*n as i64),
            Group::Dihedral { .. } => out.extend([0, 0]),
            Group::SpecialLinear2 { .. } => out.extend([1, 0, 0, 1]),
            Group::Free { rank } => out.extend_from_slice(freegroup::pack(*rank, &ReducedWord::empty()).payload()),
            Group::Product(fs) => fs.iter().for_each(|f| f.identity_raw(out)),
        }
    }

    fn enumerate_raw(&self) -> Vec<Payload> {
        match self {
            Group::Cyclic { n } => (0..*n as i64).map(|r| SmallVec::from_slice(&[r])).collect(),
            Group::ElementaryAbelian { p, k } => {
                let mut out = vec![Payload::new()];
                for _ in 0..*k {
                    out = out
                        .into_iter()
                        .flat_map(|v| {
                            (0..*p as i64).map(move |x| {
                                let mut w = v.clone();
                                w.push(x);
                                w
                            })
                        })
                        .collect();
                }
                out
            }
            Group::Symmetric { n } => {
                let mut perm: Vec<i64> = (0..*n as i64).collect();
                let mut out = vec![SmallVec::from_slice(&perm)];
                while next_permutation(&mut perm) {
                    out.push(SmallVec::from_slice(&perm));
                }
                out
            }
            Group::Dihedral { n } => (0..2)
                .flat_map(|s| (0..*n as i64).map(move |r| SmallVec::from_slice(&[r, s])))
                .collect(),
            Group::Quaternion => (0..8).map(|c| SmallVec::from_slice(&[c])).collect(),
            Group::SpecialLinear2 { p } => {
                let p = *p as i64;
                let mut out = Vec::new();
                let ident = [1, 0, 0, 1];
                out.push(SmallVec::from_slice(&ident));
                for a in 0..p {
                    for b in 0..p {
                        for c in 0..p {
                            for d in 0..p {
                                if [a, b, c, d] != ident && ((a * d - b * c) % p + p) % p == 1 % p {
                                    out.push(SmallVec::from_slice(&[a, b, c, d]));
                                }
                            }
                        }
                    }
                }
                out
            }
            Group::Product(fs) => {
                let mut out = vec![Payload::new()];
                for f in fs {
                    let part = f.enumerate_raw();
                    out = out
                        .into_iter()
                        .flat_map(|v| {
                            part.iter().map(move |x| {
                                let mut w = v.clone();
                                w.extend_from_slice(x);
                                w
                            })
                        })
                        .collect();
                }
                out
            }
            Group::Integers | Group::Free { .. } => unreachable!("infinite groups are rejected earlier"),
        }
    }

    fn format_raw(&self, a: &[i64]) -> String {
        match self {
            Group::Cyclic { .. } | Group::Integers => a[0].to_string(),
            Group::ElementaryAbelian { .. } => {
                let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                format!("({})", parts.join(","))
            }
            Group::Symmetric { n } => format_cycles(a, *n),
            Group::Dihedral { .. } => match (a[0], a[1]) {
                (0, 0) => "e".into(),
                (0, _) => "s".into(),
                (1, 0) => "r".into(),
                (1, _) => "r s".into(),
                (r, 0) => format!("r^{r}"),
                (r, _) => format!("r^{r} s"),
            },
            Group::Quaternion => ["1", "-1", "i", "-i", "j", "-j", "k", "-k"][a[0] as usize].into(),
            Group::SpecialLinear2 { .. } => format!("[{},{};{},{}]", a[0], a[1], a[2], a[3]),
            Group::Free { rank } => freegroup::unpack(*rank, a).to_string(),
            Group::Product(fs) => {
                let parts: Vec<String> = fs.iter().zip(self.split(a)).map(|(f, x)| f.format_raw(x)).collect();
                format!("({})", parts.join(", "))
            }
        }
    }

    /// Parses an element written the way [`GroupOps::format_element`] prints it.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let bad = || GroupError::BadElement { group: self.descriptor(), text: text.to_string() };
        let t = text.trim();
        let payload: Payload = match self {
            Group::Cyclic { n } => {
                let v: i64 = t.parse().map_err(|_| bad())?;
                SmallVec::from_slice(&[v.rem_euclid(*n as i64)])
            }
            Group::Integers => SmallVec::from_slice(&[t.parse().map_err(|_| bad())?]),
            Group::ElementaryAbelian { p, k } => {
                let inner = t.trim_start_matches('(').trim_end_matches(')');
                let parts: Vec<i64> = inner
                    .split([',', '.'])
                    .map(|s| s.trim().parse::<i64>().map(|v| v.rem_euclid(*p as i64)))
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if parts.len() != *k as usize {
                    return Err(bad());
                }
                SmallVec::from_vec(parts)
            }
            Group::Symmetric { n } => parse_cycles(t, *n).ok_or_else(bad)?,
            Group::Dihedral { n } => parse_dihedral(t, *n).ok_or_else(bad)?,
            Group::Quaternion => {
                let code = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
                    .iter()
                    .position(|s| *s == t)
                    .ok_or_else(bad)?;
                SmallVec::from_slice(&[code as i64])
            }
            Group::SpecialLinear2 { p } => {
                let inner = t.trim_start_matches('[').trim_end_matches(']');
                let parts: Vec<i64> = inner
                    .split([',', ';'])
                    .map(|s| s.trim().parse::<i64>().map(|v| v.rem_euclid(*p as i64)))
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if parts.len() != 4 {
                    return Err(bad());
                }
                let det = (parts[0] * parts[3] - parts[1] * parts[2]).rem_euclid(*p as i64);
                if det != 1 % *p as i64 {
                    return Err(bad());
                }
                SmallVec::from_vec(parts)
            }
            Group::Free { rank } => {
                let w = t.parse::<ReducedWord>().map_err(|_| bad())?;
                if w.rank() > *rank {
                    return Err(bad());
                }
                return Ok(freegroup::pack(*rank, &w));
            }
            Group::Product(fs) => {
                let inner = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
                let parts = split_top_level(inner, ',');
                if parts.len() != fs.len() {
                    return Err(bad());
                }
                let mut out = Payload::new();
                for (f, part) in fs.iter().zip(parts) {
                    out.extend_from_slice(f.parse_element(part)?.payload());
                }
                out
            }
        };
        Ok(GroupElement(payload))
    }

    /// Checks that a payload is a valid canonical element of this group.
    pub fn contains(&self, a: &GroupElement) -> bool {
        self.contains_raw(a.payload())
    }

    fn contains_raw(&self, a: &[i64]) -> bool {
        match self {
            Group::Cyclic { n } => a.len() == 1 && (0..*n as i64).contains(&a[0]),
            Group::Integers => a.len() == 1,
            Group::ElementaryAbelian { p, k } => {
                a.len() == *k as usize && a.iter().all(|x| (0..*p as i64).contains(x))
            }
            Group::Symmetric { n } => {
                let mut seen = vec![false; *n];
                a.len() == *n
                    && a.iter().all(|&x| {
                        (0..*n as i64).contains(&x) && !std::mem::replace(&mut seen[x as usize], true)
                    })
            }
            Group::Dihedral { n } => a.len() == 2 && (0..*n as i64).contains(&a[0]) && (0..2).contains(&a[1]),
            Group::Quaternion => a.len() == 1 && (0..8).contains(&a[0]),
            Group::SpecialLinear2 { p } => {
                let p = *p as i64;
                a.len() == 4
                    && a.iter().all(|x| (0..p).contains(x))
                    && (a[0] * a[3] - a[1] * a[2]).rem_euclid(p) == 1 % p
            }
            Group::Free { rank } => freegroup::try_unpack(*rank, a).is_some(),
            Group::Product(fs) => {
                a.len() == self.width().unwrap_or(usize::MAX)
                    && fs.iter().zip(self.split(a)).all(|(f, x)| f.contains_raw(x))
            }
        }
    }

    /// Parses descriptors such as `z:6`, `z`, `z2^k:3`, `s:3`, `d:4`, `q8`,
    /// `sl2:13`, `f:2` and `prod(z:3,z:3)`.
    pub fn parse(text: &str) -> Result<Group, GroupError> {
        text.parse()
    }
}

impl FromStr for Group {
    type Err = GroupError;

    fn from_str(text: &str) -> Result<Group, GroupError> {
        let t = text.trim();
        let bad = || GroupError::BadDescriptor(t.to_string());
        if let Some(inner) = t.strip_prefix("prod(").and_then(|s| s.strip_suffix(')')) {
            let factors = split_top_level(inner, ',')
                .into_iter()
                .map(|s| s.parse::<Group>())
                .collect::<Result<Vec<_>, _>>()?;
            return Group::product(factors);
        }
        match t {
            "z" | "Z" => return Ok(Group::Integers),
            "q8" | "Q8" => return Ok(Group::Quaternion),
            "f2" | "F2" => return Group::free(2),
            "trivial" | "1" => return Group::cyclic(1),
            _ => {}
        }
        let (head, arg) = t.split_once(':').ok_or_else(bad)?;
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
        match head.trim() {
            "z" | "Z" => Group::cyclic(num(arg)?),
            "s" | "S" => Group::symmetric(num(arg)? as usize),
            "d" | "D" => Group::dihedral(num(arg)?),
            "sl2" | "SL2" => Group::sl2(num(arg)?),
            "f" | "F" => Group::free(num(arg)? as usize),
            h => {
                // z<p>^k:<k>
                let p = h
                    .strip_prefix(['z', 'Z'])
                    .and_then(|s| s.strip_suffix("^k"))
                    .ok_or_else(bad)?;
                Group::elementary_abelian(num(p)?, num(arg)? as u32)
            }
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Cyclic { n } => write!(f, "z:{n}"),
            Group::Integers => write!(f, "z"),
            Group::ElementaryAbelian { p, k } => write!(f, "z{p}^k:{k}"),
            Group::Symmetric { n } => write!(f, "s:{n}"),
            Group::Dihedral { n } => write!(f, "d:{n}"),
            Group::Quaternion => write!(f, "q8"),
            Group::SpecialLinear2 { p } => write!(f, "sl2:{p}"),
            Group::Free { rank } => write!(f, "f:{rank}"),
            Group::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|g| g.to_string()).collect();
                write!(f, "prod({})", parts.join(","))
            }
        }
    }
}

impl GroupOps for Group {
    fn identity(&self) -> GroupElement {
        let mut out = Payload::new();
        self.identity_raw(&mut out);
        GroupElement(out)
    }

    fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut out = Payload::new();
        self.mul_raw(&a.0, &b.0, &mut out);
        GroupElement(out)
    }

    fn inverse(&self, a: &GroupElement) -> GroupElement {
        let mut out = Payload::new();
        self.inv_raw(&a.0, &mut out);
        GroupElement(out)
    }

    fn order(&self) -> Option<u64> {
        self.order_u128().and_then(|o| u64::try_from(o).ok())
    }

    fn elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        let order = self.order_u128().ok_or_else(|| GroupError::Infinite(self.descriptor()))?;
        if order > ENUMERATION_CAP as u128 {
            return Err(GroupError::TooLarge {
                group: self.descriptor(),
                order: order.to_string(),
                cap: ENUMERATION_CAP,
            });
        }
        Ok(self.enumerate_raw().into_iter().map(GroupElement).collect())
    }

    fn format_element(&self, a: &GroupElement) -> String {
        self.format_raw(&a.0)
    }

    fn descriptor(&self) -> String {
        self.to_string()
    }
}

// Units 1, i, j, k with sign bit: code = 2*unit + negative.
fn quaternion_mul(a: i64, b: i64) -> i64 {
    const UNIT: [[(i64, bool); 4]; 4] = [
        [(0, false), (1, false), (2, false), (3, false)],
        [(1, false), (0, true), (3, false), (2, true)],
        [(2, false), (3, true), (0, true), (1, false)],
        [(3, false), (2, false), (1, true), (0, true)],
    ];
    let (u, neg) = UNIT[(a >> 1) as usize][(b >> 1) as usize];
    let sign = (a & 1) ^ (b & 1) ^ neg as i64;
    2 * u + sign
}

fn next_permutation(v: &mut [i64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn format_cycles(images: &[i64], n: usize) -> String {
    let mut seen = vec![false; n];
    let mut out = String::new();
    let sep = if n >= 10 { " " } else { "" };
    for start in 0..n {
        if seen[start] || images[start] as usize == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push((i + 1).to_string());
            i = images[i] as usize;
        }
        out.push('(');
        out.push_str(&cycle.join(sep));
        out.push(')');
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

fn parse_cycles(text: &str, n: usize) -> Option<Payload> {
    let mut images: Vec<i64> = (0..n as i64).collect();
    if text == "e" || text == "()" {
        return Some(SmallVec::from_vec(images));
    }
    // the product of the cycles, rightmost applied first
    let mut cycles = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let body = rest.strip_prefix('(')?;
        let end = body.find(')')?;
        let inner = &body[..end];
        rest = body[end + 1..].trim_start();
        let pts: Vec<usize> = if inner.contains([' ', ',']) {
            inner
                .split([' ', ','])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().ok())
                .collect::<Option<_>>()?
        } else {
            inner.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>()?
        };
        if pts.iter().any(|&p| p == 0 || p > n) {
            return None;
        }
        cycles.push(pts);
    }
    for cycle in &cycles {
        let mut cyc = vec![None; n];
        for (i, &p) in cycle.iter().enumerate() {
            cyc[p - 1] = Some(cycle[(i + 1) % cycle.len()] - 1);
        }
        let old = images.clone();
        for (i, img) in images.iter_mut().enumerate() {
            let after = cyc[i].unwrap_or(i);
            *img = old[after];
        }
    }
    let mut seen = vec![false; n];
    for &x in &images {
        if std::mem::replace(&mut seen[x as usize], true) {
            return None;
        }
    }
    Some(SmallVec::from_vec(images))
}

fn parse_dihedral(text: &str, n: u64) -> Option<Payload> {
    let t = text.trim();
    if t == "e" {
        return Some(SmallVec::from_slice(&[0, 0]));
    }
    let (rot, refl) = match t.strip_suffix('s') {
        Some(r) => (r.trim(), 1),
        None => (t, 0),
    };
    let r = if rot.is_empty() {
        0
    } else if rot == "r" {
        1
    } else {
        rot.strip_prefix("r^")?.parse::<i64>().ok()?
    };
    Some(SmallVec::from_slice(&[r.rem_euclid(n as i64), refl]))
}

/// Splits on `sep` outside of any bracket pair.
pub fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' | '<' => depth += 1,
            ')' | ']' | '}' | '>' => depth -= 1,
            _ if c == sep && depth == 0 => {
                out.push(text[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    let last = text[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

/// The generators x = [[1,2],[0,1]] and y = [[1,0],[2,1]] of SL₂(ℤ_p).
pub fn margulis_generators(p: u64) -> Result<(GroupElement, GroupElement), GroupError> {
    if !is_prime(p) || p == 2 {
        return Err(invalid("Margulis generators", format!("{p} is not an odd prime")));
    }
    Ok((GroupElement::new(&[1, 2, 0, 1]), GroupElement::new(&[1, 0, 2, 1])))
}

/// Multiplication table of a finite group, indexed by enumeration order.
#[derive(Clone, Debug)]
pub struct GroupTable {
    descriptor: String,
    elements: Vec<GroupElement>,
    labels: Vec<String>,
    index: FxHashMap<GroupElement, usize>,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: usize,
}

impl GroupTable {
    pub fn new(group: &dyn GroupOps) -> Result<GroupTable, GroupError> {
        let elements = group.elements()?;
        if elements.len() > TABLE_CAP {
            return Err(GroupError::TooLarge {
                group: group.descriptor(),
                order: elements.len().to_string(),
                cap: TABLE_CAP as u64,
            });
        }
        let n = elements.len();
        let index: FxHashMap<GroupElement, usize> =
            elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mut mul = vec![0u32; n * n];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                mul[i * n + j] = index[&group.multiply(a, b)] as u32;
            }
        }
        let inv = elements.iter().map(|a| index[&group.inverse(a)] as u32).collect();
        let identity = index[&group.identity()];
        let labels = elements.iter().map(|e| group.format_element(e)).collect();
        Ok(GroupTable { descriptor: group.descriptor(), elements, labels, index, mul, inv, identity })
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.elements.len() + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Membership mask of the subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut stack = vec![self.identity];
        while let Some(g) = stack.pop() {
            for &s in gens {
                let h = self.mul(g, s);
                if !seen[h] {
                    seen[h] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    /// A small generating set, chosen greedily among elements of largest order.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut by_order: Vec<usize> = (0..self.order()).collect();
        by_order.sort_by_key(|&a| (std::cmp::Reverse(self.element_order(a)), a));
        let mut gens = Vec::new();
        let mut span = self.generated(&gens);
        for a in by_order {
            if !span[a] {
                gens.push(a);
                span = self.generated(&gens);
            }
        }
        gens
    }

    /// Checks the group axioms on the full table.
    pub fn verify_axioms(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| self.mul(self.identity, a) == a && self.mul(a, self.identity) == a)
            && (0..n).all(|a| self.mul(a, self.inv(a)) == self.identity)
            && (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c)))))
    }
}

/// An automorphism of a group, either tabulated on a finite group or given
/// by a formula that makes sense on infinite groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupAutomorphism {
    Identity,
    /// g ↦ g⁻¹; only an automorphism of abelian groups.
    Inversion,
    /// Images of the elements of a [`GroupTable`], by index.
    Table(Vec<usize>),
}

impl GroupAutomorphism {
    pub fn apply(&self, group: &dyn GroupOps, table: Option<&GroupTable>, g: &GroupElement) -> GroupElement {
        match self {
            GroupAutomorphism::Identity => g.clone(),
            GroupAutomorphism::Inversion => group.inverse(g),
            GroupAutomorphism::Table(images) => {
                let table = table.expect("tabulated automorphism needs its table");
                let i = table.index_of(g).expect("element of the tabulated group");
                table.element(images[i]).clone()
            }
        }
    }

    /// Index permutation induced on a table.
    pub fn index_images(&self, table: &GroupTable) -> Vec<usize> {
        match self {
            GroupAutomorphism::Identity => (0..table.order()).collect(),
            GroupAutomorphism::Inversion => (0..table.order()).map(|i| table.inv(i)).collect(),
            GroupAutomorphism::Table(images) => images.clone(),
        }
    }

    pub fn inverse_on(&self, _table: &GroupTable) -> GroupAutomorphism {
        match self {
            GroupAutomorphism::Table(images) => {
                let mut inv = vec![0; images.len()];
                for (i, &j) in images.iter().enumerate() {
                    inv[j] = i;
                }
                GroupAutomorphism::Table(inv)
            }
            other => other.clone(),
        }
    }

    /// Checks bijectivity and multiplicativity on a finite group.
    pub fn verify(&self, table: &GroupTable) -> Result<(), GroupError> {
        let images = self.index_images(table);
        let n = table.order();
        if images.len() != n {
            return Err(GroupError::NotAutomorphism("image table has wrong length".into()));
        }
        let mut seen = vec![false; n];
        for &j in &images {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(GroupError::NotAutomorphism("not a bijection".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if images[table.mul(a, b)] != table.mul(images[a], images[b]) {
                    return Err(GroupError::NotAutomorphism(format!(
                        "fails on ({}, {})",
                        table.label(a),
                        table.label(b)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// All automorphisms of a finite group of order at most `cap`, found by
/// sending a fixed generating tuple to every candidate tuple of elements of
/// the same orders. Sorted by image table.
pub fn group_automorphisms(table: &GroupTable, cap: usize) -> Result<Vec<GroupAutomorphism>, GroupError> {
    if table.order() > cap {
        return Err(GroupError::TooLarge {
            group: table.descriptor().to_string(),
            order: table.order().to_string(),
            cap: cap as u64,
        });
    }
    let gens = table.generating_set();
    let orders: Vec<usize> = (0..table.order()).map(|a| table.element_order(a)).collect();
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| (0..table.order()).filter(|&h| orders[h] == orders[g]).collect())
        .collect();
    let mut found = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    extend_images(table, &gens, &candidates, 0, &mut choice, &mut found);
    found.sort();
    Ok(found.into_iter().map(GroupAutomorphism::Table).collect())
}

fn extend_images(
    table: &GroupTable,
    gens: &[usize],
    candidates: &[Vec<usize>],
    depth: usize,
    choice: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
) {
    if depth == gens.len() {
        if let Some(images) = homomorphism_from(table, gens, choice) {
            found.push(images);
        }
        return;
    }
    for &c in &candidates[depth] {
        choice[depth] = c;
        extend_images(table, gens, candidates, depth + 1, choice, found);
    }
}

// Extends gens[i] ↦ targets[i] along a spanning search; None if the
// assignment is inconsistent or not injective.
fn homomorphism_from(table: &GroupTable, gens: &[usize], targets: &[usize]) -> Option<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let n = table.order();
    let mut images = vec![UNSET; n];
    images[table.identity()] = table.identity();
    let mut queue = std::collections::VecDeque::from([table.identity()]);
    while let Some(g) = queue.pop_front() {
        for (&s, &t) in gens.iter().zip(targets) {
            let h = table.mul(g, s);
            let img = table.mul(images[g], t);
            if images[h] == UNSET {
                images[h] = img;
                queue.push_back(h);
            } else if images[h] != img {
                return None;
            }
        }
    }
    let distinct: FxHashSet<usize> = images.iter().copied().collect();
    (distinct.len() == n && !distinct.contains(&UNSET)).then_some(images)
}
