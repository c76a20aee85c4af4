//! Clicked-URL decomposition and the query↔domain similarity test.
//!
//! A click log stores full URLs; the labelling rules only care about which
//! site was reached ([`ParsedUrl::registrable_domain`]) and how much the
//! query looks like that site's name ([`navigational_similarity`]).

use crate::lexicon::Lexicon;
use thiserror::Error;

/// The pieces of a clicked URL the labelling rules consume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedUrl {
    /// The URL as it appeared in the log.
    pub raw: String,
    /// Lowercased authority with scheme, userinfo, port and path stripped,
    /// and a leading "www." removed.
    pub host: String,
    /// Host minus any leading "www."; the name the site is known by.
    pub registrable_domain: String,
    /// Registrable domain minus its public-suffix labels: the part people
    /// actually type ("armystudyguide" for armystudyguide.com).
    pub domain_core: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no host could be extracted from {0:?}")]
pub struct UnparseableUrl(pub String);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot compare two empty strings")]
pub struct BothEmpty;

/// Splits a URL into host / registrable domain / domain core. `tld_suffixes`
/// supplies the public-suffix entries (each with a leading dot) used to peel
/// the suffix off the core. Tolerates scheme-less input.
pub fn parse_url(raw: &str, tld_suffixes: &Lexicon) -> Result<ParsedUrl, UnparseableUrl> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(UnparseableUrl(raw.to_string()));
    }
    let after_scheme = match trimmed.find("://") {
        Some(idx) => &trimmed[idx + 3..],
        None => trimmed,
    };
    let authority = after_scheme
        .split(['/', '?', '#'])
        .next()
        .unwrap_or_default();
    // Userinfo ends at the last '@' inside the authority.
    let host_port = match authority.rfind('@') {
        Some(idx) => &authority[idx + 1..],
        None => authority,
    };
    // Ports sit after ':', except inside a bracketed IPv6 literal.
    let host_raw = if let Some(rest) = host_port.strip_prefix('[') {
        rest.split(']').next().unwrap_or_default()
    } else {
        host_port.split(':').next().unwrap_or_default()
    };
    let mut host = host_raw.trim_end_matches('.').to_lowercase();
    if host.is_empty() || host.chars().any(char::is_whitespace) {
        return Err(UnparseableUrl(raw.to_string()));
    }
    if let Some(stripped) = host.strip_prefix("www.") {
        if !stripped.is_empty() {
            host = stripped.to_string();
        }
    }
    let registrable_domain = match host.strip_prefix("www.") {
        Some(stripped) if !stripped.is_empty() => stripped.to_string(),
        _ => host.clone(),
    };
    let domain_core = strip_suffix_labels(&registrable_domain, tld_suffixes);
    Ok(ParsedUrl {
        raw: raw.to_string(),
        host,
        registrable_domain,
        domain_core,
    })
}

/// Removes the longest public-suffix entry matching the end of `domain`;
/// falls back to dropping the final dot-separated label. Single-label
/// names are returned whole.
fn strip_suffix_labels(domain: &str, tld_suffixes: &Lexicon) -> String {
    let longest = tld_suffixes
        .iter()
        .filter(|suffix| domain.len() > suffix.len() && domain.ends_with(suffix))
        .max_by_key(|suffix| suffix.len());
    if let Some(suffix) = longest {
        return domain[..domain.len() - suffix.len()].to_string();
    }
    match domain.rfind('.') {
        Some(idx) if idx > 0 => domain[..idx].to_string(),
        _ => domain.to_string(),
    }
}

/// Unit-cost edit distance (insert / delete / substitute) over Unicode
/// scalar values. Two-row dynamic programming, O(|a|·|b|) time, O(min) space.
pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    let (short, long): (Vec<char>, Vec<char>) = {
        let ac: Vec<char> = a.chars().collect();
        let bc: Vec<char> = b.chars().collect();
        if ac.len() <= bc.len() {
            (ac, bc)
        } else {
            (bc, ac)
        }
    };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0usize; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let substitute = prev[j] + usize::from(lc != sc);
            let delete = prev[j + 1] + 1;
            let insert = curr[j] + 1;
            curr[j + 1] = substitute.min(delete).min(insert);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Normalized similarity: (|a| + |b| − distance) / (|a| + |b|), in [0, 1].
/// Lengths are counted in Unicode scalar values, matching the distance.
pub fn levenshtein_ratio(a: &str, b: &str) -> Result<f64, BothEmpty> {
    let la = a.chars().count();
    let lb = b.chars().count();
    let total = la + lb;
    if total == 0 {
        return Err(BothEmpty);
    }
    let d = levenshtein_distance(a, b);
    Ok((total - d) as f64 / total as f64)
}

/// Drops whitespace and punctuation, keeping only alphanumerics, so the
/// query can be compared against a domain name that has no word breaks.
pub fn compact(query: &str) -> String {
    query
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// How much the query reads as the name of the clicked site: the ratio
/// between the compacted query and the domain core.
pub fn navigational_similarity(query: &str, url: &ParsedUrl) -> Result<f64, BothEmpty> {
    levenshtein_ratio(&compact(query), &url.domain_core)
}
