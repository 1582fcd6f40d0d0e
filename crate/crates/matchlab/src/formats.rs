//! Line-oriented text formats for markets, models and results.
//!
//! Every format starts with a header line naming it (`market`, `popularity`, `graph`,
//! `vertical`, `exact`); blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use matchlab_core::exact::{EmpiricalDistribution, ExactDistribution};
use matchlab_core::market::{AgentId, BipartiteGraph, Matching, PreferenceProfile, Side};
use matchlab_core::prefdist::PopularityMatrix;
use matchlab_core::Rational;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::stats::ComparisonStats;

struct Lines<'a> {
    origin: &'a str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, origin: &'a str) -> Self {
        Lines {
            origin,
            inner: text.lines().enumerate(),
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            origin: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }
}

impl<'a> Iterator for Lines<'a> {
    /// One-based line number and trimmed content.
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Some((i + 1, line));
            }
        }
        None
    }
}

/// Reads `keyword M W` from the first content line.
fn header(lines: &mut Lines<'_>, keyword: &str) -> Result<(usize, usize)> {
    let Some((n, line)) = lines.next() else {
        return Err(lines.error(1, format!("empty input, expected `{keyword} M W`")));
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields.as_slice() {
        [k, m, w] if *k == keyword => {
            let m = m.parse().map_err(|_| lines.error(n, format!("bad size `{m}`")))?;
            let w = w.parse().map_err(|_| lines.error(n, format!("bad size `{w}`")))?;
            Ok((m, w))
        }
        _ => Err(lines.error(n, format!("expected header `{keyword} M W`, got `{line}`"))),
    }
}

/// Parses `p/q`, an integer, or a decimal such as `0.001`, exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| Rational::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().ok()?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let value = Rational::new(int * &scale + frac.parse::<BigInt>().ok()?, scale);
        return Some(if negative { -value } else { value });
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_agent(lines: &Lines<'_>, n: usize, text: &str, side: Side, bound: usize) -> Result<usize> {
    let agent: AgentId = text
        .parse()
        .map_err(|_| lines.error(n, format!("bad agent name `{text}`")))?;
    if agent.side != side {
        return Err(lines.error(n, format!("`{text}` is on the wrong side")));
    }
    if agent.index >= bound {
        return Err(lines.error(n, format!("`{text}` is out of range")));
    }
    Ok(agent.index)
}

/// `market M W` followed by lines like `m1: w2 > w1`; unlisted agents find no one
/// acceptable.
pub fn parse_profile(text: &str, origin: &str) -> Result<PreferenceProfile> {
    let mut lines = Lines::new(text, origin);
    let (num_men, num_women) = header(&mut lines, "market")?;
    let mut men: Vec<Option<Vec<usize>>> = vec![None; num_men];
    let mut women: Vec<Option<Vec<usize>>> = vec![None; num_women];
    while let Some((n, line)) = lines.next() {
        let Some((name, rest)) = line.split_once(':') else {
            return Err(lines.error(n, format!("expected `agent: list`, got `{line}`")));
        };
        let agent: AgentId = name
            .trim()
            .parse()
            .map_err(|_| lines.error(n, format!("bad agent name `{}`", name.trim())))?;
        let (slot, opposite) = match agent.side {
            Side::Man if agent.index < num_men => (&mut men[agent.index], num_women),
            Side::Woman if agent.index < num_women => (&mut women[agent.index], num_men),
            _ => return Err(lines.error(n, format!("`{agent}` is out of range"))),
        };
        if slot.is_some() {
            return Err(lines.error(n, format!("`{agent}` listed twice")));
        }
        let rest = rest.trim();
        let mut list = Vec::new();
        if !rest.is_empty() {
            for item in rest.split('>') {
                let j = parse_agent(&lines, n, item.trim(), agent.side.opposite(), opposite)?;
                if list.contains(&j) {
                    return Err(lines.error(n, format!("duplicate entry `{}` in the list of {agent}", item.trim())));
                }
                list.push(j);
            }
        }
        *slot = Some(list);
    }
    let men = men.into_iter().map(Option::unwrap_or_default).collect();
    let women = women.into_iter().map(Option::unwrap_or_default).collect();
    Ok(PreferenceProfile::new(men, women)?)
}

pub fn write_profile(profile: &PreferenceProfile) -> String {
    let mut out = format!("market {} {}\n", profile.num_men(), profile.num_women());
    let agents = (0..profile.num_men())
        .map(AgentId::man)
        .chain((0..profile.num_women()).map(AgentId::woman));
    for a in agents {
        let names: Vec<String> = profile
            .list(a)
            .iter()
            .map(|&j| {
                AgentId {
                    side: a.side.opposite(),
                    index: j,
                }
                .to_string()
            })
            .collect();
        if names.is_empty() {
            let _ = writeln!(out, "{a}:");
        } else {
            let _ = writeln!(out, "{a}: {}", names.join(" > "));
        }
    }
    out
}

/// `popularity M W` followed by `M` rows of `W` positive rationals.
pub fn parse_popularity(text: &str, origin: &str) -> Result<PopularityMatrix> {
    let mut lines = Lines::new(text, origin);
    let (num_men, num_women) = header(&mut lines, "popularity")?;
    let mut rows = Vec::with_capacity(num_men);
    while let Some((n, line)) = lines.next() {
        let row = line
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| lines.error(n, format!("bad rational `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != num_women {
            return Err(lines.error(n, format!("expected {num_women} entries, got {}", row.len())));
        }
        if rows.len() == num_men {
            return Err(lines.error(n, format!("more than {num_men} rows")));
        }
        rows.push(row);
    }
    if rows.len() != num_men {
        return Err(lines.error(0, format!("expected {num_men} rows, got {}", rows.len())));
    }
    Ok(PopularityMatrix::new(rows)?)
}

pub fn write_popularity(matrix: &PopularityMatrix) -> String {
    let mut out = format!("popularity {} {}\n", matrix.num_men(), matrix.num_women());
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(format_rational).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

/// `graph M W` followed by one `m<i> w<j>` edge per line.
pub fn parse_graph(text: &str, origin: &str) -> Result<BipartiteGraph> {
    let mut lines = Lines::new(text, origin);
    let (num_men, num_women) = header(&mut lines, "graph")?;
    let mut edges = Vec::new();
    while let Some((n, line)) = lines.next() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [m, w] = fields.as_slice() else {
            return Err(lines.error(n, format!("expected `m<i> w<j>`, got `{line}`")));
        };
        let m = parse_agent(&lines, n, m, Side::Man, num_men)?;
        let w = parse_agent(&lines, n, w, Side::Woman, num_women)?;
        if edges.contains(&(m, w)) {
            return Err(lines.error(n, format!("duplicate edge `{line}`")));
        }
        edges.push((m, w));
    }
    Ok(BipartiteGraph::new(num_men, num_women, edges)?)
}

pub fn write_graph(graph: &BipartiteGraph) -> String {
    let mut out = format!("graph {} {}\n", graph.num_men(), graph.num_women());
    for (m, w) in graph.edges() {
        let _ = writeln!(out, "{} {}", AgentId::man(m), AgentId::woman(w));
    }
    out
}

/// `vertical M W`, then a line of `M` men's weights and a line of `W` women's weights.
pub fn parse_vertical(text: &str, origin: &str) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let mut lines = Lines::new(text, origin);
    let (num_men, num_women) = header(&mut lines, "vertical")?;
    let mut row = |expected: usize, who: &str| -> Result<Vec<Rational>> {
        let Some((n, line)) = lines.next() else {
            return Err(lines.error(0, format!("missing the {who}'s weights")));
        };
        let values = line
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| lines.error(n, format!("bad rational `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != expected {
            return Err(lines.error(n, format!("expected {expected} {who}'s weights, got {}", values.len())));
        }
        Ok(values)
    };
    let men = row(num_men, "men")?;
    let women = row(num_women, "women")?;
    if let Some((n, line)) = lines.next() {
        return Err(lines.error(n, format!("unexpected line `{line}`")));
    }
    Ok((men, women))
}

pub fn write_vertical(men: &[Rational], women: &[Rational]) -> String {
    let join = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(" ");
    format!(
        "vertical {} {}\n{}\n{}\n",
        men.len(),
        women.len(),
        join(men),
        join(women)
    )
}

/// Any of the input files, recognised by its header keyword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarketFile {
    Profile(PreferenceProfile),
    Popularity(PopularityMatrix),
    Graph(BipartiteGraph),
    Vertical { men: Vec<Rational>, women: Vec<Rational> },
}

pub fn parse_market_file(text: &str, origin: &str) -> Result<MarketFile> {
    let keyword = Lines::new(text, origin)
        .next()
        .and_then(|(_, l)| l.split_whitespace().next())
        .unwrap_or("");
    match keyword {
        "market" => parse_profile(text, origin).map(MarketFile::Profile),
        "popularity" => parse_popularity(text, origin).map(MarketFile::Popularity),
        "graph" => parse_graph(text, origin).map(MarketFile::Graph),
        "vertical" => parse_vertical(text, origin).map(|(men, women)| MarketFile::Vertical { men, women }),
        other => Err(Error::Parse {
            origin: origin.to_string(),
            line: 1,
            message: format!("unknown file type `{other}`; expected market, popularity, graph or vertical"),
        }),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_market_file(path: &Path) -> Result<MarketFile> {
    parse_market_file(&read_text(path)?, &path.display().to_string())
}

/// An exact output distribution as persisted by `exact-dist`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub num_men: usize,
    pub num_women: usize,
    pub procedure: String,
    pub distribution: ExactDistribution,
}

/// `exact M W PROCEDURE`, then `matching <canonical> p/q` lines sorted by the canonical
/// text, then `total p/q`.
pub fn write_exact_result(result: &ExactResult) -> String {
    let mut out = format!("exact {} {} {}\n", result.num_men, result.num_women, result.procedure);
    let mut rows: Vec<(String, &Rational)> = result.distribution.iter().map(|(m, p)| (m.to_string(), p)).collect();
    rows.sort();
    for (m, p) in rows {
        let _ = writeln!(out, "matching {m} {}", fraction(p));
    }
    let _ = writeln!(out, "total {}", fraction(&result.distribution.total()));
    out
}

pub fn parse_exact_result(text: &str, origin: &str) -> Result<ExactResult> {
    let mut lines = Lines::new(text, origin);
    let Some((n, first)) = lines.next() else {
        return Err(lines.error(1, "empty result file"));
    };
    let fields: Vec<&str> = first.split_whitespace().collect();
    let ["exact", m, w, procedure] = fields.as_slice() else {
        return Err(lines.error(n, "expected header `exact M W PROCEDURE`"));
    };
    let num_men: usize = m.parse().map_err(|_| lines.error(n, "bad market size"))?;
    let num_women: usize = w.parse().map_err(|_| lines.error(n, "bad market size"))?;
    let procedure = procedure.to_string();
    let mut entries = Vec::new();
    let mut total = None;
    while let Some((n, line)) = lines.next() {
        if total.is_some() {
            return Err(lines.error(n, "content after the total line"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["matching", m, p] => {
                let mu = Matching::parse(num_men, num_women, m).map_err(|e| lines.error(n, e.to_string()))?;
                let p = parse_rational(p).ok_or_else(|| lines.error(n, format!("bad probability `{p}`")))?;
                entries.push((mu, p));
            }
            ["total", p] => {
                total = Some((
                    n,
                    parse_rational(p).ok_or_else(|| lines.error(n, format!("bad total `{p}`")))?,
                ));
            }
            _ => return Err(lines.error(n, format!("unexpected line `{line}`"))),
        }
    }
    let distribution = ExactDistribution::from_entries(entries).map_err(|e| lines.error(0, e.to_string()))?;
    match total {
        Some((n, t)) if t != distribution.total() => Err(lines.error(
            n,
            format!(
                "total {} does not match the entries' sum {}",
                fraction(&t),
                fraction(&distribution.total())
            ),
        )),
        Some(_) => Ok(ExactResult {
            num_men,
            num_women,
            procedure,
            distribution,
        }),
        None => Err(lines.error(0, "missing total line")),
    }
}

/// Provenance of a sampling run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultHeader {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub shards: usize,
    pub model: String,
    pub num_men: usize,
    pub num_women: usize,
    pub samples: u64,
}

/// Per-procedure tallies of a comparison run, plus the two-sample statistics when both
/// procedures ran.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub header: ResultHeader,
    pub tallies: Vec<(String, EmpiricalDistribution)>,
    pub stats: Option<ComparisonStats>,
}

/// `# key=value` provenance and statistics lines, then a CSV table
/// `procedure,matching,count,frequency`.
pub fn write_comparison_result(result: &ComparisonResult) -> String {
    let h = &result.header;
    let mut out = String::from("# matchlab comparison\n");
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "# {k}={v}");
    };
    kv("version", &h.version);
    kv("config_hash", &h.config_hash);
    kv("seed", &h.seed);
    kv("shards", &h.shards);
    kv("model", &h.model);
    kv("market", &format!("{}x{}", h.num_men, h.num_women));
    kv("samples", &h.samples);
    if let Some(s) = &result.stats {
        kv("tv", &s.total_variation);
        kv("chi_square", &s.chi_square);
        kv("df", &s.degrees_of_freedom);
        kv("p_value", &s.p_value);
        kv("tv_null_p99", &s.tv_null_p99);
        kv("pooled_cells", &s.pooled_cells);
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["procedure", "matching", "count", "frequency"])
        .expect("writing to memory");
    for (procedure, tally) in &result.tallies {
        for (m, c) in tally.iter() {
            writer
                .write_record([
                    procedure.clone(),
                    m.to_string(),
                    c.to_string(),
                    (c as f64 / tally.samples() as f64).to_string(),
                ])
                .expect("writing to memory");
        }
    }
    out.push_str(&String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8"));
    out
}

pub fn parse_comparison_result(text: &str, origin: &str) -> Result<ComparisonResult> {
    let err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut meta: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.trim(), (i + 1, v.trim()));
            }
        }
    }
    fn get<T: std::str::FromStr>(
        meta: &BTreeMap<&str, (usize, &str)>,
        key: &str,
        err: &dyn Fn(usize, String) -> Error,
    ) -> Result<T> {
        let (line, value) = meta.get(key).ok_or_else(|| err(0, format!("missing `{key}`")))?;
        value
            .parse()
            .map_err(|_| err(*line, format!("bad value for `{key}`: `{value}`")))
    }
    let market: String = get(&meta, "market", &err)?;
    let (num_men, num_women) = market
        .split_once('x')
        .and_then(|(m, w)| Some((m.parse().ok()?, w.parse().ok()?)))
        .ok_or_else(|| err(meta["market"].0, format!("bad market `{market}`")))?;
    let header = ResultHeader {
        version: get(&meta, "version", &err)?,
        config_hash: get(&meta, "config_hash", &err)?,
        seed: get(&meta, "seed", &err)?,
        shards: get(&meta, "shards", &err)?,
        model: get(&meta, "model", &err)?,
        num_men,
        num_women,
        samples: get(&meta, "samples", &err)?,
    };
    let stats = if meta.contains_key("tv") {
        Some(ComparisonStats {
            total_variation: get(&meta, "tv", &err)?,
            chi_square: get(&meta, "chi_square", &err)?,
            degrees_of_freedom: get(&meta, "df", &err)?,
            p_value: get(&meta, "p_value", &err)?,
            tv_null_p99: get(&meta, "tv_null_p99", &err)?,
            pooled_cells: get(&meta, "pooled_cells", &err)?,
        })
    } else {
        None
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut tallies: Vec<(String, EmpiricalDistribution)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let [procedure, matching, count, _] = [0, 1, 2, 3].map(|i| record.get(i).unwrap_or(""));
        let mu = Matching::parse(num_men, num_women, matching).map_err(|e| err(line, e.to_string()))?;
        let count: u64 = count.parse().map_err(|_| err(line, format!("bad count `{count}`")))?;
        match tallies.iter_mut().find(|(p, _)| p == procedure) {
            Some((_, t)) => t.add(mu, count),
            None => tallies.push((procedure.to_string(), EmpiricalDistribution::from_counts([(mu, count)]))),
        }
    }
    Ok(ComparisonResult { header, tallies, stats })
}
