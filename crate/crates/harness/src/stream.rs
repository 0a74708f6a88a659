//! Line-oriented text format for instance streams.
//!
//! ```text
//! invlin-stream 1
//! dim 3
//! cstar 0.5 0.25 0.25
//! cstar-integral 2 1 1
//! obs 1 vertices 3
//! v 0 0 1
//! v 1 0 0
//! v 0 1 0
//! x 1 0 0
//! obs 2 hypercube
//! x 1 1 1
//! obs 3 knapsack capacity 5 weights 2 3 1
//! x 1 0 1
//! obs 4 dag nodes 4 source 0 sink 3 arcs 0>1 1>2 0>2 2>3
//! x 1 1 0 1
//! ```
//!
//! `dim` must precede everything else and every vector has exactly that many
//! entries. `cstar` and `cstar-integral` are optional. Lines starting with
//! `#` and blank lines are ignored. Reals are written in shortest
//! round-trip form, so reading a written stream reproduces it bitwise.

use std::path::Path;

use invlin_core::{FeasibleSet, Observation, Vector};

use crate::error::{HarnessError, Result};
use crate::generate::InstanceStream;

pub const HEADER: &str = "invlin-stream 1";

/// A stream read from disk; `c*` may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredStream {
    pub dim: usize,
    pub c_star: Option<Vector>,
    pub c_star_integral: Option<Vector>,
    pub observations: Vec<Observation>,
}

impl From<&InstanceStream> for StoredStream {
    fn from(s: &InstanceStream) -> Self {
        Self {
            dim: s.dim(),
            c_star: Some(s.c_star.clone()),
            c_star_integral: s.c_star_integral.clone(),
            observations: s.observations.clone(),
        }
    }
}

fn join(v: &Vector) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_stream_to<W: std::io::Write>(out: &mut W, stream: &StoredStream) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "dim {}", stream.dim)?;
    if let Some(c) = &stream.c_star {
        writeln!(out, "cstar {}", join(c))?;
    }
    if let Some(c) = &stream.c_star_integral {
        writeln!(out, "cstar-integral {}", join(c))?;
    }
    for obs in &stream.observations {
        let t = obs.round();
        match obs.feasible_set() {
            FeasibleSet::ExplicitVertices(list) => {
                writeln!(out, "obs {t} vertices {}", list.vertices().len())?;
                for v in list.vertices() {
                    writeln!(out, "v {}", join(v))?;
                }
            }
            FeasibleSet::Hypercube { .. } => writeln!(out, "obs {t} hypercube")?,
            FeasibleSet::Knapsack(k) => {
                let w: Vec<String> = k.weights().iter().map(|w| w.to_string()).collect();
                writeln!(out, "obs {t} knapsack capacity {} weights {}", k.capacity(), w.join(" "))?;
            }
            FeasibleSet::DagPaths(d) => {
                let arcs: Vec<String> = d.arcs().iter().map(|(u, v)| format!("{u}>{v}")).collect();
                writeln!(
                    out,
                    "obs {t} dag nodes {} source {} sink {} arcs {}",
                    d.num_nodes(),
                    d.source(),
                    d.sink(),
                    arcs.join(" ")
                )?;
            }
        }
        writeln!(out, "x {}", join(obs.agent_choice()))?;
    }
    Ok(())
}

pub fn write_stream_string(stream: &StoredStream) -> String {
    let mut buf = Vec::new();
    write_stream_to(&mut buf, stream).expect("writing to memory");
    String::from_utf8(buf).expect("stream text is UTF-8")
}

pub fn write_stream(path: &Path, stream: &StoredStream) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_stream_to(&mut w, stream)
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(|e| HarnessError::io(path, e))
}

pub fn read_stream(path: &Path) -> Result<StoredStream> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_stream(&text, &path.display().to_string())
}

struct Parser<'a> {
    origin: &'a str,
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> HarnessError {
        HarnessError::Parse { path: self.origin.to_string(), line, message: message.into() }
    }

    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let item = self.lines.get(self.pos).cloned();
        self.pos += 1;
        item
    }

    fn vector(&self, line: usize, tokens: &[&str], dim: usize) -> Result<Vector> {
        if tokens.len() != dim {
            return Err(self.err(line, format!("expected {dim} entries, found {}", tokens.len())));
        }
        let entries = tokens
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(line, format!("bad number `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Vector::new(entries).map_err(|e| self.err(line, e.to_string()))
    }

    fn int<T: std::str::FromStr>(&self, line: usize, token: Option<&&str>) -> Result<T> {
        token
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err(line, "expected an integer"))
    }

    fn keyword(&self, line: usize, token: Option<&&str>, expected: &str) -> Result<()> {
        match token {
            Some(t) if *t == expected => Ok(()),
            _ => Err(self.err(line, format!("expected `{expected}`"))),
        }
    }
}

pub fn parse_stream(text: &str, origin: &str) -> Result<StoredStream> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect::<Vec<_>>()))
        .collect();
    let mut p = Parser { origin, lines, pos: 0 };

    match p.next() {
        Some((_, t)) if t.join(" ") == HEADER => {}
        Some((line, _)) => return Err(p.err(line, format!("expected header `{HEADER}`"))),
        None => return Err(p.err(0, "empty stream file")),
    }
    let dim: usize = match p.next() {
        Some((line, t)) if t.first() == Some(&"dim") => p.int(line, t.get(1))?,
        Some((line, _)) => return Err(p.err(line, "expected `dim <n>`")),
        None => return Err(p.err(0, "missing `dim`")),
    };
    if dim == 0 {
        return Err(p.err(0, "dim must be positive"));
    }

    let mut stream = StoredStream { dim, c_star: None, c_star_integral: None, observations: Vec::new() };
    while let Some((line, t)) = p.next() {
        match t[0] {
            "cstar" => stream.c_star = Some(p.vector(line, &t[1..], dim)?),
            "cstar-integral" => stream.c_star_integral = Some(p.vector(line, &t[1..], dim)?),
            "obs" => {
                let round: usize = p.int(line, t.get(1))?;
                let set = parse_set(&mut p, line, &t, dim)?;
                let (xline, xt) = p.next().ok_or_else(|| p.err(line, "missing `x` line"))?;
                if xt[0] != "x" {
                    return Err(p.err(xline, "expected `x <entries>`"));
                }
                let x = p.vector(xline, &xt[1..], dim)?;
                let obs = Observation::new(set, x, round).map_err(|e| p.err(xline, e.to_string()))?;
                stream.observations.push(obs);
            }
            other => return Err(p.err(line, format!("unknown record `{other}`"))),
        }
    }
    Ok(stream)
}

fn parse_set(p: &mut Parser<'_>, line: usize, t: &[&str], dim: usize) -> Result<FeasibleSet> {
    let set = match t.get(2).copied() {
        Some("vertices") => {
            let count: usize = p.int(line, t.get(3))?;
            let mut verts = Vec::with_capacity(count);
            for _ in 0..count {
                let (vline, vt) = p.next().ok_or_else(|| p.err(line, "missing vertex line"))?;
                if vt[0] != "v" {
                    return Err(p.err(vline, "expected `v <entries>`"));
                }
                verts.push(p.vector(vline, &vt[1..], dim)?);
            }
            FeasibleSet::vertices(verts)
        }
        Some("hypercube") => FeasibleSet::hypercube(dim),
        Some("knapsack") => {
            p.keyword(line, t.get(3), "capacity")?;
            let capacity: u64 = p.int(line, t.get(4))?;
            p.keyword(line, t.get(5), "weights")?;
            let weights = t[6..]
                .iter()
                .map(|w| w.parse::<u64>().map_err(|_| p.err(line, format!("bad weight `{w}`"))))
                .collect::<Result<Vec<_>>>()?;
            FeasibleSet::knapsack(weights, capacity)
        }
        Some("dag") => {
            p.keyword(line, t.get(3), "nodes")?;
            let nodes: usize = p.int(line, t.get(4))?;
            p.keyword(line, t.get(5), "source")?;
            let source: usize = p.int(line, t.get(6))?;
            p.keyword(line, t.get(7), "sink")?;
            let sink: usize = p.int(line, t.get(8))?;
            p.keyword(line, t.get(9), "arcs")?;
            let arcs = t[10..]
                .iter()
                .map(|a| {
                    a.split_once('>')
                        .and_then(|(u, v)| Some((u.parse().ok()?, v.parse().ok()?)))
                        .ok_or_else(|| p.err(line, format!("bad arc `{a}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            FeasibleSet::dag(nodes, arcs, source, sink)
        }
        _ => return Err(p.err(line, "expected a set kind: vertices | hypercube | knapsack | dag")),
    }
    .map_err(|e| p.err(line, e.to_string()))?;
    if set.dim() != dim {
        return Err(p.err(line, format!("set has dimension {}, stream has {dim}", set.dim())));
    }
    Ok(set)
}

/// A single vector on one line, whitespace- or comma-separated.
pub fn parse_vector_line(text: &str) -> Result<Vector> {
    let entries = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| HarnessError::Config(format!("bad number `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    Vector::new(entries).map_err(|e| HarnessError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, GapTarget};
    use crate::generate::generate_instance_stream;
    use proptest::prelude::*;

    const EXAMPLE: &str = "invlin-stream 1
dim 3
# comment
cstar 0.5 0.25 0.25
obs 1 vertices 3
v 0 0 1
v 1 0 0
v 0 1 0
x 1 0 0
obs 2 hypercube
x 1 1 1
obs 3 knapsack capacity 5 weights 2 3 1
x 1 0 1
";

    #[test]
    fn parses_documented_example() {
        let s = parse_stream(EXAMPLE, "example").unwrap();
        assert_eq!(s.dim, 3);
        assert_eq!(s.observations.len(), 3);
        assert_eq!(s.observations[2].feasible_set().kind(), "knapsack");
        assert!(s.c_star_integral.is_none());
    }

    #[test]
    fn reports_line_numbers() {
        let bad = EXAMPLE.replace("x 1 0 1", "x 1 1 1");
        match parse_stream(&bad, "bad") {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 13),
            other => panic!("{other:?}"),
        }
        let short = EXAMPLE.replace("v 0 0 1", "v 0 1");
        assert!(matches!(parse_stream(&short, "s"), Err(HarnessError::Parse { line: 6, .. })));
        assert!(parse_stream("dim 3\n", "h").is_err());
    }

    #[test]
    fn dag_records() {
        let text = "invlin-stream 1\ndim 4\nobs 1 dag nodes 4 source 0 sink 3 arcs 0>1 1>2 0>2 2>3\nx 1 1 0 1\n";
        let s = parse_stream(text, "dag").unwrap();
        assert_eq!(write_stream_string(&s), text);
        let cyclic = "invlin-stream 1\ndim 2\nobs 1 dag nodes 2 source 0 sink 1 arcs 0>1 1>0\nx 1 0\n";
        assert!(parse_stream(cyclic, "c").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn generated_streams_round_trip_bitwise(
            seed in any::<u64>(),
            family in prop_oneof![Just("random-vertices"), Just("hypercube"), Just("knapsack"), Just("dag")],
            integral in any::<bool>(),
        ) {
            let mut cfg = ExperimentConfig::with_seed(seed);
            cfg.family = family.into();
            cfg.dimension = 4;
            cfg.rounds = 5;
            cfg.vertices = 5;
            cfg.agent_noise = 0.3;
            if integral { cfg.gap = GapTarget::Integral; }
            let stream = generate_instance_stream(&cfg).unwrap();
            let stored = StoredStream::from(&stream);
            let text = write_stream_string(&stored);
            let back = parse_stream(&text, "rt").unwrap();
            prop_assert_eq!(&back, &stored);
            prop_assert!(back.c_star.unwrap().bit_eq(&stream.c_star));
            prop_assert_eq!(write_stream_string(&parse_stream(&text, "rt").unwrap()), text);
        }
    }

    #[test]
    fn vector_line() {
        assert_eq!(parse_vector_line("0.5, 0.25 0.25\n").unwrap().dim(), 3);
        assert!(parse_vector_line("a b").is_err());
    }
}
