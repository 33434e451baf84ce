//! Text trace files.
//!
//! ```text
//! # lacnav-trace schema=1 delta=0.01 r=10 agents=2 seed=0 v_max=50 arrival_tol=0.000001 policy=lac_nav scenario=reflection
//! # agent,id,group,sx,sy,tx,ty
//! # agent,0,0,-110,0,110,0
//! # agent,1,1,110,0,-110,0
//! step,id,x,y,vx,vy,action
//! 0,0,-1.10000000e2,0.00000000e0,0.00000000e0,0.00000000e0,-1
//! ...
//! # arrival,id,step,path_length
//! # arrival,0,460,220.00000000000003
//! # arrival,1,-1,12.5
//! # end termination=completed steps=461 rows=922
//! ```
//!
//! Step rows carry positions after the step and the velocity moved at during
//! it, rendered with 9 significant digits so the bytes are platform
//! independent. Header and footer values use shortest round-trip decimals,
//! which lets metrics be recomputed from a parsed trace without loss. The
//! `# end` footer marks a complete file; a file without it is truncated.

use std::fmt::Write as _;
use std::io::{self, Write};

use lacnav_core::engine::{AgentInfo, AgentRecord, StepRecord, TraceMeta};
use lacnav_core::{PolicyKind, ScenarioKind, SimTrace, Termination, Vec2};

pub const TRACE_SCHEMA: u32 = 1;
const MAGIC: &str = "# lacnav-trace";
const COLUMNS: &str = "step,id,x,y,vx,vy,action";

/// Relative size of one unit in the last place of a row value.
pub const ROW_QUANTUM: f64 = 5e-9;

/// A real in the fixed 9-significant-digit row format; `-0` prints as `0`.
pub fn fmt_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

fn write_row(out: &mut String, step: u64, a: &AgentRecord) {
    let action = a.action.map_or(-1, |k| k as i64);
    let _ = writeln!(
        out,
        "{step},{},{},{},{},{},{action}",
        a.id,
        fmt_real(a.position.x),
        fmt_real(a.position.y),
        fmt_real(a.velocity.x),
        fmt_real(a.velocity.y),
    );
}

/// Streams a trace as the run produces it.
pub struct TraceWriter<W: Write> {
    out: W,
    agents: usize,
    steps: u64,
    rows: u64,
    buf: String,
}

impl<W: Write> TraceWriter<W> {
    /// Writes the header; `agents` supplies ids, groups, starts and targets.
    pub fn begin(mut out: W, meta: &TraceMeta, agents: &[AgentInfo]) -> io::Result<Self> {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            "{MAGIC} schema={TRACE_SCHEMA} delta={} r={} agents={} seed={} v_max={} arrival_tol={} policy={} scenario={}",
            meta.delta,
            meta.r,
            agents.len(),
            meta.seed,
            meta.v_max,
            meta.arrival_tol,
            meta.policy,
            meta.scenario
        );
        buf.push_str("# agent,id,group,sx,sy,tx,ty\n");
        for a in agents {
            let _ = writeln!(
                buf,
                "# agent,{},{},{},{},{},{}",
                a.id, a.group, a.start.x, a.start.y, a.target.x, a.target.y
            );
        }
        buf.push_str(COLUMNS);
        buf.push('\n');
        out.write_all(buf.as_bytes())?;
        buf.clear();
        Ok(TraceWriter {
            out,
            agents: agents.len(),
            steps: 0,
            rows: 0,
            buf,
        })
    }

    pub fn step(&mut self, record: &StepRecord) -> io::Result<()> {
        debug_assert_eq!(record.agents.len(), self.agents);
        self.buf.clear();
        for a in &record.agents {
            write_row(&mut self.buf, record.step, a);
        }
        self.out.write_all(self.buf.as_bytes())?;
        self.steps += 1;
        self.rows += record.agents.len() as u64;
        Ok(())
    }

    /// Writes arrivals, path lengths and the end marker.
    pub fn finish(mut self, agents: &[AgentInfo], termination: Termination) -> io::Result<W> {
        self.buf.clear();
        self.buf.push_str("# arrival,id,step,path_length\n");
        for a in agents {
            let step = a.arrival_step.map_or(-1, |s| s as i64);
            let _ = writeln!(self.buf, "# arrival,{},{step},{}", a.id, a.path_length);
        }
        let _ = writeln!(
            self.buf,
            "# end termination={} steps={} rows={}",
            termination.as_str(),
            self.steps,
            self.rows
        );
        self.out.write_all(self.buf.as_bytes())?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Serializes a fully recorded trace.
pub fn write_trace<W: Write>(out: W, trace: &SimTrace) -> io::Result<W> {
    let mut w = TraceWriter::begin(out, &trace.meta, &trace.agents)?;
    for s in &trace.steps {
        w.step(s)?;
    }
    w.finish(&trace.agents, trace.termination)
}

pub fn trace_to_string(trace: &SimTrace) -> String {
    let bytes = write_trace(Vec::new(), trace).expect("writing to memory");
    String::from_utf8(bytes).expect("trace is ASCII")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let (i, l) = self.inner.next()?;
        self.last = i + 1;
        Some((i + 1, l))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.next().ok_or_else(|| ParseError {
            line: self.last + 1,
            message: format!("file ends before {what} (truncated?)"),
        })
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, field: &str, s: &str) -> Result<T, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| err(line, format!("bad {field} value `{s}`")))
}

fn key_values(line: usize, text: &str) -> Result<Vec<(&str, &str)>, ParseError> {
    text.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| err(line, format!("expected key=value, got `{kv}`"))))
        .collect()
}

fn lookup<'a>(line: usize, kvs: &[(&str, &'a str)], key: &str) -> Result<&'a str, ParseError> {
    kvs.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| err(line, format!("header lacks `{key}`")))
}

fn fields<const N: usize>(line: usize, text: &str) -> Result<[&str; N], ParseError> {
    let parts: Vec<&str> = text.split(',').collect();
    parts
        .try_into()
        .map_err(|p: Vec<&str>| err(line, format!("expected {N} fields, found {}", p.len())))
}

/// Parses a trace file. Structural problems (truncation, missing rows,
/// malformed numbers) are errors; physical validity is left to `verify`.
pub fn parse_trace(text: &str) -> Result<SimTrace, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };

    let (ln, header) = lines.expect("the header")?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| err(ln, "not a lacnav trace (missing `# lacnav-trace` header)"))?;
    let kvs = key_values(ln, rest)?;
    let schema: u32 = num(ln, "schema", lookup(ln, &kvs, "schema")?)?;
    if schema != TRACE_SCHEMA {
        return Err(err(ln, format!("unsupported trace schema {schema}")));
    }
    let n: usize = num(ln, "agents", lookup(ln, &kvs, "agents")?)?;
    let meta = TraceMeta {
        delta: num(ln, "delta", lookup(ln, &kvs, "delta")?)?,
        r: num(ln, "r", lookup(ln, &kvs, "r")?)?,
        v_max: num(ln, "v_max", lookup(ln, &kvs, "v_max")?)?,
        arrival_tol: num(ln, "arrival_tol", lookup(ln, &kvs, "arrival_tol")?)?,
        seed: num(ln, "seed", lookup(ln, &kvs, "seed")?)?,
        policy: lookup(ln, &kvs, "policy")?
            .parse::<PolicyKind>()
            .map_err(|_| err(ln, "unknown policy"))?,
        scenario: lookup(ln, &kvs, "scenario")?
            .parse::<ScenarioKind>()
            .map_err(|_| err(ln, "unknown scenario kind"))?,
    };

    let (ln, l) = lines.expect("the agent table")?;
    if l != "# agent,id,group,sx,sy,tx,ty" {
        return Err(err(ln, "expected the `# agent` column line"));
    }
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let (ln, l) = lines.expect("the agent table")?;
        let body = l
            .strip_prefix("# agent,")
            .ok_or_else(|| err(ln, "expected an `# agent` line"))?;
        let [id, group, sx, sy, tx, ty] = fields::<6>(ln, body)?;
        let id: u32 = num(ln, "id", id)?;
        if id as usize != i {
            return Err(err(ln, format!("agent ids must be 0..{n} in order")));
        }
        agents.push(AgentInfo {
            id,
            group: num(ln, "group", group)?,
            start: Vec2::new(num(ln, "sx", sx)?, num(ln, "sy", sy)?),
            target: Vec2::new(num(ln, "tx", tx)?, num(ln, "ty", ty)?),
            arrival_step: None,
            path_length: 0.0,
        });
    }

    let (ln, l) = lines.expect("the column line")?;
    if l != COLUMNS {
        return Err(err(ln, format!("expected column line `{COLUMNS}`")));
    }

    let mut steps: Vec<StepRecord> = Vec::new();
    let mut rows = 0u64;
    let (mut ln, mut l) = lines.expect("the footer")?;
    while !l.starts_with('#') {
        let [step, id, x, y, vx, vy, action] = fields::<7>(ln, l)?;
        let step: u64 = num(ln, "step", step)?;
        let id: u32 = num(ln, "id", id)?;
        let action: i64 = num(ln, "action", action)?;
        if id == 0 {
            if step != steps.len() as u64 {
                return Err(err(ln, format!("expected step {}, found {step}", steps.len())));
            }
            steps.push(StepRecord {
                step,
                agents: Vec::with_capacity(n),
            });
        }
        let current = steps
            .last_mut()
            .filter(|s| s.step == step && s.agents.len() == id as usize && (id as usize) < n)
            .ok_or_else(|| err(ln, format!("row out of order: step {step}, agent {id}")))?;
        current.agents.push(AgentRecord {
            id,
            position: Vec2::new(num(ln, "x", x)?, num(ln, "y", y)?),
            velocity: Vec2::new(num(ln, "vx", vx)?, num(ln, "vy", vy)?),
            action: match action {
                -1 => None,
                k if k >= 0 => Some(k as usize),
                _ => return Err(err(ln, "action must be >= -1")),
            },
        });
        rows += 1;
        (ln, l) = lines.expect("the footer")?;
    }
    if let Some(s) = steps.last() {
        if s.agents.len() != n {
            return Err(err(ln, format!("step {} has {} of {n} rows", s.step, s.agents.len())));
        }
    }

    if l != "# arrival,id,step,path_length" {
        return Err(err(ln, "expected the `# arrival` column line"));
    }
    for (i, agent) in agents.iter_mut().enumerate() {
        let (ln, l) = lines.expect("the arrival table")?;
        let body = l
            .strip_prefix("# arrival,")
            .ok_or_else(|| err(ln, "expected an `# arrival` line"))?;
        let [id, step, path] = fields::<3>(ln, body)?;
        if num::<usize>(ln, "id", id)? != i {
            return Err(err(ln, "arrival ids must follow agent order"));
        }
        let step: i64 = num(ln, "step", step)?;
        agent.arrival_step = (step >= 0).then_some(step as u64);
        agent.path_length = num(ln, "path_length", path)?;
    }

    let (ln, l) = lines.expect("the `# end` line")?;
    let rest = l
        .strip_prefix("# end")
        .ok_or_else(|| err(ln, "expected the `# end` line"))?;
    let kvs = key_values(ln, rest)?;
    let termination = match lookup(ln, &kvs, "termination")? {
        "completed" => Termination::Completed,
        "step_cap" => Termination::StepCap,
        other => return Err(err(ln, format!("unknown termination `{other}`"))),
    };
    let declared_steps: usize = num(ln, "steps", lookup(ln, &kvs, "steps")?)?;
    let declared_rows: u64 = num(ln, "rows", lookup(ln, &kvs, "rows")?)?;
    if declared_steps != steps.len() || declared_rows != rows {
        return Err(err(
            ln,
            format!(
                "footer declares {declared_steps} steps / {declared_rows} rows, file has {} / {rows}",
                steps.len()
            ),
        ));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "content after the `# end` line"));
    }

    Ok(SimTrace {
        meta,
        agents,
        steps,
        termination,
    })
}
