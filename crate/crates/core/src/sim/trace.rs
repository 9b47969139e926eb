//! Ordered event log of a mission, with a line-oriented text form.
//!
//! ```text
//! header,<planner>,<robots>,<tasks>,<ground_truth_gain>,<resource>,<energy>
//! start,<robot>,<row>,<col>
//! decide,<robot>,<level>,<row>          row 0 = return to base
//! move,<robot>,<row>,<col>,<row>,<col>,<cost>
//! attempt,<robot>,<row>,<col>
//! complete,<robot>,<row>,<col>,<cost>,<gain>
//! abort,<robot>,<row>,<col>,<wasted>
//! reset,<robot>,<row>,<col>,<unspent>
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`, so a parsed trace reproduces metrics exactly.

use std::fmt::Write as _;
use std::io;

use crate::error::TraceError;
use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub planner: String,
    pub robots: usize,
    pub tasks: usize,
    pub ground_truth_gain: f64,
    pub resource: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Start {
        robot: usize,
        at: VertexId,
    },
    Decide {
        robot: usize,
        level: u32,
        row: Option<usize>,
    },
    Move {
        robot: usize,
        from: VertexId,
        to: VertexId,
        cost: f64,
    },
    Attempt {
        robot: usize,
        at: VertexId,
    },
    Complete {
        robot: usize,
        at: VertexId,
        cost: f64,
        gain: f64,
    },
    Abort {
        robot: usize,
        at: VertexId,
        wasted: f64,
    },
    Reset {
        robot: usize,
        at: VertexId,
        unspent: f64,
    },
}

impl Event {
    pub fn robot(&self) -> usize {
        match *self {
            Event::Start { robot, .. }
            | Event::Decide { robot, .. }
            | Event::Move { robot, .. }
            | Event::Attempt { robot, .. }
            | Event::Complete { robot, .. }
            | Event::Abort { robot, .. }
            | Event::Reset { robot, .. } => robot,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionTrace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

impl MissionTrace {
    pub fn new(header: TraceHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "header,{},{},{},{},{},{}",
            h.planner, h.robots, h.tasks, h.ground_truth_gain, h.resource, h.energy
        );
        for e in &self.events {
            let _ = match *e {
                Event::Start { robot, at } => writeln!(out, "start,{robot},{},{}", at.row, at.col),
                Event::Decide { robot, level, row } => {
                    writeln!(out, "decide,{robot},{level},{}", row.unwrap_or(0))
                }
                Event::Move {
                    robot,
                    from,
                    to,
                    cost,
                } => writeln!(
                    out,
                    "move,{robot},{},{},{},{},{cost}",
                    from.row, from.col, to.row, to.col
                ),
                Event::Attempt { robot, at } => {
                    writeln!(out, "attempt,{robot},{},{}", at.row, at.col)
                }
                Event::Complete {
                    robot,
                    at,
                    cost,
                    gain,
                } => {
                    writeln!(out, "complete,{robot},{},{},{cost},{gain}", at.row, at.col)
                }
                Event::Abort { robot, at, wasted } => {
                    writeln!(out, "abort,{robot},{},{},{wasted}", at.row, at.col)
                }
                Event::Reset { robot, at, unspent } => {
                    writeln!(out, "reset,{robot},{},{},{unspent}", at.row, at.col)
                }
            };
        }
        out
    }

    pub fn write_to(&self, mut w: impl io::Write) -> io::Result<()> {
        w.write_all(self.to_text().as_bytes())
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceError {
            line: 1,
            reason: "empty trace".into(),
        })?;
        let f: Vec<&str> = first.split(',').collect();
        if f.len() != 7 || f[0] != "header" {
            return Err(TraceError {
                line: 1,
                reason: "expected a header line".into(),
            });
        }
        let mut p = Fields {
            line: 1,
            fields: &f[1..],
            pos: 0,
        };
        let header = TraceHeader {
            planner: p.text()?,
            robots: p.int()?,
            tasks: p.int()?,
            ground_truth_gain: p.num()?,
            resource: p.num()?,
            energy: p.num()?,
        };
        let mut trace = MissionTrace::new(header);
        for (i, line) in lines {
            let f: Vec<&str> = line.trim().split(',').collect();
            let mut p = Fields {
                line: i + 1,
                fields: &f[1..],
                pos: 0,
            };
            let robot = p.int()?;
            let event = match f[0] {
                "start" => Event::Start {
                    robot,
                    at: p.vertex()?,
                },
                "decide" => {
                    let level = p.int()? as u32;
                    let row = p.int()?;
                    Event::Decide {
                        robot,
                        level,
                        row: (row > 0).then_some(row),
                    }
                }
                "move" => Event::Move {
                    robot,
                    from: p.vertex()?,
                    to: p.vertex()?,
                    cost: p.num()?,
                },
                "attempt" => Event::Attempt {
                    robot,
                    at: p.vertex()?,
                },
                "complete" => Event::Complete {
                    robot,
                    at: p.vertex()?,
                    cost: p.num()?,
                    gain: p.num()?,
                },
                "abort" => Event::Abort {
                    robot,
                    at: p.vertex()?,
                    wasted: p.num()?,
                },
                "reset" => Event::Reset {
                    robot,
                    at: p.vertex()?,
                    unspent: p.num()?,
                },
                other => {
                    return Err(TraceError {
                        line: i + 1,
                        reason: format!("unknown event {other:?}"),
                    });
                }
            };
            p.finish()?;
            trace.events.push(event);
        }
        Ok(trace)
    }
}

struct Fields<'a> {
    line: usize,
    fields: &'a [&'a str],
    pos: usize,
}

impl Fields<'_> {
    fn next(&mut self) -> Result<&str, TraceError> {
        let v = self.fields.get(self.pos).ok_or(TraceError {
            line: self.line,
            reason: "too few fields".into(),
        })?;
        self.pos += 1;
        Ok(v.trim())
    }

    fn text(&mut self) -> Result<String, TraceError> {
        self.next().map(str::to_string)
    }

    fn int(&mut self) -> Result<usize, TraceError> {
        let line = self.line;
        let v = self.next()?;
        v.parse().map_err(|_| TraceError {
            line,
            reason: format!("bad integer {v:?}"),
        })
    }

    fn num(&mut self) -> Result<f64, TraceError> {
        let line = self.line;
        let v = self.next()?;
        v.parse().map_err(|_| TraceError {
            line,
            reason: format!("bad number {v:?}"),
        })
    }

    fn vertex(&mut self) -> Result<VertexId, TraceError> {
        Ok(VertexId::new(self.int()?, self.int()?))
    }

    fn finish(&self) -> Result<(), TraceError> {
        if self.pos == self.fields.len() {
            Ok(())
        } else {
            Err(TraceError {
                line: self.line,
                reason: "too many fields".into(),
            })
        }
    }
}
