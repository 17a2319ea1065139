//! CSV traces of a finished run.
//!
//! Every file has a header row. Reals are printed with 17 significant
//! digits so a trace round-trips exactly and reruns are byte-identical.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use surfacing_core::SimResult;

pub const FILES: [&str; 6] = [
    "states.csv",
    "lyapunov.csv",
    "surfacings.csv",
    "ns.csv",
    "promises.csv",
    "contributions.csv",
];

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Times at which some trajectory changes slope, plus 0 and the horizon.
/// Positions are linear between consecutive entries.
pub fn breakpoints(result: &SimResult) -> Vec<f64> {
    let mut times: Vec<f64> = result
        .segments
        .iter()
        .flatten()
        .flat_map(|s| [s.t0, s.t1])
        .chain([0.0, result.horizon])
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

pub fn write_all(result: &SimResult, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let times = breakpoints(result);

    let mut w = csv(dir, "states.csv")?;
    let header: Vec<String> = result.graph.agents().map(|a| format!("x_{a}")).collect();
    writeln!(w, "t,{}", header.join(","))?;
    for &t in &times {
        let x = result.state_at(t).map_err(io::Error::other)?;
        let row: Vec<String> = x.as_slice().iter().map(|v| num(*v)).collect();
        writeln!(w, "{},{}", num(t), row.join(","))?;
    }
    w.flush()?;

    let mut w = csv(dir, "lyapunov.csv")?;
    writeln!(w, "t,V")?;
    for &t in &times {
        let v = result.objective_at(t).map_err(io::Error::other)?;
        writeln!(w, "{},{}", num(t), num(v))?;
    }
    w.flush()?;

    let mut w = csv(dir, "surfacings.csv")?;
    writeln!(w, "t,agent")?;
    for e in &result.events {
        writeln!(w, "{},{}", num(e.time), e.agent)?;
    }
    w.flush()?;

    let mut w = csv(dir, "ns.csv")?;
    writeln!(w, "t,N_S")?;
    for (t, k) in &result.ns_trace {
        writeln!(w, "{},{k}", num(*t))?;
    }
    w.flush()?;

    let mut w = csv(dir, "promises.csv")?;
    writeln!(w, "t,agent,M,abs_u")?;
    for p in &result.promise_trace {
        writeln!(
            w,
            "{},{},{},{}",
            num(p.time),
            p.agent,
            num(p.promise),
            num(p.speed)
        )?;
    }
    w.flush()?;

    let mut w = csv(dir, "contributions.csv")?;
    writeln!(w, "agent,interval,t_start,t_end,dV,complete")?;
    for c in &result.contributions {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.agent,
            c.index,
            num(c.t_start),
            num(c.t_end),
            num(c.dv),
            u8::from(c.complete)
        )?;
    }
    w.flush()
}

fn csv(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}
