//! Trajectory, load and SEA inputs and the CSV output of `run`.

use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use serde::Deserialize;

use screwdyn::dynamics::{AppliedLoads2, SeaParams};
use screwdyn::kinematics::JointState4;
use screwdyn::screw::WrenchVector;
use screwdyn::trajectory::{SineJoint, SineTrajectory};
use screwdyn::{Error, Result};

pub struct Samples {
    pub times: Vec<f64>,
    pub states: Vec<JointState4>,
}

const ORDERS: [&str; 5] = ["q", "qd", "qdd", "qddd", "qdddd"];

pub fn trajectory_header(n: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain(ORDERS.iter().flat_map(|p| (1..=n).map(move |i| format!("{p}{i}"))))
        .collect()
}

/// Reads `t,q1..qn,qd1..qdn,qdd1..,qddd1..,qdddd1..` rows.
pub fn read_trajectory_csv(path: &Path, n: usize) -> Result<Samples> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let expected = trajectory_header(n);
    if header != expected {
        return Err(Error::Schema(format!(
            "trajectory header must be `{}` for a {n}-joint model, got `{}`",
            expected.join(","),
            header.join(",")
        )));
    }
    let mut out = Samples {
        times: Vec::new(),
        states: Vec::new(),
    };
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let vals = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Schema(format!("trajectory row {}: `{s}` is not a number", row + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != expected.len() {
            return Err(Error::Schema(format!(
                "trajectory row {} has {} columns, expected {}",
                row + 1,
                vals.len(),
                expected.len()
            )));
        }
        let block = |k: usize| DVector::from_column_slice(&vals[1 + k * n..1 + (k + 1) * n]);
        out.times.push(vals[0]);
        out.states.push(JointState4 {
            q: block(0),
            qd: block(1),
            qdd: block(2),
            qddd: block(3),
            qdddd: block(4),
        });
    }
    if out.times.is_empty() {
        return Err(Error::Schema("trajectory has no samples".into()));
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Schema(format!("csv: {e}"))
}

fn parse_groups(text: &str, arity: usize, what: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|g| {
            let v = g
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Schema(format!("{what}: `{x}` is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if v.len() != arity {
                return Err(Error::Schema(format!(
                    "{what}: each group needs {arity} comma separated values, got `{g}`"
                )));
            }
            Ok(v)
        })
        .collect()
}

/// Per-joint groups; a single group applies to every joint.
fn broadcast(groups: Vec<Vec<f64>>, n: usize, what: &'static str) -> Result<Vec<Vec<f64>>> {
    match groups.len() {
        1 => Ok(vec![groups[0].clone(); n]),
        k if k == n => Ok(groups),
        k => Err(Error::LengthMismatch {
            what,
            expected: n,
            got: k,
        }),
    }
}

/// `a,w,phi[;a,w,phi...]` sampled at `0, dt, 2dt, …` up to `duration`.
pub fn sine_samples(spec: &str, n: usize, dt: f64, duration: f64) -> Result<Samples> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Schema(format!("--dt must be positive, got {dt}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Schema(format!("--duration must be non-negative, got {duration}")));
    }
    let groups = broadcast(parse_groups(spec, 3, "--sine")?, n, "sine groups")?;
    let traj = SineTrajectory::new(
        groups
            .iter()
            .map(|g| SineJoint {
                amplitude: g[0],
                frequency: g[1],
                phase: g[2],
            })
            .collect(),
    )?;
    let count = (duration / dt + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..count).map(|k| k as f64 * dt).collect();
    let states = times.iter().map(|&t| traj.state(t)).collect();
    Ok(Samples { times, states })
}

pub fn parse_sea(spec: &str, n: usize) -> Result<SeaParams> {
    let groups = broadcast(parse_groups(spec, 2, "--sea")?, n, "actuator groups")?;
    SeaParams::new(
        DVector::from_iterator(n, groups.iter().map(|g| g[0])),
        DVector::from_iterator(n, groups.iter().map(|g| g[1])),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadsFile {
    samples: Vec<LoadSample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadSample {
    #[serde(default)]
    bodies: Vec<BodyLoad>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyLoad {
    body: usize,
    #[serde(default)]
    w: Option<[f64; 6]>,
    #[serde(default)]
    wd: Option<[f64; 6]>,
    #[serde(default)]
    wdd: Option<[f64; 6]>,
}

/// Loads per trajectory sample; a file with a single sample applies to all.
pub fn read_loads(path: &Path, n: usize, samples: usize) -> Result<Vec<AppliedLoads2>> {
    let text = std::fs::read_to_string(path)?;
    let file: LoadsFile = serde_json::from_str(&text)?;
    if file.samples.len() != 1 && file.samples.len() != samples {
        return Err(Error::Schema(format!(
            "loads file has {} samples, expected 1 or {samples}",
            file.samples.len()
        )));
    }
    let to_w = |v: Option<[f64; 6]>| v.map(|a| WrenchVector::from_row_slice(&a)).unwrap_or_default();
    let parsed = file
        .samples
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let mut loads = AppliedLoads2::zeros(n);
            for b in s.bodies {
                if b.body == 0 || b.body > n {
                    return Err(Error::Schema(format!(
                        "loads sample {}: body {} outside 1..={n}",
                        k + 1,
                        b.body
                    )));
                }
                loads.set(b.body - 1, to_w(b.w), to_w(b.wd), to_w(b.wdd));
            }
            Ok(loads)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(if parsed.len() == 1 && samples != 1 {
        vec![parsed[0].clone(); samples]
    } else {
        parsed
    })
}

pub struct OutputRow {
    pub t: f64,
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: Option<DVector<f64>>,
    pub sea: Option<(DVector<f64>, DVector<f64>)>,
}

pub fn output_header(n: usize, sea: bool) -> Vec<String> {
    let mut prefixes = vec!["Q", "Qd", "Qdd"];
    if sea {
        prefixes.extend(["theta", "tau"]);
    }
    std::iter::once("t".to_string())
        .chain(prefixes.into_iter().flat_map(|p| (1..=n).map(move |i| format!("{p}{i}"))))
        .collect()
}

pub fn write_output(out: impl Write, n: usize, sea: bool, rows: &[OutputRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(output_header(n, sea)).map_err(csv_error)?;
    for r in rows {
        let mut rec = vec![format!("{:?}", r.t)];
        let push = |rec: &mut Vec<String>, v: &DVector<f64>| rec.extend(v.iter().map(|x| format!("{x:?}")));
        push(&mut rec, &r.q);
        push(&mut rec, &r.qd);
        match &r.qdd {
            Some(v) => push(&mut rec, v),
            None => rec.extend(std::iter::repeat_n(String::new(), n)),
        }
        if let Some((theta, tau)) = &r.sea {
            push(&mut rec, theta);
            push(&mut rec, tau);
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
