//! Plain-text file formats.
//!
//! Dataset: a header line `P D M`, then `M` lines of `D` space-separated
//! residues followed by the real label.
//!
//! Node list: one node per line, `a_1,...,a_D,b,accepted` with `accepted`
//! written as `1` or `0`.
//!
//! Model: a header line `P D N_eff lambda_eff`, then one line per node,
//! `a_1,...,a_D,b,theta`.

use std::io::{BufRead, Write};

use crate::domain::{FiniteDomain, NodeIndex, Point};
use crate::error::{Error, Result};
use crate::sampler::EmpiricalDistribution;
use crate::subnetwork::FittedModel;

/// Raw labelled samples, before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dom: FiniteDomain,
    pub xs: Vec<Point>,
    pub ys: Vec<f64>,
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.xs.len()
    }

    pub fn to_empirical(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::from_samples(&self.dom, &self.xs, &self.ys)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dom.p(), self.dom.d(), self.m())?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            for c in x.coords() {
                write!(w, "{c} ")?;
            }
            writeln!(w, "{y}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(1, "header must be `P D M`"));
        }
        let p: u32 = parse_field(fields[0], 1)?;
        let d: usize = parse_field(fields[1], 1)?;
        let m: usize = parse_field(fields[2], 1)?;
        let dom = FiniteDomain::new(p, d)?;
        let mut xs = Vec::with_capacity(m);
        let mut ys = Vec::with_capacity(m);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d + 1 {
                return Err(parse_err(lineno, format!("expected {} fields, got {}", d + 1, fields.len())));
            }
            let coords = fields[..d]
                .iter()
                .map(|f| parse_field::<u32>(f, lineno))
                .collect::<Result<Vec<_>>>()?;
            let x = Point(coords);
            dom.check_point(&x).map_err(|e| parse_err(lineno, e.to_string()))?;
            xs.push(x);
            ys.push(parse_field(fields[d], lineno)?);
        }
        if xs.len() != m {
            return Err(parse_err(1, format!("header declares {m} rows, found {}", xs.len())));
        }
        Ok(Self { dom, xs, ys })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{s}`")))
}

pub fn write_nodes<'a, W, I>(mut w: W, nodes: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a NodeIndex, bool)>,
{
    for (n, accepted) in nodes {
        writeln!(w, "{n},{}", u8::from(accepted))?;
    }
    Ok(())
}

/// Reads a node list, validating every node against `dom`.
pub fn read_nodes<R: BufRead>(r: R, dom: &FiniteDomain) -> Result<Vec<NodeIndex>> {
    let d = dom.d();
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 2 {
            return Err(parse_err(
                lineno,
                format!("expected {} comma-separated fields for D = {d}, got {}", d + 2, fields.len()),
            ));
        }
        let coords = fields[..d]
            .iter()
            .map(|f| parse_field::<u32>(f, lineno))
            .collect::<Result<Vec<_>>>()?;
        let node = NodeIndex::new(coords, parse_field(fields[d], lineno)?);
        dom.check_node(&node).map_err(|e| parse_err(lineno, e.to_string()))?;
        out.push(node);
    }
    Ok(out)
}

pub fn write_model<W: Write>(mut w: W, model: &FittedModel) -> Result<()> {
    writeln!(
        w,
        "{} {} {} {}",
        model.dom.p(),
        model.dom.d(),
        model.n_eff(),
        model.lambda_eff
    )?;
    for (n, t) in model.nodes.iter().zip(&model.theta) {
        writeln!(w, "{n},{t}")?;
    }
    Ok(())
}

pub fn read_model<R: BufRead>(r: R) -> Result<FittedModel> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header"))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(parse_err(1, "header must be `P D N_eff lambda_eff`"));
    }
    let dom = FiniteDomain::new(parse_field(fields[0], 1)?, parse_field(fields[1], 1)?)?;
    let n_eff: usize = parse_field(fields[2], 1)?;
    let lambda_eff: f64 = parse_field(fields[3], 1)?;
    let d = dom.d();
    let mut nodes = Vec::with_capacity(n_eff);
    let mut theta = Vec::with_capacity(n_eff);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != d + 2 {
            return Err(parse_err(lineno, "wrong field count"));
        }
        let coords = fields[..d]
            .iter()
            .map(|f| parse_field::<u32>(f, lineno))
            .collect::<Result<Vec<_>>>()?;
        let node = NodeIndex::new(coords, parse_field(fields[d], lineno)?);
        dom.check_node(&node)?;
        nodes.push(node);
        theta.push(parse_field(fields[d + 1], lineno)?);
    }
    if nodes.len() != n_eff {
        return Err(parse_err(1, format!("header declares {n_eff} nodes, found {}", nodes.len())));
    }
    Ok(FittedModel {
        dom,
        nodes,
        theta,
        lambda_eff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn dataset_round_trip(
            d in 1usize..4,
            rows in prop::collection::vec((prop::collection::vec(0u32..7, 3), -1e3f64..1e3), 1..40),
        ) {
            let dom = FiniteDomain::new(7, d).unwrap();
            let ds = Dataset {
                dom,
                xs: rows.iter().map(|(c, _)| Point(c[..d].to_vec())).collect(),
                ys: rows.iter().map(|(_, y)| *y).collect(),
            };
            let mut buf = Vec::new();
            ds.write(&mut buf).unwrap();
            prop_assert_eq!(Dataset::read(&buf[..]).unwrap(), ds);
        }
    }

    #[test]
    fn node_file_validation() {
        let dom = FiniteDomain::new(5, 2).unwrap();
        let nodes = read_nodes("1,2,3,1\n0,0,4,0\n\n".as_bytes(), &dom).unwrap();
        assert_eq!(nodes, vec![NodeIndex::new(vec![1, 2], 3), NodeIndex::new(vec![0, 0], 4)]);
        assert!(read_nodes("1,2,3\n".as_bytes(), &dom).is_err());
        assert!(read_nodes("1,2,5,1\n".as_bytes(), &dom).is_err());
        assert!(read_nodes("".as_bytes(), &dom).unwrap().is_empty());
    }

    #[test]
    fn dataset_rejects_bad_headers() {
        assert!(Dataset::read("4 1 1\n0 1.0\n".as_bytes()).is_err());
        assert!(Dataset::read("3 1 2\n0 1.0\n".as_bytes()).is_err());
        assert!(Dataset::read("3 1 1\n3 1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn model_round_trip() {
        let dom = FiniteDomain::new(3, 2).unwrap();
        let model = FittedModel {
            dom,
            nodes: vec![NodeIndex::new(vec![1, 2], 0), NodeIndex::new(vec![0, 0], 2)],
            theta: vec![0.25, -3.5e-7],
            lambda_eff: 1e-3,
        };
        let mut buf = Vec::new();
        write_model(&mut buf, &model).unwrap();
        let back = read_model(&buf[..]).unwrap();
        assert_eq!(back.nodes, model.nodes);
        assert_eq!(back.theta, model.theta);
        assert_eq!(back.lambda_eff, model.lambda_eff);
    }
}
