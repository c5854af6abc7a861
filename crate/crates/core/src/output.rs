//! Text formats written and read by the command-line tool. Numbers use 17
//! significant digits so files round-trip bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, WaveField};
use crate::mfunction::{ContourSample, Side};
use crate::rational::RationalDtN;
use crate::reference::ErrorSeries;
use crate::special::C64;
use crate::time_solver::BoundarySample;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshot_file_name(t: f64) -> String {
    format!("u_t{t:.4}.csv")
}

/// `x,re_u,im_u` rows after one `#` comment line.
pub fn snapshot_csv(field: &WaveField, mesh: &Mesh, comment: &str) -> Result<String> {
    field.check_mesh(mesh)?;
    let mut s = format!("# t={} {comment}\nx,re_u,im_u\n", num(field.time));
    for (x, u) in mesh.nodes().iter().zip(&field.values) {
        s.push_str(&format!("{},{},{}\n", num(*x), num(u.re), num(u.im)));
    }
    Ok(s)
}

/// Parses [`snapshot_csv`] output into `(t, x, u)`.
pub fn read_snapshot_csv(text: &str) -> Result<(f64, Vec<f64>, Vec<C64>)> {
    let bad = |what: &str| Error::Domain(format!("malformed snapshot file: {what}"));
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| bad("empty"))?;
    let t = head
        .strip_prefix("# t=")
        .and_then(|r| r.split_whitespace().next())
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| bad("missing time header"))?;
    if lines.next() != Some("x,re_u,im_u") {
        return Err(bad("missing column header"));
    }
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for line in lines {
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(line))?;
        if f.len() != 3 {
            return Err(bad(line));
        }
        xs.push(f[0]);
        us.push(C64::new(f[1], f[2]));
    }
    Ok((t, xs, us))
}

pub fn mfunc_csv(samples: &[ContourSample]) -> String {
    let mut s = String::from("side,f,re_lambda,im_lambda,re_m,im_m\n");
    for p in samples {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.side.name(),
            num(p.frequency()),
            num(p.lambda.re),
            num(p.lambda.im),
            num(p.m_value.re),
            num(p.m_value.im)
        ));
    }
    s
}

pub fn boundary_csv(trace: &[BoundarySample]) -> String {
    let mut s = String::from("t,re_u_left,im_u_left,re_u_right,im_u_right\n");
    for b in trace {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            num(b.time),
            num(b.left.re),
            num(b.left.im),
            num(b.right.re),
            num(b.right.im)
        ));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(c: C64) -> Self {
        ComplexJson { re: c.re, im: c.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(c: ComplexJson) -> Self {
        C64::new(c.re, c.im)
    }
}

/// One boundary's entry in `poles.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub side: Side,
    pub degree: usize,
    pub eps: f64,
    pub eps0: f64,
    pub sigma: f64,
    pub f_cutoff: f64,
    pub poles: Vec<ComplexJson>,
    pub residues: Vec<ComplexJson>,
    pub herglotz_min_im: f64,
    #[serde(default)]
    pub converged: bool,
    #[serde(default)]
    pub unstable_poles: usize,
    #[serde(default)]
    pub unpaired_poles: usize,
}

impl From<&RationalDtN> for PoleRecord {
    fn from(r: &RationalDtN) -> Self {
        PoleRecord {
            side: r.side,
            degree: r.degree,
            eps: r.fit_error,
            eps0: r.tolerance,
            sigma: r.contour_sigma,
            f_cutoff: r.f_cutoff,
            poles: r.poles.iter().map(|&b| b.into()).collect(),
            residues: r.residues.iter().map(|&a| a.into()).collect(),
            herglotz_min_im: r.herglotz_min_im,
            converged: r.converged,
            unstable_poles: r.unstable_poles,
            unpaired_poles: r.unpaired_poles,
        }
    }
}

impl PoleRecord {
    pub fn to_rational(&self) -> Result<RationalDtN> {
        let mut r = RationalDtN::from_poles(
            self.side,
            self.poles.iter().map(|&b| b.into()).collect(),
            self.residues.iter().map(|&a| a.into()).collect(),
        )?;
        r.fit_error = self.eps;
        r.tolerance = self.eps0;
        r.contour_sigma = self.sigma;
        r.f_cutoff = self.f_cutoff;
        r.converged = self.converged;
        r.unpaired_poles = self.unpaired_poles;
        r.herglotz_min_im = self.herglotz_min_im;
        Ok(r)
    }
}

pub fn poles_json(fits: &[&RationalDtN]) -> Result<String> {
    let recs: Vec<PoleRecord> = fits.iter().map(|r| PoleRecord::from(*r)).collect();
    Ok(serde_json::to_string_pretty(&recs)? + "\n")
}

/// Reads `poles.json` into `(left, right)`.
pub fn read_poles_json(text: &str) -> Result<(RationalDtN, RationalDtN)> {
    let recs: Vec<PoleRecord> = serde_json::from_str(text)?;
    let pick = |side: Side| -> Result<RationalDtN> {
        recs.iter()
            .find(|r| r.side == side)
            .ok_or_else(|| Error::Domain(format!("poles file has no {} entry", side.name())))?
            .to_rational()
    };
    Ok((pick(Side::Left)?, pick(Side::Right)?))
}

/// Plain-text table of errors at each time.
pub fn error_table(series: &ErrorSeries) -> String {
    let mut head = String::from("time points   ");
    let mut row = String::from("relative L2   ");
    for (t, e) in series.times.iter().zip(&series.rel_l2) {
        head.push_str(&format!("| {t:<9.3} "));
        row.push_str(&format!("| {e:<9.2e} "));
    }
    format!("{head}\n{row}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gaussian_beam;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let mesh = Mesh::new(-5.0, 5.0, 8, 3).unwrap();
        let f = WaveField::from_fn(&mesh, 0.3, gaussian_beam);
        let text = snapshot_csv(&f, &mesh, "method=test").unwrap();
        let (t, x, u) = read_snapshot_csv(&text).unwrap();
        assert_eq!(t, 0.3);
        assert_eq!(x, mesh.nodes());
        assert_eq!(u, f.values);
        assert!(read_snapshot_csv("x,re_u,im_u\n").is_err());
    }

    #[test]
    fn poles_round_trip() {
        let r = RationalDtN::from_poles(Side::Right, vec![C64::new(0.2, 0.3)], vec![C64::new(-1.0, 0.5)]).unwrap();
        let l = RationalDtN::free(Side::Left);
        let text = poles_json(&[&l, &r]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["side", "degree", "eps", "eps0", "sigma", "f_cutoff", "poles", "residues", "herglotz_min_im"] {
            assert!(v[1].get(key).is_some(), "{key}");
        }
        let (l2, r2) = read_poles_json(&text).unwrap();
        assert_eq!(r2.poles, r.poles);
        assert_eq!(r2.residues, r.residues);
        assert_eq!(l2.degree, 0);
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}
