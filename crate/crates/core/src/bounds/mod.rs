//! Upper bounds on the normalized minimum distance `δ*(R)` and their assembly
//! into best-of curves.
//!
//! Every bound is a point `(R, δ)` meaning "for rates above `R`, `δ*(R) ≤ δ`".
//! Rates are in nats per symbol.

mod curve;
mod euclidean;
mod theta_bounds;

pub use curve::{best_curve, CurveOptions};
pub use euclidean::{
    berlekamp_bound, berlekamp_capped_q, blahut_eval, blahut_search, piret_bound, BerlekampResult,
    BlahutOptions,
};
pub use theta_bounds::{
    circ_sym_point, eps_capacity_bound, general_elias_point, stable_set_bound, umbrella_p_point,
    umbrella_point, EpsCapacityBound,
};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::format::{fmt_sig, round_json, round_sig};
use crate::simplex::{binary_entropy, binary_entropy_inverse, Composition, StochasticMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    EliasBinary,
    Umbrella,
    UmbrellaP,
    GeneralElias,
    Berlekamp,
    Piret,
    Blahut,
    CircSym,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::EliasBinary,
        Method::Umbrella,
        Method::UmbrellaP,
        Method::GeneralElias,
        Method::Berlekamp,
        Method::Piret,
        Method::Blahut,
        Method::CircSym,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::EliasBinary => "elias_binary",
            Method::Umbrella => "umbrella",
            Method::UmbrellaP => "umbrella_P",
            Method::GeneralElias => "general_elias",
            Method::Berlekamp => "berlekamp",
            Method::Piret => "piret",
            Method::Blahut => "blahut",
            Method::CircSym => "circ_sym",
        }
    }

    /// Accepts the CSV spelling as well as dashed variants.
    pub fn parse(s: &str) -> Result<Method> {
        let norm = s.replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| Error::InvalidInput(format!("unknown bound method {s:?}")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: ExtReal,
    pub method: Method,
    pub params: Value,
}

impl BoundPoint {
    pub fn new(r: f64, delta: ExtReal, method: Method, params: Value) -> Self {
        BoundPoint {
            r,
            delta,
            method,
            params,
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.delta.is_infinite()
    }

    /// The bound is stated for rates strictly above `r`; the point sits on that boundary.
    pub fn is_boundary(&self) -> bool {
        self.params
            .get("boundary")
            .and_then(Value::as_bool)
            .unwrap_or(false)
    }

    fn rounded(&self) -> BoundPoint {
        let mut params = self.params.clone();
        round_json(&mut params);
        BoundPoint {
            r: round_sig(self.r),
            delta: match self.delta {
                Finite(v) => Finite(round_sig(v)),
                Infinity => Infinity,
            },
            method: self.method,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
    pub distance_id: String,
}

pub const CSV_HEADER: [&str; 4] = ["R", "delta", "method", "params_json"];

impl BoundCurve {
    pub fn new(mut points: Vec<BoundPoint>, distance_id: impl Into<String>) -> Self {
        points.sort_by(|a, b| a.r.total_cmp(&b.r));
        BoundCurve {
            points,
            distance_id: distance_id.into(),
        }
    }

    /// The curve as it reads back from its CSV form.
    pub fn rounded(&self) -> BoundCurve {
        BoundCurve {
            points: self.points.iter().map(BoundPoint::rounded).collect(),
            distance_id: self.distance_id.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for p in &self.points {
            let mut params = p.params.clone();
            round_json(&mut params);
            w.write_record([
                fmt_sig(p.r),
                fmt_sig(p.delta.to_f64()),
                p.method.as_str().to_string(),
                params.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    pub fn emit_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn from_csv(text: &str, distance_id: impl Into<String>) -> Result<BoundCurve> {
        let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let bad = |m: String| Error::InvalidInput(format!("bound CSV: {m}"));
        let header = rd.headers().map_err(|e| bad(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(bad("unexpected header".into()));
        }
        let mut points = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| bad(format!("not a number: {s}")))
            };
            let r = num(&rec[0])?;
            let delta = match &rec[1] {
                "inf" => Infinity,
                s => Finite(num(s)?),
            };
            let method = Method::parse(&rec[2])?;
            let params: Value = serde_json::from_str(&rec[3]).map_err(|e| bad(e.to_string()))?;
            points.push(BoundPoint::new(r, delta, method, params));
        }
        Ok(BoundCurve {
            points,
            distance_id: distance_id.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoMeasures {
    pub entropy: f64,
    /// `h(P(0))` for a binary distribution.
    pub binary_entropy: Option<f64>,
    pub row_entropies: Option<Vec<f64>>,
    pub output: Option<Composition>,
    pub mutual_information: Option<f64>,
}

/// Entropy of `p`; with `v`, also the output `pV` and `I(p, V)`.
pub fn info_measures(p: &Composition, v: Option<&StochasticMatrix>) -> Result<InfoMeasures> {
    let mut m = InfoMeasures {
        entropy: p.entropy(),
        binary_entropy: (p.len() == 2).then(|| binary_entropy(p[0])),
        row_entropies: None,
        output: None,
        mutual_information: None,
    };
    if let Some(v) = v {
        m.row_entropies = Some(v.rows().iter().map(Composition::entropy).collect());
        m.output = Some(v.output(p)?);
        m.mutual_information = Some(v.mutual_information(p)?);
    }
    Ok(m)
}

/// Finite-length bound `d_min ≤ -ρ ln((M e^{-nθ} - 1)/(M - 1))`, infinite when
/// `M e^{-nθ} ≤ 1`.
///
/// At `ρ = ∞` the condition `M e^{-nθ} > 1` only says that `d_min` is finite,
/// which [`min_distance_is_finite`] reports; the numeric bound is `∞`.
pub fn plotkin_exponential(m: usize, n: usize, theta: f64, rho: ExtReal) -> ExtReal {
    assert!(m >= 2 && n >= 1, "need M >= 2 and n >= 1");
    let lead = m as f64 * (-(n as f64) * theta).exp();
    if lead <= 1.0 {
        return Infinity;
    }
    let ratio = ((lead - 1.0) / (m as f64 - 1.0)).min(1.0);
    match rho {
        Finite(r) => Finite((-r * ratio.ln()).max(0.0)),
        Infinity => Infinity,
    }
}

/// `M e^{-nϑ(∞)} > 1`: some pair of codewords is at finite distance.
pub fn min_distance_is_finite(m: usize, n: usize, theta_inf: f64) -> bool {
    m as f64 * (-(n as f64) * theta_inf).exp() > 1.0
}

/// `(ln 2 - h(λ), 2λ(1-λ))`, the binary Hamming Elias bound.
pub fn elias_binary_curve(lambdas: &[f64]) -> Result<BoundCurve> {
    let points = lambdas
        .iter()
        .map(|&l| {
            if !(0.0..0.5).contains(&l) {
                return Err(Error::InvalidInput(format!("λ = {l} outside [0, 1/2)")));
            }
            Ok(elias_point(l, 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve::new(points, "binary hamming"))
}

fn elias_point(lambda: f64, scale: f64) -> BoundPoint {
    BoundPoint::new(
        std::f64::consts::LN_2 - binary_entropy(lambda),
        Finite(2.0 * lambda * (1.0 - lambda) * scale),
        Method::EliasBinary,
        json!({"lambda": lambda, "boundary": true}),
    )
}

/// Elias bound at rate `r` for two symbols at distance `d01`.
pub(crate) fn elias_binary_at(r: f64, d01: f64) -> BoundPoint {
    let lambda = binary_entropy_inverse((std::f64::consts::LN_2 - r).max(0.0));
    let lambda = if r >= std::f64::consts::LN_2 {
        0.0
    } else {
        lambda
    };
    let mut p = elias_point(lambda, d01);
    p.r = r;
    p
}
