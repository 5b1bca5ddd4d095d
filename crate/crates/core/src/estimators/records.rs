//! Per-replica records and their fixed CSV schemas.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same binary64 value; missing optional values are empty fields.

use std::fmt;
use std::str::FromStr;

use super::EstimatorError;

/// Window radii at which geodesic window counts are recorded.
pub const WINDOW_RADII: [i64; 3] = [2, 4, 8];

#[derive(Debug, Clone, PartialEq)]
pub struct FppRecord {
    pub n: i64,
    pub replica: u64,
    pub t: f64,
    pub f_n: Option<f64>,
    pub g_dag_size: usize,
    pub g_int_size: usize,
    /// Edges on the sample geodesic.
    pub geo_len: usize,
    /// L1 diameter of the sample geodesic's vertex set.
    pub geo_diam: i64,
    /// Largest L1 norm of the transverse coordinates along the sample geodesic.
    pub transverse_dev: i64,
    /// `sum over G_n of (1 - log F(t_e))`.
    pub y_n: f64,
    pub window_grows: u32,
    /// For each radius in [`WINDOW_RADII`], the most sample-geodesic edges
    /// inside one translate `z + B_m`.
    pub window_counts: Option<[u32; 3]>,
    /// Per-field Efron-Stein sum `(1/2) sum_e E'[(T - T^{(e)})^2]`.
    pub es_sum: Option<f64>,
    pub overflow: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusRecord {
    pub n: i64,
    pub replica: u64,
    pub t: f64,
    pub g_dag_size: usize,
    pub g_int_size: usize,
    pub geo_len: usize,
    pub window_grows: u32,
    pub overflow: bool,
    /// Torus edge indices in `G`, increasing.
    pub g_members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LppRecord {
    pub n: i64,
    pub replica: u64,
    pub t: f64,
}

/// Records of one sweep, in `(n, replica)` order.
#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Fpp(Vec<FppRecord>),
    Torus(Vec<TorusRecord>),
    Lpp(Vec<LppRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Fpp(v) => v.len(),
            Records::Torus(v) => v.len(),
            Records::Lpp(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distinct `n` values in order of appearance.
    pub fn sizes(&self) -> Vec<i64> {
        let ns: Vec<i64> = match self {
            Records::Fpp(v) => v.iter().map(|r| r.n).collect(),
            Records::Torus(v) => v.iter().map(|r| r.n).collect(),
            Records::Lpp(v) => v.iter().map(|r| r.n).collect(),
        };
        let mut out: Vec<i64> = Vec::new();
        for n in ns {
            if out.last() != Some(&n) && !out.contains(&n) {
                out.push(n);
            }
        }
        out
    }

    /// Passage times at size `n`, in replica order.
    pub fn times(&self, n: i64) -> Vec<f64> {
        match self {
            Records::Fpp(v) => v.iter().filter(|r| r.n == n).map(|r| r.t).collect(),
            Records::Torus(v) => v.iter().filter(|r| r.n == n).map(|r| r.t).collect(),
            Records::Lpp(v) => v.iter().filter(|r| r.n == n).map(|r| r.t).collect(),
        }
    }
}

/// A record type with a fixed column set.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &[&str]) -> Result<Self, EstimatorError>;
}

pub(crate) fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn parse<T: FromStr>(col: &str, s: &str) -> Result<T, EstimatorError>
where
    T::Err: fmt::Display,
{
    s.trim().parse().map_err(|e: T::Err| EstimatorError::Parse {
        column: col.to_string(),
        value: s.to_string(),
        reason: e.to_string(),
    })
}

fn parse_opt(col: &str, s: &str) -> Result<Option<f64>, EstimatorError> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse(col, s).map(Some)
    }
}

fn parse_bool(col: &str, s: &str) -> Result<bool, EstimatorError> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(EstimatorError::Parse {
            column: col.to_string(),
            value: s.to_string(),
            reason: "expected 0 or 1".to_string(),
        }),
    }
}

fn check_len(fields: &[&str], header: &[&str]) -> Result<(), EstimatorError> {
    if fields.len() != header.len() {
        return Err(EstimatorError::Schema(format!(
            "expected {} columns, found {}",
            header.len(),
            fields.len()
        )));
    }
    Ok(())
}

impl CsvRecord for FppRecord {
    const HEADER: &'static [&'static str] = &[
        "n",
        "replica",
        "T",
        "F_n",
        "g_dag_size",
        "g_int_size",
        "geo_len",
        "geo_diam",
        "transverse_dev",
        "Y_n",
        "window_grows",
        "win_2",
        "win_4",
        "win_8",
        "es_sum",
        "overflow",
    ];

    fn to_fields(&self) -> Vec<String> {
        let win = |i: usize| self.window_counts.map(|w| w[i].to_string()).unwrap_or_default();
        vec![
            self.n.to_string(),
            self.replica.to_string(),
            fmt_f64(self.t),
            fmt_opt(self.f_n),
            self.g_dag_size.to_string(),
            self.g_int_size.to_string(),
            self.geo_len.to_string(),
            self.geo_diam.to_string(),
            self.transverse_dev.to_string(),
            fmt_f64(self.y_n),
            self.window_grows.to_string(),
            win(0),
            win(1),
            win(2),
            fmt_opt(self.es_sum),
            u8::from(self.overflow).to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, EstimatorError> {
        let h = Self::HEADER;
        check_len(f, h)?;
        let window_counts = if f[11..14].iter().all(|s| s.trim().is_empty()) {
            None
        } else {
            Some([parse(h[11], f[11])?, parse(h[12], f[12])?, parse(h[13], f[13])?])
        };
        Ok(FppRecord {
            n: parse(h[0], f[0])?,
            replica: parse(h[1], f[1])?,
            t: parse(h[2], f[2])?,
            f_n: parse_opt(h[3], f[3])?,
            g_dag_size: parse(h[4], f[4])?,
            g_int_size: parse(h[5], f[5])?,
            geo_len: parse(h[6], f[6])?,
            geo_diam: parse(h[7], f[7])?,
            transverse_dev: parse(h[8], f[8])?,
            y_n: parse(h[9], f[9])?,
            window_grows: parse(h[10], f[10])?,
            window_counts,
            es_sum: parse_opt(h[14], f[14])?,
            overflow: parse_bool(h[15], f[15])?,
        })
    }
}

impl CsvRecord for TorusRecord {
    const HEADER: &'static [&'static str] = &[
        "n",
        "replica",
        "T",
        "g_dag_size",
        "g_int_size",
        "geo_len",
        "window_grows",
        "overflow",
        "g_members",
    ];

    fn to_fields(&self) -> Vec<String> {
        let members: Vec<String> = self.g_members.iter().map(|e| e.to_string()).collect();
        vec![
            self.n.to_string(),
            self.replica.to_string(),
            fmt_f64(self.t),
            self.g_dag_size.to_string(),
            self.g_int_size.to_string(),
            self.geo_len.to_string(),
            self.window_grows.to_string(),
            u8::from(self.overflow).to_string(),
            members.join(";"),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, EstimatorError> {
        let h = Self::HEADER;
        check_len(f, h)?;
        let g_members = if f[8].trim().is_empty() {
            Vec::new()
        } else {
            f[8].split(';').map(|s| parse(h[8], s)).collect::<Result<_, _>>()?
        };
        Ok(TorusRecord {
            n: parse(h[0], f[0])?,
            replica: parse(h[1], f[1])?,
            t: parse(h[2], f[2])?,
            g_dag_size: parse(h[3], f[3])?,
            g_int_size: parse(h[4], f[4])?,
            geo_len: parse(h[5], f[5])?,
            window_grows: parse(h[6], f[6])?,
            overflow: parse_bool(h[7], f[7])?,
            g_members,
        })
    }
}

impl CsvRecord for LppRecord {
    const HEADER: &'static [&'static str] = &["n", "replica", "T"];

    fn to_fields(&self) -> Vec<String> {
        vec![self.n.to_string(), self.replica.to_string(), fmt_f64(self.t)]
    }

    fn from_fields(f: &[&str]) -> Result<Self, EstimatorError> {
        let h = Self::HEADER;
        check_len(f, h)?;
        Ok(LppRecord {
            n: parse(h[0], f[0])?,
            replica: parse(h[1], f[1])?,
            t: parse(h[2], f[2])?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round_trip<R: CsvRecord + PartialEq + fmt::Debug>(r: &R) {
        let fields = r.to_fields();
        assert_eq!(fields.len(), R::HEADER.len());
        let refs: Vec<&str> = fields.iter().map(|s| s.as_str()).collect();
        assert_eq!(&R::from_fields(&refs).unwrap(), r);
    }

    #[test]
    fn torus_members_round_trip() {
        for members in [vec![], vec![3], vec![1, 7, 40]] {
            round_trip(&TorusRecord {
                n: 8,
                replica: 2,
                t: 9.0,
                g_dag_size: 12,
                g_int_size: members.len(),
                geo_len: 9,
                window_grows: 0,
                overflow: false,
                g_members: members,
            });
        }
    }

    #[test]
    fn bad_fields_are_reported_by_column() {
        let err = LppRecord::from_fields(&["4", "x", "1.5"]).unwrap_err();
        assert!(err.to_string().contains("replica"));
        assert!(LppRecord::from_fields(&["4", "1"]).is_err());
    }

    proptest! {
        #[test]
        fn fpp_round_trip(t in 0.0f64..1e6, f in proptest::option::of(0.0f64..1e6), y in 0.0f64..1e3,
                          es in proptest::option::of(0.0f64..10.0), w in proptest::option::of(any::<[u32; 3]>()),
                          overflow in any::<bool>(), n in 1i64..1000, replica in any::<u64>()) {
            round_trip(&FppRecord {
                n, replica, t, f_n: f, g_dag_size: 3, g_int_size: 2, geo_len: 5, geo_diam: 7,
                transverse_dev: 1, y_n: y, window_grows: 1, window_counts: w, es_sum: es, overflow,
            });
        }

        #[test]
        fn floats_format_shortest_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let s = fmt_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
