use serde::{Deserialize, Serialize};

use super::{trace_at, MonomialIndex, ResidueError, TraceOptions};
use crate::geometry::{DomainSpec, ParamSpace, ResidueData, SamplingPlan};
use crate::numeric::{ring_points, C64};
use crate::par_map;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceTableOptions {
    pub trace: TraceOptions,
    /// Minimum fraction of clean samples below which the table is rejected.
    pub min_clean_fraction: f64,
}

impl Default for TraceTableOptions {
    fn default() -> Self {
        TraceTableOptions {
            trace: TraceOptions::default(),
            min_clean_fraction: 0.5,
        }
    }
}

/// Why a sample is excluded from fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum SampleFlag {
    /// Fiber points collide; values are cluster sums.
    NearDiscriminant,
    /// A fiber point meets the polar locus; no values.
    Pole,
    /// The fiber could not be computed; no values.
    Failed(String),
}

/// Traces on one probe ring around a sample, for one parameter axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeValues {
    pub axis: usize,
    pub radius: f64,
    /// `values[node][index]` at [`ring_points`] around the sample; empty when
    /// some ring node failed.
    pub values: Vec<Vec<C64>>,
    /// Largest single-point residue term over the ring.
    pub scale: f64,
}

impl ProbeValues {
    pub fn is_complete(&self) -> bool {
        !self.values.is_empty()
    }

    /// Ring samples of one index column.
    pub fn column(&self, k: usize) -> Vec<C64> {
        self.values.iter().map(|row| row[k]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub params: Vec<C64>,
    /// One value per table index; empty for [`SampleFlag::Pole`] and
    /// [`SampleFlag::Failed`] samples.
    pub values: Vec<C64>,
    /// Largest single-point residue term, the natural size of the values.
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<SampleFlag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeValues>,
}

impl TraceSample {
    pub fn is_clean(&self) -> bool {
        self.flag.is_none()
    }
}

/// Sampled traces `u_I` over a parameter domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceTable {
    pub source: String,
    pub space: ParamSpace,
    pub n: usize,
    pub p: usize,
    pub domain: DomainSpec,
    pub plan: SamplingPlan,
    pub indices: Vec<MonomialIndex>,
    pub samples: Vec<TraceSample>,
}

impl TraceTable {
    pub fn index_of(&self, index: &MonomialIndex) -> Option<usize> {
        self.indices.iter().position(|i| i == index)
    }

    pub fn clean_samples(&self) -> impl Iterator<Item = &TraceSample> {
        self.samples.iter().filter(|s| s.is_clean())
    }

    /// Largest `|I|` present.
    pub fn max_order(&self) -> u32 {
        self.indices.iter().map(|i| i.order()).max().unwrap_or(0)
    }

    /// Largest exponent in any single slot.
    pub fn max_per_slot(&self) -> u32 {
        self.indices.iter().flat_map(|i| i.0.iter().copied()).max().unwrap_or(0)
    }

    /// Maximum modulus over all clean values.
    pub fn max_abs(&self) -> f64 {
        self.clean_samples()
            .flat_map(|s| s.values.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Samples `u_I` for every index in `indices` at the nodes of `plan`,
/// together with probe rings when the plan asks for them.
pub fn trace_table(
    data: &ResidueData,
    space: ParamSpace,
    domain: &DomainSpec,
    indices: &[MonomialIndex],
    plan: &SamplingPlan,
    opts: TraceTableOptions,
) -> Result<TraceTable, ResidueError> {
    let v = data.variety();
    let (n, p) = (v.n(), v.p());
    if domain.dim() != space.dim(n, p) {
        return Err(crate::geometry::GeometryError::DimensionMismatch(format!(
            "domain has dimension {}, parameter space has {}",
            domain.dim(),
            space.dim(n, p)
        ))
        .into());
    }
    for index in indices {
        super::check_index(data, index)?;
    }
    let mut topts = opts.trace;
    if space == ParamSpace::Chart && topts.solve.expected_degree.is_none() {
        topts.solve.expected_degree = v.degree().general;
    }

    let eval = |params: &[C64]| -> Result<super::TraceEval, ResidueError> {
        let chart = space.chart(n, p, params)?;
        trace_at(data, &chart, indices, topts)
    };

    let nodes = domain.nodes(&plan.layout)?;
    let samples: Vec<TraceSample> = par_map(&nodes, |params| {
        let (values, scale, flag) = match eval(params) {
            Ok(t) if t.values.iter().all(|z| z.is_finite()) => {
                let flag = t.clustered.then_some(SampleFlag::NearDiscriminant);
                (t.values, t.scale, flag)
            }
            Ok(_) | Err(ResidueError::PoleAtPoint) => (Vec::new(), 0.0, Some(SampleFlag::Pole)),
            Err(e) => (Vec::new(), 0.0, Some(SampleFlag::Failed(e.to_string()))),
        };
        let probes = match plan.probe {
            None => Vec::new(),
            Some(probe) => (0..params.len())
                .map(|axis| {
                    let mut scale: f64 = 0.0;
                    let ring: Result<Vec<Vec<C64>>, ResidueError> =
                        ring_points(params[axis], probe.radius, probe.nodes)
                            .into_iter()
                            .map(|z| {
                                let mut q = params.clone();
                                q[axis] = z;
                                let t = eval(&q)?;
                                scale = scale.max(t.scale);
                                if t.values.iter().all(|v| v.is_finite()) {
                                    Ok(t.values)
                                } else {
                                    Err(ResidueError::PoleAtPoint)
                                }
                            })
                            .collect();
                    ProbeValues {
                        axis,
                        radius: probe.radius,
                        values: ring.unwrap_or_default(),
                        scale,
                    }
                })
                .collect(),
        };
        TraceSample {
            params: params.clone(),
            values,
            scale,
            flag,
            probes,
        }
    });

    let clean = samples.iter().filter(|s| s.is_clean()).count();
    let needed = ((samples.len() as f64 * opts.min_clean_fraction).ceil() as usize).max(1);
    if clean < needed {
        return Err(ResidueError::TooFewCleanSamples {
            clean,
            total: samples.len(),
            needed,
        });
    }
    Ok(TraceTable {
        source: data.label().to_string(),
        space,
        n,
        p,
        domain: domain.clone(),
        plan: plan.clone(),
        indices: indices.to_vec(),
        samples,
    })
}
