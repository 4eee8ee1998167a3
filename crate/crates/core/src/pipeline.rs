//! The whole pipeline from a set system to a document and an SVG.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::insertion::{expand_merged, insert_first_viable, insert_split};
use crate::labels::label_stations_with;
use crate::layout::{mds_seed, refine_paths, spring_layout, stress_layout, EmbeddedMap, InitialPositions};
use crate::lines::minimize_line_crossings;
use crate::metrics::{timing_capture, MetricReport};
use crate::model::{condense, SetSystem};
use crate::render::{
    assign_colors, build_document, line_adjacency, render_svg, scale_layout, station_radii, DocumentParts,
    LayoutDocument, Provenance, StationSizing,
};
use crate::schematize::{assign_ports, least_squares_schematize, magnetic_schematize, SchematizeError};
use crate::support::{extract_support_c1p, extract_support_two_opt, AnnealSchedule};

macro_rules! choice {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "unknown value {s:?}; expected one of: {}",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

choice!(SupportMethod { Tsp => "tsp", C1p => "c1p" });
choice!(InsertionMethod { FirstViable => "first-viable", Split => "split" });
choice!(LayoutMethod { TspStress => "tsp-stress", Spring => "spring" });
choice!(SchematizationMethod { LeastSquares => "least-squares", Magnetic => "magnetic" });
choice!(Preset { Balanced => "balanced", MaxSpeed => "max-speed", Simplicity => "simplicity" });

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub preset: Option<Preset>,
    pub support: SupportMethod,
    pub insertion: InsertionMethod,
    pub layout: LayoutMethod,
    pub schematization: SchematizationMethod,
    pub seed: u64,
    /// Refinement rounds of the TSP stress layout.
    pub rounds: usize,
    pub ideal_len: f64,
    pub anneal: AnnealSchedule,
    pub station_sizing: StationSizing,
    /// Store wall-clock stage timings in the metrics. Off by default so that
    /// equal inputs give byte-identical documents.
    pub record_timings: bool,
}

impl PipelineConfig {
    pub fn preset(p: Preset) -> Self {
        let (support, insertion, layout, schematization) = match p {
            Preset::Balanced => (
                SupportMethod::Tsp,
                InsertionMethod::Split,
                LayoutMethod::TspStress,
                SchematizationMethod::Magnetic,
            ),
            Preset::MaxSpeed => (
                SupportMethod::Tsp,
                InsertionMethod::Split,
                LayoutMethod::TspStress,
                SchematizationMethod::LeastSquares,
            ),
            Preset::Simplicity => (
                SupportMethod::C1p,
                InsertionMethod::FirstViable,
                LayoutMethod::Spring,
                SchematizationMethod::Magnetic,
            ),
        };
        Self {
            preset: Some(p),
            support,
            insertion,
            layout,
            schematization,
            seed: 0,
            rounds: 3,
            ideal_len: 1.0,
            anneal: AnnealSchedule::default(),
            station_sizing: StationSizing::default(),
            record_timings: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::preset(Preset::Balanced)
    }
}

#[derive(Debug, Error)]
#[error("stage {stage} failed: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: SchematizeError,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub document: LayoutDocument,
    pub svg: Vec<u8>,
    /// Final map in pt with its line orders, for callers that want more
    /// than the document.
    pub map: EmbeddedMap,
    pub orders: crate::lines::LineOrderMap,
}

struct Clock {
    stages: Vec<(&'static str, Duration)>,
    start: Instant,
}

impl Clock {
    fn new() -> Self {
        Self {
            stages: Vec::new(),
            start: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.stages.push((stage, now - self.start));
        self.start = now;
    }
}

pub fn run_pipeline(system: &SetSystem, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    let mut clock = Clock::new();
    let cs = condense(system);
    clock.lap("preprocess");

    let kernel_support = match config.support {
        SupportMethod::Tsp => extract_support_two_opt(&cs.kernel),
        SupportMethod::C1p => extract_support_c1p(&cs.kernel, config.seed, config.anneal),
    };
    clock.lap("support");

    let expanded = expand_merged(&kernel_support, &cs);
    let support = match config.insertion {
        InsertionMethod::FirstViable => insert_first_viable(&expanded, &cs),
        InsertionMethod::Split => insert_split(&expanded, &cs),
    };
    clock.lap("insertion");

    let embedded = match config.layout {
        LayoutMethod::TspStress => {
            let seed = mds_seed(&support, config.ideal_len);
            let m = stress_layout(&support, &seed, config.ideal_len);
            refine_paths(&m, system, config.rounds, config.ideal_len)
        }
        LayoutMethod::Spring => spring_layout(&support, InitialPositions::Mds, config.ideal_len),
    };
    clock.lap("layout");

    let schematic = match config.schematization {
        SchematizationMethod::LeastSquares => {
            let ports = assign_ports(&embedded).map_err(|source| PipelineError {
                stage: "schematization",
                source,
            })?;
            least_squares_schematize(&embedded, &ports)
        }
        SchematizationMethod::Magnetic => magnetic_schematize(&embedded, config.seed),
    };
    let map = scale_layout(&schematic);
    clock.lap("schematization");

    let orders = minimize_line_crossings(&map);
    clock.lap("line-ordering");

    let radii = station_radii(&map, &orders, config.station_sizing);
    let labels = label_stations_with(&map, &orders, system.element_names(), &radii);
    clock.lap("labeling");

    let mut metrics = MetricReport::compute(&map, &orders);
    let palette = assign_colors(&line_adjacency(&map.support));
    clock.lap("metrics");
    if config.record_timings {
        metrics.running_time = Some(timing_capture(&clock.stages));
    }
    let provenance = Provenance {
        preset: config.preset.map(|p| p.to_string()),
        support: config.support.to_string(),
        insertion: config.insertion.to_string(),
        layout: config.layout.to_string(),
        schematization: config.schematization.to_string(),
        seed: config.seed,
        stages: clock.stages.iter().map(|(s, _)| s.to_string()).collect(),
    };
    let document = build_document(DocumentParts {
        system,
        map: &map,
        orders: &orders,
        labels: &labels,
        palette: &palette,
        radii: &radii,
        metrics,
        provenance,
    });
    let svg = render_svg(&document);
    Ok(PipelineOutput {
        document,
        svg,
        map,
        orders,
    })
}
