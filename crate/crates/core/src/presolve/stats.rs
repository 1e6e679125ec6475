use serde::{Deserialize, Serialize};

use super::reach::support_sizes;
use super::{PresolveLevel, ReducedModel};

/// Reduction percentages relative to the unreduced covering model.
///
/// `nnz` counts support entries of every reachability row plus one for the
/// row's own `z` coefficient. The cardinality row is not counted. Columns of
/// stages that were not applied are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresolveStats {
    pub level: PresolveLevel,
    pub node_count: usize,
    pub scenario_count: usize,
    pub z_base: usize,
    pub nnz_base: usize,
    pub z_final: usize,
    pub nnz_final: usize,
    /// SNA: `ΔZ`, `ΔNNZ`.
    pub delta_z: Option<f64>,
    pub delta_nnz: Option<f64>,
    /// SCNA: `+ΔZ/ΔV`, `+ΔNNZ`, `ΔA`.
    pub scna_delta_z: Option<f64>,
    pub scna_delta_nnz: Option<f64>,
    pub delta_v: Option<f64>,
    pub delta_a: Option<f64>,
    /// INA: `+ΔZ`, `+ΔNNZ`.
    pub ina_delta_z: Option<f64>,
    pub ina_delta_nnz: Option<f64>,
}

/// Wall-clock seconds per stage. Kept apart from the deterministic outputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PresolveTimings {
    pub scna_seconds: f64,
    pub sna_seconds: f64,
    pub ina_seconds: f64,
}

fn percent(removed: usize, base: usize) -> f64 {
    if base == 0 {
        0.0
    } else {
        100.0 * removed as f64 / base as f64
    }
}

/// Computes the reduction table of `reduced` against the unreduced model.
///
/// Every quantity is derived from the reduced model alone: a unit of `|SC_u|`
/// nodes stands for that many rows of the plain model, each with the unit's
/// expanded support.
pub fn reduction_stats(reduced: &ReducedModel) -> PresolveStats {
    let n = reduced.node_count;
    let scenarios = reduced.scenario_count();
    let z_base = n * scenarios;

    let mut nnz_base = 0usize;
    let mut unit_nnz = 0usize;
    let mut unit_count = 0usize;
    let mut delta_v = 0.0;
    let mut delta_a = 0.0;
    for slice in &reduced.slices {
        let sizes = support_sizes(&slice.graph);
        for (u, &s) in sizes.iter().enumerate() {
            nnz_base += slice.graph.members(u as u32).len() * (s + 1);
            unit_nnz += s + 1;
        }
        unit_count += slice.graph.unit_count();
        if n > 0 {
            delta_v += (n - slice.graph.unit_count()) as f64 / n as f64;
        }
        if slice.live_arc_count > 0 {
            delta_a += (slice.live_arc_count - slice.graph.arc_count()) as f64 / slice.live_arc_count as f64;
        }
    }
    let mean = |x: f64| if scenarios == 0 { 0.0 } else { 100.0 * x / scenarios as f64 };

    let options = reduced.options;
    let singles = reduced.sna_links.len();
    let merges = reduced.ina_merges.len();
    let merged_nnz: usize = reduced.ina_merges.iter().map(|m| m.support_size + 1).sum();

    let (z_sna, nnz_sna) = if options.sna { (z_base - singles, nnz_base - 2 * singles) } else { (z_base, nnz_base) };
    let (z_scna, nnz_scna) = if options.scna {
        let (z, nnz) = (unit_count, unit_nnz);
        if options.sna {
            (z - singles, nnz - 2 * singles)
        } else {
            (z, nnz)
        }
    } else {
        (z_sna, nnz_sna)
    };
    let (z_final, nnz_final) = (z_scna - merges, nnz_scna - merged_nnz);

    PresolveStats {
        level: reduced.level(),
        node_count: n,
        scenario_count: scenarios,
        z_base,
        nnz_base,
        z_final,
        nnz_final,
        delta_z: options.sna.then(|| percent(z_base - z_sna, z_base)),
        delta_nnz: options.sna.then(|| percent(nnz_base - nnz_sna, nnz_base)),
        scna_delta_z: options.scna.then(|| percent(z_sna - z_scna, z_base)),
        scna_delta_nnz: options.scna.then(|| percent(nnz_sna - nnz_scna, nnz_base)),
        delta_v: options.scna.then(|| mean(delta_v)),
        delta_a: options.scna.then(|| mean(delta_a)),
        ina_delta_z: options.ina.then(|| percent(merges, z_base)),
        ina_delta_nnz: options.ina.then(|| percent(merged_nnz, nnz_base)),
    }
}

impl PresolveStats {
    pub const CSV_HEADER: &'static str = "level,nodes,scenarios,ΔZ,ΔNNZ,+ΔZ/ΔV,+ΔNNZ,ΔA,+ΔZ(INA),+ΔNNZ(INA)";

    /// One CSV row matching [`Self::CSV_HEADER`], four decimals per percentage.
    pub fn csv_row(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.level,
            self.node_count,
            self.scenario_count,
            cell(self.delta_z),
            cell(self.delta_nnz),
            cell(self.scna_delta_z),
            cell(self.scna_delta_nnz),
            cell(self.delta_a),
            cell(self.ina_delta_z),
            cell(self.ina_delta_nnz),
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}
