//! Assembly of the single-phase branch-flow relaxation as a conic program
//! in the standard form `min q'x  s.t.  Ax + s = b, s in K`.
//!
//! Constraint groups, in row order:
//! - zero cone: slack voltage pin, per-line voltage drop (Ohm), per-bus
//!   active and reactive balance;
//! - nonnegative cone: voltage boxes, flexibility and curtailment bounds,
//!   generator reactive capability, slack import/export limits;
//! - one SOC(3) per thermally limited line for `|S| <= s_max`;
//! - one SOC(4) per line encoding `v_from * l >= P^2 + Q^2` as
//!   `(v + l, 2P, 2Q, v - l)`, the 2x2 PSD condition of the relaxation at
//!   the single-phase case.
//!
//! The stored objective keeps the raw cost coefficients; `obj_scale` is the
//! max-abs normalisation applied before handing the vector to a backend, so
//! scaling every cost by a common factor cannot move the argmin.

use super::instance::OpfInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSpec {
    Zero(usize),
    NonNeg(usize),
    Soc(usize),
}

/// Where each variable group starts in the stacked vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    pub n_bus: usize,
    pub n_line: usize,
    pub n_flex: usize,
    pub n_wind: usize,
    pub n_qgen: usize,
    pub v_sq: usize,
    pub p_flow: usize,
    pub q_flow: usize,
    pub l_sq: usize,
    pub flex: usize,
    pub curtail: usize,
    pub q_gen: usize,
    pub slack_p: usize,
    pub slack_q: usize,
    pub n_var: usize,
}

impl VarLayout {
    fn new(n_bus: usize, n_line: usize, n_flex: usize, n_wind: usize, n_qgen: usize) -> Self {
        let v_sq = 0;
        let p_flow = v_sq + n_bus;
        let q_flow = p_flow + n_line;
        let l_sq = q_flow + n_line;
        let flex = l_sq + n_line;
        let curtail = flex + n_flex;
        let q_gen = curtail + n_wind;
        let slack_p = q_gen + n_qgen;
        let slack_q = slack_p + 1;
        VarLayout {
            n_bus,
            n_line,
            n_flex,
            n_wind,
            n_qgen,
            v_sq,
            p_flow,
            q_flow,
            l_sq,
            flex,
            curtail,
            q_gen,
            slack_p,
            slack_q,
            n_var: slack_q + 1,
        }
    }
}

/// Row counts by constraint group, for structural assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintCounts {
    pub ohm_equalities: usize,
    pub p_balance_equalities: usize,
    pub q_balance_equalities: usize,
    pub relaxation_cones: usize,
    pub thermal_cones: usize,
}

#[derive(Debug, Clone)]
pub struct ConicProgram {
    pub layout: VarLayout,
    /// Raw objective coefficients (unnormalised).
    pub obj: Vec<f64>,
    /// Max-abs of `obj`, the factor divided out before solving.
    pub obj_scale: f64,
    /// Constraint matrix in triplet form, row-major as built.
    pub a_rows: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
    pub cones: Vec<ConeSpec>,
    pub counts: ConstraintCounts,
}

impl ConicProgram {
    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    /// Objective vector as given to the backend.
    pub fn scaled_obj(&self) -> Vec<f64> {
        self.obj.iter().map(|c| c / self.obj_scale).collect()
    }

    /// Column-compressed form of A: (colptr, rowval, nzval).
    pub fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n_var = self.layout.n_var;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_var];
        for (row, entries) in self.a_rows.iter().enumerate() {
            for &(col, val) in entries {
                cols[col].push((row, val));
            }
        }
        let mut colptr = Vec::with_capacity(n_var + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in &mut cols {
            col.sort_by_key(|&(row, _)| row);
            for &(row, val) in col.iter() {
                rowval.push(row);
                nzval.push(val);
            }
            colptr.push(rowval.len());
        }
        (colptr, rowval, nzval)
    }
}

struct Builder {
    a_rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cones: Vec<ConeSpec>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            a_rows: Vec::new(),
            b: Vec::new(),
            cones: Vec::new(),
        }
    }

    /// `sum coeff_i x_i = rhs`
    fn push_eq(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        self.a_rows.push(coeffs.to_vec());
        self.b.push(rhs);
        match self.cones.last_mut() {
            Some(ConeSpec::Zero(n)) => *n += 1,
            _ => self.cones.push(ConeSpec::Zero(1)),
        }
    }

    /// `sum coeff_i x_i <= rhs`
    fn push_leq(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        self.a_rows.push(coeffs.to_vec());
        self.b.push(rhs);
        match self.cones.last_mut() {
            Some(ConeSpec::NonNeg(n)) => *n += 1,
            _ => self.cones.push(ConeSpec::NonNeg(1)),
        }
    }

    /// `s = b_rows - A_rows x` constrained to a second-order cone.
    fn push_soc(&mut self, rows: &[(Vec<(usize, f64)>, f64)]) {
        for (coeffs, rhs) in rows {
            // slack s = rhs - coeffs.x, so negate nothing here: A holds the
            // negated linear expression already supplied by the caller.
            self.a_rows.push(coeffs.clone());
            self.b.push(*rhs);
        }
        self.cones.push(ConeSpec::Soc(rows.len()));
    }
}

/// Builds the full conic program for one instance.
pub fn assemble_conic(instance: &OpfInstance) -> ConicProgram {
    let n_bus = instance.n_bus;
    let n_line = instance.lines.len();
    let layout = VarLayout::new(
        n_bus,
        n_line,
        instance.flex.len(),
        instance.wind.len(),
        instance.q_caps.len(),
    );
    let mut builder = Builder::new();

    // -- zero cone ---------------------------------------------------------

    // Slack voltage reference.
    builder.push_eq(
        &[(layout.v_sq + instance.slack_idx, 1.0)],
        instance.params.v_slack_sq,
    );

    // Voltage drop per line:
    // v_to - v_from + 2 r P + 2 x Q - |z|^2 l = 0
    for (li, line) in instance.lines.iter().enumerate() {
        let z2 = line.r_pu * line.r_pu + line.x_pu * line.x_pu;
        builder.push_eq(
            &[
                (layout.v_sq + line.to_idx, 1.0),
                (layout.v_sq + line.from_idx, -1.0),
                (layout.p_flow + li, 2.0 * line.r_pu),
                (layout.q_flow + li, 2.0 * line.x_pu),
                (layout.l_sq + li, -z2),
            ],
            0.0,
        );
    }

    // Active power balance per bus:
    // sum_in (P - r l) - sum_out P - sum curtail + slack_p - sum flex
    //   = demand - firm - sum avail
    for bus in 0..n_bus {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (li, line) in instance.lines.iter().enumerate() {
            if line.to_idx == bus {
                coeffs.push((layout.p_flow + li, 1.0));
                coeffs.push((layout.l_sq + li, -line.r_pu));
            }
            if line.from_idx == bus {
                coeffs.push((layout.p_flow + li, -1.0));
            }
        }
        let mut rhs = instance.demand_pu[bus] - instance.firm_pu[bus];
        for (gi, gen) in instance.wind.iter().enumerate() {
            if gen.bus_idx == bus {
                coeffs.push((layout.curtail + gi, -1.0));
                rhs -= gen.avail_pu;
            }
        }
        for (fi, entry) in instance.flex.iter().enumerate() {
            if entry.bus_idx == bus {
                coeffs.push((layout.flex + fi, -1.0));
            }
        }
        if bus == instance.slack_idx {
            coeffs.push((layout.slack_p, 1.0));
        }
        builder.push_eq(&coeffs, rhs);
    }

    // Reactive power balance per bus: sum_in (Q - x l) - sum_out Q + q_gen
    // (+ slack_q at the slack) = 0. EV flexibility runs at unity power
    // factor and demand carries no reactive component.
    for bus in 0..n_bus {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (li, line) in instance.lines.iter().enumerate() {
            if line.to_idx == bus {
                coeffs.push((layout.q_flow + li, 1.0));
                coeffs.push((layout.l_sq + li, -line.x_pu));
            }
            if line.from_idx == bus {
                coeffs.push((layout.q_flow + li, -1.0));
            }
        }
        for (qi, (gen_bus, _)) in instance.q_caps.iter().enumerate() {
            if *gen_bus == bus {
                coeffs.push((layout.q_gen + qi, 1.0));
            }
        }
        if bus == instance.slack_idx {
            coeffs.push((layout.slack_q, 1.0));
        }
        builder.push_eq(&coeffs, 0.0);
    }

    // -- nonnegative cone --------------------------------------------------

    for bus in 0..n_bus {
        if bus == instance.slack_idx {
            continue; // pinned by the reference equality
        }
        builder.push_leq(&[(layout.v_sq + bus, 1.0)], instance.v_max_sq[bus]);
        builder.push_leq(&[(layout.v_sq + bus, -1.0)], -instance.v_min_sq[bus]);
    }
    for (fi, entry) in instance.flex.iter().enumerate() {
        builder.push_leq(&[(layout.flex + fi, 1.0)], entry.ub_pu);
        builder.push_leq(&[(layout.flex + fi, -1.0)], 0.0);
    }
    for (gi, gen) in instance.wind.iter().enumerate() {
        builder.push_leq(&[(layout.curtail + gi, 1.0)], gen.avail_pu);
        builder.push_leq(&[(layout.curtail + gi, -1.0)], 0.0);
    }
    for (qi, (_, (q_lo, q_hi))) in instance.q_caps.iter().enumerate() {
        builder.push_leq(&[(layout.q_gen + qi, 1.0)], *q_hi);
        builder.push_leq(&[(layout.q_gen + qi, -1.0)], -*q_lo);
    }
    if instance.params.slack_import_max_pu.is_finite() {
        builder.push_leq(&[(layout.slack_p, 1.0)], instance.params.slack_import_max_pu);
    }
    if instance.params.slack_export_max_pu.is_finite() {
        builder.push_leq(&[(layout.slack_p, -1.0)], instance.params.slack_export_max_pu);
    }

    // -- second-order cones --------------------------------------------------

    let mut thermal_cones = 0;
    for (li, line) in instance.lines.iter().enumerate() {
        if line.s_max_pu.is_finite() {
            // (s_max, P, Q) in SOC(3)
            builder.push_soc(&[
                (vec![], line.s_max_pu),
                (vec![(layout.p_flow + li, -1.0)], 0.0),
                (vec![(layout.q_flow + li, -1.0)], 0.0),
            ]);
            thermal_cones += 1;
        }
    }
    for (li, line) in instance.lines.iter().enumerate() {
        // v_from * l >= P^2 + Q^2 as (v + l, 2P, 2Q, v - l) in SOC(4)
        let v = layout.v_sq + line.from_idx;
        let l = layout.l_sq + li;
        builder.push_soc(&[
            (vec![(v, -1.0), (l, -1.0)], 0.0),
            (vec![(layout.p_flow + li, -2.0)], 0.0),
            (vec![(layout.q_flow + li, -2.0)], 0.0),
            (vec![(v, -1.0), (l, 1.0)], 0.0),
        ]);
    }

    // -- objective -----------------------------------------------------------

    let mut obj = vec![0.0; layout.n_var];
    for (fi, entry) in instance.flex.iter().enumerate() {
        obj[layout.flex + fi] = instance.pi_flex[entry.cluster];
    }
    for (gi, gen) in instance.wind.iter().enumerate() {
        // A generator with nothing available has its curtailment pinned to
        // zero by bounds; pricing it would only stretch the objective's
        // dynamic range and drown the loss term in the normalisation.
        if gen.avail_pu > 0.0 {
            obj[layout.curtail + gi] = gen.pi_curtail;
        }
    }
    for (li, line) in instance.lines.iter().enumerate() {
        obj[layout.l_sq + li] = instance.params.loss_weight * line.z_abs_pu();
    }
    let obj_scale = obj
        .iter()
        .fold(0.0f64, |acc, c| acc.max(c.abs()))
        .max(f64::MIN_POSITIVE);

    ConicProgram {
        layout,
        obj,
        obj_scale,
        a_rows: builder.a_rows,
        b: builder.b,
        cones: builder.cones,
        counts: ConstraintCounts {
            ohm_equalities: n_line,
            p_balance_equalities: n_bus,
            q_balance_equalities: n_bus,
            relaxation_cones: n_line,
            thermal_cones,
        },
    }
}
