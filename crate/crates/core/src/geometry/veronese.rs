use serde::{Deserialize, Serialize};

use super::{GeometryError, PlaneChart, ResidueData, VarietySpec};
use crate::numeric::{MultiPoly, C64};

/// A variety re-embedded by all monomials of degree `1..=degree`.
///
/// The lifted variables are the original ones followed by one new fiber
/// variable per monomial of degree at least 2; the lifted variety adds the
/// graph relations `v_m − m` to the original definitions. Hyperplane
/// sections of the lift correspond to degree-`degree` hypersurface sections
/// of the original variety.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VeroneseLift {
    pub variety: VarietySpec,
    /// Image of each lifted variable as a monomial in the original variables,
    /// graded: `(x, y, x², xy, y²)` for a plane curve and degree 2.
    pub coordinate_map: Vec<MultiPoly>,
    pub degree: u32,
    /// Number of graph relations appended to the definitions.
    pub graph_relations: usize,
    original_n: usize,
}

/// Exponent vectors of total degree `k` in `nvars` variables, in
/// lexicographically decreasing order (`x², xy, y²`).
fn monomials_of_degree(nvars: usize, k: u32) -> Vec<Vec<u32>> {
    if nvars == 1 {
        return vec![vec![k]];
    }
    (0..=k)
        .rev()
        .flat_map(|first| {
            monomials_of_degree(nvars - 1, k - first)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

fn monomial_name(vars: &[String], e: &[u32]) -> String {
    let body: String = vars
        .iter()
        .zip(e)
        .filter(|(_, &k)| k > 0)
        .map(|(v, &k)| if k == 1 { v.clone() } else { format!("{v}{k}") })
        .collect();
    format!("v_{body}")
}

pub fn veronese_lift(v: &VarietySpec, degree: u32) -> Result<VeroneseLift, GeometryError> {
    let vars = v.vars();
    if vars.len() > 3 {
        return Err(GeometryError::UnsupportedDimension(vars.len()));
    }
    if degree < 2 {
        return Err(GeometryError::InvalidVariety(
            "Veronese degree must be at least 2".into(),
        ));
    }
    let monomials: Vec<Vec<u32>> = (1..=degree).flat_map(|k| monomials_of_degree(vars.len(), k)).collect();
    let new: Vec<&Vec<u32>> = monomials.iter().filter(|e| e.iter().sum::<u32>() >= 2).collect();
    let new_names: Vec<String> = new.iter().map(|e| monomial_name(&vars, e)).collect();
    if new_names.iter().any(|n| vars.contains(n)) {
        return Err(GeometryError::InvalidVariety(
            "variable names clash with lifted coordinates".into(),
        ));
    }

    let y_lift: Vec<String> = v.y_vars().iter().cloned().chain(new_names.iter().cloned()).collect();
    let all: Vec<String> = v.x_vars().iter().cloned().chain(y_lift.iter().cloned()).collect();
    let mut defs: Vec<MultiPoly> = v
        .defs()
        .iter()
        .map(|f| f.with_vars(&all).expect("original variables are kept"))
        .collect();
    for (e, name) in new.iter().zip(&new_names) {
        let mut ext = e.to_vec();
        ext.resize(all.len(), 0);
        let mono = MultiPoly::from_terms(&all, [(ext, C64::new(1.0, 0.0))]);
        defs.push(&MultiPoly::var(&all, name) - &mono);
    }
    let variety = VarietySpec::new(v.x_vars(), &y_lift, defs)?;

    // lifted variable order is (x, y, new), matching the graded list once the
    // degree-1 monomials are placed in variable order
    let coordinate_map: Vec<MultiPoly> = (0..vars.len())
        .map(|k| MultiPoly::var(&vars, &vars[k]))
        .chain(
            new.iter()
                .map(|e| MultiPoly::from_terms(&vars, [(e.to_vec(), C64::new(1.0, 0.0))])),
        )
        .collect();
    Ok(VeroneseLift {
        variety,
        coordinate_map,
        degree,
        graph_relations: new.len(),
        original_n: v.n(),
    })
}

/// Pullback of the lifted plane equations of `chart` to the original
/// variables: the family `x_i − Σ_j a_i^j m_j(x, y) − b_i` of degree
/// `lift.degree` hypersurfaces.
pub fn hypersurface_family(lift: &VeroneseLift, chart: &PlaneChart) -> Result<Vec<MultiPoly>, GeometryError> {
    let n = lift.original_n;
    if chart.n() != n || chart.p() != lift.coordinate_map.len() - n {
        return Err(GeometryError::DimensionMismatch(format!(
            "chart is ({}, {}), lifted family needs ({}, {})",
            chart.n(),
            chart.p(),
            n,
            lift.coordinate_map.len() - n
        )));
    }
    Ok((0..n)
        .map(|i| {
            let mut eq = lift.coordinate_map[i].clone();
            for j in 0..chart.p() {
                eq = &eq - &lift.coordinate_map[n + j].scale(chart.a(i, j));
            }
            let vars = eq.vars().to_vec();
            &eq - &MultiPoly::constant(&vars, chart.b(i))
        })
        .collect())
}

/// Residue data on the lifted variety representing the same current: the
/// Jacobian of the lifted system differs from the original one by
/// `(−1)^{n·m}` (`m` graph relations), which the numerator absorbs.
pub fn lift_residue_data(data: &ResidueData, lift: &VeroneseLift) -> Result<ResidueData, GeometryError> {
    let sign = if (lift.original_n * lift.graph_relations) % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    let all = lift.variety.vars();
    let numerator = data
        .numerator()
        .with_vars(&all)
        .expect("original variables are kept")
        .scale(C64::new(sign, 0.0));
    let lifted = ResidueData::new(lift.variety.clone(), numerator, data.label())?;
    match data.polar() {
        Some(h) => lifted.with_polar(h.with_vars(&all).expect("original variables are kept")),
        None => Ok(lifted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conic_curve() -> VarietySpec {
        let f = MultiPoly::parse(&["x", "y"], "y^2 - x^3 - 1").unwrap();
        VarietySpec::new(&["x"], &["y"], vec![f]).unwrap()
    }

    #[test]
    fn plane_curve_degree_two() {
        let lift = veronese_lift(&conic_curve(), 2).unwrap();
        let shown: Vec<String> = lift.coordinate_map.iter().map(|m| m.to_string()).collect();
        let xy = ["x", "y"];
        let expect: Vec<String> = ["x", "y", "x^2", "x*y", "y^2"]
            .iter()
            .map(|s| MultiPoly::parse(&xy, s).unwrap().to_string())
            .collect();
        assert_eq!(shown, expect);
        assert_eq!(lift.graph_relations, 3);
        assert_eq!(lift.variety.p(), 4);
        assert_eq!(lift.variety.defs().len(), 4);
    }

    #[test]
    fn hyperplane_pulls_back_to_conic() {
        let lift = veronese_lift(&conic_curve(), 2).unwrap();
        let c = |re: f64| C64::new(re, 0.0);
        let chart = PlaneChart::new(vec![vec![c(1.0), c(2.0), c(3.0), c(4.0)]], vec![c(5.0)]).unwrap();
        let conic = hypersurface_family(&lift, &chart).unwrap();
        let expect = MultiPoly::parse(&["x", "y"], "x - y - 2*x^2 - 3*x*y - 4*y^2 - 5").unwrap();
        assert_eq!(conic[0], expect);
    }

    #[test]
    fn rejects_large_ambient_dimension() {
        let vars = ["x1", "x2", "y1", "y2"];
        let f1 = MultiPoly::parse(&vars, "y1 - x1").unwrap();
        let f2 = MultiPoly::parse(&vars, "y2 - x2").unwrap();
        let v = VarietySpec::new(&["x1", "x2"], &["y1", "y2"], vec![f1, f2]).unwrap();
        assert_eq!(veronese_lift(&v, 2), Err(GeometryError::UnsupportedDimension(4)));
    }
}
