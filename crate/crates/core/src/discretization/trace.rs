use super::field::Field;
use super::grid::{FaceNode, SpaceTimeGrid, TimeEnd};
use super::stencil::{gradient, partial};
use crate::geometry::Face;

/// Traces of one scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTraces {
    /// Value on Gamma, `[time][gamma node]`.
    pub gamma_value: Vec<Vec<f64>>,
    /// Outward normal derivative on Gamma, `[time][gamma node]`.
    pub gamma_normal: Vec<Vec<f64>>,
    /// Value and spatial gradient over Omega at `t0 - delta`.
    pub start_value: Vec<f64>,
    pub start_gradient: Vec<Vec<f64>>,
    /// Value and spatial gradient over Omega at `t0 + delta`.
    pub end_value: Vec<f64>,
    pub end_gradient: Vec<Vec<f64>>,
    /// Value and outward normal derivative on `dOmega \ Gamma`.
    pub complement_value: Vec<Vec<f64>>,
    pub complement_normal: Vec<Vec<f64>>,
}

/// Lateral and time-slice traces for one or two fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub gamma_nodes: Vec<FaceNode>,
    pub complement_nodes: Vec<FaceNode>,
    pub components: Vec<FieldTraces>,
}

impl CauchyData {
    /// Largest absolute value over the Gamma value and normal traces.
    pub fn gamma_max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.gamma_value.iter().chain(&c.gamma_normal))
            .flatten()
            .fold(0.0, |m, v: &f64| m.max(v.abs()))
    }

    /// Largest absolute difference of Gamma traces against `other`.
    pub fn gamma_mismatch(&self, other: &CauchyData) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            for (ra, rb) in a
                .gamma_value
                .iter()
                .zip(&b.gamma_value)
                .chain(a.gamma_normal.iter().zip(&b.gamma_normal))
            {
                for (x, y) in ra.iter().zip(rb) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }
}

/// Outward normal derivative of `f` at a face node, time level `k`,
/// via a 3-point one-sided difference.
pub fn normal_derivative(grid: &SpaceTimeGrid, f: &Field, node: &FaceNode, k: usize) -> f64 {
    let axis = node.face.axis();
    let st = grid.first_derivative_at(node.space, axis);
    let d = st.apply(|q| f.at(grid, q, k));
    if node.face.is_upper() {
        d
    } else {
        -d
    }
}

fn field_traces(
    grid: &SpaceTimeGrid,
    f: &Field,
    gamma: &[FaceNode],
    complement: &[FaceNode],
) -> FieldTraces {
    let nt = grid.nt();
    let lateral = |nodes: &[FaceNode]| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let values = (0..nt)
            .map(|k| nodes.iter().map(|n| f.at(grid, n.space, k)).collect())
            .collect();
        let normals = (0..nt)
            .map(|k| {
                nodes
                    .iter()
                    .map(|n| normal_derivative(grid, f, n, k))
                    .collect()
            })
            .collect();
        (values, normals)
    };
    let (gamma_value, gamma_normal) = lateral(gamma);
    let (complement_value, complement_normal) = lateral(complement);
    let grad = gradient(grid, f);
    let slice = |end: TimeEnd| -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = grid.slice_index(end);
        let value = f.level(grid, k).to_vec();
        let g = grad
            .components
            .iter()
            .map(|c| c.level(grid, k).to_vec())
            .collect();
        (value, g)
    };
    let (start_value, start_gradient) = slice(TimeEnd::Start);
    let (end_value, end_gradient) = slice(TimeEnd::End);
    FieldTraces {
        gamma_value,
        gamma_normal,
        start_value,
        start_gradient,
        end_value,
        end_gradient,
        complement_value,
        complement_normal,
    }
}

/// Extract Cauchy data of `f` (and optionally a second field `g`).
pub fn extract_cauchy(grid: &SpaceTimeGrid, f: &Field, g: Option<&Field>) -> CauchyData {
    let gamma_nodes = grid.gamma_nodes();
    let complement_nodes = grid.complement_nodes();
    let mut components = vec![field_traces(grid, f, &gamma_nodes, &complement_nodes)];
    if let Some(g) = g {
        components.push(field_traces(grid, g, &gamma_nodes, &complement_nodes));
    }
    CauchyData {
        gamma_nodes,
        complement_nodes,
        components,
    }
}

/// Tangential derivative along a face, used for `H^1(Gamma x I)` norms.
pub fn tangential_derivative(grid: &SpaceTimeGrid, f: &Field, face: Face) -> Option<Field> {
    if grid.dimension() == 1 {
        None
    } else {
        Some(partial(grid, f, 1 - face.axis()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GridDims;
    use crate::geometry::{DomainSpec, WeightConfig, WeightParams};
    use std::f64::consts::PI;

    fn square(n: usize) -> (SpaceTimeGrid, WeightConfig) {
        let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        (
            SpaceTimeGrid::new(&spec, GridDims::new_2d(n, n, 5), &cfg).unwrap(),
            cfg,
        )
    }

    #[test]
    fn constant_field_traces() {
        let (g, _) = square(6);
        let c = extract_cauchy(&g, &Field::constant(&g, 2.5), None);
        for row in &c.components[0].gamma_value {
            assert!(row.iter().all(|&v| v == 2.5));
        }
        for row in &c.components[0].gamma_normal {
            assert!(row.iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn affine_d_normal_derivative_is_exact() {
        let (g, cfg) = square(7);
        let d = Field::from_fn(&g, |x, _| cfg.d.value(x));
        let c = extract_cauchy(&g, &d, None);
        for (q, node) in c.gamma_nodes.iter().enumerate() {
            let nu = node.face.normal();
            let expected = cfg.d.gradient[0] * nu[0] + cfg.d.gradient[1] * nu[1];
            for k in 0..g.nt() {
                assert!((c.components[0].gamma_normal[k][q] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sine_product_traces_converge_at_second_order() {
        // Oracle: analytic outward normal derivatives of sin(pi x) sin(pi y) e^t.
        let err = |n: usize| {
            let (g, _) = square(n);
            let f = Field::from_fn(&g, |x, t| (PI * x[0]).sin() * (PI * x[1]).sin() * t.exp());
            let c = extract_cauchy(&g, &f, None);
            let mut worst: f64 = 0.0;
            for (q, node) in c.gamma_nodes.iter().enumerate() {
                let x = g.point(node.space);
                let grad = [
                    PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                    PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                ];
                let nu = node.face.normal();
                for k in 0..g.nt() {
                    let exact = (grad[0] * nu[0] + grad[1] * nu[1]) * g.time(k).exp();
                    worst = worst.max((c.components[0].gamma_normal[k][q] - exact).abs());
                }
            }
            worst
        };
        let ratio = err(33) / err(65);
        assert!(ratio > 3.6 && ratio < 4.4, "ratio {ratio}");
    }
}
