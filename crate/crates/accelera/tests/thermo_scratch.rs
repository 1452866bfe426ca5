// temp scratch test
#[test]
fn thermostat_tube_print() {
    use accelera::acceleration::*;
    use nalgebra::{DMatrix, DVector};
    use accelera::geometry::Polytope;
    let model = LinearLoop::new(
        "thermostat",
        DMatrix::from_row_slice(2, 2, &[0.97, 0.1, -0.05, 1.0]),
        DMatrix::from_row_slice(2, 2, &[0.02, 0.0, 0.0, 0.05]),
        Some((DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
              DVector::from_row_slice(&[400.0, 300.0]))),
        Polytope::from_box(&DVector::from_row_slice(&[5.0, 0.0]), &DVector::from_row_slice(&[40.0, 1.0])).unwrap(),
        Polytope::from_box(&DVector::from_row_slice(&[5.0, 0.0]), &DVector::from_row_slice(&[40.0, 300.0])).unwrap(),
    ).unwrap();
    let t = accelerate(&model, AccelOptions::default()).unwrap();
    println!("mode {:?} n_lower {:?} n_upper {:?}", t.mode, t.n_lower, t.n_upper);
    for (v, b) in t.template.iter().zip(&t.bounds) {
        println!("dir [{:+.3} {:+.3}]  hi = {:.4}", v[0], v[1], b.hi);
    }
}
