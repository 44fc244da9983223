//! Central finite differences against the analytic backward pass on a tiny
//! two-stage network.

use hybeam::numerics::CMatrix;
use hybeam::pcnet::{
    backward, encode_input, forward_eval, total_loss, NetArchitecture, PcnetModel,
};
use hybeam::rng;

fn main() {
    let mut arch = NetArchitecture::new(4, 4, &[16, 16]).expect("arch");
    for st in arch.stages.iter_mut() {
        st.n_layers = 2;
        st.dropout_p = 0.0;
        st.skips = hybeam::pcnet::default_skips(2);
    }
    let model = PcnetModel::init(arch, 7).expect("init");
    let mut stream = rng::substream(11, 0);
    let h = CMatrix::from_fn(4, 4, |_, _| rng::complex_standard_normal(&mut stream));
    let x = encode_input(&h);

    let trace = forward_eval(&model, &x).expect("forward");
    let (grads, loss) = backward(&model, &trace, &h).expect("backward");
    let analytic: Vec<f64> = grads
        .tensor_slices()
        .iter()
        .flat_map(|t| t.iter().copied())
        .collect();

    let step = 1e-5;
    let mut worst = 0.0f64;
    let mut worst_at = 0usize;
    let mut flat = 0usize;
    let n_tensors = model.tensor_slices().len();
    for t in 0..n_tensors {
        let len = model.tensor_slices()[t].len();
        for i in 0..len {
            let mut probe = model.clone();
            probe.tensor_slices_mut()[t][i] += step;
            let plus =
                total_loss(&probe, &forward_eval(&probe, &x).unwrap(), &h).unwrap();
            let mut probe = model.clone();
            probe.tensor_slices_mut()[t][i] -= step;
            let minus =
                total_loss(&probe, &forward_eval(&probe, &x).unwrap(), &h).unwrap();
            let numeric = (plus - minus) / (2.0 * step);
            let a = analytic[flat];
            let scale = a.abs().max(numeric.abs());
            let err = if scale > 1e-6 {
                (a - numeric).abs() / scale
            } else {
                (a - numeric).abs()
            };
            if err > worst {
                worst = err;
                worst_at = flat;
            }
            flat += 1;
        }
    }

    println!("loss at the probe point: {loss:.6}");
    println!("parameters checked:      {flat}");
    println!("max relative error:      {worst:.3e} (at flat index {worst_at})");
    assert!(worst <= 1e-4, "gradient check failed");
    println!("within the 1e-4 gate");
}
