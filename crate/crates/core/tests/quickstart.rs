// Mirrors the example in the crate docs.
use optomech::{entanglement, lyapunov, model::EffectiveParams, stability};

#[test]
fn crate_doc_example() {
    let p = EffectiveParams { chi1: 0.4, chi2: 0.01, eta: 0.01, ..EffectiveParams::figure4_base() };
    assert!(stability::check_stability(&p).unwrap().eigen_stable);
    let v = lyapunov::steady_state(&p).unwrap();
    let [en1, _, _] = entanglement::all_negativities(&v).unwrap();
    assert!(en1.e_n > 0.0);
}
