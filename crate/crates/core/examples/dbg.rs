use aclab::profiles::*;
use aclab::spectral::*;

fn lam0(a: f64, zeta: f64, dx: f64) -> f64 {
    let n = ((2.0 * a) / dx).ceil() as usize + 1;
    let d = Domain::new(a, a, n).unwrap();
    let op = assemble_operator(zeta, &d).unwrap();
    eigenpairs(&op, 1).unwrap()[0].eigenvalue
}

fn main() {
    let target = 48.0 * (-12.0_f64).exp();
    for &dx in &[4e-3, 2e-3, 1e-3, 5e-4] {
        let l = lam0(3.0, 0.0, dx);
        println!("dx={dx:.1e}: lambda0 = {l:.8e}  rel-to-asym = {:+.4e}", (l - target) / target);
    }
    let l1 = lam0(3.0, 0.0, 1e-3);
    let l2 = lam0(3.0, 0.0, 5e-4);
    let rich = (4.0 * l2 - l1) / 3.0;
    println!("richardson  = {rich:.8e}  rel-to-asym = {:+.4e}", (rich - target) / target);
    // FD bias coefficient: (l(dx) - rich)/dx^2
    println!("bias coeff at 1e-3: {:.4}", (l1 - rich) / 1e-6);
    println!("bias coeff at 5e-4: {:.4}", (l2 - rich) / 2.5e-7);

    // a=4,5 checks with scaled dx + richardson
    for &a in &[4.0_f64, 5.0] {
        let t = 48.0 * (-4.0 * a).exp();
        let dx = (1.0e-3 * (-2.0 * (a - 3.0)).exp()).min(1.0e-3);
        let la = lam0(a, 0.0, dx);
        let lb = lam0(a, 0.0, dx / 2.0);
        let r = (4.0 * lb - la) / 3.0;
        println!("a={a}: dx={dx:.2e} lam={la:.6e} rich={r:.6e} rel near {:+.3e} / rich {:+.3e}", (la - t)/t, (r - t)/t);
    }
}
