use phasespace::grid::PhaseGrid;
use phasespace::states::{build_state, StateSpec};
use phasespace::grid::{PhaseField, FieldKind};
use phasespace::transforms::poisson_bracket;
use phasespace::hamiltonians::windowed_harmonic;

fn main() {
    for n in [96usize, 128, 192, 256] {
        let grid = PhaseGrid::square(n, 14.0).unwrap();
        let ring = build_state(&StateSpec::Ring { action: 2.0, width: 0.8 }, grid).unwrap();
        let h = windowed_harmonic(grid, 1.0, 4.2, 6.6).unwrap();
        let pb = poisson_bracket(&ring, &h).unwrap();
        println!("N={n}: ring drift {:.3e}", pb.max_abs());
    }
    // pure radial gaussian instead of a shell
    let grid = PhaseGrid::square(128, 14.0).unwrap();
    let g = PhaseField::from_fn(grid, FieldKind::Generic, |q, p| (-(q*q+p*p)/0.32).exp()).unwrap();
    let h = windowed_harmonic(grid, 1.0, 4.2, 6.6).unwrap();
    println!("radial gaussian drift {:.3e}", poisson_bracket(&g, &h).unwrap().max_abs());
    // gaussian against raw quadratic (no window) on same grid
    let h2 = PhaseField::from_fn(grid, FieldKind::Generic, |q, p| q*q+p*p).unwrap();
    println!("radial gaussian vs raw rho^2 drift {:.3e}", poisson_bracket(&g, &h2).unwrap().max_abs());
}
