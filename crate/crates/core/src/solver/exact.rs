use std::f64::consts::PI;

/// Angular frequency factor `√3 π` of the standing wave.
pub const EXACT_SPEED: f64 = 1.7320508075688772 * PI;

/// Standing wave on `[-1/2, 1/2]³` with `κ = ρ = 1`:
/// `p = cos πx cos πy cos πz cos(√3πτ)` and the velocity that satisfies
/// `∂u/∂τ = -∇p` with `u(·, 0) = 0`. Returns `(p, u1, u2, u3)`.
pub fn exact_solution(x: [f64; 3], tau: f64) -> [f64; 4] {
    let c = x.map(|v| (PI * v).cos());
    let s = x.map(|v| (PI * v).sin());
    let w = EXACT_SPEED;
    let p = c[0] * c[1] * c[2] * (w * tau).cos();
    // -∂_i S · sin(wτ)/w with S = Π cos(πx_i)
    let amp = (w * tau).sin() / w * PI;
    [
        p,
        amp * s[0] * c[1] * c[2],
        amp * c[0] * s[1] * c[2],
        amp * c[0] * c[1] * s[2],
    ]
}
