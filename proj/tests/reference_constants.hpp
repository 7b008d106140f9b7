#pragma once
// Frozen high-precision reference values; regenerated by
// tools/gen_reference_constants.py. Do not edit by hand.

namespace fakedist::ref {

// h(1) for constant unit curvature profile
inline constexpr double SINH_1 = 1.1752011936438015;

// h'(1) for constant unit curvature profile
inline constexpr double COSH_1 = 1.5430806348152438;

// h(1) for the quadratic-decay profile 1/(1+t)^2
inline constexpr double VARPROF_H_AT_1 = 1.0813652839169608;

// h'(1) for the quadratic-decay profile
inline constexpr double VARPROF_HP_AT_1 = 1.2006220039690585;

// power-law exponent for H = 1/t^2 tails
inline constexpr double GOLDEN_RATIO = 1.6180339887498948;

// unit circle length
inline constexpr double OMEGA_1 = 6.2831853071795865;

// unit 2-sphere area
inline constexpr double OMEGA_2 = 12.566370614359173;

// unit 3-sphere volume
inline constexpr double OMEGA_3 = 19.739208802178717;

// v_h(1), m=3, constant unit curvature
inline constexpr double SPHERE_VOL_HYP3_AT_1 = 17.355387381771437;

// V_h(1), m=3, constant unit curvature
inline constexpr double BALL_VOL_HYP3_AT_1 = 5.110932705708289;

// flat kernel, m=3 p=2 r=1
inline constexpr double MU_3_2_1 = 0.079577471545947668;

// flat kernel, m=2 p=1.5 r=2
inline constexpr double MU_2_15_2 = 0.012665147955292221;

// integral of (4 pi sinh^2)^-1 from 1 to infinity
inline constexpr double KERNEL_HYP3_P2_AT_1 = 0.024910556524700641;

// same antiderivative at t=2
inline constexpr double KERNEL_HYP3_P2_AT_2 = 0.0029694111269414423;

// log-kernel derivative magnitude, m=3 p=2 kappa=1, t=2
inline constexpr double CHI_HYP3_P2_AT_2 = 2.0373147207275481;

// decay constant at p=2, nu=3, S=1
inline constexpr double SQRT_288 = 16.970562748477141;

// decay constant at p=1.5, nu=3, S=1
inline constexpr double DECAY_C_15_3_S1 = 82.158383625774917;

// sup-branch constant, q in (0,p)
inline constexpr double HALF_HARNACK_SMALLQ_2_3 = 486.0;

// sup-branch constant, q >= p
inline constexpr double HALF_HARNACK_BIGQ_2_3 = 72.0;

// inf-branch constant, q < 0
inline constexpr double HALF_HARNACK_SUPER_2_3 = 32.0;

// constructive exponent q0 at p=2 nu=3 q=1
inline constexpr double MOSER_Q0_2_3_1 = 0.66666666666666667;

// L1 Sobolev constant of the plane
inline constexpr double ISOPER_S_FLAT_2 = 0.28209479177387814;

// L1 Sobolev constant of 3-space
inline constexpr double ISOPER_S_FLAT_3 = 0.20678349696646667;

// point-flow value log v_h(1), flat m=2
inline constexpr double LOG_2PI = 1.8378770664093455;

// area of the constant-curvature annulus t in [0.1, 2]
inline constexpr double AREA_HYP_ANNULUS_01_2 = 17.323945266568554;

}  // namespace fakedist::ref
