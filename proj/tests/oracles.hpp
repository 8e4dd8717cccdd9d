#pragma once

// Reference values frozen from tests/oracles/derive.py (mpmath, 40 digits),
// which evaluates each quantity by direct series or quadrature.
namespace oracle {

inline constexpr double kQQInfHalf = 0.288788095086602421278899721929;          // (q;q)_inf, q = 1/2
inline constexpr double kPhi1Half = 2.74403388875948836048021489149;            // phi_1(1/2), q = 1/2
inline constexpr double kPhi0MinusOne = -1.26449978034844420919131974726;       // phi_0(-1), q = 1/2
inline constexpr double kPhi3MinusPhi2Half = 21.0289224862838830756356125461;   // q = 1/2
inline constexpr double kPhi1InverseMillion = 0.999000498507890847393601830301; // q = 1/2

// Step field xi(0) = 0.7, xi = 1 on (0, 0.2), 0.4 beyond; q = 1/2.
inline constexpr double kStepPhi2 = 0.856803722662075920046553064789;   // Phi_2(0.2 | 0.3)
inline constexpr double kStepSigma = 0.0452735748195406468689749454483;  // omega_circ(3, sigma) = 0.7
inline constexpr double kStepGRe = 0.244674651230735655149973220774;     // g(0.2 + 0.1i), lambda 5, t 15, x 0.3
inline constexpr double kStepGIm = -0.0737422350882322833993177863945;

// Homogeneous xi = 1, q = 1/2: root of 4w = phi_2(w).
inline constexpr double kOmegaTau4X1 = 0.224212423646300371420967292917;

// GUE Tracy-Widom: Nystrom determinant in mpmath, and the known mean.
inline constexpr double kF2MinusTwo = 0.413224142505114424537809111666;
inline constexpr double kF2Mean = -1.7710868074;

}  // namespace oracle
