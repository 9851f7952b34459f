#pragma once

// Reference values computed independently (50-digit mpmath and hand
// elimination), frozen here so the library never checks against itself.

namespace oracle {

// Full right-hand side at x = [2.5, 0, 305, 330], u = [2, 0.1].
inline constexpr double kRateAtStart = 6.6202135562828484;
inline constexpr double kRhsAtStart[] = {-6.6202135562828484, 6.6202135562828484, 229.3118326366161,
                                         -5010.1214574898785};

// Published operating point [1.205, 1.295, 302.3, 302.6], u = [2, 0.1].
inline constexpr double kRateAtPublished = 2.5830829172827426;
inline constexpr double kRhsAtPublished[] = {0.0069170827172573853, -0.0069170827172573853, 0.32786588349142933,
                                             -4.6558704453441296};

// z = -(L_f k + L_g k u) / L_b k at the published operating point.
inline constexpr double kZAtPublished = 2.7653930106303825;

// (V T0 + V_h Tj0) / (V + V_h) from (305, 330).
inline constexpr double kFastSteadyState = 306.1768629693158;
inline constexpr double kFastSteadyStateVh02 = 309.16666666666667;

// Fast field b k at (T, T_j) = (305, 330).
inline constexpr double kFastField[] = {25.0, -506.07287449392713};

}  // namespace oracle
