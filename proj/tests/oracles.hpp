#pragma once

// Reference values from tests/oracle/oracle.py (exact fractions and brute-force
// enumeration of the algorithms), frozen here.

#include <array>

namespace oracle {

namespace example1_m5 {
inline constexpr std::array<double, 5> weights = {1.8, 1.4, 1.0, 0.6, 0.2};
inline constexpr double h2_at_w_star = 0.7456349206349207;
inline constexpr double rate_k2 = 0.25436507936507935;
inline constexpr double rate_k3 = 0.1713068396433587;
inline constexpr double recursive_right_k3 = 0.11305114638447972;
inline constexpr double imh2_rate = 0.19753086419753085;
/// 1 - sum_y min{H(w(x)), H(w(y))} pi(y) at k=2; also the nonunit spectrum.
inline constexpr std::array<double, 5> rejection_k2 = {641.0 / 2520, 139.0 / 840, 19.0 / 210, 1.0 / 30, 0.0};
/// Diagonal of the k=2 kernel (includes accepted self-proposals).
inline constexpr std::array<double, 5> holding_k2 = {4117.0 / 7875, 723.0 / 1750, 649.0 / 2100, 311.0 / 1500,
                                                     137.0 / 1500};
inline constexpr std::array<double, 5> kernel_k2_row0 = {0.5227936507936508, 0.20877777777777778, 0.14912698412698414,
                                                         0.08947619047619047, 0.029825396825396824};
inline constexpr std::array<double, 5> kernel_k2_row2 = {0.2684285714285714, 0.24766666666666667, 0.30904761904761907,
                                                         0.13114285714285714, 0.04371428571428571};
} // namespace example1_m5

namespace binomial {
inline constexpr double m20_k3_left = 0.4222549510352615;
inline constexpr double m20_k3_right = 0.39956860502847735;
inline constexpr double m100_w_star = 8.038512976105055;
inline constexpr double m100_normal_approx = 7.978845608028654;
} // namespace binomial

namespace nonidentical {
// target (0.5, 0.3, 0.2), T1 = (0.4, 0.3, 0.3), T2 uniform, k = 2
inline constexpr double rate = 72211.0 / 517075.0;
inline constexpr double bound = 1.0 / 15.0;
inline constexpr double w1_star = 1.25;
inline constexpr double w2_star = 1.5;
} // namespace nonidentical

namespace example4 {
// N = 5, p = 0.4, k = 2
inline constexpr double a1 = 1.0 / 14, a2 = 5.0 / 7, a3 = 3.0 / 7, a4 = 4.0 / 21;
inline constexpr std::array<double, 5> eigenvalues = {1.0, 2.0 / 7, -4.0 / 21, -4.0 / 21, -4.0 / 21};
} // namespace example4

namespace four_state {
// pi = (0.4, 0.3, 0.2, 0.1)
using Row = std::array<double, 4>;
inline constexpr std::array<Row, 4> srswor_k2 = {{{0.30158730158730157, 0.36666666666666664, 0.22857142857142856,
                                                   0.10317460317460317},
                                                  {0.4888888888888889, 0.1349206349206349, 0.2619047619047619,
                                                   0.11428571428571428},
                                                  {0.45714285714285713, 0.39285714285714285, 0.027777777777777776,
                                                   0.12222222222222222},
                                                  {0.4126984126984127, 0.34285714285714286, 0.24444444444444444, 0.0}}};
inline constexpr std::array<Row, 4> srswor2_k2 = {{{0.49047619047619045, 0.25476190476190474, 0.16984126984126985,
                                                    0.08492063492063492},
                                                   {0.3396825396825397, 0.3638888888888889, 0.1976190476190476,
                                                    0.0988095238095238},
                                                   {0.3396825396825397, 0.29642857142857143, 0.24722222222222223,
                                                    0.11666666666666667},
                                                   {0.3396825396825397, 0.29642857142857143, 0.23333333333333334,
                                                    0.13055555555555556}}};
// T uniform, blocks {0,1} and {2,3}
inline constexpr std::array<Row, 4> stratified = {{{0.5714285714285714, 0.21428571428571427, 0.14285714285714285,
                                                    0.07142857142857142},
                                                   {0.2857142857142857, 0.5, 0.14285714285714285, 0.07142857142857142},
                                                   {0.2857142857142857, 0.21428571428571427, 0.3333333333333333,
                                                    0.16666666666666666},
                                                   {0.2857142857142857, 0.21428571428571427, 0.3333333333333333,
                                                    0.16666666666666666}}};
inline constexpr double stratified_rate = 2.0 / 7.0;
} // namespace four_state

namespace example3 {
inline constexpr double c2_argmax = 2.9154759474226504;
inline constexpr double c2_w_star = 25.29575546481075;
inline constexpr double c20_w_star = 73385157880.68903;
} // namespace example3

namespace three_state {
// pi = (1/2, 1/3, 1/6), T uniform, k = 2: A(0, 1) under each sampler
inline constexpr double mtm_is_a01 = 0.2740740740740741;
inline constexpr double mtm_general_a01 = 0.26666666666666666;
} // namespace three_state

} // namespace oracle
