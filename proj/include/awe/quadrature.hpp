#pragma once

#include <array>
#include <cstddef>

namespace awe {

/// Fixed-order Gauss-Legendre rules on [-1, 1].
template <std::size_t N>
struct GaussLegendre;

template <>
struct GaussLegendre<8> {
  static constexpr std::array<double, 8> nodes = {
      -0.96028985649753618, -0.79666647741362673, -0.52553240991632899, -0.18343464249564978,
      0.18343464249564978,  0.52553240991632899,  0.79666647741362673,  0.96028985649753618};
  static constexpr std::array<double, 8> weights = {
      0.10122853629037669, 0.22238103445337434, 0.31370664587788705, 0.36268378337836177,
      0.36268378337836177, 0.31370664587788705, 0.22238103445337434, 0.10122853629037669};
};

template <>
struct GaussLegendre<16> {
  static constexpr std::array<double, 16> nodes = {
      -0.98940093499164994,  -0.9445750230732326,  -0.86563120238783176, -0.755404408355003,
      -0.61787624440264377,  -0.45801677765722737, -0.28160355077925892, -0.095012509837637454,
      0.095012509837637454,  0.28160355077925892,  0.45801677765722737,  0.61787624440264377,
      0.755404408355003,     0.86563120238783176,  0.9445750230732326,   0.98940093499164994};
  static constexpr std::array<double, 16> weights = {
      0.027152459411754037, 0.062253523938647706, 0.095158511682492591, 0.12462897125553403,
      0.14959598881657676,  0.16915651939500262,  0.18260341504492361,  0.18945061045506859,
      0.18945061045506859,  0.18260341504492361,  0.16915651939500262,  0.14959598881657676,
      0.12462897125553403,  0.095158511682492591, 0.062253523938647706, 0.027152459411754037};
};

/// Integrates f over [0, 1] with an N-point Gauss-Legendre rule.
/// F maps double -> T where T supports operator+ and scalar operator*.
template <std::size_t N, typename F>
auto integrate01(F&& f) {
  using Rule = GaussLegendre<N>;
  // map node from [-1,1] to [0,1]: t = (x+1)/2, weight scales by 1/2
  auto acc = 0.5 * Rule::weights[0] * f(0.5 * (Rule::nodes[0] + 1.0));
  for (std::size_t i = 1; i < N; ++i) {
    acc = acc + 0.5 * Rule::weights[i] * f(0.5 * (Rule::nodes[i] + 1.0));
  }
  return acc;
}

}  // namespace awe
