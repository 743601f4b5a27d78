#include "decoup/kernels.hpp"

#include "expi_poly.hpp"

#include <cmath>

namespace decoup::kernels {

std::complex<double> oscillatory_sum_scalar(const OscillatorySum& s, std::span<const double> x) {
  double acc_re = 0.0;
  double acc_im = 0.0;
  const int d = s.num_axes;
  for (std::size_t j = 0; j < s.count; ++j) {
    double t = x[0] * s.axes[0][j];
    for (int a = 1; a < d; ++a) t = std::fma(x[static_cast<std::size_t>(a)], s.axes[a][j], t);
    const double r = t - std::nearbyint(t);
    const double co = std::cos(detail::kTwoPi * r);
    const double si = std::sin(detail::kTwoPi * r);
    const double cr = s.c_re[j];
    const double ci = s.c_im ? s.c_im[j] : 0.0;
    acc_re += cr * co - ci * si;
    acc_im += cr * si + ci * co;
  }
  return {acc_re, acc_im};
}

void expi_turns_poly(std::span<const double> t, std::span<double> re, std::span<double> im) {
  for (std::size_t j = 0; j < t.size(); ++j) detail::expi_turns_scalar_poly(t[j], re[j], im[j]);
}

}  // namespace decoup::kernels
