#include "cqed/wigner.hpp"

#include <algorithm>
#include <boost/math/special_functions/laguerre.hpp>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cqed/error.hpp"

namespace cqed::wigner {

using cplx = std::complex<double>;

cplx displacement_element(int m, int n, cplx beta) {
  if (m < 0 || n < 0) throw ValidationError("Fock indices must be non-negative");
  const double x = std::norm(beta);
  if (x == 0.0) return m == n ? 1.0 : 0.0;
  // For m < n use <m|D(b)|n> = conj(<n|D(-b)|m>).
  if (m < n) return std::conj(displacement_element(n, m, -beta));
  const int k = m - n;
  const double log_mag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) + k * std::log(std::abs(beta)) - 0.5 * x;
  const double lag = boost::math::laguerre(static_cast<unsigned>(n), static_cast<unsigned>(k), x);
  return std::polar(std::exp(log_mag) * lag, k * std::arg(beta));
}

namespace {

void check_truncation(Eigen::Index dim, double max_abs2) {
  const double need = 2.0 * max_abs2 + 4.0;
  if (static_cast<double>(dim) < need) {
    std::ostringstream msg;
    msg << "Fock truncation " << dim << " is too small for |alpha|^2 up to " << max_abs2 << "; need at least "
        << static_cast<int>(std::ceil(need));
    throw ValidationError(msg.str());
  }
}

// Tr[rho D(2 alpha) P] = sum_{m,n} rho_nm <m|D(2 alpha)|n> (-1)^n
double unchecked_value(const Eigen::MatrixXcd& rho, cplx alpha) {
  const auto d = static_cast<int>(rho.rows());
  const cplx b = 2.0 * alpha;
  cplx acc{};
  for (int n = 0; n < d; ++n) {
    const double parity = n % 2 == 0 ? 1.0 : -1.0;
    for (int m = 0; m < d; ++m) {
      const cplx r = rho(n, m);
      if (r == cplx{}) continue;
      acc += parity * r * displacement_element(m, n, b);
    }
  }
  return 2.0 / std::numbers::pi * acc.real();
}

void check_state(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) throw ValidationError("state must be a square matrix");
}

}  // namespace

double value(const Eigen::MatrixXcd& rho, cplx alpha) {
  check_state(rho);
  check_truncation(rho.rows(), std::norm(alpha));
  return unchecked_value(rho, alpha);
}

Grid evaluate(const Eigen::MatrixXcd& rho, const std::vector<double>& re, const std::vector<double>& im) {
  check_state(rho);
  if (re.empty() || im.empty()) throw ValidationError("Wigner grid is empty");
  double max_abs2 = 0.0;
  for (double x : re)
    for (double y : im) max_abs2 = std::max(max_abs2, x * x + y * y);
  check_truncation(rho.rows(), max_abs2);

  Grid g{re, im, Eigen::MatrixXd(static_cast<Eigen::Index>(re.size()), static_cast<Eigen::Index>(im.size()))};
  const auto nr = static_cast<long>(re.size()), ni = static_cast<long>(im.size());
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (long i = 0; i < nr; ++i)
    for (long j = 0; j < ni; ++j)
      g.w(i, j) = unchecked_value(rho, {re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(j)]});
  return g;
}

Grid evaluate_square(const Eigen::MatrixXcd& rho, double extent, int points) {
  if (!(extent > 0.0) || points < 2) throw ValidationError("grid needs extent > 0 and at least 2 points");
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) axis[static_cast<std::size_t>(i)] = -extent + 2.0 * extent * i / (points - 1);
  return evaluate(rho, axis, axis);
}

void Grid::write_csv(std::ostream& out) const {
  out << "re_alpha,im_alpha,w\n";
  out.precision(10);
  for (std::size_t i = 0; i < re.size(); ++i)
    for (std::size_t j = 0; j < im.size(); ++j)
      out << re[i] << ',' << im[j] << ',' << w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
}

void Grid::write_svg(std::ostream& out, int pixel) const {
  if (pixel < 1) throw ValidationError("pixel size must be positive");
  const double scale = std::max(w.cwiseAbs().maxCoeff(), 1e-12);
  const auto nx = static_cast<int>(re.size()), ny = static_cast<int>(im.size());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << nx * pixel << "\" height=\"" << ny * pixel
      << "\" shape-rendering=\"crispEdges\">\n";
  // Blue for negative, white at zero, red for positive; Im(alpha) points up.
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double v = std::clamp(w(i, j) / scale, -1.0, 1.0);
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
      const int r = v >= 0 ? 255 : fade, b = v >= 0 ? fade : 255;
      out << "<rect x=\"" << i * pixel << "\" y=\"" << (ny - 1 - j) * pixel << "\" width=\"" << pixel
          << "\" height=\"" << pixel << "\" fill=\"rgb(" << r << ',' << fade << ',' << b << ")\"/>\n";
    }
  out << "</svg>\n";
}

}  // namespace cqed::wigner
