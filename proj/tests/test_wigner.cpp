#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/dynamics.hpp"
#include "cqed/error.hpp"
#include "cqed/protocols.hpp"
#include "cqed/wigner.hpp"

using namespace cqed;
using cplx = std::complex<double>;

namespace {

Eigen::MatrixXcd fock(int dim, int n) {
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
  r(n, n) = 1.0;
  return r;
}

}  // namespace

TEST_CASE("parity at the origin") {
  CHECK(wigner::value(fock(10, 0), 0.0) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(wigner::value(fock(10, 1), 0.0) == doctest::Approx(-2.0 / std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("displacement elements against the matrix exponential") {
  const int big = 60;
  const cplx beta(0.7, -0.4);
  const Eigen::MatrixXcd a = dyn::destroy(big);
  const Eigen::MatrixXcd gen = beta * a.adjoint() - std::conj(beta) * a;
  const Eigen::MatrixXcd dmat = gen.exp();
  for (int m = 0; m < 8; ++m)
    for (int n = 0; n < 8; ++n) CHECK(std::abs(wigner::displacement_element(m, n, beta) - dmat(m, n)) < 1e-12);
}

TEST_CASE("coherent state is a Gaussian at beta") {
  const int dim = 40;
  const cplx beta(1.0, 0.5);
  const Eigen::VectorXcd v = protocols::displacement_operator(dim, beta).col(0);
  const Eigen::MatrixXcd rho = v * v.adjoint();
  const auto g = wigner::evaluate_square(rho, 3.0, 25);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.re.size(); ++i)
    for (std::size_t j = 0; j < g.im.size(); ++j) {
      const double expect = 2.0 / std::numbers::pi * std::exp(-2.0 * std::norm(cplx(g.re[i], g.im[j]) - beta));
      worst = std::max(worst, std::abs(g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expect));
    }
  CHECK(worst < 1e-3);
}

TEST_CASE("grid is normalised") {
  const auto g = wigner::evaluate_square(fock(60, 2), 3.5, 71);
  const double h = g.re[1] - g.re[0];
  CHECK(g.w.sum() * h * h == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("truncation guard") {
  CHECK_THROWS_AS(wigner::value(fock(6, 0), cplx(2.0, 0.0)), ValidationError);
  CHECK_NOTHROW(wigner::value(fock(12, 0), cplx(2.0, 0.0)));
}

TEST_CASE("csv and svg output") {
  const auto g = wigner::evaluate_square(fock(10, 0), 1.0, 3);
  std::ostringstream csv, svg;
  g.write_csv(csv);
  g.write_svg(svg);
  const std::string text = csv.str();
  CHECK(text.rfind("re_alpha,im_alpha,w\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  CHECK(svg.str().find("<svg") != std::string::npos);
}
