#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

namespace cqed::wigner {

/// <m| D(beta) |n> from the associated Laguerre closed form.
std::complex<double> displacement_element(int m, int n, std::complex<double> beta);

struct Grid {
  std::vector<double> re;  // Re(alpha) axis
  std::vector<double> im;  // Im(alpha) axis
  Eigen::MatrixXd w;       // w(i, j) at alpha = re[i] + i im[j]

  void write_csv(std::ostream& out) const;  // re_alpha,im_alpha,w
  void write_svg(std::ostream& out, int pixel = 6) const;
};

/// W(alpha) = (2/pi) Tr[D(alpha)^dag rho D(alpha) P], P the parity, so a
/// coherent state |beta> gives (2/pi) exp(-2|alpha - beta|^2).
double value(const Eigen::MatrixXcd& rho, std::complex<double> alpha);

/// Evaluates on the product grid. Throws ValidationError when the Fock
/// truncation is below 2 max|alpha|^2 + 4.
Grid evaluate(const Eigen::MatrixXcd& rho, const std::vector<double>& re, const std::vector<double>& im);

/// Symmetric square grid [-extent, extent]^2 with `points` per axis.
Grid evaluate_square(const Eigen::MatrixXcd& rho, double extent, int points);

}  // namespace cqed::wigner
