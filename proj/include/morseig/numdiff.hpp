#pragma once

#include <Eigen/Dense>

#include <functional>

namespace morseig {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

// 4th-order central-difference gradient.
inline Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
    e[j] = 1.0;
    g[j] = (-f(x + 2 * h * e) + 8 * f(x + h * e) - 8 * f(x - h * e) + f(x - 2 * h * e)) / (12 * h);
  }
  return g;
}

namespace detail {

inline Eigen::MatrixXd fd_hessian_raw(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  const int d = static_cast<int>(x.size());
  const double f0 = f(x);
  Eigen::MatrixXd H(d, d);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Zero(d);
    ei[i] = h;
    H(i, i) = (f(x + ei) - 2 * f0 + f(x - ei)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(d);
      ej[j] = h;
      H(i, j) = H(j, i) =
          (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h);
    }
  }
  return H;
}

}  // namespace detail

// Central second differences with one Richardson halving; leading error
// drops from O(h^2) to O(h^4).
inline Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  Eigen::MatrixXd coarse = detail::fd_hessian_raw(f, x, h);
  Eigen::MatrixXd fine = detail::fd_hessian_raw(f, x, h / 2);
  Eigen::MatrixXd H = (4.0 * fine - coarse) / 3.0;
  return 0.5 * (H + H.transpose().eval());
}

}  // namespace morseig
