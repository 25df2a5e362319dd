// A = Omega (delta + eps) with eps symmetric and traceless.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace doubled {

class PerturbedForm {
 public:
  static constexpr double kSymmetryTolerance = 1e-15;
  static constexpr double kTraceTolerance = 1e-15;

  PerturbedForm(double omega, const Eigen::Matrix4d& eps) : omega_(omega), eps_(eps) {
    if (!(omega_ > 0.0) || !std::isfinite(omega_)) {
      throw std::invalid_argument("PerturbedForm: Omega must be positive");
    }
    if (!eps_.allFinite()) {
      throw std::invalid_argument("PerturbedForm: eps has non-finite entries");
    }
    if ((eps_ - eps_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
      throw std::invalid_argument("PerturbedForm: eps must be symmetric");
    }
    if (std::abs(eps_.trace()) > kTraceTolerance) {
      throw std::invalid_argument("PerturbedForm: eps must be traceless");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(eps_, Eigen::EigenvaluesOnly);
    radius_ = solver.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius_ < 1.0)) {
      throw std::invalid_argument("PerturbedForm: spectral radius of eps must be < 1");
    }
  }

  /// Upper triangle in row order: e00 e01 e02 e03 e11 e12 e13 e22 e23 e33.
  static PerturbedForm from_upper(double omega, const std::array<double, 10>& u) {
    Eigen::Matrix4d e;
    std::size_t n = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        e(i, j) = u[n];
        e(j, i) = u[n];
        ++n;
      }
    }
    return PerturbedForm(omega, e);
  }

  double omega() const noexcept { return omega_; }
  const Eigen::Matrix4d& eps() const noexcept { return eps_; }
  double spectral_radius() const noexcept { return radius_; }

  /// Omega (delta + eps).
  Eigen::Matrix4d form() const { return omega_ * (Eigen::Matrix4d::Identity() + eps_); }

 private:
  double omega_;
  Eigen::Matrix4d eps_;
  double radius_ = 0.0;
};

}  // namespace doubled
