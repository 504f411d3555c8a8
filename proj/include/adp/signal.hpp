#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace adp {

struct Interval {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
};

/// Discretized element of L^2(a,b): sample values on a uniform midpoint grid.
/// All norms and inner products carry the grid weight h so that refining the
/// grid does not rescale them.
class Signal {
 public:
  Signal() = default;

  Signal(Eigen::VectorXd samples, Interval interval)
      : samples_(std::move(samples)), interval_(interval) {
    if (samples_.size() < 1) throw std::invalid_argument("Signal: need at least one sample");
    if (interval_.b <= interval_.a) throw std::invalid_argument("Signal: empty interval");
    if (!samples_.allFinite()) throw std::invalid_argument("Signal: non-finite sample");
  }

  static Signal zeros(Eigen::Index n, Interval interval) {
    return Signal(Eigen::VectorXd::Zero(n), interval);
  }

  /// Sample a function at the midpoints t_i = a + (i + 1/2) h.
  static Signal from_function(const std::function<double(double)>& f, Eigen::Index n,
                              Interval interval) {
    Eigen::VectorXd v(n);
    const double h = interval.length() / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = f(interval.a + (static_cast<double>(i) + 0.5) * h);
    return Signal(std::move(v), interval);
  }

  const Eigen::VectorXd& samples() const { return samples_; }
  Eigen::VectorXd& samples() { return samples_; }
  Eigen::Index size() const { return samples_.size(); }
  Interval interval() const { return interval_; }
  double h() const { return interval_.length() / static_cast<double>(samples_.size()); }
  double grid_point(Eigen::Index i) const {
    return interval_.a + (static_cast<double>(i) + 0.5) * h();
  }

  /// Same grid, new sample values.
  Signal with_samples(Eigen::VectorXd v) const {
    if (v.size() != samples_.size()) throw std::invalid_argument("with_samples: size mismatch");
    return Signal(std::move(v), interval_);
  }

  double operator[](Eigen::Index i) const { return samples_[i]; }

  Signal operator+(const Signal& o) const { return with_samples(samples_ + o.samples_); }
  Signal operator-(const Signal& o) const { return with_samples(samples_ - o.samples_); }
  Signal operator*(double s) const { return with_samples(samples_ * s); }
  Signal operator-() const { return with_samples(-samples_); }

 private:
  Eigen::VectorXd samples_;
  Interval interval_{0.0, 1.0};
};

inline Signal operator*(double s, const Signal& x) { return x * s; }

/// Discrete L^2 inner product <u,w> = h * sum u_i w_i.
inline double inner(const Signal& u, const Signal& w) {
  if (u.size() != w.size()) throw std::invalid_argument("inner: size mismatch");
  return u.h() * u.samples().dot(w.samples());
}

inline double norm(const Signal& u) { return std::sqrt(u.h()) * u.samples().norm(); }

/// h-weighted l1 norm.
inline double norm1(const Signal& u) { return u.h() * u.samples().cwiseAbs().sum(); }

}  // namespace adp
