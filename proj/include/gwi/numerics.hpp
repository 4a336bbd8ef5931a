// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace gwi {

/// Neumaier compensated summation.
template <typename Scalar = double>
class CompensatedSum {
public:
    void add(Scalar x) noexcept {
        const Scalar t = sum_ + x;
        if (abs_(sum_) >= abs_(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(Scalar x) noexcept { add(x); return *this; }
    Scalar value() const noexcept { return sum_ + comp_; }

private:
    static Scalar abs_(Scalar x) noexcept { return x < 0 ? -x : x; }
    Scalar sum_{0};
    Scalar comp_{0};
};

template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived>& v) {
    CompensatedSum<typename Derived::Scalar> s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s.add(v.derived().coeff(i));
    return s.value();
}

/// log Γ(x + a) − log Γ(x + b) for x + a > 0 and x + b > 0, accurate to
/// ~1e-15 absolute for large x where a plain lgamma difference would lose
/// all significance.
double log_gamma_ratio(double x, double a, double b);

/// Linear convolution of nonnegative sequences through a real FFT.
/// Tiny negative round-off is clamped to zero.
class FftConvolver {
public:
    FftConvolver();
    ~FftConvolver();
    FftConvolver(const FftConvolver&) = delete;
    FftConvolver& operator=(const FftConvolver&) = delete;

    /// First `out_len` coefficients of a * b.
    Eigen::VectorXd convolve(const Eigen::Ref<const Eigen::VectorXd>& a,
                             const Eigen::Ref<const Eigen::VectorXd>& b, Eigen::Index out_len,
                             bool clamp_nonnegative = true);

private:
    struct Impl;
    Impl* impl_;
};

/// Direct O(n m) convolution; the reference route for FftConvolver.
Eigen::VectorXd convolve_direct(const Eigen::Ref<const Eigen::VectorXd>& a,
                                const Eigen::Ref<const Eigen::VectorXd>& b, Eigen::Index out_len);

/// Double-exponential (tanh-sinh) quadrature of a function on [0, 1].
/// Refines the step until two successive levels agree to `tol`.
double tanh_sinh_01(const std::function<double(double)>& f, double tol = 1e-13);

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double rss = 0;
};
/// Ordinary least squares y ≈ intercept + slope·x.
LinearFit linear_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

/// Runs body(chunk) for chunk in [0, n_chunks) on `threads` workers. The
/// assignment of chunks to workers is dynamic, so callers must make each
/// chunk's result depend only on its index and merge results in index order.
void parallel_for_chunks(std::size_t n_chunks, unsigned threads,
                         const std::function<void(std::size_t)>& body);

}  // namespace gwi
