#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace sasaki {

// Largest chart dimension the engine handles. Jets keep fixed-size storage so
// that evaluating an expression tree never allocates.
inline constexpr std::size_t kMaxDim = 8;

// Second-order forward jet: value, gradient and (symmetric) hessian of a scalar
// function of the chart coordinates, carried through arithmetic exactly.
class Jet2 {
public:
    Jet2() = default;

    explicit Jet2(std::size_t dim, double value = 0.0) : dim_(dim), value_(value) {
        if (dim > kMaxDim) {
            throw std::invalid_argument("Jet2: dimension exceeds kMaxDim");
        }
    }

    static Jet2 constant(std::size_t dim, double value) { return Jet2(dim, value); }

    static Jet2 variable(std::size_t dim, std::size_t index, double value) {
        Jet2 j(dim, value);
        j.grad_[index] = 1.0;
        return j;
    }

    std::size_t dim() const { return dim_; }
    double value() const { return value_; }
    double grad(std::size_t i) const { return grad_[i]; }
    double hess(std::size_t i, std::size_t j) const { return hess_[i * kMaxDim + j]; }

    double& value() { return value_; }
    double& grad(std::size_t i) { return grad_[i]; }
    double& hess(std::size_t i, std::size_t j) { return hess_[i * kMaxDim + j]; }

    // f(this) given f, f', f'' at the current value.
    Jet2 chain(double f0, double f1, double f2) const {
        Jet2 r(dim_, f0);
        for (std::size_t i = 0; i < dim_; ++i) {
            r.grad_[i] = f1 * grad_[i];
        }
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = i; j < dim_; ++j) {
                const double h = f1 * hess(i, j) + f2 * grad_[i] * grad_[j];
                r.hess(i, j) = h;
                r.hess(j, i) = h;
            }
        }
        return r;
    }

    Jet2& operator+=(const Jet2& o) {
        value_ += o.value_;
        for (std::size_t i = 0; i < dim_; ++i) grad_[i] += o.grad_[i];
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) hess(i, j) += o.hess(i, j);
        return *this;
    }

    Jet2& operator-=(const Jet2& o) {
        value_ -= o.value_;
        for (std::size_t i = 0; i < dim_; ++i) grad_[i] -= o.grad_[i];
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) hess(i, j) -= o.hess(i, j);
        return *this;
    }

    Jet2& operator*=(double s) {
        value_ *= s;
        for (std::size_t i = 0; i < dim_; ++i) grad_[i] *= s;
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) hess(i, j) *= s;
        return *this;
    }

    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
    friend Jet2 operator*(double s, Jet2 a) { return a *= s; }
    friend Jet2 operator-(Jet2 a) { return a *= -1.0; }

    friend Jet2 operator*(const Jet2& a, const Jet2& b) {
        const std::size_t n = a.dim_;
        Jet2 r(n, a.value_ * b.value_);
        for (std::size_t i = 0; i < n; ++i) {
            r.grad_[i] = a.grad_[i] * b.value_ + a.value_ * b.grad_[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double h = a.hess(i, j) * b.value_ + a.value_ * b.hess(i, j) +
                                 a.grad_[i] * b.grad_[j] + a.grad_[j] * b.grad_[i];
                r.hess(i, j) = h;
                r.hess(j, i) = h;
            }
        }
        return r;
    }

    friend Jet2 operator/(const Jet2& a, const Jet2& b) {
        const double v = b.value_;
        return a * b.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    }

private:
    std::size_t dim_ = 0;
    double value_ = 0.0;
    std::array<double, kMaxDim> grad_{};
    std::array<double, kMaxDim * kMaxDim> hess_{};
};

}  // namespace sasaki
