#pragma once

// A Riemannian manifold given in a single coordinate chart: metric entries are
// expressions over the chart coordinates, differentiated exactly by jets.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <utility>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sasaki/errors.hpp"
#include "sasaki/expr.hpp"
#include "sasaki/jet.hpp"

namespace sasaki {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

using Box = std::vector<Interval>;

inline Vec to_vec(std::span<const double> p) {
    Vec v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i];
    return v;
}

inline Point to_point(const Vec& v) { return Point(v.data(), v.data() + v.size()); }

// Quasi-random points in a box: a Halton sequence with a seeded
// Cranley-Patterson shift, so runs are reproducible per seed.
inline std::vector<Point> sample_points(const Box& box, std::size_t count, std::uint64_t seed, double margin = 0.0) {
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(box.size());
    for (auto& s : shift) s = unit(rng);
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) {
        Point p(box.size());
        for (std::size_t d = 0; d < box.size(); ++d) {
            const int base = primes[d % std::size(primes)];
            double f = 1.0, r = 0.0;
            for (std::size_t i = k; i > 0; i /= static_cast<std::size_t>(base)) {
                f /= base;
                r += f * static_cast<double>(i % static_cast<std::size_t>(base));
            }
            double t = r + shift[d];
            t -= std::floor(t);
            const double lo = box[d].lo + margin * (box[d].hi - box[d].lo);
            const double hi = box[d].hi - margin * (box[d].hi - box[d].lo);
            p[d] = lo + t * (hi - lo);
        }
        out.push_back(std::move(p));
    }
    return out;
}

struct MetricAtPoint {
    Mat g;
    Mat chol;     // lower factor L with L L^T = g
    Mat inverse;

    double inner(const Vec& a, const Vec& b) const { return a.dot(g * b); }
    double norm(const Vec& a) const { return std::sqrt(inner(a, a)); }

    // Columns are a g-orthonormal basis: B = L^{-T}.
    Mat orthonormal_basis() const {
        return chol.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(g.rows(), g.cols()));
    }
    // Coordinates -> orthonormal components (y = L^T x) and back.
    Vec to_orthonormal(const Vec& x) const { return chol.transpose() * x; }
    Vec from_orthonormal(const Vec& y) const {
        return chol.transpose().triangularView<Eigen::Upper>().solve(y);
    }
};

// Levi-Civita connection coefficients at a point. gamma(k, i, j) = Γ^k_{ij},
// dgamma(l, k, i, j) = ∂_l Γ^k_{ij}.
class ChristoffelAtPoint {
public:
    explicit ChristoffelAtPoint(std::size_t dim = 0)
        : dim_(dim), gamma_(dim * dim * dim, 0.0), dgamma_(dim * dim * dim * dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    double gamma(std::size_t k, std::size_t i, std::size_t j) const { return gamma_[(k * dim_ + i) * dim_ + j]; }
    double& gamma(std::size_t k, std::size_t i, std::size_t j) { return gamma_[(k * dim_ + i) * dim_ + j]; }
    double dgamma(std::size_t l, std::size_t k, std::size_t i, std::size_t j) const {
        return dgamma_[((l * dim_ + k) * dim_ + i) * dim_ + j];
    }
    double& dgamma(std::size_t l, std::size_t k, std::size_t i, std::size_t j) {
        return dgamma_[((l * dim_ + k) * dim_ + i) * dim_ + j];
    }

    // Γ^k_{ij} x^i y^j
    Vec contract(const Vec& x, const Vec& y) const {
        Vec out = Vec::Zero(static_cast<Eigen::Index>(dim_));
        for (std::size_t k = 0; k < dim_; ++k)
            for (std::size_t i = 0; i < dim_; ++i)
                for (std::size_t j = 0; j < dim_; ++j) out(k) += gamma(k, i, j) * x(i) * y(j);
        return out;
    }

private:
    std::size_t dim_;
    std::vector<double> gamma_;
    std::vector<double> dgamma_;
};

// Curvature with R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z, stored as
// R(∂_i, ∂_j)∂_k = component(l, k, i, j) ∂_l.
class RiemannAtPoint {
public:
    explicit RiemannAtPoint(std::size_t dim = 0) : dim_(dim), r_(dim * dim * dim * dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    double component(std::size_t l, std::size_t k, std::size_t i, std::size_t j) const {
        return r_[((l * dim_ + k) * dim_ + i) * dim_ + j];
    }
    double& component(std::size_t l, std::size_t k, std::size_t i, std::size_t j) {
        return r_[((l * dim_ + k) * dim_ + i) * dim_ + j];
    }

    // R(X,Y)Z
    Vec apply(const Vec& x, const Vec& y, const Vec& z) const {
        Vec out = Vec::Zero(static_cast<Eigen::Index>(dim_));
        for (std::size_t l = 0; l < dim_; ++l) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim_; ++k) {
                if (z(k) == 0.0) continue;
                for (std::size_t i = 0; i < dim_; ++i) {
                    if (x(i) == 0.0) continue;
                    for (std::size_t j = 0; j < dim_; ++j) s += component(l, k, i, j) * x(i) * y(j) * z(k);
                }
            }
            out(l) = s;
        }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<double> r_;
};

class ChartMetric {
public:
    ChartMetric() = default;

    // `entries` is dim x dim; an empty string below the diagonal mirrors the
    // entry above it.
    ChartMetric(SymbolTable symbols, Box domain, const std::vector<std::vector<std::string>>& entries)
        : symbols_(std::move(symbols)), domain_(std::move(domain)) {
        const std::size_t n = symbols_.dim();
        if (n < 2) throw DimensionError("chart dimension must be at least 2");
        if (n > kMaxDim) throw DimensionError("chart dimension exceeds " + std::to_string(kMaxDim));
        if (domain_.size() != n) throw DimensionError("domain box does not match the chart dimension");
        for (const auto& iv : domain_) {
            if (!(iv.lo < iv.hi)) throw DimensionError("domain interval must satisfy lo < hi");
        }
        if (entries.size() != n) throw DimensionError("metric table must have one row per coordinate");
        g_.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            if (entries[i].size() != n) throw DimensionError("metric table must be square");
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::string& text = entries[i][j];
                if (text.empty()) {
                    g_[i * n + j] = entries[j][i].empty() ? Expr::constant(0.0, n)
                                                          : Expr::parse(entries[j][i], symbols_);
                } else {
                    g_[i * n + j] = Expr::parse(text, symbols_);
                }
            }
        }
    }

    std::size_t dim() const { return symbols_.dim(); }
    const Box& domain() const { return domain_; }
    const SymbolTable& symbols() const { return symbols_; }
    const Expr& entry(std::size_t i, std::size_t j) const { return g_[i * dim() + j]; }

    bool contains(std::span<const double> p) const {
        if (p.size() != dim()) return false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(p[i] >= domain_[i].lo && p[i] <= domain_[i].hi)) return false;
        }
        return true;
    }

    void require_inside(std::span<const double> p) const {
        if (p.size() != dim()) {
            throw DimensionError("point has " + std::to_string(p.size()) + " coordinates, chart has " +
                                 std::to_string(dim()));
        }
        if (!contains(p)) {
            std::string s = "point (";
            for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + format_double(p[i]);
            throw OutOfDomainError(s + ") lies outside the chart domain");
        }
    }

    // Jets of all entries, row-major.
    std::vector<Jet2> jets(std::span<const double> p) const {
        std::vector<Jet2> out;
        out.reserve(g_.size());
        for (const auto& e : g_) out.push_back(e.eval_jet2(p));
        return out;
    }

private:
    SymbolTable symbols_;
    Box domain_;
    std::vector<Expr> g_;
};

namespace detail {

inline MetricAtPoint metric_from_values(const Mat& g) {
    MetricAtPoint m;
    m.g = g;
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("metric is not positive definite");
    m.chol = llt.matrixL();
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        if (!(m.chol(i, i) > 0.0) || !std::isfinite(m.chol(i, i))) {
            throw NotPositiveDefiniteError("metric is not positive definite");
        }
    }
    m.inverse = llt.solve(Mat::Identity(g.rows(), g.cols()));
    return m;
}

inline ChristoffelAtPoint christoffel_from_jets(const std::vector<Jet2>& gj, const Mat& ginv) {
    const std::size_t n = static_cast<std::size_t>(ginv.rows());
    auto g = [&](std::size_t i, std::size_t j) -> const Jet2& { return gj[i * n + j]; };
    ChristoffelAtPoint c(n);

    // First kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij) and its derivatives.
    std::vector<double> first(n * n * n), dfirst(n * n * n * n);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                first[(l * n + i) * n + j] = 0.5 * (g(j, l).grad(i) + g(i, l).grad(j) - g(i, j).grad(l));
                for (std::size_t m = 0; m < n; ++m) {
                    dfirst[((m * n + l) * n + i) * n + j] =
                        0.5 * (g(j, l).hess(m, i) + g(i, l).hess(m, j) - g(i, j).hess(m, l));
                }
            }

    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    std::vector<double> dinv(n * n * n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        Mat dg(n, n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) dg(a, b) = g(a, b).grad(m);
        const Mat d = -ginv * dg * ginv;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = 0; l < n; ++l) dinv[(m * n + k) * n + l] = d(k, l);
    }

    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < n; ++l) s += ginv(k, l) * first[(l * n + i) * n + j];
                c.gamma(k, i, j) = s;
                c.gamma(k, j, i) = s;
                for (std::size_t m = 0; m < n; ++m) {
                    double ds = 0.0;
                    for (std::size_t l = 0; l < n; ++l) {
                        ds += dinv[(m * n + k) * n + l] * first[(l * n + i) * n + j] +
                              ginv(k, l) * dfirst[((m * n + l) * n + i) * n + j];
                    }
                    c.dgamma(m, k, i, j) = ds;
                    c.dgamma(m, k, j, i) = ds;
                }
            }
    return c;
}

inline RiemannAtPoint riemann_from_christoffel(const ChristoffelAtPoint& c) {
    const std::size_t n = c.dim();
    RiemannAtPoint r(n);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    double s = c.dgamma(i, l, j, k) - c.dgamma(j, l, i, k);
                    for (std::size_t m = 0; m < n; ++m) {
                        s += c.gamma(l, i, m) * c.gamma(m, j, k) - c.gamma(l, j, m) * c.gamma(m, i, k);
                    }
                    r.component(l, k, i, j) = s;
                    r.component(l, k, j, i) = -s;
                }
    return r;
}

inline Mat values_of(const std::vector<Jet2>& gj, std::size_t n) {
    Mat g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = gj[i * n + j].value();
    return g;
}

}  // namespace detail

inline MetricAtPoint metric_at(const ChartMetric& m, std::span<const double> p) {
    m.require_inside(p);
    const std::size_t n = m.dim();
    Mat g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = m.entry(i, j).eval(p);
    return detail::metric_from_values(g);
}

inline ChristoffelAtPoint christoffel_at(const ChartMetric& m, std::span<const double> p) {
    m.require_inside(p);
    const auto gj = m.jets(p);
    const auto metric = detail::metric_from_values(detail::values_of(gj, m.dim()));
    return detail::christoffel_from_jets(gj, metric.inverse);
}

inline RiemannAtPoint riemann_at(const ChartMetric& m, std::span<const double> p) {
    return detail::riemann_from_christoffel(christoffel_at(m, p));
}

// Sectional curvature of the plane spanned by x, y.
inline double sectional_curvature(const MetricAtPoint& g, const RiemannAtPoint& r, const Vec& x, const Vec& y) {
    const double area2 = g.inner(x, x) * g.inner(y, y) - g.inner(x, y) * g.inner(x, y);
    return g.inner(r.apply(x, y, y), x) / area2;
}

// Throws unless g is symmetric and positive definite at every sample point.
inline void validate_metric(const ChartMetric& m, std::size_t samples = 20, std::uint64_t seed = 1) {
    for (const auto& p : sample_points(m.domain(), samples, seed)) {
        const std::size_t n = m.dim();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double a = m.entry(i, j).eval(p);
                const double b = m.entry(j, i).eval(p);
                if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) {
                    throw Error("metric is not symmetric: g_" + std::to_string(i) + std::to_string(j) +
                                " differs from g_" + std::to_string(j) + std::to_string(i));
                }
            }
        metric_at(m, p);
    }
}

}  // namespace sasaki
