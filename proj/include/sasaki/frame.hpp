#pragma once

// Unit vector fields on a chart: the pointwise operator ∇ξ, its adjoint, the
// singular frame that diagonalises it, and the second covariant derivative
// r(X,Y)ξ = ∇_X∇_Yξ − ∇_{∇_X Y}ξ.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sasaki/errors.hpp"
#include "sasaki/expr.hpp"
#include "sasaki/manifold.hpp"

namespace sasaki {

class UnitField {
public:
    UnitField() = default;

    UnitField(std::shared_ptr<const ChartMetric> host, const std::vector<std::string>& components)
        : host_(std::move(host)) {
        if (!host_) throw Error("unit field needs a host metric");
        if (components.size() != host_->dim()) {
            throw DimensionError("field has " + std::to_string(components.size()) + " components, chart has " +
                                 std::to_string(host_->dim()));
        }
        for (const auto& c : components) components_.push_back(Expr::parse(c, host_->symbols()));
    }

    const ChartMetric& host() const { return *host_; }
    const std::shared_ptr<const ChartMetric>& host_ptr() const { return host_; }
    std::size_t dim() const { return components_.size(); }
    const Expr& component(std::size_t i) const { return components_[i]; }

    Vec value_at(std::span<const double> p) const {
        Vec v(static_cast<Eigen::Index>(dim()));
        for (std::size_t i = 0; i < dim(); ++i) v(static_cast<Eigen::Index>(i)) = components_[i].eval(p);
        return v;
    }

    // Throws NotUnitFieldError if |ξ|_g deviates from 1 by more than `tol` at
    // any sampled point.
    void validate(std::size_t samples = 20, std::uint64_t seed = 1, double tol = 1e-10) const {
        for (const auto& p : sample_points(host_->domain(), samples, seed)) {
            const auto g = metric_at(*host_, p);
            const Vec xi = value_at(p);
            const double n2 = g.inner(xi, xi);
            if (std::abs(n2 - 1.0) > tol) {
                throw NotUnitFieldError("field is not unit: g(xi,xi) = " + format_double(n2) + " at a sample point");
            }
        }
    }

private:
    std::shared_ptr<const ChartMetric> host_;
    std::vector<Expr> components_;
};

// Second covariant derivative tensor: value(i, j, k) is component k of
// r(∂_i, ∂_j)ξ.
class RTensorAtPoint {
public:
    explicit RTensorAtPoint(std::size_t dim = 0) : dim_(dim), r_(dim * dim * dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    double value(std::size_t i, std::size_t j, std::size_t k) const { return r_[(i * dim_ + j) * dim_ + k]; }
    double& value(std::size_t i, std::size_t j, std::size_t k) { return r_[(i * dim_ + j) * dim_ + k]; }

    // r(X,Y)ξ
    Vec apply(const Vec& x, const Vec& y) const {
        Vec out = Vec::Zero(static_cast<Eigen::Index>(dim_));
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) {
                const double w = x(i) * y(j);
                if (w == 0.0) continue;
                for (std::size_t k = 0; k < dim_; ++k) out(k) += w * value(i, j, k);
            }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<double> r_;
};

// Everything the formulas need at one chart point, evaluated from one pass of
// jets over the metric and field.
struct LocalGeometry {
    Point point;
    MetricAtPoint metric;
    ChristoffelAtPoint christoffel;
    RiemannAtPoint riemann;
    Vec xi;
    Mat dxi;                 // dxi(k, j) = ∂_j ξ^k
    std::vector<Mat> ddxi;   // ddxi[k](i, j) = ∂_i ∂_j ξ^k
    Mat nabla;               // nabla(k, j) = ∇_j ξ^k, so (∇ξ)X = nabla * X

    std::size_t dim() const { return point.size(); }
    Vec nabla_along(const Vec& x) const { return nabla * x; }
};

inline LocalGeometry local_geometry(const UnitField& f, std::span<const double> p, bool check_domain = true) {
    const ChartMetric& m = f.host();
    if (check_domain) {
        m.require_inside(p);
    } else if (p.size() != m.dim()) {
        throw DimensionError("point dimension does not match the chart");
    }
    const std::size_t n = m.dim();
    LocalGeometry lg;
    lg.point.assign(p.begin(), p.end());
    const auto gj = m.jets(p);
    lg.metric = detail::metric_from_values(detail::values_of(gj, n));
    lg.christoffel = detail::christoffel_from_jets(gj, lg.metric.inverse);
    lg.riemann = detail::riemann_from_christoffel(lg.christoffel);

    lg.xi = Vec(n);
    lg.dxi = Mat(n, n);
    lg.ddxi.assign(n, Mat(n, n));
    for (std::size_t k = 0; k < n; ++k) {
        const Jet2 j = f.component(k).eval_jet2(p);
        lg.xi(k) = j.value();
        for (std::size_t a = 0; a < n; ++a) {
            lg.dxi(k, a) = j.grad(a);
            for (std::size_t b = 0; b < n; ++b) lg.ddxi[k](a, b) = j.hess(a, b);
        }
    }
    lg.nabla = lg.dxi;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t m2 = 0; m2 < n; ++m2) lg.nabla(k, j) += lg.christoffel.gamma(k, j, m2) * lg.xi(m2);
    return lg;
}

struct NablaXiAtPoint {
    Point point;
    MetricAtPoint metric;
    Vec xi;
    Mat op_coords;  // op_coords(k, j) = ∇_j ξ^k
    Mat op_ortho;   // the same operator in the Cholesky-orthonormal basis

    // ∇_X ξ
    Vec apply(const Vec& x) const { return op_coords * x; }
};

inline NablaXiAtPoint nabla_xi_from(const LocalGeometry& lg) {
    NablaXiAtPoint nx;
    nx.point = lg.point;
    nx.metric = lg.metric;
    nx.xi = lg.xi;
    nx.op_coords = lg.nabla;
    const Mat lt = lg.metric.chol.transpose();
    nx.op_ortho = lt * lg.nabla * lg.metric.orthonormal_basis();
    return nx;
}

inline NablaXiAtPoint nabla_xi_at(const UnitField& f, std::span<const double> p) {
    return nabla_xi_from(local_geometry(f, p));
}

struct AdjointAtPoint {
    Mat op_coords;  // g^{-1} (∇ξ)^T g
    Mat op_ortho;   // transpose of NablaXiAtPoint::op_ortho

    Vec apply(const Vec& x) const { return op_coords * x; }
};

inline AdjointAtPoint adjoint_at(const NablaXiAtPoint& nx) {
    AdjointAtPoint a;
    a.op_coords = nx.metric.inverse * nx.op_coords.transpose() * nx.metric.g;
    a.op_ortho = nx.op_ortho.transpose();
    return a;
}

struct SingularFrame {
    Mat e;               // columns e_0..e_n, chart coordinates
    Mat f;               // columns f_1..f_n (column α−1 holds f_α)
    std::vector<double> lambda;  // λ_1 ≥ … ≥ λ_n ≥ 0
    double min_gap = 0.0;        // smallest gap in (λ_1, …, λ_n, 0)
    bool degenerate = false;

    std::size_t n() const { return lambda.size(); }
    Vec e_at(std::size_t i) const { return e.col(static_cast<Eigen::Index>(i)); }
    // f_σ for σ = 1..n
    Vec f_at(std::size_t sigma) const { return f.col(static_cast<Eigen::Index>(sigma - 1)); }
    double lambda_at(std::size_t sigma) const { return lambda[sigma - 1]; }
};

struct FrameOptions {
    // Nonzero: conjugate by a seeded random rotation before the SVD. The
    // geometric output must not depend on it.
    std::uint64_t reseed = 0;
    // Singular values closer than this (relative to max(1, λ_1)) are treated
    // as one cluster and given the canonical in-cluster basis.
    double cluster_tol = 1e-8;
    double degenerate_gap = 1e-6;
};

namespace detail {

inline Mat random_rotation(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Mat a(n, n);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ() * Mat::Identity(n, n);
}

// Orthonormal basis of span(v) ordered against `anchors`: the projections of
// the anchors are Gram-Schmidt-ed in order and assigned from the last slot
// backwards, so the final vector carries the first anchor's direction and
// earlier slots are orthogonal to it.
inline Mat canonical_cluster_basis(const Mat& v, const std::vector<Vec>& anchors) {
    const Eigen::Index m = v.cols();
    std::vector<Vec> picked;
    for (const Vec& a : anchors) {
        if (static_cast<Eigen::Index>(picked.size()) == m) break;
        Vec c = v.transpose() * a;
        for (const Vec& q : picked) c -= q.dot(c) * q;
        const double nrm = c.norm();
        if (nrm > 1e-6) picked.push_back(c / nrm);
    }
    Mat out(v.rows(), m);
    for (Eigen::Index s = 0; s < m; ++s) out.col(m - 1 - s) = v * picked[static_cast<std::size_t>(s)];
    return out;
}

inline void fix_sign(Eigen::Ref<Vec> y) {
    const double scale = y.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (std::abs(y(i)) > 1e-10 * scale) {
            if (y(i) < 0.0) y = -y;
            return;
        }
    }
}

}  // namespace detail

// g-orthonormal frames e_0..e_n of T_pM and f_1..f_n of ξ^⊥ with
// (∇ξ)e_0 = 0, (∇ξ)e_α = λ_α f_α, (∇ξ)^* f_α = λ_α e_α.
inline SingularFrame singular_frame_at(const NablaXiAtPoint& nx, const FrameOptions& opt = {}) {
    const std::size_t dim = static_cast<std::size_t>(nx.op_ortho.rows());
    const std::size_t n = dim - 1;
    const Mat q = opt.reseed ? detail::random_rotation(dim, opt.reseed) : Mat::Identity(dim, dim);
    const Mat a = nx.op_ortho;
    const Mat rotated = q.transpose() * a * q;
    Eigen::JacobiSVD<Mat> svd(rotated, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec s = svd.singularValues();
    Mat v = q * svd.matrixV();  // orthonormal components of e's, descending s

    const Vec xi_hat = nx.metric.to_orthonormal(nx.xi).normalized();
    const double scale = std::max(1.0, s(0));

    // Canonical basis inside clusters of equal singular values.
    std::size_t start = 0;
    while (start < dim) {
        std::size_t end = start + 1;
        while (end < dim && s(static_cast<Eigen::Index>(end - 1)) - s(static_cast<Eigen::Index>(end)) <
                                opt.cluster_tol * scale) {
            ++end;
        }
        const std::size_t size = end - start;
        if (size > 1) {
            const Mat block = v.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(size));
            std::vector<Vec> anchors;
            const bool kernel = end == dim;
            if (kernel) {
                // ξ itself spans the kernel direction when ξ is geodesic.
                const Vec proj = block * (block.transpose() * xi_hat);
                if (proj.norm() > 1.0 - 1e-8) anchors.push_back(xi_hat);
            }
            for (std::size_t k = 0; k < dim; ++k) anchors.push_back(q.col(static_cast<Eigen::Index>(k)));
            v.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(size)) =
                detail::canonical_cluster_basis(block, anchors);
        }
        start = end;
    }
    for (std::size_t k = 0; k < dim; ++k) detail::fix_sign(v.col(static_cast<Eigen::Index>(k)));

    SingularFrame fr;
    fr.lambda.resize(n);
    Mat e_ortho(dim, dim);
    e_ortho.col(0) = v.col(static_cast<Eigen::Index>(n));
    for (std::size_t al = 1; al <= n; ++al) {
        e_ortho.col(static_cast<Eigen::Index>(al)) = v.col(static_cast<Eigen::Index>(al - 1));
        fr.lambda[al - 1] = s(static_cast<Eigen::Index>(al - 1));
    }

    // f_α = (∇ξ)e_α / λ_α; zero-λ slots completed by Gram-Schmidt in ξ^⊥.
    Mat f_ortho = Mat::Zero(dim, n);
    std::vector<Vec> basis{xi_hat};
    std::vector<std::size_t> missing;
    for (std::size_t al = 1; al <= n; ++al) {
        const double lam = fr.lambda[al - 1];
        if (lam > 1e-9) {
            Vec fv = a * e_ortho.col(static_cast<Eigen::Index>(al));
            fv /= lam;
            f_ortho.col(static_cast<Eigen::Index>(al - 1)) = fv;
            basis.push_back(fv.normalized());
        } else {
            missing.push_back(al);
        }
    }
    for (std::size_t al : missing) {
        for (std::size_t k = 0; k < dim; ++k) {
            Vec c = q.col(static_cast<Eigen::Index>(k));
            for (const Vec& b : basis) c -= b.dot(c) * b;
            for (const Vec& b : basis) c -= b.dot(c) * b;
            if (c.norm() > 1e-6) {
                c.normalize();
                detail::fix_sign(c);
                f_ortho.col(static_cast<Eigen::Index>(al - 1)) = c;
                basis.push_back(c);
                break;
            }
        }
    }

    fr.e = Mat(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        fr.e.col(static_cast<Eigen::Index>(i)) = nx.metric.from_orthonormal(e_ortho.col(static_cast<Eigen::Index>(i)));
    fr.f = Mat(dim, n);
    for (std::size_t al = 0; al < n; ++al)
        fr.f.col(static_cast<Eigen::Index>(al)) =
            nx.metric.from_orthonormal(f_ortho.col(static_cast<Eigen::Index>(al)));

    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t al = 0; al < n; ++al) {
        const double next = al + 1 < n ? fr.lambda[al + 1] : 0.0;
        gap = std::min(gap, fr.lambda[al] - next);
    }
    fr.min_gap = gap;
    fr.degenerate = gap < opt.degenerate_gap;
    return fr;
}

inline RTensorAtPoint r_tensor_from(const LocalGeometry& lg) {
    const std::size_t n = lg.dim();
    const auto& c = lg.christoffel;
    // d_nabla[i](k, j) = ∂_i(∇_j ξ^k)
    std::vector<Mat> d_nabla(n, Mat::Zero(n, n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                double s = lg.ddxi[k](i, j);
                for (std::size_t m = 0; m < n; ++m) {
                    s += c.dgamma(i, k, j, m) * lg.xi(m) + c.gamma(k, j, m) * lg.dxi(m, i);
                }
                d_nabla[i](k, j) = s;
            }
    RTensorAtPoint r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                double s = d_nabla[i](k, j);
                for (std::size_t m = 0; m < n; ++m) {
                    s += c.gamma(k, i, m) * lg.nabla(m, j) - c.gamma(m, i, j) * lg.nabla(k, m);
                }
                r.value(i, j, k) = s;
            }
    return r;
}

inline RTensorAtPoint r_tensor_at(const UnitField& f, std::span<const double> p) {
    return r_tensor_from(local_geometry(f, p));
}

// Singular frame at a point together with numerically differentiated frame
// data: connection(i, j, k) = E_{i|jk} = <∇_{e_i} e_j, e_k>,
// f_connection(i, j, k) = F_{i|jk} = <∇_{e_i} f_j, f_k> (f_0 = 0), and
// dlambda(i, j) = e_i(λ_j) with λ_0 = 0.
struct AlignedFrameField {
    SingularFrame frame;
    std::size_t dim = 0;
    std::vector<double> e_conn;
    std::vector<double> f_conn;
    Mat dlambda;

    double E(std::size_t i, std::size_t j, std::size_t k) const { return e_conn[(i * dim + j) * dim + k]; }
    double F(std::size_t i, std::size_t j, std::size_t k) const { return f_conn[(i * dim + j) * dim + k]; }
    // G_{i|j} = E_{i|ij} − F_{i|ij}
    double G(std::size_t i, std::size_t j) const { return E(i, i, j) - F(i, i, j); }
};

inline double default_step(const Box& box) {
    double w = 0.0;
    for (const auto& iv : box) w += iv.hi - iv.lo;
    return 1e-4 * w / static_cast<double>(box.size());
}

namespace detail {

// Reorders and re-signs `s` so that its e's match `center` as closely as
// possible; f's follow their e's.
inline void align_to(const SingularFrame& center, const MetricAtPoint& g, SingularFrame& s) {
    const std::size_t dim = static_cast<std::size_t>(center.e.cols());
    const std::size_t n = dim - 1;
    std::vector<bool> used(dim, false);
    std::vector<std::size_t> perm(dim);
    std::vector<double> sign(dim, 1.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < dim; ++k) {
            if (used[k]) continue;
            const double ov = std::abs(g.inner(center.e_at(j), s.e_at(k)));
            if (ov > best) {
                best = ov;
                arg = k;
            }
        }
        if (best < 0.9) throw AlignmentFailureError("frame alignment overlap " + format_double(best) + " < 0.9");
        used[arg] = true;
        perm[j] = arg;
        sign[j] = g.inner(center.e_at(j), s.e_at(arg)) < 0.0 ? -1.0 : 1.0;
    }
    if (perm[0] != 0) throw AlignmentFailureError("kernel direction changed along the stencil");
    SingularFrame out = s;
    for (std::size_t j = 0; j < dim; ++j) out.e.col(static_cast<Eigen::Index>(j)) = sign[j] * s.e_at(perm[j]);
    for (std::size_t al = 1; al <= n; ++al) {
        out.f.col(static_cast<Eigen::Index>(al - 1)) = sign[al] * s.f_at(perm[al]);
        out.lambda[al - 1] = s.lambda_at(perm[al]);
    }
    s = std::move(out);
}

// 4th-order central difference weights for offsets −2h, −h, +h, +2h.
inline constexpr double kStencil[4] = {-2.0, -1.0, 1.0, 2.0};
inline constexpr double kWeights[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};

}  // namespace detail

inline AlignedFrameField aligned_frame_field(const UnitField& f, std::span<const double> center, double h = 0.0,
                                             const FrameOptions& opt = {}) {
    if (h <= 0.0) h = default_step(f.host().domain());
    const LocalGeometry lg = local_geometry(f, center);
    const std::size_t dim = lg.dim();
    const std::size_t n = dim - 1;
    const SingularFrame fr = singular_frame_at(nabla_xi_from(lg), opt);
    constexpr double kMinGap = 1e-3;
    if (fr.min_gap <= kMinGap) {
        throw DegenerateSpectrumError("singular values too close (gap " + format_double(fr.min_gap) + ")");
    }

    AlignedFrameField out;
    out.frame = fr;
    out.dim = dim;
    out.e_conn.assign(dim * dim * dim, 0.0);
    out.f_conn.assign(dim * dim * dim, 0.0);
    out.dlambda = Mat::Zero(dim, dim);

    for (std::size_t i = 0; i < dim; ++i) {
        const Vec dir = fr.e_at(i);
        Mat de = Mat::Zero(dim, dim);      // directional derivative of e_j components
        Mat df = Mat::Zero(dim, n);
        Vec dl = Vec::Zero(static_cast<Eigen::Index>(n));
        for (int s = 0; s < 4; ++s) {
            const Vec q = to_vec(lg.point) + detail::kStencil[s] * h * dir;
            const Point qp = to_point(q);
            const LocalGeometry lq = local_geometry(f, qp, false);
            SingularFrame sf = singular_frame_at(nabla_xi_from(lq), opt);
            if (sf.min_gap <= kMinGap) {
                throw DegenerateSpectrumError("singular values too close on the difference stencil");
            }
            detail::align_to(fr, lg.metric, sf);
            const double w = detail::kWeights[s] / h;
            de += w * sf.e;
            df += w * sf.f;
            for (std::size_t al = 0; al < n; ++al) dl(static_cast<Eigen::Index>(al)) += w * sf.lambda[al];
        }
        for (std::size_t j = 0; j < dim; ++j) {
            const Vec nab = de.col(static_cast<Eigen::Index>(j)) + lg.christoffel.contract(dir, fr.e_at(j));
            for (std::size_t k = 0; k < dim; ++k) out.e_conn[(i * dim + j) * dim + k] = lg.metric.inner(nab, fr.e_at(k));
        }
        for (std::size_t j = 1; j <= n; ++j) {
            const Vec nab = df.col(static_cast<Eigen::Index>(j - 1)) + lg.christoffel.contract(dir, fr.f_at(j));
            for (std::size_t k = 1; k <= n; ++k) out.f_conn[(i * dim + j) * dim + k] = lg.metric.inner(nab, fr.f_at(k));
        }
        for (std::size_t al = 1; al <= n; ++al) out.dlambda(i, al) = dl(al - 1);
    }
    // Antisymmetry in the last two slots.
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            for (std::size_t k = j; k < dim; ++k) {
                const double e = 0.5 * (out.e_conn[(i * dim + j) * dim + k] - out.e_conn[(i * dim + k) * dim + j]);
                out.e_conn[(i * dim + j) * dim + k] = e;
                out.e_conn[(i * dim + k) * dim + j] = -e;
                const double fv = 0.5 * (out.f_conn[(i * dim + j) * dim + k] - out.f_conn[(i * dim + k) * dim + j]);
                out.f_conn[(i * dim + j) * dim + k] = fv;
                out.f_conn[(i * dim + k) * dim + j] = -fv;
            }
    return out;
}

}  // namespace sasaki
