#pragma once

// Mean curvature of ξ(M) ⊂ T₁M. The primary route is the closed-form trace
// over the singular frame; the other routes (frame-derivative form, the
// two-dimensional forms, the foliation form) are independent cross-checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "sasaki/errors.hpp"
#include "sasaki/frame.hpp"
#include "sasaki/manifold.hpp"
#include "sasaki/sasaki.hpp"

namespace sasaki {

struct MeanCurvature {
    // H_σ, σ = 1..n, with respect to ñ_σ = (λ_σ e_σ^H − f_σ^V)/√(1+λ_σ²).
    std::vector<double> components;
    LiftedVector vector;
    double magnitude = 0.0;
    bool degenerate = false;
    std::vector<double> lambda;
};

namespace detail {

inline double sum_squares(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0, [](double s, double x) { return s + x * x; });
}

// The closed-form bracket
//   (1/√(1+λ_σ²)) { <r(e_0,e_0)ξ,f_σ> + Σ_α [<r(e_α,e_α)ξ,f_σ> + λ_σλ_α <R(e_σ,e_α)ξ,f_α>] / (1+λ_α²) }
// which equals −(n+1)H_σ in the ñ_σ orientation used here.
inline std::vector<double> closed_form_bracket(const LocalGeometry& lg, const SingularFrame& fr,
                                               const RTensorAtPoint& r) {
    const std::size_t n = fr.n();
    const auto& g = lg.metric;
    std::vector<Vec> r_diag;
    for (std::size_t i = 0; i <= n; ++i) r_diag.push_back(r.apply(fr.e_at(i), fr.e_at(i)));
    std::vector<double> out(n);
    for (std::size_t s = 1; s <= n; ++s) {
        const double ls = fr.lambda_at(s);
        double acc = g.inner(r_diag[0], fr.f_at(s));
        for (std::size_t a = 1; a <= n; ++a) {
            const double la = fr.lambda_at(a);
            double term = g.inner(r_diag[a], fr.f_at(s));
            if (ls != 0.0 && la != 0.0) {
                term += ls * la * g.inner(lg.riemann.apply(fr.e_at(s), fr.e_at(a), lg.xi), fr.f_at(a));
            }
            acc += term / (1.0 + la * la);
        }
        out[s - 1] = acc / std::sqrt(1.0 + ls * ls);
    }
    return out;
}

}  // namespace detail

// Evaluates H from already computed point data. The closed form and the
// trace of the second fundamental form are both computed; a disagreement
// beyond rounding raises ConsistencyError.
inline MeanCurvature mean_curvature_from(const LocalGeometry& lg, const SingularFrame& fr, const RTensorAtPoint& r) {
    const std::size_t n = fr.n();
    const double scale = static_cast<double>(n + 1);
    const auto bracket = detail::closed_form_bracket(lg, fr, r);
    const SecondForm omega = second_form_from(lg, fr, r);

    MeanCurvature h;
    h.lambda = fr.lambda;
    h.degenerate = fr.degenerate;
    h.components.resize(n);
    for (std::size_t s = 1; s <= n; ++s) {
        const double closed = -bracket[s - 1] / scale;
        const double traced = omega.trace(s, fr) / scale;
        if (std::abs(closed - traced) > 1e-10 * (1.0 + std::abs(closed))) {
            throw ConsistencyError("closed-form H and second-form trace disagree");
        }
        h.components[s - 1] = closed;
    }
    const auto frames = submanifold_frames_from(lg, fr);
    h.vector = {Vec::Zero(static_cast<Eigen::Index>(n + 1)), Vec::Zero(static_cast<Eigen::Index>(n + 1)), lg.point,
                lg.xi};
    for (std::size_t s = 1; s <= n; ++s) h.vector += h.components[s - 1] * frames.normal[s - 1];
    h.magnitude = std::sqrt(detail::sum_squares(h.components));
    return h;
}

inline MeanCurvature mean_curvature_at(const UnitField& f, std::span<const double> p, const FrameOptions& opt = {}) {
    const LocalGeometry lg = local_geometry(f, p);
    const SingularFrame fr = singular_frame_at(nabla_xi_from(lg), opt);
    return mean_curvature_from(lg, fr, r_tensor_from(lg));
}

// (n+1)H_σ = (1/√(1+λ_σ²)) Σ_i [e_σ(λ_i) − (λ_i+λ_σ)G_{i|σ} + (λ_iλ_σ−1)<R(e_σ,e_i)ξ,f_i>] / (1+λ_i²)
// with λ_0 = 0, f_0 = 0 and frame derivatives by finite differences.
// Components come out in the same orientation as the closed-form bracket.
inline MeanCurvature mean_curvature_sh_at(const UnitField& f, std::span<const double> p, double h = 0.0,
                                          const FrameOptions& opt = {}) {
    const AlignedFrameField af = aligned_frame_field(f, p, h, opt);
    const LocalGeometry lg = local_geometry(f, p);
    const SingularFrame& fr = af.frame;
    const std::size_t n = fr.n();
    auto lam = [&](std::size_t i) { return i == 0 ? 0.0 : fr.lambda_at(i); };

    MeanCurvature out;
    out.lambda = fr.lambda;
    out.degenerate = fr.degenerate;
    out.components.resize(n);
    for (std::size_t s = 1; s <= n; ++s) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            double term = af.dlambda(s, i) - (lam(i) + lam(s)) * af.G(i, s);
            if (i >= 1) {
                term += (lam(i) * lam(s) - 1.0) *
                        lg.metric.inner(lg.riemann.apply(fr.e_at(s), fr.e_at(i), lg.xi), fr.f_at(i));
            }
            acc += term / (1.0 + lam(i) * lam(i));
        }
        out.components[s - 1] = -acc / (std::sqrt(1.0 + lam(s) * lam(s)) * static_cast<double>(n + 1));
    }
    const auto frames = submanifold_frames_from(lg, fr);
    out.vector = {Vec::Zero(static_cast<Eigen::Index>(n + 1)), Vec::Zero(static_cast<Eigen::Index>(n + 1)), lg.point,
                  lg.xi};
    for (std::size_t s = 1; s <= n; ++s) out.vector += out.components[s - 1] * frames.normal[s - 1];
    out.magnitude = std::sqrt(detail::sum_squares(out.components));
    return out;
}

namespace detail {

inline void require_surface(const UnitField& f) {
    if (f.dim() != 2) throw DimensionError("this route needs a two-dimensional manifold");
}

// 4th-order central difference of `fn` along direction `dir` at `p`.
template <class Fn>
double directional_derivative(Fn&& fn, const Point& p, const Vec& dir, double h) {
    double acc = 0.0;
    const Vec base = to_vec(p);
    for (int s = 0; s < 4; ++s) {
        acc += kWeights[s] * fn(to_point(base + kStencil[s] * h * dir));
    }
    return acc / h;
}

// η: ξ rotated by +90° in the g-orthonormal frame.
inline Vec rotate_quarter(const LocalGeometry& lg) {
    const Vec y = lg.metric.to_orthonormal(lg.xi);
    Vec eta_y(2);
    eta_y << -y(1), y(0);
    return lg.metric.from_orthonormal(eta_y);
}

// On a surface ∇_X ξ = ω(X) η, so the singular value carries a sign:
// λ = <∇_{e_1}ξ, η> with e_1 oriented along `reference`. Unlike |λ| this is
// smooth through zeros of ∇ξ.
inline double signed_lambda(const LocalGeometry& lg, const Vec& reference) {
    Vec e1 = singular_frame_at(nabla_xi_from(lg)).e_at(1);
    if (e1.dot(reference) < 0.0) e1 = -e1;
    return lg.metric.inner(lg.nabla_along(e1), rotate_quarter(lg));
}

}  // namespace detail

// H = (1/(2√(1+λ²))) { −<∇_{e_0}e_0, e_1> λ + e_1(λ)/(1+λ²) } on a surface,
// with λ signed as above.
inline double mean_curvature_2d_at(const UnitField& f, std::span<const double> p, double h = 0.0) {
    detail::require_surface(f);
    if (h <= 0.0) h = default_step(f.host().domain());
    const LocalGeometry lg = local_geometry(f, p);
    const SingularFrame fr = singular_frame_at(nabla_xi_from(lg));
    const Vec e0 = fr.e_at(0);
    const Vec e1 = fr.e_at(1);
    const double lambda = detail::signed_lambda(lg, e1);

    double geodesic_term = 0.0;
    if (std::abs(lambda) > 1e-9) {
        Vec de0 = Vec::Zero(2);
        const Vec base = to_vec(lg.point);
        for (int s = 0; s < 4; ++s) {
            const Point q = to_point(base + detail::kStencil[s] * h * e0);
            const LocalGeometry lq = local_geometry(f, q, false);
            Vec eq = singular_frame_at(nabla_xi_from(lq)).e_at(0);
            if (lg.metric.inner(eq, e0) < 0.0) eq = -eq;
            de0 += detail::kWeights[s] / h * eq;
        }
        const Vec nabla_e0_e0 = de0 + lg.christoffel.contract(e0, e0);
        geodesic_term = -lg.metric.inner(nabla_e0_e0, e1) * lambda;
    }
    const double e1_lambda = detail::directional_derivative(
        [&](const Point& q) { return detail::signed_lambda(local_geometry(f, q, false), e1); }, lg.point, e1, h);
    return (geodesic_term + e1_lambda / (1.0 + lambda * lambda)) / (2.0 * std::sqrt(1.0 + lambda * lambda));
}

namespace detail {

// Geodesic curvatures k = <∇_ξ ξ, η>, κ = −<∇_η ξ, η>.
inline std::pair<double, double> frenet_curvatures(const LocalGeometry& lg) {
    const Vec eta = rotate_quarter(lg);
    const double k = lg.metric.inner(lg.nabla_along(lg.xi), eta);
    const double kappa = -lg.metric.inner(lg.nabla_along(eta), eta);
    return {k, kappa};
}

}  // namespace detail

// H = ½ [ ξ(k/√(1+k²+κ²)) − η(κ/√(1+k²+κ²)) ] on a surface.
inline double mean_curvature_frenet_at(const UnitField& f, std::span<const double> p, double h = 0.0) {
    detail::require_surface(f);
    if (h <= 0.0) h = default_step(f.host().domain());
    const LocalGeometry lg = local_geometry(f, p);
    const Vec eta = detail::rotate_quarter(lg);
    auto phi = [&](const Point& q) {
        const auto [k, kappa] = detail::frenet_curvatures(local_geometry(f, q, false));
        return k / std::sqrt(1.0 + k * k + kappa * kappa);
    };
    auto psi = [&](const Point& q) {
        const auto [k, kappa] = detail::frenet_curvatures(local_geometry(f, q, false));
        return kappa / std::sqrt(1.0 + k * k + kappa * kappa);
    };
    return 0.5 * (detail::directional_derivative(phi, lg.point, lg.xi, h) -
                  detail::directional_derivative(psi, lg.point, eta, h));
}

namespace detail {

// Orthonormal basis (chart coordinates) of ξ^⊥.
inline Mat orthogonal_complement(const LocalGeometry& lg) {
    const std::size_t dim = lg.dim();
    const Vec xi_hat = lg.metric.to_orthonormal(lg.xi).normalized();
    std::vector<Vec> basis{xi_hat};
    Mat out(dim, dim - 1);
    Eigen::Index col = 0;
    for (std::size_t k = 0; k < dim && col < static_cast<Eigen::Index>(dim - 1); ++k) {
        Vec c = Vec::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k));
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) c -= b.dot(c) * b;
        if (c.norm() > 1e-6) {
            c.normalize();
            basis.push_back(c);
            out.col(col++) = lg.metric.from_orthonormal(c);
        }
    }
    return out;
}

struct PrincipalData {
    std::vector<double> k;  // principal curvatures, ordered by |k| descending
    Mat directions;         // columns e_1..e_n (chart coordinates)
    double asymmetry = 0.0; // Frobenius residual of ξ^⊥
};

// Principal curvatures of the leaves: eigen-pairs of A_ξ = −∇ξ restricted to ξ^⊥.
inline PrincipalData principal_data(const LocalGeometry& lg) {
    const Mat b = orthogonal_complement(lg);
    const Eigen::Index n = b.cols();
    Mat s(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index c = 0; c < n; ++c) s(a, c) = -lg.metric.inner(lg.nabla_along(b.col(c)), b.col(a));
    PrincipalData out;
    out.asymmetry = (s - s.transpose()).cwiseAbs().maxCoeff();
    const Mat sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Vec ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (std::abs(ev(x)) != std::abs(ev(y))) return std::abs(ev(x)) > std::abs(ev(y));
        return ev(x) > ev(y);
    });
    out.directions = Mat(b.rows(), n);
    for (Eigen::Index a = 0; a < n; ++a) {
        out.k.push_back(ev(order[static_cast<std::size_t>(a)]));
        out.directions.col(a) = b * es.eigenvectors().col(order[static_cast<std::size_t>(a)]);
    }
    return out;
}

}  // namespace detail

struct FoliationTolerances {
    double geodesic = 1e-8;
    double integrable = 1e-8;
};

// H_σ = (1/((n+1)√(1+k_σ²))) Σ_α [−e_σ(k_α) + (1 − k_αk_σ)<R(ξ,e_α)e_α, e_σ>] / (1+k_α²)
// for a geodesic field with integrable ξ^⊥. Components are ordered like the
// singular values (|k| descending).
inline std::vector<double> foliation_mean_curvature_at(const UnitField& f, std::span<const double> p, double h = 0.0,
                                                       const FoliationTolerances& tol = {}) {
    if (h <= 0.0) h = default_step(f.host().domain());
    const LocalGeometry lg = local_geometry(f, p);
    const double geo = lg.metric.norm(lg.nabla_along(lg.xi));
    if (geo >= tol.geodesic) throw NotGeodesicError("|nabla_xi xi| = " + format_double(geo));
    const detail::PrincipalData pd = detail::principal_data(lg);
    if (pd.asymmetry >= tol.integrable) {
        throw NotIntegrableError("orthogonal distribution is not integrable (residual " + format_double(pd.asymmetry) +
                                 ")");
    }
    const std::size_t n = pd.k.size();
    Mat dk(n, n);  // dk(σ, α) = e_σ(k_α)
    for (std::size_t s = 0; s < n; ++s) {
        const Vec dir = pd.directions.col(static_cast<Eigen::Index>(s));
        for (std::size_t a = 0; a < n; ++a) {
            dk(s, a) = detail::directional_derivative(
                [&](const Point& q) { return detail::principal_data(local_geometry(f, q, false)).k[a]; }, lg.point, dir,
                h);
        }
    }
    std::vector<double> out(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double ks = pd.k[s];
        const Vec es = pd.directions.col(static_cast<Eigen::Index>(s));
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double ka = pd.k[a];
            const Vec ea = pd.directions.col(static_cast<Eigen::Index>(a));
            const double curv = lg.metric.inner(lg.riemann.apply(lg.xi, ea, ea), es);
            acc += (-dk(s, a) + (1.0 - ka * ks) * curv) / (1.0 + ka * ka);
        }
        out[s] = acc / (static_cast<double>(n + 1) * std::sqrt(1.0 + ks * ks));
    }
    return out;
}

// Density of the induced volume relative to M: Π √(1+λ_α²).
inline double volume_density_from(const SingularFrame& fr) {
    double d = 1.0;
    for (double l : fr.lambda) d *= std::sqrt(1.0 + l * l);
    return d;
}

inline double volume_density_at(const UnitField& f, std::span<const double> p) {
    return volume_density_from(singular_frame_at(nabla_xi_at(f, p)));
}

struct StronglyNormalReport {
    bool is_geodesic = false;
    bool is_strongly_normal = false;
    bool is_normal = false;
    double geodesic_residual = 0.0;
    double strong_residual = 0.0;  // max |r(X,Y)ξ − <r(X,Y)ξ,ξ>ξ| over X, Y ∈ ξ^⊥ basis
    double normal_residual = 0.0;  // same for R(X,Y)ξ
};

inline StronglyNormalReport strongly_normal_check_from(const LocalGeometry& lg, const RTensorAtPoint& r,
                                                       double tol = 1e-8) {
    StronglyNormalReport rep;
    rep.geodesic_residual = lg.metric.norm(lg.nabla_along(lg.xi));
    const Mat b = detail::orthogonal_complement(lg);
    auto off_xi = [&](const Vec& v) { return lg.metric.norm(v - lg.metric.inner(v, lg.xi) * lg.xi); };
    for (Eigen::Index a = 0; a < b.cols(); ++a)
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            rep.strong_residual = std::max(rep.strong_residual, off_xi(r.apply(b.col(a), b.col(c))));
            rep.normal_residual =
                std::max(rep.normal_residual, off_xi(lg.riemann.apply(b.col(a), b.col(c), lg.xi)));
        }
    rep.is_geodesic = rep.geodesic_residual < tol;
    rep.is_strongly_normal = rep.strong_residual < tol;
    rep.is_normal = rep.normal_residual < tol;
    return rep;
}

inline StronglyNormalReport strongly_normal_check(const UnitField& f, std::span<const double> p, double tol = 1e-8) {
    const LocalGeometry lg = local_geometry(f, p);
    return strongly_normal_check_from(lg, r_tensor_from(lg), tol);
}

}  // namespace sasaki
