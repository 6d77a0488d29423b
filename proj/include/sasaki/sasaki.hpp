#pragma once

// The Sasaki metric on the unit tangent bundle restricted to the image ξ(M):
// lifts, tangent and normal frames, and the second fundamental form.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sasaki/errors.hpp"
#include "sasaki/frame.hpp"
#include "sasaki/manifold.hpp"

namespace sasaki {

// A tangent vector of TM at (p, ξ_p), stored by its two projections:
// horizontal = π_* X̃ and vertical = K X̃, both in T_pM chart coordinates.
struct LiftedVector {
    Vec horizontal;
    Vec vertical;
    Point base_point;
    Vec base_vector;

    const Vec& projection() const { return horizontal; }       // π_*
    const Vec& connection_map() const { return vertical; }     // K

    // Components in the natural frame {∂/∂u^i, ∂/∂ξ^i} of TM:
    // X̃^i = π_* X̃, X̃^{n+i} = (K X̃)^i − Γ^i_{jk} ξ^j X̃^k.
    Vec natural_components(const ChristoffelAtPoint& c) const {
        const Eigen::Index n = horizontal.size();
        Vec out(2 * n);
        out.head(n) = horizontal;
        out.tail(n) = vertical - c.contract(base_vector, horizontal);
        return out;
    }

    static LiftedVector from_natural(const Vec& natural, const ChristoffelAtPoint& c, Point base, Vec xi) {
        const Eigen::Index n = natural.size() / 2;
        LiftedVector v;
        v.horizontal = natural.head(n);
        v.vertical = natural.tail(n) + c.contract(xi, v.horizontal);
        v.base_point = std::move(base);
        v.base_vector = std::move(xi);
        return v;
    }

    LiftedVector& operator+=(const LiftedVector& o) {
        horizontal += o.horizontal;
        vertical += o.vertical;
        return *this;
    }
    friend LiftedVector operator+(LiftedVector a, const LiftedVector& b) { return a += b; }
    friend LiftedVector operator*(double s, LiftedVector a) {
        a.horizontal *= s;
        a.vertical *= s;
        return a;
    }
};

inline LiftedVector horizontal_lift(const Vec& x, const Point& p, const Vec& xi) {
    return {x, Vec::Zero(x.size()), p, xi};
}

inline LiftedVector vertical_lift(const Vec& x, const Point& p, const Vec& xi) {
    return {Vec::Zero(x.size()), x, p, xi};
}

// X^t = X^V − <X, ξ> ξ^V
inline LiftedVector tangential_lift(const Vec& x, const MetricAtPoint& g, const Point& p, const Vec& xi) {
    return {Vec::Zero(x.size()), x - g.inner(x, xi) * xi, p, xi};
}

inline double sasaki_inner(const LiftedVector& a, const LiftedVector& b, const MetricAtPoint& g) {
    if (a.base_point != b.base_point || a.base_vector.size() != b.base_vector.size() ||
        (a.base_vector - b.base_vector).cwiseAbs().maxCoeff() > 0.0) {
        throw BasePointMismatchError("Sasaki inner product of vectors at different base points");
    }
    return g.inner(a.horizontal, b.horizontal) + g.inner(a.vertical, b.vertical);
}

// Tangent frame ẽ_0 = e_0^H, ẽ_α = e_α^H + (∇_{e_α}ξ)^V, and the unit normal
// frame ñ_σ = (λ_σ e_σ^H − f_σ^V)/√(1+λ_σ²) of ξ(M).
struct SubmanifoldFrames {
    std::vector<LiftedVector> tangent;
    std::vector<LiftedVector> normal;
};

inline SubmanifoldFrames submanifold_frames_from(const LocalGeometry& lg, const SingularFrame& fr) {
    SubmanifoldFrames out;
    const std::size_t n = fr.n();
    for (std::size_t i = 0; i <= n; ++i) {
        const Vec e = fr.e_at(i);
        out.tangent.push_back({e, lg.nabla_along(e), lg.point, lg.xi});
    }
    for (std::size_t s = 1; s <= n; ++s) {
        const double lam = fr.lambda_at(s);
        const double w = 1.0 / std::sqrt(1.0 + lam * lam);
        out.normal.push_back({w * lam * fr.e_at(s), -w * fr.f_at(s), lg.point, lg.xi});
    }
    return out;
}

inline SubmanifoldFrames submanifold_frames_at(const UnitField& f, std::span<const double> p,
                                               const FrameOptions& opt = {}) {
    const LocalGeometry lg = local_geometry(f, p);
    return submanifold_frames_from(lg, singular_frame_at(nabla_xi_from(lg), opt));
}

// Diagonal of the first fundamental form in the tangent frame: 1, 1+λ_α².
inline std::vector<double> first_form_diagonal(const SingularFrame& fr) {
    std::vector<double> d{1.0};
    for (double l : fr.lambda) d.push_back(1.0 + l * l);
    return d;
}

// Ω_{σ|ik} = <<∇̃_{ẽ_i} ẽ_k, ñ_σ>> for the unnormalised tangent frame and the
// normal frame above. omega(σ, i, k) with σ = 1..n.
class SecondForm {
public:
    SecondForm() = default;
    explicit SecondForm(std::size_t n) : n_(n), data_(n * (n + 1) * (n + 1), 0.0) {}

    std::size_t n() const { return n_; }
    double omega(std::size_t sigma, std::size_t i, std::size_t k) const {
        return data_[((sigma - 1) * (n_ + 1) + i) * (n_ + 1) + k];
    }
    double& omega(std::size_t sigma, std::size_t i, std::size_t k) {
        return data_[((sigma - 1) * (n_ + 1) + i) * (n_ + 1) + k];
    }

    // G̃^{ii} Ω_{σ|ii}
    double trace(std::size_t sigma, const SingularFrame& fr) const {
        const auto d = first_form_diagonal(fr);
        double s = 0.0;
        for (std::size_t i = 0; i <= n_; ++i) s += omega(sigma, i, i) / d[i];
        return s;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// Reduced component formulas in the singular frame:
//   Ω_{σ|00} = −<r(e_0,e_0)ξ, f_σ> / √(1+λ_σ²)
//   Ω_{σ|α0} = −½ {<r(e_α,e_0)ξ + r(e_0,e_α)ξ, f_σ> + λ_σλ_α <R(e_σ,e_0)ξ, f_α>} / √(1+λ_σ²)
//   Ω_{σ|αβ} = −½ {<r(e_α,e_β)ξ + r(e_β,e_α)ξ, f_σ> + λ_αλ_σ <R(e_σ,e_β)ξ, f_α>
//                  + λ_βλ_σ <R(e_σ,e_α)ξ, f_β>} / √(1+λ_σ²)
// The overall minus sign is the orientation of ñ_σ relative to
// −[(∇ξ)^* f_σ]^H + f_σ^V.
inline SecondForm second_form_from(const LocalGeometry& lg, const SingularFrame& fr, const RTensorAtPoint& r) {
    const std::size_t n = fr.n();
    const auto& g = lg.metric;
    SecondForm out(n);
    // lam(i) with λ_0 = 0
    auto lam = [&](std::size_t i) { return i == 0 ? 0.0 : fr.lambda_at(i); };
    // <R(e_a, e_b)ξ, f_c>
    auto curv = [&](std::size_t a, std::size_t b, std::size_t c) {
        return g.inner(lg.riemann.apply(fr.e_at(a), fr.e_at(b), lg.xi), fr.f_at(c));
    };
    for (std::size_t s = 1; s <= n; ++s) {
        const double w = 1.0 / std::sqrt(1.0 + lam(s) * lam(s));
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = i; k <= n; ++k) {
                const Vec sym = r.apply(fr.e_at(i), fr.e_at(k)) + r.apply(fr.e_at(k), fr.e_at(i));
                double v = g.inner(sym, fr.f_at(s));
                if (i >= 1) v += lam(i) * lam(s) * curv(s, k, i);
                if (k >= 1) v += lam(k) * lam(s) * curv(s, i, k);
                const double om = -0.5 * w * v;
                out.omega(s, i, k) = om;
                out.omega(s, k, i) = om;
            }
        }
    }
    return out;
}

inline SecondForm second_form_at(const UnitField& f, std::span<const double> p, const FrameOptions& opt = {}) {
    const LocalGeometry lg = local_geometry(f, p);
    const SingularFrame fr = singular_frame_at(nabla_xi_from(lg), opt);
    return second_form_from(lg, fr, r_tensor_from(lg));
}

// The same form assembled without the frame reductions: coordinate lifts
// ∂̃_a = ∂_a^H + (∇_a ξ)^V are differentiated with the Sasaki connection,
//   ∇̃_{∂̃_a} ∂̃_b = [∇_a ∂_b + ½R(ξ,∇_aξ)∂_b + ½R(ξ,∇_bξ)∂_a]^H
//                 + [∇_a∇_bξ − ½R(∂_a,∂_b)ξ]^t,
// paired with ñ_σ through the Sasaki metric and then transformed to the
// singular frame.
inline SecondForm second_form_unreduced(const LocalGeometry& lg, const SingularFrame& fr) {
    const std::size_t dim = lg.dim();
    const std::size_t n = dim - 1;
    const auto& g = lg.metric;
    const auto& c = lg.christoffel;

    // ∂_a (∇_b ξ^k)
    std::vector<Mat> d_nabla(dim, Mat::Zero(dim, dim));
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b)
            for (std::size_t k = 0; k < dim; ++k) {
                double s = lg.ddxi[k](a, b);
                for (std::size_t m = 0; m < dim; ++m) s += c.dgamma(a, k, b, m) * lg.xi(m) + c.gamma(k, b, m) * lg.dxi(m, a);
                d_nabla[a](k, b) = s;
            }

    const SubmanifoldFrames frames = submanifold_frames_from(lg, fr);
    std::vector<Mat> coord(n, Mat::Zero(dim, dim));
    for (std::size_t a = 0; a < dim; ++a) {
        const Vec da = Vec::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(a));
        const Vec na = lg.nabla.col(static_cast<Eigen::Index>(a));
        for (std::size_t b = 0; b < dim; ++b) {
            const Vec db = Vec::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(b));
            const Vec nb = lg.nabla.col(static_cast<Eigen::Index>(b));
            const Vec horiz = c.contract(da, db) + 0.5 * lg.riemann.apply(lg.xi, na, db) +
                              0.5 * lg.riemann.apply(lg.xi, nb, da);
            Vec nab_nab = d_nabla[a].col(static_cast<Eigen::Index>(b)) + c.contract(da, nb);
            const Vec vert_raw = nab_nab - 0.5 * lg.riemann.apply(da, db, lg.xi);
            const LiftedVector lifted{horiz, vert_raw - g.inner(vert_raw, lg.xi) * lg.xi, lg.point, lg.xi};
            for (std::size_t s = 1; s <= n; ++s) coord[s - 1](a, b) = sasaki_inner(lifted, frames.normal[s - 1], g);
        }
    }
    SecondForm out(n);
    for (std::size_t s = 1; s <= n; ++s) {
        const Mat m = fr.e.transpose() * coord[s - 1] * fr.e;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k <= n; ++k) out.omega(s, i, k) = m(i, k);
    }
    return out;
}

}  // namespace sasaki
