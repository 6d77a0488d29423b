#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "expr_gen.hpp"
#include "sasaki/errors.hpp"
#include "sasaki/expr.hpp"

using namespace sasaki;

namespace {

const SymbolTable kSym3 = SymbolTable::with_default_coordinates(3);
const SymbolTable kSym2 = SymbolTable::with_default_coordinates(2);

double eval_at(const std::string& src, std::vector<double> p) {
    return Expr::parse(src, SymbolTable::with_default_coordinates(p.size())).eval(p);
}

}  // namespace

TEST(ExprParse, BasicValues) {
    EXPECT_DOUBLE_EQ(eval_at("exp(2*u0)", {0.0}), 1.0);
    EXPECT_DOUBLE_EQ(eval_at("u0^2 + sin(u1)", {2.0, 0.0}), 4.0);
    EXPECT_NEAR(eval_at("exp(2*u0*u1)", {1.0, 1.0}), 7.38905609893065, 1e-12);
}

TEST(ExprParse, Precedence) {
    EXPECT_DOUBLE_EQ(eval_at("-u0^2", {3.0}), -9.0);
    EXPECT_DOUBLE_EQ(eval_at("2^3^2", {0.0}), 512.0);
    EXPECT_DOUBLE_EQ(eval_at("1 - 2 - 3", {0.0}), -4.0);
    EXPECT_DOUBLE_EQ(eval_at("8 / 4 / 2", {0.0}), 1.0);
    EXPECT_DOUBLE_EQ(eval_at("2 + 3 * 4", {0.0}), 14.0);
    EXPECT_DOUBLE_EQ(eval_at("-2 * -3", {0.0}), 6.0);
    EXPECT_DOUBLE_EQ(eval_at("(1 + 2) * 3", {0.0}), 9.0);
}

TEST(ExprParse, ConstantsAndFunctions) {
    EXPECT_DOUBLE_EQ(eval_at("pi", {0.0}), std::numbers::pi);
    EXPECT_DOUBLE_EQ(eval_at("e", {0.0}), std::numbers::e);
    EXPECT_DOUBLE_EQ(eval_at("abs(u0) + sqrt(4) + tan(0) + sinh(0) + cosh(0) + tanh(0) + log(1)", {-2.0}), 5.0);
    SymbolTable st = kSym2;
    st.constants["a"] = 2.5;
    EXPECT_DOUBLE_EQ(Expr::parse("a*u1", st).eval(std::vector<double>{0.0, 2.0}), 5.0);
}

TEST(ExprParse, Errors) {
    try {
        Expr::parse("u0 + * 2", kSym2);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 5u);
    }
    try {
        Expr::parse("u0 + w", kSym2);
        FAIL() << "expected UnknownIdentifierError";
    } catch (const UnknownIdentifierError& e) {
        EXPECT_EQ(e.name(), "w");
        EXPECT_EQ(e.offset(), 5u);
    }
    EXPECT_THROW(Expr::parse("u2", kSym2), UnknownIdentifierError);
    EXPECT_THROW(Expr::parse("sin(u0, u1)", kSym2), ArityError);
    EXPECT_THROW(Expr::parse("sin()", kSym2), ArityError);
    EXPECT_THROW(Expr::parse("u0(1)", kSym2), ArityError);
    EXPECT_THROW(Expr::parse("", kSym2), ParseError);
    EXPECT_THROW(Expr::parse("(u0", kSym2), ParseError);
    EXPECT_THROW(Expr::parse("u0 u1", kSym2), ParseError);
    EXPECT_THROW(Expr::parse("u0^u1", kSym2), ParseError);
}

TEST(ExprEval, DomainErrorsNameSubexpression) {
    const auto e = Expr::parse("1 + log(u0 - 1)", kSym2);
    try {
        e.eval(std::vector<double>{0.5, 0.0});
        FAIL() << "expected DomainError";
    } catch (const DomainError& err) {
        EXPECT_EQ(err.subexpression(), "log(u0 - 1)");
    }
    EXPECT_THROW(Expr::parse("sqrt(u0)", kSym2).eval_jet2(std::vector<double>{-1.0, 0.0}), DomainError);
    EXPECT_THROW(Expr::parse("1/u0", kSym2).eval(std::vector<double>{0.0, 0.0}), DomainError);
    EXPECT_THROW(Expr::parse("u0^0.5", kSym2).eval(std::vector<double>{-1.0, 0.0}), DomainError);
    EXPECT_DOUBLE_EQ(Expr::parse("u0^3", kSym2).eval(std::vector<double>{-2.0, 0.0}), -8.0);
}

TEST(ExprEval, PointDimensionChecked) {
    EXPECT_THROW(Expr::parse("u0", kSym2).eval(std::vector<double>{1.0}), Error);
}

TEST(ExprJet, Examples) {
    const auto j = Expr::parse("exp(2*u0)", SymbolTable::with_default_coordinates(1)).eval_jet2(std::vector<double>{1.0});
    const double e2 = std::exp(2.0);
    EXPECT_NEAR(j.value(), e2, 1e-14);
    EXPECT_NEAR(j.grad(0), 2 * e2, 1e-13);
    EXPECT_NEAR(j.hess(0, 0), 4 * e2, 1e-12);

    const auto c = Expr::parse("3", kSym3).eval_jet2(std::vector<double>{0.3, -0.2, 5.0});
    EXPECT_EQ(c.value(), 3.0);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(c.grad(i), 0.0);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(c.hess(i, k), 0.0);
    }

    const auto b = Expr::parse("u0*u1", kSym2).eval_jet2(std::vector<double>{2.0, 3.0});
    EXPECT_EQ(b.value(), 6.0);
    EXPECT_EQ(b.grad(0), 3.0);
    EXPECT_EQ(b.grad(1), 2.0);
    EXPECT_EQ(b.hess(0, 1), 1.0);
    EXPECT_EQ(b.hess(1, 0), 1.0);
    EXPECT_EQ(b.hess(0, 0), 0.0);
}

TEST(ExprJet, MatchesFiniteDifferencesOnGeneratedExpressions) {
    sasaki_test::ExprGenerator gen(2024);
    int checked = 0;
    while (checked < 50) {
        const auto e = Expr::parse(gen.next(), kSym3);
        const auto p = gen.point();
        const auto d = sasaki_test::check_derivatives(e, p);
        EXPECT_LT(d.grad_rel, 1e-6) << e.to_string();
        EXPECT_LT(d.hess_rel, 1e-4) << e.to_string();
        const auto j = e.eval_jet2(p);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(j.hess(a, b), j.hess(b, a));
        ++checked;
    }
}

TEST(ExprPrint, RoundTrip) {
    sasaki_test::ExprGenerator gen(7);
    const std::vector<std::string> fixed{"-u0^2", "(-u0)^2", "u0 - (u1 - u2)", "u0/(u1*u2 + 3)", "2^3^2",
                                         "(2^3)^2", "-(-u0)", "1e-3*u0 + 0.1", "abs(-u1)"};
    std::vector<std::string> sources = fixed;
    for (int i = 0; i < 40; ++i) sources.push_back(gen.next());
    for (const auto& src : sources) {
        const auto e = Expr::parse(src, kSym3);
        const auto back = Expr::parse(e.to_string(), kSym3);
        EXPECT_EQ(back.to_string(), e.to_string());
        for (int k = 0; k < 5; ++k) {
            const auto p = std::vector<double>{0.1 * k + 0.2, -0.3 * k + 0.5, 0.7 - 0.1 * k};
            EXPECT_EQ(e.eval(p), back.eval(p)) << src << " -> " << e.to_string();
        }
    }
}
