#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"

using namespace crgeom;
using crgeom::testing::expect_error;
using crgeom::testing::random_point;

namespace {

const cplx I{0.0, 1.0};

cplx at(const Expr& e, std::vector<cplx> p) { return evaluate(e, p); }

}  // namespace

// ------------------------------------------------------------------ parser

TEST(Parser, PrecedenceAndAssociativity) {
  const std::vector<cplx> p = {cplx{0.3, -0.2}, cplx{1.1, 0.4}};
  const cplx z1 = p[0], z2 = p[1];
  EXPECT_NEAR(std::abs(at(parse("z1 + z2 * z1"), p) - (z1 + z2 * z1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(parse("-z1^2"), p) - (-(z1 * z1))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(parse("z1 - z2 - z1"), p) - (-z2)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(parse("z2 / z1 / z2"), p) - (1.0 / z1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(parse("(z1 + z2)^3"), p) - std::pow(z1 + z2, 3)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(at(parse("z1^-2"), p) - 1.0 / (z1 * z1)), 0.0, 1e-14);
}

TEST(Parser, ComplexLiterals) {
  EXPECT_EQ(at(parse("2i"), {}), (cplx{0.0, 2.0}));
  EXPECT_EQ(at(parse("i"), {}), I);
  EXPECT_EQ(at(parse("1e-3"), {}), (cplx{1e-3, 0.0}));
  EXPECT_EQ(at(parse("3 + 4i"), {}), (cplx{3.0, 4.0}));
  EXPECT_EQ(at(parse(" 1.5 -\t0.5i "), {}), (cplx{1.5, -0.5}));
}

TEST(Parser, FunctionsMatchBuilders) {
  const std::vector<cplx> p = {cplx{0.7, 0.2}, cplx{-0.4, 0.9}};
  const Expr z1 = variable(0), z2 = variable(1);
  const std::pair<const char*, Expr> cases[] = {
      {"conj(z1) * z2", conj(z1) * z2},
      {"re(z1 * z2)", re(z1 * z2)},
      {"abs2(z1 + 2*z2)", abs2(z1 + constant(2.0) * z2)},
      {"log(abs2(z1))", log(abs2(z1))},
  };
  for (const auto& [text, expected] : cases) EXPECT_NEAR(std::abs(at(parse(text), p) - at(expected, p)), 0.0, 1e-14) << text;
}

TEST(Parser, RejectsMalformedInput) {
  for (const char* bad : {"z1 +", "foo(z1)", "z0", "z65", "(z1", "z1)", "z1 ^ z2", "z1 ^ 1.5", "", "conj z1", "3 4"})
    expect_error(ErrorKind::Parse, [&] { (void)parse(bad); });
  expect_error(ErrorKind::Parse, [] { (void)parse("z3 + z1", 2); });
}

TEST(Parser, ErrorReportsOffset) {
  try {
    (void)parse("z1 + * z2");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("offset 5"), std::string::npos) << e.what();
  }
}

TEST(Parser, PrintedFormReparses) {
  std::mt19937_64 rng(11);
  const char* texts[] = {"abs2(z1)^2 + re(3i*z2*conj(z1)) - 1", "log(1 + abs2(z2)) / (2 - z1)",
                         "conj(z1)^3 * z2^-1 + 0.1e1"};
  for (const char* t : texts) {
    const Expr e = parse(t);
    const Expr again = parse(to_string(e));
    for (int k = 0; k < 5; ++k) {
      const auto p = random_point(2, rng, 0.6);
      EXPECT_EQ(at(e, p), at(again, p)) << t << " printed as " << to_string(e);
    }
  }
}

// ------------------------------------------------------------ expressions

TEST(Expr, WirtingerDerivativesOfMonomials) {
  const Expr z = variable(0), zb = variable(0, true);
  const Expr f = pow(z, 3) * zb;  // z^3 conj(z)
  const std::vector<cplx> p = {cplx{0.4, -0.7}};
  const cplx w = p[0];
  EXPECT_NEAR(std::abs(at(differentiate(f, 0, false), p) - 3.0 * w * w * std::conj(w)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(at(differentiate(f, 0, true), p) - w * w * w), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(at(differentiate(log(abs2(z)), 0, false), p) - 1.0 / w), 0.0, 1e-14);
}

TEST(Expr, StructuralZeros) {
  const Expr f = pow(variable(0), 2) * variable(1);
  EXPECT_TRUE(differentiate(f, 0, true).is_zero());
  EXPECT_TRUE(differentiate(f, 2, false).is_zero());
  EXPECT_TRUE(is_holomorphic(f));
  EXPECT_FALSE(is_holomorphic(abs2(variable(0))));
}

TEST(Expr, ConjugationIsInvolutive) {
  std::mt19937_64 rng(3);
  const Expr f = parse("z1^2 * conj(z2) + 2i * log(1 + abs2(z1))");
  for (int k = 0; k < 10; ++k) {
    const auto p = random_point(2, rng);
    EXPECT_NEAR(std::abs(at(conj(f), p) - std::conj(at(f, p))), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(at(conj(conj(f)), p) - at(f, p)), 0.0, 1e-14);
  }
}

TEST(Expr, ZeroTestAndPluriharmonicity) {
  EXPECT_TRUE(vanishes_identically(parse("re(z1) - (z1 + conj(z1)) / 2")));
  EXPECT_TRUE(vanishes_identically(parse("abs2(z1*z2) - abs2(z1)*abs2(z2)")));
  EXPECT_FALSE(vanishes_identically(parse("abs2(z1) - z1^2")));
  EXPECT_TRUE(is_pluriharmonic(parse("re(z1^2) + log(abs2(z2))")));
  EXPECT_TRUE(is_pluriharmonic(parse("conj(z1) * 3 + z2^4")));
  EXPECT_FALSE(is_pluriharmonic(parse("abs2(z1)")));
  EXPECT_FALSE(is_pluriharmonic(parse("re(z1 * conj(z2))")));
}

TEST(Expr, EvaluationDomainErrors) {
  expect_error(ErrorKind::Domain, [] { (void)evaluate(parse("log(z1)"), std::vector<cplx>{0.0}); });
  expect_error(ErrorKind::Domain, [] { (void)evaluate(parse("1 / z1"), std::vector<cplx>{0.0}); });
}

TEST(Expr, DerivativesMatchFiniteDifferences) {
  // Property: for random expressions and points, symbolic d/dz and d/dzbar match central differences.
  std::mt19937_64 rng(2024);
  const char* texts[] = {"abs2(z1)^2 + re(z1^2*conj(z2)) - z2^3", "log(1 + abs2(z1) + abs2(z2)^2)",
                         "(z1 + 2*conj(z2)) / (3 + abs2(z1))", "abs2(z1^2 + z1*z2) * re(z2)"};
  for (const char* t : texts) {
    const Expr f = parse(t);
    for (int trial = 0; trial < 5; ++trial) {
      const auto p = random_point(2, rng, 0.8);
      for (int l = 0; l < 2; ++l)
        for (bool anti : {false, true}) {
          CVec e = CVec::Zero(2);
          e(l) = 1.0;
          const cplx fd = fd_wirtinger([&](std::span<const cplx> q) { return evaluate(f, q); }, p, e, anti);
          const cplx sym = evaluate(differentiate(f, l, anti), p);
          EXPECT_LT(std::abs(sym - fd) / std::max(1.0, std::abs(sym)), kFdRelTol) << t << " d" << l << anti;
        }
    }
  }
}

// ------------------------------------------------------------------- tape

TEST(Tape, MatchesTreeEvaluation) {
  std::mt19937_64 rng(5);
  const Expr f = parse("abs2(z1)^2 + re(z1^2*conj(z2)) - log(2 + abs2(z2))");
  std::vector<Expr> roots = {f, differentiate(f, 0, false), differentiate(f, 1, true),
                             differentiate(differentiate(f, 0, false), 1, true)};
  const Tape tape(roots);
  for (int k = 0; k < 10; ++k) {
    const auto p = random_point(2, rng);
    const auto out = tape.run(p);
    for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(std::abs(out[i] - evaluate(roots[i], p)), 0.0, 1e-13);
  }
}

TEST(Tape, SharesRepeatedSubexpressions) {
  const Expr a = parse("abs2(z1 + z2)");
  const Expr b = parse("abs2(z1 + z2)");  // separately built, structurally equal
  const Tape both(std::vector<Expr>{a, b});
  const Tape one(std::vector<Expr>{a});
  EXPECT_EQ(both.size(), one.size());
  EXPECT_EQ(both.outputs(), 2u);
}

TEST(Tape, ReportsSourceOnDivisionByZero) {
  const Tape t(std::vector<Expr>{parse("1 / (z1 - 1)")});
  try {
    (void)t.run(std::vector<cplx>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
    EXPECT_NE(std::string(e.what()).find("z1"), std::string::npos) << e.what();
  }
}
