#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/dilation.hpp"
#include "mmsim/random.hpp"
#include "oracles.hpp"

using namespace mmsim;
using Catch::Matchers::WithinAbs;

namespace {

CMat apply_kraus(const std::vector<CMat>& kraus, const CMat& x) {
  CMat out(kraus[0].rows());
  for (const auto& k : kraus) out += k * x * k.adjoint();
  return out;
}

CMat apply_kraus_dual(const std::vector<CMat>& kraus, const CMat& a) {
  CMat out(kraus[0].cols());
  for (const auto& k : kraus) out += k.adjoint() * a * k;
  return out;
}

std::vector<CMat> random_kraus(RandomSource& rng, std::size_t din, std::size_t dout, std::size_t count) {
  std::vector<CMat> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(rng.ginibre(dout, din));
  return out;
}

POVM computational_basis(std::size_t d) {
  std::vector<CMat> e;
  for (std::size_t i = 0; i < d; ++i) e.push_back(CMat::unit(d, i, i));
  return POVM(d, e);
}

}  // namespace

TEST_CASE("Choi matrix of the identity channel", "[qcore][choi]") {
  // sum_ij |i><j| (x) |i><j| has ones exactly at ((i,i),(j,j)).
  const CMat j = identity_channel(3).choi();
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t c = 0; c < 9; ++c) {
      const bool hit = (r / 3 == r % 3) && (c / 3 == c % 3);
      REQUIRE(j(r, c) == Complex(hit ? 1.0 : 0.0));
    }
  REQUIRE(j.factor_dims() == std::vector<std::size_t>{3, 3});
}

TEST_CASE("Choi round trip and action agree with Kraus form", "[qcore][choi]") {
  RandomSource rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t din = rng.between(1, 4), dout = rng.between(1, 4);
    const auto kraus = random_kraus(rng, din, dout, rng.between(1, 3));
    const CPMap m = cpmap_from_kraus(kraus, din, dout);
    const CMat x = rng.ginibre(din, din);
    REQUIRE(distance(map_of_choi(m, x), apply_kraus(kraus, x)) < 1e-10);

    const CMat a = rng.ginibre(dout, dout);
    REQUIRE(distance(dual_apply(m, a), apply_kraus_dual(kraus, a)) < 1e-10);

    const CMat again = choi_of_map([&](const CMat& z) { return map_of_choi(m, z); }, din, dout);
    REQUIRE(distance(again, m.choi()) < 1e-10);

    const CPMap from_dual = cpmap_from_dual([&](const CMat& z) { return dual_apply(m, z); }, din, dout);
    REQUIRE(distance(from_dual.choi(), m.choi()) < 1e-10);
  }
}

TEST_CASE("dual map satisfies the trace duality", "[qcore][choi]") {
  RandomSource rng(22);
  const CPMap m = rng.cp_map(3, 2);
  const CMat a = rng.hermitian(2), d = rng.hermitian(3);
  const Complex lhs = (dual_apply(m, a) * d).trace();
  const Complex rhs = (a * map_of_choi(m, d)).trace();
  REQUIRE(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("channel flags", "[qcore][choi]") {
  RandomSource rng(23);
  const CPMap ch = rng.channel(3, 2);
  REQUIRE(is_cp(ch));
  REQUIRE(is_trace_preserving(ch));
  REQUIRE(is_trace_nonincreasing(ch));

  const Instrument inst = rng.instrument(2, 3, 3);
  REQUIRE_NOTHROW(validate(inst));
  REQUIRE(is_trace_nonincreasing(inst[0]));
  REQUIRE_FALSE(is_trace_preserving(inst[0]));

  SECTION("transpose is positive but not completely positive") {
    const CPMap t(2, 2, choi_of_map([](const CMat& x) { return x.transpose(); }, 2, 2));
    REQUIRE_FALSE(is_cp(t));
    REQUIRE_THROWS_AS(validate(t), NotPSDError);
    REQUIRE(is_trace_preserving(t));
  }

  SECTION("doubling a channel breaks trace non-increase") {
    REQUIRE_FALSE(is_trace_nonincreasing(scaled(ch, 2.0)));
  }
}

TEST_CASE("multimeter Choi encoding", "[qcore][multimeter]") {
  RandomSource rng(24);
  const Multimeter m = rng.multimeter(3, 2, 2);
  const CMat j = multimeter_choi(m);
  REQUIRE(j.rows() == 12);
  REQUIRE(j.factor_dims() == std::vector<std::size_t>{2, 2, 3});

  SECTION("entries sit where the tensor formula puts them") {
    CMat expected(12);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t a = 0; a < 2; ++a)
        expected += oracle::tensor(oracle::tensor(CMat::unit(2, a, a), m.effect(a, x).transpose()),
                                   CMat::unit(3, x, x));
    REQUIRE(distance(j, expected) == 0.0);
  }

  SECTION("decoding is bit-exact") {
    const Multimeter back = multimeter_of_choi(j, 2, 2, 3);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t a = 0; a < 2; ++a) REQUIRE(back.effect(a, x).data() == m.effect(a, x).data());
  }

  SECTION("off-block weight is rejected") {
    CMat bad = j;
    bad(0, 1) += 0.1;  // couples setting 0 and setting 1
    bad(1, 0) += 0.1;
    REQUIRE_THROWS_AS(multimeter_of_choi(bad, 2, 2, 3), NotMultimeterChoiError);
  }

  SECTION("unnormalised blocks are rejected") {
    REQUIRE_THROWS_AS(multimeter_of_choi(j * 0.9, 2, 2, 3), NormalizationError);
  }

  SECTION("a non-positive effect is rejected") {
    // M_0 = diag(1.5, 0), M_1 = diag(-0.5, 1) still sums to the identity.
    std::vector<POVM> povms{POVM(2, {CMat::diagonal({1.5, 0.0}), CMat::diagonal({-0.5, 1.0})})};
    const CMat jb = multimeter_choi(Multimeter(povms));
    REQUIRE_THROWS_AS(multimeter_of_choi(jb, 2, 2, 1), NotPSDError);
  }

  SECTION("wrong size") { REQUIRE_THROWS_AS(multimeter_of_choi(j, 2, 2, 2), DimensionError); }
}

TEST_CASE("multimeter_apply and postprocessing", "[qcore][multimeter]") {
  RandomSource rng(25);
  const Multimeter m = rng.multimeter(2, 3, 2);
  const CMat rho = rng.density(2);
  const auto p = multimeter_apply(m, rho, 1);
  REQUIRE(p.size() == 3);
  REQUIRE_THAT(p[0] + p[1] + p[2], WithinAbs(1.0, 1e-12));
  for (double v : p) REQUIRE(v >= -1e-12);

  REQUIRE_THROWS_AS(multimeter_apply(m, rho * 2.0, 0), StateError);
  REQUIRE_THROWS_AS(multimeter_apply(m, CMat::diagonal({1.5, -0.5}), 0), StateError);
  REQUIRE_THROWS_AS(multimeter_apply(m, rho, 2), DimensionError);

  SECTION("coarse-graining the computational basis") {
    const POVM z = computational_basis(3);
    CondProb mu(2, {3});
    mu(0, {0}) = 1.0;
    mu(1, {1}) = 1.0;
    mu(1, {2}) = 1.0;
    const POVM n = postprocess_povm(z, mu);
    REQUIRE(distance(n[0], CMat::diagonal({1.0, 0.0, 0.0})) == 0.0);
    REQUIRE(distance(n[1], CMat::diagonal({0.0, 1.0, 1.0})) == 0.0);
  }

  SECTION("fully mixing postprocessing gives a trivial POVM") {
    const POVM n = postprocess_povm(m[0], CondProb::uniform(2, {3}));
    REQUIRE(distance(n[0], CMat::identity(2) * 0.5) < 1e-12);
  }
}

TEST_CASE("CondProb", "[qcore]") {
  CondProb p(2, {3, 2});
  REQUIRE(p.slices() == 6);
  REQUIRE_THROWS_AS(validate(p), NormalizationError);
  const auto det = CondProb::deterministic(2, {3, 2}, [](const auto& c) { return (c[0] + c[1]) % 2; });
  REQUIRE_NOTHROW(validate(det));
  REQUIRE(det(1, {2, 1}) == 1.0);
  REQUIRE(det(1, {1, 1}) == 0.0);
  REQUIRE(det.unflatten(det.flatten({2, 1})) == std::vector<std::size_t>{2, 1});
  REQUIRE_THROWS_AS(det(0, {3, 0}), DimensionError);
}

TEST_CASE("Stinespring dilation", "[qcore][dilation]") {
  RandomSource rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t din = rng.between(1, 3), dout = rng.between(1, 3);
    const std::size_t kr = rng.between(1, din * dout);
    const CPMap m = rng.cp_map(din, dout, kr);
    const auto dil = stinespring(m);
    REQUIRE(dil.s == kr);
    REQUIRE(dil.v.rows() == dout * dil.s);
    REQUIRE(dil.v.cols() == din);
    const CMat a = rng.ginibre(dout, dout);
    REQUIRE(distance(dilation_dual(dil, a), dual_apply(m, a)) < 1e-9);
  }

  SECTION("channels dilate to isometries") {
    const CPMap ch = rng.channel(2, 3);
    const auto dil = stinespring(ch);
    REQUIRE(distance(dil.v.adjoint() * dil.v, CMat::identity(2)) < 1e-10);
    const CPMap sub = rng.instrument(2, 3, 2)[0];
    const auto dil2 = stinespring(sub);
    REQUIRE(distance(dil2.v.adjoint() * dil2.v, CMat::identity(2)) > 1e-3);
  }

  SECTION("padding keeps the dual map") {
    const CPMap m = rng.cp_map(2, 2, 1);
    const auto dil = stinespring(m, 5);
    REQUIRE(dil.s == 5);
    REQUIRE(dil.support == 1);
    const CMat a = rng.hermitian(2);
    REQUIRE(distance(dilation_dual(dil, a), dual_apply(m, a)) < 1e-10);
  }

  SECTION("zero map still gets one ancilla level") {
    const auto dil = stinespring(CPMap(2, 2, CMat(4)));
    REQUIRE(dil.s == 1);
    REQUIRE(dil.support == 0);
  }

  SECTION("non-CP input is rejected") {
    const CPMap t(2, 2, choi_of_map([](const CMat& x) { return x.transpose(); }, 2, 2));
    REQUIRE_THROWS_AS(stinespring(t), NotPSDError);
  }
}

namespace {

// Independent least-squares solve of part*(E_ab) = V^dag (E_ab (x) Q) V for
// Q in C^{s x s} via Eigen's complete orthogonal decomposition.
CMat least_squares_derivative(const StinespringDilation& dil, const CPMap& part) {
  const std::size_t s = dil.s, dout = dil.dout, din = dil.din;
  Eigen::MatrixXcd lhs(dout * dout * din * din, s * s);
  Eigen::VectorXcd rhs(dout * dout * din * din);
  std::size_t row = 0;
  for (std::size_t al = 0; al < dout; ++al)
    for (std::size_t be = 0; be < dout; ++be) {
      const CMat target = dual_apply(part, CMat::unit(dout, al, be));
      for (std::size_t p = 0; p < din; ++p)
        for (std::size_t q = 0; q < din; ++q, ++row) {
          rhs(row) = target(p, q);
          for (std::size_t c = 0; c < s; ++c)
            for (std::size_t e = 0; e < s; ++e)
              lhs(row, c * s + e) = std::conj(dil.v(al * s + c, p)) * dil.v(be * s + e, q);
        }
    }
  const Eigen::VectorXcd sol = lhs.completeOrthogonalDecomposition().solve(rhs);
  CMat q(s);
  for (std::size_t c = 0; c < s; ++c)
    for (std::size_t e = 0; e < s; ++e) q(c, e) = sol(c * s + e);
  return q;
}

}  // namespace

TEST_CASE("Radon-Nikodym derivatives of instrument branches", "[qcore][dilation]") {
  RandomSource rng(27);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t din = rng.between(1, 3), dout = rng.between(1, 3), outcomes = rng.between(1, 4);
    const Instrument inst = rng.instrument(din, dout, outcomes, rng.between(1, 2));
    const auto dil = stinespring(channel_of(inst));
    const POVM q = radon_nikodym(inst.branches(), dil);
    REQUIRE(q.k() == outcomes);
    REQUIRE_NOTHROW(validate(q, Tolerances{.eq = 1e-7}));
    for (std::size_t b = 0; b < outcomes; ++b) {
      REQUIRE(distance(q[b], least_squares_derivative(dil, inst[b])) < 1e-7);
      for (int probe = 0; probe < 3; ++probe) {
        const CMat a = rng.ginibre(dout, dout);
        REQUIRE(distance(dilation_compress(dil, a, q[b]), dual_apply(inst[b], a)) < 1e-7);
      }
    }
  }

  SECTION("padded dilation: complement is shared evenly") {
    const Instrument inst = rng.instrument(2, 2, 3, 1);
    const auto dil = stinespring(channel_of(inst), 6);
    REQUIRE(dil.support < 6);
    const POVM q = radon_nikodym(inst.branches(), dil);
    REQUIRE_NOTHROW(validate(q, Tolerances{.eq = 1e-7}));
    // the last ancilla level is pure padding
    for (std::size_t b = 0; b < 3; ++b) REQUIRE_THAT(q[b](5, 5).real(), WithinAbs(1.0 / 3.0, 1e-9));
    for (std::size_t b = 0; b < 3; ++b) {
      const CMat a = rng.hermitian(2);
      REQUIRE(distance(dilation_compress(dil, a, q[b]), dual_apply(inst[b], a)) < 1e-7);
    }
  }

  SECTION("parts that do not sum to the dilated map") {
    const Instrument inst = rng.instrument(2, 2, 2);
    const auto dil = stinespring(channel_of(inst));
    std::vector<CPMap> parts{inst[0], scaled(inst[1], 1.5)};
    REQUIRE_THROWS_AS(radon_nikodym(parts, dil), DecompositionError);
  }

  SECTION("a part outside the dilation's span") {
    // The dilated map is the identity channel (s = 1), so every part must be a
    // multiple of it; the complete dephasing branch is not.
    const auto dil = stinespring(identity_channel(2));
    const CPMap deph = cpmap_from_kraus({CMat::unit(2, 0, 0), CMat::unit(2, 1, 1)}, 2, 2);
    const CPMap rest(2, 2, identity_channel(2).choi() - deph.choi());
    REQUIRE_THROWS_AS(radon_nikodym({deph, rest}, dil), DecompositionError);
  }
}
