#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "roughstop/error.hpp"
#include "roughstop/signatures.hpp"

using namespace roughstop;

namespace {

AugmentedPath random_path(std::size_t d, std::size_t segments, std::mt19937_64& g) {
  std::normal_distribution<double> z(0.0, 0.5);
  AugmentedPath p;
  p.points = Matrix(segments + 1, d);
  for (std::size_t c = 1; c < d; ++c) p.points(0, c) = z(g);
  for (std::size_t s = 1; s <= segments; ++s) {
    p.points(s, 0) = p.points(s - 1, 0) + 0.1 + std::abs(z(g));
    for (std::size_t c = 1; c < d; ++c) p.points(s, c) = p.points(s - 1, c) + z(g);
  }
  return p;
}

std::vector<std::vector<double>> rows_of(const AugmentedPath& p) {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < p.points.rows(); ++r) out.emplace_back(p.points.row(r).begin(), p.points.row(r).end());
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

PathEnsemble flat_ensemble() {
  PathEnsemble e;
  e.asset = Matrix(2, 4, 100.0);
  e.variance = Matrix(2, 4, 0.04);
  e.dW = Matrix(2, 3, 0.0);
  e.grid = {0.0, 1.0 / 252, 2.0 / 252, 3.0 / 252};
  e.spot = 100.0;
  return e;
}

}  // namespace

TEST(Channels, SizesAndParsing) {
  EXPECT_EQ(signature_size(3), 40u);
  EXPECT_EQ(signature_size(2), 15u);
  EXPECT_EQ(ChannelSet{}.dim(), 3u);
  EXPECT_EQ(ChannelSet::parse("time,vol").dim(), 2u);
  EXPECT_EQ(ChannelSet::parse("time,vol,price").to_string(), "time,vol,price");
  for (const char* bad : {"time,spin", "vol,price", "time", "time,vol,vol"}) {
    EXPECT_THROW(ChannelSet::parse(bad), Error) << bad;
  }
  try {
    ChannelSet::parse("time,spin");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownChannel);
  }
}

TEST(TimeAugment, FlatPathHasConstantChannels) {
  const auto e = flat_ensemble();
  const auto p = time_augment(e, 0, ChannelSet{});
  ASSERT_EQ(p.dim(), 3u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_EQ(p.points(s, 0), e.grid[s]);
    EXPECT_EQ(p.points(s, 1), std::log(0.04));
    EXPECT_EQ(p.points(s, 2), 0.0);
  }
  const auto two = time_augment(e, 1, ChannelSet::parse("time,vol"));
  EXPECT_EQ(two.dim(), 2u);
  EXPECT_EQ(signature(two, 3).coords.size(), 15u);
}

TEST(Signature, ConstantPathIsIdentity) {
  AugmentedPath p;
  p.points = Matrix(5, 3, 0.7);
  const auto s = signature(p, 4);
  EXPECT_EQ(s.coords, identity_signature(3).coords);
}

TEST(Signature, SingleSegmentIsTensorExponential) {
  const std::vector<double> dx{0.3, -1.2, 0.5};
  const auto s = segment_signature(dx);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(s.at(i), dx[i]);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(s.at(i, j), dx[i] * dx[j] / 2);
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(s.at(i, j, k), dx[i] * dx[j] * dx[k] / 6, 1e-16);
    }
  }
}

TEST(Signature, FiveSegmentFixtureMatchesBruteForce) {
  std::mt19937_64 g(5);
  const auto p = random_path(2, 5, g);
  const auto s = signature(p, 5);
  const auto brute = oracle::brute_signature(rows_of(p), 10000);
  EXPECT_LE(max_abs_diff(s.coords, brute), 1e-6);
}

TEST(Signature, ChenAtEveryInteriorSplit) {
  std::mt19937_64 g(8);
  const auto p = random_path(3, 6, g);
  const auto whole = signature(p, 0, 6);
  for (std::size_t b = 1; b < 6; ++b) {
    const auto prod = chen_product(signature(p, 0, b), signature(p, b, 6));
    EXPECT_LE(max_abs_diff(prod.coords, whole.coords), 1e-12);
  }
}

TEST(Signature, ShuffleAtLevelTwo) {
  std::mt19937_64 g(9);
  const auto p = random_path(3, 6, g);
  const auto s = signature(p, 6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.at(i) * s.at(j), s.at(i, j) + s.at(j, i), 1e-12);
}

TEST(Signature, PrependingZeroSegmentChangesNothing) {
  std::mt19937_64 g(10);
  const auto p = random_path(3, 4, g);
  AugmentedPath q;
  q.points = Matrix(6, 3);
  for (std::size_t c = 0; c < 3; ++c) q.points(0, c) = p.points(0, c);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 3; ++c) q.points(r + 1, c) = p.points(r, c);
  EXPECT_LE(max_abs_diff(signature(q, 5).coords, signature(p, 4).coords), 1e-15);
}

TEST(Signature, StreamMatchesPrefixSignatures) {
  std::mt19937_64 g(11);
  const auto p = random_path(3, 5, g);
  const auto stream = signature_stream(p);
  ASSERT_EQ(stream.rows(), 6u);
  for (std::size_t t = 1; t <= 5; ++t) {
    const auto s = signature(p, t);
    for (std::size_t k = 0; k < s.coords.size(); ++k) EXPECT_NEAR(stream(t, k), s.coords[k], 1e-13);
  }
}

TEST(Signature, IndexErrors) {
  std::mt19937_64 g(12);
  const auto p = random_path(2, 3, g);
  for (std::size_t upto : {0u, 4u}) {
    try {
      signature(p, upto);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
    }
  }
}

TEST(LogSignature, IdentityAndSegment) {
  const auto l = log_signature(identity_signature(3));
  for (double c : l.coords) EXPECT_EQ(c, 0.0);
  const std::vector<double> dx{0.4, -0.1, 0.9};
  const auto ls = log_signature(segment_signature(dx));
  EXPECT_EQ(ls.coords[0], 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ls.coords[1 + i], dx[i], 1e-15);
  for (std::size_t k = 4; k < ls.coords.size(); ++k) EXPECT_NEAR(ls.coords[k], 0.0, 1e-15);
}

TEST(LogSignature, IndependentExpInvertsLog) {
  std::mt19937_64 g(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const auto s = signature(random_path(d, 4, g), 4);
    const auto l = log_signature(s);
    EXPECT_LE(max_abs_diff(oracle::tensor_exp(l.coords, d), s.coords), 1e-10);
    EXPECT_LE(max_abs_diff(tensor_exp(l).coords, s.coords), 1e-10);
  }
}

TEST(LogSignature, LogInvertsExp) {
  std::mt19937_64 g(14);
  std::normal_distribution<double> z;
  LogSignatureVector l;
  l.dim = 3;
  l.coords.assign(40, 0.0);
  for (std::size_t k = 1; k < 40; ++k) l.coords[k] = 0.3 * z(g);
  const auto back = log_signature(tensor_exp(l));
  EXPECT_LE(max_abs_diff(back.coords, l.coords), 1e-10);
}

TEST(LogSignature, NotGroupLike) {
  auto s = identity_signature(2);
  s.coords[0] = 2.0;
  try {
    log_signature(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotGroupLike);
  }
}

TEST(Slices, MatchPerPathSignatures) {
  SimulationSpec spec;
  spec.paths = 8;
  spec.steps = 5;
  const auto e = simulate_heston(EngineParams{}, spec);
  const std::vector<std::size_t> steps{0, 2, 5};
  const auto slices = signature_slices(e, ChannelSet{}, steps);
  ASSERT_EQ(slices.size(), 3u);
  for (std::size_t p = 0; p < 8; ++p) {
    const auto path = time_augment(e, p, ChannelSet{});
    EXPECT_EQ(slices[0](p, 0), 1.0);
    for (std::size_t k = 1; k < 40; ++k) EXPECT_EQ(slices[0](p, k), 0.0);
    for (std::size_t i = 1; i < 3; ++i) {
      const auto s = signature(path, steps[i]);
      for (std::size_t k = 0; k < 40; ++k) EXPECT_NEAR(slices[i](p, k), s.coords[k], 1e-13);
    }
  }
}
