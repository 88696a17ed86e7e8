#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roughstop/engines.hpp"
#include "roughstop/matrix.hpp"

namespace roughstop {

inline constexpr std::size_t kSignatureDepth = 3;

enum class Channel { Time, Vol, Price };

// Ordered channel selection, e.g. "time,vol,price". The time channel is
// mandatory; names must be unique.
struct ChannelSet {
  std::vector<Channel> channels{Channel::Time, Channel::Vol, Channel::Price};

  static ChannelSet parse(std::string_view selector);
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] std::size_t dim() const noexcept { return channels.size(); }
};

// Channels are t_i (years), log v_i and log(X_i / spot). Variance is floored
// at 1e-16 before taking the log.
struct AugmentedPath {
  Matrix points;  // (steps + 1) x d
  std::vector<std::string> channel_names;

  [[nodiscard]] std::size_t dim() const noexcept { return points.cols(); }
  [[nodiscard]] std::size_t steps() const noexcept { return points.rows() - 1; }
};

AugmentedPath time_augment(const PathEnsemble& ensemble, std::size_t path, const ChannelSet& channels);
std::vector<AugmentedPath> time_augment(const PathEnsemble& ensemble, const ChannelSet& channels);

constexpr std::size_t signature_size(std::size_t d) noexcept { return 1 + d + d * d + d * d * d; }

// Truncated tensor-algebra element, levels 0..3 stored densely:
// [level0 | d | d^2 | d^3], word (i, j, k) at offset 1 + d + d*d + (i*d + j)*d + k.
struct SignatureVector {
  std::vector<double> coords;
  std::size_t dim = 0;

  [[nodiscard]] std::span<const double> level(std::size_t k) const;
  [[nodiscard]] double at(std::size_t i) const { return coords[1 + i]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return coords[1 + dim + i * dim + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t k) const {
    return coords[1 + dim + dim * dim + (i * dim + j) * dim + k];
  }
};

// Log-signature in tensor coordinates (same layout; level 0 is zero).
struct LogSignatureVector {
  std::vector<double> coords;
  std::size_t dim = 0;
};

SignatureVector identity_signature(std::size_t d);

// Signature of one straight segment: level k is increment^{(x)k} / k!.
SignatureVector segment_signature(std::span<const double> increment);

// Truncated tensor product; Chen's identity when a and b are signatures of
// consecutive pieces.
SignatureVector chen_product(const SignatureVector& a, const SignatureVector& b);

// Signature of the piecewise-linear path over points [from, to].
SignatureVector signature(const AugmentedPath& path, std::size_t from, std::size_t to);
// Signature over [0, upto]; requires 1 <= upto <= steps.
SignatureVector signature(const AugmentedPath& path, std::size_t upto);

// Running signatures Sig_{0,t} for t = 0..steps, one row each.
Matrix signature_stream(const AugmentedPath& path);

// log(S) = A - A^2/2 + A^3/3 with A = S - 1. Throws NotGroupLike if S_0 != 1.
LogSignatureVector log_signature(const SignatureVector& sig);

// exp(L) = 1 + L + L^2/2 + L^3/6 for an element with zero level 0.
SignatureVector tensor_exp(const LogSignatureVector& log_sig);

// Per-path signature coordinates at each requested simulation step
// (0 gives the identity). Result[k] is paths x signature_size(d).
std::vector<Matrix> signature_slices(const PathEnsemble& ensemble, const ChannelSet& channels,
                                     std::span<const std::size_t> steps);

}  // namespace roughstop
