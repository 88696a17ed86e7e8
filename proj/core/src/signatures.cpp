#include "roughstop/signatures.hpp"

#include <algorithm>
#include <cmath>

#include "roughstop/error.hpp"
#include "roughstop/parallel.hpp"

namespace roughstop {

namespace {

constexpr double kVarianceFloor = 1e-16;

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Time: return "time";
    case Channel::Vol: return "vol";
    case Channel::Price: return "price";
  }
  return "?";
}

// c = a (x) b truncated at level 3; level 0 of either operand may be arbitrary.
void multiply(std::span<const double> a, std::span<const double> b, std::size_t d, std::span<double> c) {
  const std::size_t o1 = 1;
  const std::size_t o2 = 1 + d;
  const std::size_t o3 = 1 + d + d * d;
  std::fill(c.begin(), c.end(), 0.0);
  c[0] = a[0] * b[0];
  for (std::size_t i = 0; i < d; ++i) c[o1 + i] = a[0] * b[o1 + i] + a[o1 + i] * b[0];
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      c[o2 + i * d + j] =
          a[0] * b[o2 + i * d + j] + a[o1 + i] * b[o1 + j] + a[o2 + i * d + j] * b[0];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t w = (i * d + j) * d + k;
        c[o3 + w] = a[0] * b[o3 + w] + a[o1 + i] * b[o2 + j * d + k] +
                    a[o2 + i * d + j] * b[o1 + k] + a[o3 + w] * b[0];
      }
    }
  }
}

// s <- s (x) exp(delta), with s_0 == 1.
void extend(std::span<double> s, std::span<const double> delta) {
  const std::size_t d = delta.size();
  const std::size_t o1 = 1;
  const std::size_t o2 = 1 + d;
  const std::size_t o3 = 1 + d + d * d;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double s2 = s[o2 + i * d + j];
      const double half = 0.5 * s[o1 + i] * delta[j];
      const double sixth = delta[i] * delta[j] / 6.0;
      for (std::size_t k = 0; k < d; ++k) {
        s[o3 + (i * d + j) * d + k] += (s2 + half + sixth) * delta[k];
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s[o2 + i * d + j] += (s[o1 + i] + 0.5 * delta[i]) * delta[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) s[o1 + i] += delta[i];
}

void augmented_row(const PathEnsemble& e, std::size_t path, std::size_t t,
                   const std::vector<Channel>& channels, std::span<double> out) {
  for (std::size_t c = 0; c < channels.size(); ++c) {
    switch (channels[c]) {
      case Channel::Time: out[c] = e.grid[t]; break;
      case Channel::Vol: out[c] = std::log(std::max(e.variance(path, t), kVarianceFloor)); break;
      case Channel::Price: out[c] = std::log(e.asset(path, t) / e.spot); break;
    }
  }
}

}  // namespace

ChannelSet ChannelSet::parse(std::string_view selector) {
  ChannelSet set;
  set.channels.clear();
  std::size_t start = 0;
  while (start <= selector.size()) {
    const auto pos = selector.find(',', start);
    auto name = selector.substr(start, pos == std::string_view::npos ? pos : pos - start);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    Channel c;
    if (name == "time") {
      c = Channel::Time;
    } else if (name == "vol") {
      c = Channel::Vol;
    } else if (name == "price") {
      c = Channel::Price;
    } else {
      throw Error(ErrorCode::UnknownChannel, "unknown signature channel '" + std::string(name) + "'");
    }
    if (std::find(set.channels.begin(), set.channels.end(), c) != set.channels.end()) {
      throw Error(ErrorCode::InvalidConfig, "duplicate channel '" + std::string(name) + "'");
    }
    set.channels.push_back(c);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (std::find(set.channels.begin(), set.channels.end(), Channel::Time) == set.channels.end() ||
      set.channels.size() < 2) {
    throw Error(ErrorCode::InvalidConfig, "channel selector needs time plus at least one more channel");
  }
  return set;
}

std::string ChannelSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (i) out += ',';
    out += channel_name(channels[i]);
  }
  return out;
}

AugmentedPath time_augment(const PathEnsemble& ensemble, std::size_t path, const ChannelSet& channels) {
  if (ensemble.paths() == 0) throw Error(ErrorCode::InvalidParams, "empty ensemble");
  if (path >= ensemble.paths()) throw Error(ErrorCode::IndexOutOfRange, "path index out of range");
  AugmentedPath out;
  out.points = Matrix(ensemble.steps() + 1, channels.dim());
  for (auto c : channels.channels) out.channel_names.emplace_back(channel_name(c));
  for (std::size_t t = 0; t <= ensemble.steps(); ++t) {
    augmented_row(ensemble, path, t, channels.channels, out.points.row(t));
  }
  return out;
}

std::vector<AugmentedPath> time_augment(const PathEnsemble& ensemble, const ChannelSet& channels) {
  if (ensemble.paths() == 0) throw Error(ErrorCode::InvalidParams, "empty ensemble");
  std::vector<AugmentedPath> out(ensemble.paths());
  parallel_for(ensemble.paths(), [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) out[p] = time_augment(ensemble, p, channels);
  });
  return out;
}

std::span<const double> SignatureVector::level(std::size_t k) const {
  const std::size_t d = dim;
  switch (k) {
    case 0: return {coords.data(), 1};
    case 1: return {coords.data() + 1, d};
    case 2: return {coords.data() + 1 + d, d * d};
    case 3: return {coords.data() + 1 + d + d * d, d * d * d};
    default: throw Error(ErrorCode::IndexOutOfRange, "signature level above 3");
  }
}

SignatureVector identity_signature(std::size_t d) {
  SignatureVector s{std::vector<double>(signature_size(d), 0.0), d};
  s.coords[0] = 1.0;
  return s;
}

SignatureVector segment_signature(std::span<const double> increment) {
  auto s = identity_signature(increment.size());
  extend(s.coords, increment);
  return s;
}

SignatureVector chen_product(const SignatureVector& a, const SignatureVector& b) {
  if (a.dim != b.dim) throw Error(ErrorCode::ShapeMismatch, "signature channel counts differ");
  SignatureVector c{std::vector<double>(signature_size(a.dim)), a.dim};
  multiply(a.coords, b.coords, a.dim, c.coords);
  return c;
}

SignatureVector signature(const AugmentedPath& path, std::size_t from, std::size_t to) {
  if (from > to || to > path.steps()) {
    throw Error(ErrorCode::IndexOutOfRange, "signature range outside the path");
  }
  const std::size_t d = path.dim();
  auto s = identity_signature(d);
  std::vector<double> delta(d);
  for (std::size_t t = from + 1; t <= to; ++t) {
    for (std::size_t c = 0; c < d; ++c) delta[c] = path.points(t, c) - path.points(t - 1, c);
    extend(s.coords, delta);
  }
  return s;
}

SignatureVector signature(const AugmentedPath& path, std::size_t upto) {
  if (upto < 1 || upto > path.steps()) {
    throw Error(ErrorCode::IndexOutOfRange, "signature step " + std::to_string(upto) + " outside 1.." +
                                                std::to_string(path.steps()));
  }
  return signature(path, 0, upto);
}

Matrix signature_stream(const AugmentedPath& path) {
  const std::size_t d = path.dim();
  Matrix out(path.steps() + 1, signature_size(d));
  auto s = identity_signature(d);
  std::vector<double> delta(d);
  std::copy(s.coords.begin(), s.coords.end(), out.row(0).begin());
  for (std::size_t t = 1; t <= path.steps(); ++t) {
    for (std::size_t c = 0; c < d; ++c) delta[c] = path.points(t, c) - path.points(t - 1, c);
    extend(s.coords, delta);
    std::copy(s.coords.begin(), s.coords.end(), out.row(t).begin());
  }
  return out;
}

LogSignatureVector log_signature(const SignatureVector& sig) {
  if (sig.coords.empty() || sig.coords[0] != 1.0) {
    throw Error(ErrorCode::NotGroupLike, "level-0 coefficient must equal 1");
  }
  const std::size_t d = sig.dim;
  const std::size_t m = signature_size(d);
  std::vector<double> a(sig.coords);
  a[0] = 0.0;
  std::vector<double> a2(m);
  std::vector<double> a3(m);
  multiply(a, a, d, a2);
  multiply(a2, a, d, a3);
  LogSignatureVector out{std::vector<double>(m), d};
  for (std::size_t i = 0; i < m; ++i) out.coords[i] = a[i] - 0.5 * a2[i] + a3[i] / 3.0;
  out.coords[0] = 0.0;
  return out;
}

SignatureVector tensor_exp(const LogSignatureVector& log_sig) {
  const std::size_t d = log_sig.dim;
  const std::size_t m = signature_size(d);
  std::vector<double> l(log_sig.coords);
  l[0] = 0.0;
  std::vector<double> l2(m);
  std::vector<double> l3(m);
  multiply(l, l, d, l2);
  multiply(l2, l, d, l3);
  SignatureVector out{std::vector<double>(m), d};
  for (std::size_t i = 0; i < m; ++i) out.coords[i] = l[i] + 0.5 * l2[i] + l3[i] / 6.0;
  out.coords[0] = 1.0;
  return out;
}

std::vector<Matrix> signature_slices(const PathEnsemble& ensemble, const ChannelSet& channels,
                                     std::span<const std::size_t> steps) {
  const std::size_t d = channels.dim();
  const std::size_t m = signature_size(d);
  for (auto s : steps) {
    if (s > ensemble.steps()) throw Error(ErrorCode::IndexOutOfRange, "slice step beyond the grid");
  }
  std::vector<Matrix> out(steps.size(), Matrix(ensemble.paths(), m));
  parallel_for(ensemble.paths(), [&](std::size_t b, std::size_t e) {
    std::vector<double> prev(d);
    std::vector<double> cur(d);
    std::vector<double> delta(d);
    std::vector<double> s(m);
    for (std::size_t p = b; p < e; ++p) {
      std::fill(s.begin(), s.end(), 0.0);
      s[0] = 1.0;
      augmented_row(ensemble, p, 0, channels.channels, prev);
      std::size_t t = 0;
      for (std::size_t k = 0; k < steps.size(); ++k) {
        // Steps may be requested in any order; restart when going backwards.
        if (steps[k] < t) {
          std::fill(s.begin(), s.end(), 0.0);
          s[0] = 1.0;
          t = 0;
          augmented_row(ensemble, p, 0, channels.channels, prev);
        }
        while (t < steps[k]) {
          ++t;
          augmented_row(ensemble, p, t, channels.channels, cur);
          for (std::size_t c = 0; c < d; ++c) delta[c] = cur[c] - prev[c];
          extend(s, delta);
          std::swap(prev, cur);
        }
        std::copy(s.begin(), s.end(), out[k].row(p).begin());
      }
    }
  });
  return out;
}

}  // namespace roughstop
