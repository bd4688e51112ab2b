#include "jcas/set_match.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace jcas {

std::string_view to_string(SetMethod m) {
  switch (m) {
    case SetMethod::kNone: return "none";
    case SetMethod::kSortInput: return "sortinput";
    case SetMethod::kSortAll: return "sortall";
    case SetMethod::kPermute: return "permute";
  }
  return "unknown";
}

SetMethod set_method_from_string(std::string_view s) {
  if (s == "none") return SetMethod::kNone;
  if (s == "sortinput") return SetMethod::kSortInput;
  if (s == "sortall") return SetMethod::kSortAll;
  if (s == "permute") return SetMethod::kPermute;
  throw std::invalid_argument("unknown set method: " + std::string(s));
}

AnglePair sortinput(AnglePair pair) {
  std::sort(pair.truth.begin(), pair.truth.end());
  return pair;
}

AnglePair sortall(AnglePair pair) {
  std::sort(pair.truth.begin(), pair.truth.end());
  std::sort(pair.estimate.begin(), pair.estimate.end());
  return pair;
}

double pair_mse(const AnglePair& pair) {
  if (pair.truth.size() != pair.estimate.size())
    throw std::invalid_argument("pair_mse: length mismatch");
  if (pair.truth.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pair.truth.size(); ++i) {
    const double d = pair.truth[i] - pair.estimate[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pair.truth.size());
}

namespace {

constexpr std::size_t kMaxEnumerated = 8;

// Lexicographically first permutation of the estimate indices minimizing the
// summed squared error against truth.
std::vector<uint32_t> best_permutation(std::span<const double> truth,
                                       std::span<const double> estimate) {
  const std::size_t t = truth.size();
  if (t > kMaxEnumerated)
    throw std::invalid_argument("permute matching: too many targets to enumerate");
  std::vector<uint32_t> perm(t), best(t);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_sse = std::numeric_limits<double>::infinity();
  do {
    double sse = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      const double d = truth[i] - estimate[perm[i]];
      sse += d * d;
    }
    if (sse < best_sse) {  // strict: keeps the lexicographically first tie
      best_sse = sse;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

AnglePair permute_match(AnglePair pair) {
  if (pair.truth.size() != pair.estimate.size())
    throw std::invalid_argument("permute_match: length mismatch");
  const auto perm = best_permutation(pair.truth, pair.estimate);
  std::vector<double> reordered(pair.estimate.size());
  for (std::size_t i = 0; i < perm.size(); ++i) reordered[i] = pair.estimate[perm[i]];
  pair.estimate = std::move(reordered);
  return pair;
}

std::vector<uint32_t> pairing_for(SetMethod method, std::span<const double> truth,
                                  std::span<const double> estimate) {
  const std::size_t t = truth.size();
  std::vector<uint32_t> idx(t);
  std::iota(idx.begin(), idx.end(), 0);
  switch (method) {
    case SetMethod::kNone:
    case SetMethod::kSortInput:
      return idx;
    case SetMethod::kSortAll:
      std::stable_sort(idx.begin(), idx.end(),
                       [&](uint32_t a, uint32_t b) { return estimate[a] < estimate[b]; });
      return idx;
    case SetMethod::kPermute:
      return best_permutation(truth, estimate);
  }
  return idx;
}

std::vector<std::pair<uint32_t, uint32_t>> match_min_pairs(std::span<const double> truth,
                                                           std::span<const double> estimate) {
  const std::size_t nt = truth.size(), ne = estimate.size();
  const std::size_t p = std::min(nt, ne);
  if (p == 0) return {};
  if (std::max(nt, ne) > kMaxEnumerated)
    throw std::invalid_argument("match_min_pairs: too many targets to enumerate");

  // Enumerate injections of the smaller side into the larger.
  const bool truth_smaller = nt <= ne;
  const std::size_t big = std::max(nt, ne);
  std::vector<uint32_t> sel(big);
  std::iota(sel.begin(), sel.end(), 0);

  std::vector<std::pair<uint32_t, uint32_t>> best;
  double best_sse = std::numeric_limits<double>::infinity();
  // All permutations of the larger index set; the first p entries form the
  // assignment. Redundant orderings of the tail are harmless at these sizes.
  do {
    double sse = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double tv = truth_smaller ? truth[i] : truth[sel[i]];
      const double ev = truth_smaller ? estimate[sel[i]] : estimate[i];
      const double d = tv - ev;
      sse += d * d;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best.clear();
      for (std::size_t i = 0; i < p; ++i) {
        if (truth_smaller)
          best.emplace_back(static_cast<uint32_t>(i), sel[i]);
        else
          best.emplace_back(sel[i], static_cast<uint32_t>(i));
      }
    }
  } while (std::next_permutation(sel.begin(), sel.end()));
  return best;
}

}  // namespace jcas
