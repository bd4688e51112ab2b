// Resolution of the permutation ambiguity between true and estimated target
// angle vectors.
#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace jcas {

enum class SetMethod : uint8_t { kNone = 0, kSortInput = 1, kSortAll = 2, kPermute = 3 };

std::string_view to_string(SetMethod m);
SetMethod set_method_from_string(std::string_view s);

struct AnglePair {
  std::vector<double> truth;
  std::vector<double> estimate;
};

// Truth sorted ascending, estimate untouched.
AnglePair sortinput(AnglePair pair);
// Both vectors sorted ascending.
AnglePair sortall(AnglePair pair);
// Estimate reordered by the permutation minimizing the MSE against truth;
// ties broken by the lexicographically smallest permutation.
AnglePair permute_match(AnglePair pair);

// Mean squared difference over the present targets; 0 for an empty pair.
double pair_mse(const AnglePair& pair);

// Index into the estimate vector for each truth slot, per method, over the
// first `count` entries. Used to wire the training loss; for kSortInput and
// kNone this is the identity.
std::vector<uint32_t> pairing_for(SetMethod method, std::span<const double> truth,
                                  std::span<const double> estimate);

// Best assignment between vectors of possibly different lengths: returns
// min(|truth|, |estimate|) index pairs (truth_idx, est_idx) minimizing the
// total squared error, by exhaustive enumeration.
std::vector<std::pair<uint32_t, uint32_t>> match_min_pairs(std::span<const double> truth,
                                                           std::span<const double> estimate);

}  // namespace jcas
