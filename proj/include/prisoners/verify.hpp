#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "prisoners/strategies.hpp"

namespace prisoners {

struct VerificationReport {
  std::string id;
  bool pass = false;
  std::string summary;
  /// Plans, permutations or cycles examined.
  std::size_t checked = 0;
  std::vector<std::string> witnesses;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// Registry keys in a fixed order.
const std::vector<std::string>& verify_ids();

/// Instantiates the result's hypothesis (randomized from seed), runs the
/// builders, adversaries and engine, and checks the conclusion exactly.
/// Unknown ids raise DomainError.
VerificationReport verify_theorem(const std::string& id, const nlohmann::json& params, std::uint64_t seed,
                                  unsigned jobs = 1);

/// Random prefix of 1..8 amounts (zeros allowed) on half the total, then a
/// geometric tail carrying the rest.
AllocationPlan random_allocation(std::uint64_t seed, const Rat& total = Rat(1));

}  // namespace prisoners
