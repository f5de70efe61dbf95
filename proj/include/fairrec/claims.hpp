#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace fairrec {

struct ClaimResult {
  int id = 0;
  std::string name;
  std::string measured;
  std::string target;
  std::string tolerance;
  bool met = false;  // the measured value satisfies the target
  double seconds = 0.0;
  double budget_seconds = 0.0;

  bool pass() const { return met && seconds <= budget_seconds; }
};

// Outcome of comparing the recourse solver with an independent brute-force
// enumeration on small grids.
struct EquivalenceSummary {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

struct ClaimOptions {
  int workers = 1;
  // Scratch space for the byte-determinism check (two full runs are written here).
  std::filesystem::path scratch = "claims-scratch";
  std::set<int> only;  // empty: every claim
  // Independent exhaustive solver used by the property suite. Without it the
  // equivalence check reports as not run, which fails the suite.
  std::function<EquivalenceSummary()> solver_equivalence;
};

// Runs the fixed claim suite; `report` sees each result as soon as it is known.
std::vector<ClaimResult> ReproduceClaims(const ClaimOptions& options,
                                         const std::function<void(const ClaimResult&)>& report = {});

// "[PASS] 3 name | measured ... | target ... | tolerance ... | 1.2 s (budget 600 s)"
std::string FormatClaim(const ClaimResult& result);

// Relative error ||g - fd|| / max(||g||, ||fd||) of analytic gradients of the
// training objectives against central differences, worst case over random
// parameter points at which every objective is differentiable.
struct GradientCheck {
  std::string objective;
  std::size_t points = 0;
  double worst_relative_error = 0.0;
};
std::vector<GradientCheck> CheckGradients(std::size_t points, std::uint64_t seed);

}  // namespace fairrec
