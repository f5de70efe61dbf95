#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fairrec/scm.hpp"

namespace fairrec::testing {

// Reference minimal-cost recourse by materialising every candidate action,
// sorting candidates into enumeration order and scanning. Written without the
// engine's grid, enumeration or propagation helpers.
struct OracleAnswer {
  bool found = false;
  std::vector<std::pair<std::size_t, double>> action;
  double cost = 0.0;
  std::vector<double> achieved;
};

struct OracleProblem {
  std::vector<double> factual;
  std::vector<double> u;  // abducted noise; unused when scm == nullptr
  const Scm* scm = nullptr;  // nullptr: features move independently
  std::vector<std::size_t> actionable;
  std::vector<double> lo_data;  // training min per actionable variable
  std::vector<double> hi_data;
  int bins = 7;
  bool endpoint_cost = false;
  std::function<double(std::span<const double>)> decision;
};

OracleAnswer SolveExhaustively(const OracleProblem& problem);

// Grid values for one coordinate, recomputed from the range formula.
std::vector<double> OracleGrid(double x, double lo_data, double hi_data, int bins);

}  // namespace fairrec::testing
