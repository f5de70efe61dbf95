#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fairrec/scm.hpp"

namespace fairrec {

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);
double ParseDouble(std::string_view token);  // throws kParseError

std::vector<std::string> SplitWhitespace(std::string_view line);
std::vector<std::string> SplitCsvLine(std::string_view line);

std::string ReadFile(const std::filesystem::path& path);                      // throws kIoError
void WriteFile(const std::filesystem::path& path, std::string_view content);  // throws kIoError

// Plain-text SCM description, one directive per line ('#' starts a comment):
//
//   scm 1
//   estimated false
//   protected_domain <k> <v1> ... <vk>
//   variable <name> <protected|feature|auxiliary>
//   exogenous <name> bernoulli <p>
//   exogenous <name> gaussian <mean> <variance>
//   exogenous <name> uniform <lo> <hi>
//   exogenous <name> empirical <k> <v1> ... <vk>
//   equation <child> <noise|-> <k> <parent1> ... <parentk> <mechanism>
//
// with <mechanism> one of
//   constant <value>
//   affine <scale> <k> <c1..ck> <offset> <k> <c1..ck>
//   polynomial <intercept> <k> (<parent-position> <coeff> <power>)*k
//   kernel_ridge <intercept> <gamma> <n> <dim> <centers, column-major n*dim> <dual n>
//   gated <threshold> <gate> <k> <c1..ck>
//   subsidy <affine payload without the tag> <treatment-position> <amount> <threshold>
std::string SerializeScm(const Scm& scm);
Scm ParseScm(std::string_view text);
void SaveScm(const Scm& scm, const std::filesystem::path& path);
Scm LoadScm(const std::filesystem::path& path);

// Datasets are CSV with a header naming the endogenous variables (SCM order)
// and an optional trailing `y` column. Two sidecars accompany the file:
//   <path>.schema        one `variable <name> <kind>` line per column
//   <path>.exogenous.csv exogenous values per row, header = noise names
// The exogenous sidecar is written only if every row carries exogenous values.
void WriteDataset(const std::filesystem::path& path, const Scm& scm,
                  const std::vector<Instance>& rows);

// Columns are matched to `scm` by name; throws kMissingVariable if one is absent.
// The exogenous sidecar is loaded when present.
std::vector<Instance> ReadDataset(const std::filesystem::path& path, const Scm& scm);

}  // namespace fairrec
