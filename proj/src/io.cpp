#include "fairrec/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <fstream>
#include <sstream>

#include "fairrec/error.hpp"

namespace fairrec {

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    if (token == "inf") return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::kParseError, "not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

void AppendList(std::string& s, const std::vector<double>& values) {
  s += ' ' + std::to_string(values.size());
  for (double v : values) s += ' ' + FormatDouble(v);
}

void AppendAffine(std::string& s, const AffineInNoise& m) {
  s += ' ' + FormatDouble(m.scale);
  AppendList(s, m.scale_coeffs);
  s += ' ' + FormatDouble(m.offset);
  AppendList(s, m.offset_coeffs);
}

std::string MechanismText(const Mechanism& mechanism) {
  std::string s;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantMechanism>) {
          s = "constant " + FormatDouble(m.value);
        } else if constexpr (std::is_same_v<T, AffineInNoise>) {
          s = "affine";
          AppendAffine(s, m);
        } else if constexpr (std::is_same_v<T, AdditivePolynomial>) {
          s = "polynomial " + FormatDouble(m.intercept) + ' ' + std::to_string(m.terms.size());
          for (const auto& t : m.terms) {
            s += ' ' + std::to_string(t.parent) + ' ' + FormatDouble(t.coeff) + ' ' +
                 std::to_string(t.power);
          }
        } else if constexpr (std::is_same_v<T, AdditiveKernelRidge>) {
          const std::size_t dim = m.dual.empty() ? 0 : m.centers.size() / m.dual.size();
          s = "kernel_ridge " + FormatDouble(m.intercept) + ' ' + FormatDouble(m.gamma) + ' ' +
              std::to_string(m.dual.size()) + ' ' + std::to_string(dim);
          for (double c : m.centers) s += ' ' + FormatDouble(c);
          for (double d : m.dual) s += ' ' + FormatDouble(d);
        } else if constexpr (std::is_same_v<T, GatedIndicator>) {
          s = "gated " + FormatDouble(m.threshold) + ' ' + FormatDouble(m.gate);
          AppendList(s, m.gate_coeffs);
        } else {
          s = "subsidy";
          AppendAffine(s, m.base);
          s += ' ' + std::to_string(m.treatment_parent) + ' ' + FormatDouble(m.amount) + ' ' +
               FormatDouble(m.threshold);
        }
      },
      mechanism);
  return s;
}

std::string NoiseText(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BernoulliNoise>) {
          return "bernoulli " + FormatDouble(n.p);
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return "gaussian " + FormatDouble(n.mean) + ' ' + FormatDouble(n.variance);
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          return "uniform " + FormatDouble(n.lo) + ' ' + FormatDouble(n.hi);
        } else {
          std::string s = "empirical";
          AppendList(s, n.values);
          return s;
        }
      },
      noise);
}

class TokenCursor {
 public:
  TokenCursor(std::vector<std::string> tokens, std::size_t line)
      : tokens_(std::move(tokens)), line_(line) {}

  const std::string& Next() {
    if (pos_ >= tokens_.size()) Fail("unexpected end of line");
    return tokens_[pos_++];
  }
  double Double() { return ParseDouble(Next()); }
  std::size_t Count() {
    const std::string& t = Next();
    std::size_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) Fail("expected a count, got '" + t + "'");
    if (v > 100000000) Fail("count too large");
    return v;
  }
  std::vector<double> List() {
    std::vector<double> out(Count());
    for (auto& v : out) v = Double();
    return out;
  }
  void ExpectEnd() {
    if (pos_ != tokens_.size()) Fail("trailing tokens");
  }
  [[noreturn]] void Fail(const std::string& msg) const {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_) + ": " + msg);
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

AffineInNoise ParseAffine(TokenCursor& c) {
  AffineInNoise m;
  m.scale = c.Double();
  m.scale_coeffs = c.List();
  m.offset = c.Double();
  m.offset_coeffs = c.List();
  return m;
}

Mechanism ParseMechanism(TokenCursor& c) {
  const std::string tag = c.Next();
  if (tag == "constant") return ConstantMechanism{c.Double()};
  if (tag == "affine") return ParseAffine(c);
  if (tag == "polynomial") {
    AdditivePolynomial m;
    m.intercept = c.Double();
    m.terms.resize(c.Count());
    for (auto& t : m.terms) {
      t.parent = c.Count();
      t.coeff = c.Double();
      t.power = static_cast<int>(c.Count());
    }
    return m;
  }
  if (tag == "kernel_ridge") {
    AdditiveKernelRidge m;
    m.intercept = c.Double();
    m.gamma = c.Double();
    const std::size_t n = c.Count();
    const std::size_t dim = c.Count();
    m.centers.resize(n * dim);
    for (auto& v : m.centers) v = c.Double();
    m.dual.resize(n);
    for (auto& v : m.dual) v = c.Double();
    return m;
  }
  if (tag == "gated") {
    GatedIndicator m;
    m.threshold = c.Double();
    m.gate = c.Double();
    m.gate_coeffs = c.List();
    return m;
  }
  if (tag == "subsidy") {
    ThresholdSubsidy m;
    m.base = ParseAffine(c);
    m.treatment_parent = c.Count();
    m.amount = c.Double();
    m.threshold = c.Double();
    return m;
  }
  c.Fail("unknown mechanism '" + tag + "'");
}

NoiseSpec ParseNoise(TokenCursor& c) {
  const std::string tag = c.Next();
  if (tag == "bernoulli") return BernoulliNoise{c.Double()};
  if (tag == "gaussian") {
    const double mean = c.Double();
    return GaussianNoise{mean, c.Double()};
  }
  if (tag == "uniform") {
    const double lo = c.Double();
    return UniformNoise{lo, c.Double()};
  }
  if (tag == "empirical") return EmpiricalNoise{c.List()};
  c.Fail("unknown noise '" + tag + "'");
}

}  // namespace

std::string SerializeScm(const Scm& scm) {
  std::string s = "scm 1\n";
  s += std::string("estimated ") + (scm.estimated() ? "true" : "false") + '\n';
  s += "protected_domain";
  AppendList(s, scm.protected_domain());
  s += '\n';
  for (const auto& v : scm.variables()) s += "variable " + v.name + ' ' + std::string(VariableKindName(v.kind)) + '\n';
  for (const auto& e : scm.exogenous()) s += "exogenous " + e.name + ' ' + NoiseText(e.noise) + '\n';
  for (const auto& eq : scm.named_equations()) {
    s += "equation " + eq.child + ' ' + (eq.noise.empty() ? "-" : eq.noise) + ' ' +
         std::to_string(eq.parents.size());
    for (const auto& p : eq.parents) s += ' ' + p;
    s += ' ' + MechanismText(eq.mechanism) + '\n';
  }
  return s;
}

Scm ParseScm(std::string_view text) {
  std::vector<Variable> variables;
  std::vector<ExogenousSpec> exogenous;
  std::vector<StructuralEquation> equations;
  std::vector<double> domain;
  bool estimated = false;
  bool saw_header = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == text.npos ? text.npos : nl - start);
    start = nl == text.npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    auto tokens = SplitWhitespace(line);
    if (tokens.empty()) continue;
    TokenCursor c(std::move(tokens), line_no);
    const std::string key = c.Next();
    if (key == "scm") {
      if (c.Next() != "1") c.Fail("unsupported format version");
      saw_header = true;
    } else if (key == "estimated") {
      const std::string v = c.Next();
      if (v != "true" && v != "false") c.Fail("estimated must be true or false");
      estimated = v == "true";
    } else if (key == "protected_domain") {
      domain = c.List();
    } else if (key == "variable") {
      Variable v;
      v.name = c.Next();
      v.kind = ParseVariableKind(c.Next());
      variables.push_back(std::move(v));
    } else if (key == "exogenous") {
      ExogenousSpec e;
      e.name = c.Next();
      e.noise = ParseNoise(c);
      exogenous.push_back(std::move(e));
    } else if (key == "equation") {
      StructuralEquation eq;
      eq.child = c.Next();
      eq.noise = c.Next();
      if (eq.noise == "-") eq.noise.clear();
      eq.parents.resize(c.Count());
      for (auto& p : eq.parents) p = c.Next();
      eq.mechanism = ParseMechanism(c);
      equations.push_back(std::move(eq));
    } else {
      c.Fail("unknown directive '" + key + "'");
    }
    c.ExpectEnd();
  }
  if (!saw_header) throw Error(ErrorCode::kParseError, "missing 'scm 1' header");
  return Scm(std::move(variables), std::move(exogenous), std::move(equations), std::move(domain),
             estimated);
}

void SaveScm(const Scm& scm, const std::filesystem::path& path) { WriteFile(path, SerializeScm(scm)); }

Scm LoadScm(const std::filesystem::path& path) { return ParseScm(ReadFile(path)); }

// ---------------------------------------------------------------------------

namespace {

std::filesystem::path Sidecar(const std::filesystem::path& path, std::string_view suffix) {
  return std::filesystem::path(path.string() + std::string(suffix));
}

std::vector<std::string> Lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == text.npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.emplace_back(line);
    start = nl + 1;
  }
  return out;
}

}  // namespace

void WriteDataset(const std::filesystem::path& path, const Scm& scm,
                  const std::vector<Instance>& rows) {
  const bool labels = !rows.empty() && std::all_of(rows.begin(), rows.end(),
                                                   [](const Instance& v) { return v.label.has_value(); });
  const bool exo = !rows.empty() && std::all_of(rows.begin(), rows.end(),
                                                [](const Instance& v) { return v.exogenous.has_value(); });
  std::string csv;
  for (std::size_t i = 0; i < scm.num_endogenous(); ++i) csv += (i ? "," : "") + scm.variable(i).name;
  if (labels) csv += ",y";
  csv += '\n';
  for (const auto& v : rows) {
    if (v.values.size() != scm.num_endogenous())
      throw Error(ErrorCode::kMissingVariable, "row does not cover the SCM's variables");
    for (std::size_t i = 0; i < v.values.size(); ++i) csv += (i ? "," : "") + FormatDouble(v.values[i]);
    if (labels) csv += ',' + std::to_string(*v.label);
    csv += '\n';
  }
  WriteFile(path, csv);

  std::string schema;
  for (const auto& var : scm.variables())
    schema += "variable " + var.name + ' ' + std::string(VariableKindName(var.kind)) + '\n';
  if (labels) schema += "label y\n";
  WriteFile(Sidecar(path, ".schema"), schema);

  const auto exo_path = Sidecar(path, ".exogenous.csv");
  if (exo) {
    std::string e;
    for (std::size_t j = 0; j < scm.num_exogenous(); ++j) e += (j ? "," : "") + scm.exogenous(j).name;
    e += '\n';
    for (const auto& v : rows) {
      for (std::size_t j = 0; j < v.exogenous->size(); ++j) e += (j ? "," : "") + FormatDouble((*v.exogenous)[j]);
      e += '\n';
    }
    WriteFile(exo_path, e);
  } else {
    std::filesystem::remove(exo_path);
  }
}

std::vector<Instance> ReadDataset(const std::filesystem::path& path, const Scm& scm) {
  const auto lines = Lines(ReadFile(path));
  if (lines.empty()) throw Error(ErrorCode::kParseError, path.string() + " has no header");
  const auto header = SplitCsvLine(lines[0]);
  std::vector<std::size_t> column(scm.num_endogenous());
  std::optional<std::size_t> label_col;
  for (std::size_t i = 0; i < scm.num_endogenous(); ++i) {
    const auto it = std::find(header.begin(), header.end(), scm.variable(i).name);
    if (it == header.end())
      throw Error(ErrorCode::kMissingVariable, path.string() + " lacks column " + scm.variable(i).name);
    column[i] = static_cast<std::size_t>(it - header.begin());
  }
  if (const auto it = std::find(header.begin(), header.end(), "y"); it != header.end())
    label_col = static_cast<std::size_t>(it - header.begin());

  std::vector<Instance> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = SplitCsvLine(lines[r]);
    if (cells.size() != header.size())
      throw Error(ErrorCode::kParseError, path.string() + ": row " + std::to_string(r) + " has wrong width");
    Instance v;
    v.values.resize(scm.num_endogenous());
    for (std::size_t i = 0; i < column.size(); ++i) v.values[i] = ParseDouble(cells[column[i]]);
    if (label_col) {
      const double y = ParseDouble(cells[*label_col]);
      if (y != 1.0 && y != -1.0) throw Error(ErrorCode::kParseError, "labels must be -1 or +1");
      v.label = static_cast<int>(y);
    }
    rows.push_back(std::move(v));
  }

  const auto exo_path = Sidecar(path, ".exogenous.csv");
  if (std::filesystem::exists(exo_path)) {
    const auto exo_lines = Lines(ReadFile(exo_path));
    if (exo_lines.size() != rows.size() + 1)
      throw Error(ErrorCode::kParseError, exo_path.string() + " row count does not match the dataset");
    const auto exo_header = SplitCsvLine(exo_lines[0]);
    std::vector<std::optional<std::size_t>> exo_column(scm.num_exogenous());
    bool complete = true;
    for (std::size_t j = 0; j < scm.num_exogenous(); ++j) {
      const auto it = std::find(exo_header.begin(), exo_header.end(), scm.exogenous(j).name);
      if (it == exo_header.end()) complete = false;
      else exo_column[j] = static_cast<std::size_t>(it - exo_header.begin());
    }
    // A sidecar from a different SCM (e.g. the oracle's, read against a fitted
    // SCM with other noise names) is ignored rather than partially applied.
    if (complete) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto cells = SplitCsvLine(exo_lines[r + 1]);
        ExogenousVector u(scm.num_exogenous());
        for (std::size_t j = 0; j < u.size(); ++j) u[j] = ParseDouble(cells.at(*exo_column[j]));
        rows[r].exogenous = std::move(u);
      }
    }
  }
  return rows;
}

}  // namespace fairrec
