#include "seqquant/policy_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace seqquant {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw PolicyFormatError("bad number for " + what + ": '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw PolicyFormatError("bad integer for " + what + ": '" + text + "'");
  return v;
}

class Header {
 public:
  void add(const std::string& key, const std::string& value, int line) {
    if (!values_.emplace(key, value).second)
      throw PolicyFormatError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw PolicyFormatError("missing key '" + key + "'");
    used_.emplace(key, true);
    return it->second;
  }
  double real(const std::string& key) const { return parse_double(str(key), key); }
  int integer(const std::string& key) const {
    const long long v = parse_int(str(key), key);
    if (v < INT32_MIN || v > INT32_MAX) throw PolicyFormatError("integer out of range for " + key);
    return static_cast<int>(v);
  }
  void check_all_used() const {
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) throw PolicyFormatError("unknown key '" + key + "'");
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

void write_kv(std::ostream& out, const char* key, const std::string& value) {
  out << key << " = " << value << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_policy(std::ostream& out, const Policy& p) {
  out << kPolicyMagic << '\n';
  write_kv(out, "model.kind", to_string(p.model.kind()));
  write_kv(out, "model.parameter",
           format_double(p.model.kind() == ModelKind::MeanShift ? p.model.mu() : p.model.sigma2()));
  write_kv(out, "transform", to_string(p.transform));
  write_kv(out, "K", std::to_string(p.K));
  write_kv(out, "design.lambda0", format_double(p.design.lambda0));
  write_kv(out, "design.lambda1", format_double(p.design.lambda1));
  write_kv(out, "design.kappa", format_double(p.design.kappa));
  write_kv(out, "zgrid.step", format_double(p.zgrid.step()));
  write_kv(out, "zgrid.zero_index", std::to_string(p.zgrid.zero_index()));
  write_kv(out, "zgrid.n_points", std::to_string(p.zgrid.n_points()));
  if (p.theta_grid) {
    write_kv(out, "theta_grid.min", format_double(p.theta_grid->theta_min));
    write_kv(out, "theta_grid.max", format_double(p.theta_grid->theta_max));
    write_kv(out, "theta_grid.step", format_double(p.theta_grid->step));
  }
  write_kv(out, "log_A", format_double(p.log_A));
  write_kv(out, "log_B", format_double(p.log_B));
  write_kv(out, "index_A", std::to_string(p.index_A));
  write_kv(out, "index_B", std::to_string(p.index_B));
  out << "[eta_table]\n";
  for (int node = p.first_continuation(); node < p.index_A; ++node) {
    out << format_double(p.zgrid.log_z(node));
    for (double level : p.eta_at(node).levels) out << ' ' << format_double(level);
    out << '\n';
  }
}

Policy read_policy(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || trim(line) != kPolicyMagic)
    throw PolicyFormatError("not a policy file (expected '" + std::string(kPolicyMagic) + "' on line 1)");

  Header header;
  bool table = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t == "[eta_table]") {
      table = true;
      break;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw PolicyFormatError("line " + std::to_string(line_no) + ": expected 'key = value'");
    header.add(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no);
  }
  if (!table) throw PolicyFormatError("missing [eta_table] section");

  Policy p;
  try {
    p.model = make_model(parse_model_kind(header.str("model.kind")), header.real("model.parameter"));
    p.transform = parse_transform(header.str("transform"));
    p.K = header.integer("K");
    if (p.K < 1) throw PolicyFormatError("K must be at least 1");
    p.design = {header.real("design.lambda0"), header.real("design.lambda1"), header.real("design.kappa")};
    p.design.validate();
    p.zgrid = ZGrid::from_step(header.real("zgrid.step"), header.integer("zgrid.zero_index"),
                               header.integer("zgrid.n_points"));
    if (header.has("theta_grid.min") || header.has("theta_grid.max") || header.has("theta_grid.step")) {
      ThetaGrid g;
      g.theta_min = header.real("theta_grid.min");
      g.theta_max = header.real("theta_grid.max");
      g.step = header.real("theta_grid.step");
      g.K = p.K;
      g.transform = p.transform;
      g.validate();
      p.theta_grid = g;
    }
  } catch (const PolicyFormatError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw PolicyFormatError(e.what());
  }
  p.log_A = header.real("log_A");
  p.log_B = header.real("log_B");
  p.index_A = header.integer("index_A");
  p.index_B = header.integer("index_B");
  header.check_all_used();

  const int i0 = p.zgrid.zero_index();
  if (!(p.index_B < i0 && i0 < p.index_A) || p.index_B < -1 || p.index_A > p.zgrid.n_points())
    throw PolicyFormatError("threshold indices do not bracket log z = 0 inside the grid");

  const double tol = 1e-9 * p.zgrid.step();
  for (int node = p.first_continuation(); node < p.index_A; ++node) {
    do {
      if (!std::getline(in, line)) throw PolicyFormatError("eta_table ends early at node " + std::to_string(node));
      ++line_no;
    } while (trim(line).empty());
    std::istringstream row(line);
    std::string field;
    std::vector<double> values;
    while (row >> field) values.push_back(parse_double(field, "eta_table line " + std::to_string(line_no)));
    if (static_cast<int>(values.size()) != p.K)
      throw PolicyFormatError("eta_table line " + std::to_string(line_no) + ": expected " + std::to_string(p.K) +
                              " columns");
    if (std::abs(values[0] - p.zgrid.log_z(node)) > tol)
      throw PolicyFormatError("eta_table line " + std::to_string(line_no) + ": log_z does not match the grid");
    QuantizerParams q{std::vector<double>(values.begin() + 1, values.end())};
    try {
      q.validate();
    } catch (const InvalidArgument& e) {
      throw PolicyFormatError("eta_table line " + std::to_string(line_no) + ": " + e.what());
    }
    p.eta.push_back(std::move(q));
  }
  while (std::getline(in, line))
    if (!trim(line).empty()) throw PolicyFormatError("trailing data after eta_table");
  return p;
}

void save_policy(const std::filesystem::path& path, const Policy& policy) {
  auto out = open_out(path);
  write_policy(out, policy);
}

Policy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PolicyFormatError("cannot open policy file " + path.string());
  return read_policy(in);
}

void write_levels_csv(std::ostream& out, const Policy& p) {
  out << "log_lr";
  for (int k = 1; k < p.K; ++k) out << ",level_" << k;
  out << '\n';
  for (int node = p.first_continuation(); node < p.index_A; ++node) {
    out << format_double(p.zgrid.log_z(node));
    for (double level : p.eta_at(node).levels) out << ',' << format_double(level);
    out << '\n';
  }
}

void save_levels_csv(const std::filesystem::path& path, const Policy& policy) {
  auto out = open_out(path);
  write_levels_csv(out, policy);
}

void write_overlay_csv(std::ostream& out, const QuantizerParams& params) {
  for (int k = 1; k < params.K(); ++k) out << (k > 1 ? "," : "") << "level_" << k;
  out << '\n';
  for (std::size_t k = 0; k < params.levels.size(); ++k) out << (k ? "," : "") << format_double(params.levels[k]);
  out << '\n';
}

void save_overlay_csv(const std::filesystem::path& path, const QuantizerParams& params) {
  auto out = open_out(path);
  write_overlay_csv(out, params);
}

}  // namespace seqquant
