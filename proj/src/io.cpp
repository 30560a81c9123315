#include "incomelab/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace incomelab::io {
namespace {

bool parse_number(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  // Underflow to a subnormal or zero is fine; overflow is not.
  return end == begin + field.size() && !(errno == ERANGE && std::isinf(out));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t' && c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw InvalidArgument("table: row width differs from header");
  rows.push_back(std::move(row));
}

std::vector<double> Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  throw FormatError("table: no column '" + name + "'");
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const Table& table) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    auto col = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) col.push_back(row[c]);
    j[table.columns[c]] = std::move(col);
  }
  return j;
}

Table parse_csv(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size(); ++c) numeric = numeric && parse_number(fields[c], row[c]);
    if (first) {
      first = false;
      if (!numeric) {
        table.columns = fields;
        continue;
      }
      table.columns.assign(fields.size(), "");
    }
    if (!numeric) throw FormatError("csv: line " + std::to_string(line_no) + " is not numeric");
    if (row.size() != table.columns.size())
      throw FormatError("csv: line " + std::to_string(line_no) + " has the wrong number of fields");
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

std::vector<double> read_income_sample(const std::filesystem::path& path) {
  const Table t = parse_csv(read_file(path));
  if (t.columns.size() > 1) throw FormatError("income sample: expected a single column");
  if (!t.columns.empty() && !t.columns[0].empty() && t.columns[0] != "income")
    throw FormatError("income sample: header must be 'income'");
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    if (!(r[0] > 0.0) || !std::isfinite(r[0]))
      throw FormatError("income sample: incomes must be positive and finite");
    out.push_back(r[0]);
  }
  return out;
}

std::string income_sample_csv(const std::vector<double>& sample) {
  Table t;
  t.columns = {"income"};
  for (double v : sample) t.rows.push_back({v});
  return to_csv(t);
}

Table histogram_table(const estimation::Histogram& hist) {
  Table t;
  t.columns = {"bin_left", "bin_right", "density"};
  for (std::size_t i = 0; i < hist.size(); ++i)
    t.rows.push_back({hist.left[i], hist.right[i], hist.density[i]});
  return t;
}

estimation::Histogram histogram_from_table(const Table& table) {
  estimation::Histogram h;
  h.left = table.column("bin_left");
  h.right = table.column("bin_right");
  h.density = table.column("density");
  try {
    h.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return h;
}

estimation::Histogram read_histogram(const std::filesystem::path& path) {
  return histogram_from_table(parse_csv(read_file(path)));
}

nlohmann::ordered_json to_json(const income::MixtureParams& p) {
  nlohmann::ordered_json j;
  j["n_pf"] = p.n_pf;
  j["n_e"] = p.n_e;
  j["n_ue"] = p.n_ue;
  j["h0"] = p.h0;
  j["sigma_f"] = p.sigma_f;
  j["lambda"] = p.lambda;
  j["h_splice"] = p.h_splice;
  j["pareto_enabled"] = p.pareto_enabled;
  j["t_wage"] = p.t_wage;
  j["h_ue"] = p.h_ue;
  j["sigma_ue"] = p.sigma_ue;
  return j;
}

income::MixtureParams mixture_params_from_json(const nlohmann::json& j, bool validate) {
  if (!j.is_object()) throw FormatError("mixture params: expected a JSON object");
  static const std::set<std::string> known = {"n_pf",   "n_e",      "n_ue",           "h0",
                                              "sigma_f", "lambda",  "h_splice",       "pareto_enabled",
                                              "t_wage", "h_ue",     "sigma_ue"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw FormatError("mixture params: unknown key '" + key + "'");
  income::MixtureParams p;
  auto number = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw FormatError(std::string("mixture params: '") + key + "' must be a number");
    out = j[key].get<double>();
  };
  number("n_pf", p.n_pf);
  number("n_e", p.n_e);
  number("n_ue", p.n_ue);
  number("h0", p.h0);
  number("sigma_f", p.sigma_f);
  number("lambda", p.lambda);
  number("t_wage", p.t_wage);
  number("h_ue", p.h_ue);
  number("sigma_ue", p.sigma_ue);
  if (j.contains("pareto_enabled")) {
    if (!j["pareto_enabled"].is_boolean()) throw FormatError("mixture params: 'pareto_enabled' must be a boolean");
    p.pareto_enabled = j["pareto_enabled"].get<bool>();
  }
  if (j.contains("h_splice") && !j["h_splice"].is_null())
    number("h_splice", p.h_splice);
  else
    p.h_splice = income::tangent_splice(p.h0, p.sigma_f, p.lambda);
  if (validate) p.validate();
  return p;
}

nlohmann::ordered_json to_json(const estimation::FitResult& r) {
  nlohmann::ordered_json j = to_json(r.params);
  j["objective_value"] = r.objective_value;
  j["converged"] = r.converged;
  j["n_iterations"] = r.n_iterations;
  nlohmann::ordered_json se;
  for (const auto& name : estimation::mixture_parameter_names()) {
    const auto it = r.standard_errors.find(name);
    se[name] = it == r.standard_errors.end() ? 0.0 : it->second;
  }
  j["standard_errors"] = se;
  j["objective_trace"] = r.objective_trace;
  return j;
}

nlohmann::ordered_json to_json(const estimation::EntropySolution& s) {
  nlohmann::ordered_json j;
  j["bin_values"] = s.bin_values;
  j["occupation"] = s.occupation;
  j["multiplier"] = s.multiplier;
  j["entropy"] = estimation::entropy(s.occupation);
  return j;
}

}  // namespace incomelab::io
