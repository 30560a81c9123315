#pragma once

// Files: CSV tables with 17 significant digits, atomic writes, and the
// JSON shapes of mixture parameters, fit results and entropy solutions.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "incomelab/common.hpp"
#include "incomelab/estimation.hpp"
#include "incomelab/income.hpp"

namespace incomelab::io {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Config or data content that does not parse or violates a schema.
class FormatError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

std::string format_number(double x);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  [[nodiscard]] std::vector<double> column(const std::string& name) const;
};

std::string to_csv(const Table& table);
/// Column-oriented JSON object {"name": [values...]}.
nlohmann::ordered_json to_json(const Table& table);
Table parse_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string dump(const nlohmann::ordered_json& j);

/// Single column of positive incomes, header "income" optional.
std::vector<double> read_income_sample(const std::filesystem::path& path);
std::string income_sample_csv(const std::vector<double>& sample);

estimation::Histogram read_histogram(const std::filesystem::path& path);
Table histogram_table(const estimation::Histogram& hist);
estimation::Histogram histogram_from_table(const Table& table);

nlohmann::ordered_json to_json(const income::MixtureParams& p);
/// Unknown keys are rejected; a missing or null h_splice means the tangency point.
income::MixtureParams mixture_params_from_json(const nlohmann::json& j, bool validate = true);
nlohmann::ordered_json to_json(const estimation::FitResult& r);
nlohmann::ordered_json to_json(const estimation::EntropySolution& s);

}  // namespace incomelab::io
