#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "incomelab/cli.hpp"
#include "incomelab/io.hpp"

namespace {

using nlohmann::json;
namespace cli = incomelab::cli;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

json numbers(const std::string& s) {
  json arr = json::array();
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw cli::ConfigError("not a number: " + item);
    arr.push_back(v);
  }
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incomelab: market, firm, wage and price simulations; income mixture sampling and fitting"};
  app.require_subcommand(1);

  cli::GlobalOptions g;
  std::string config_path;
  std::string out = ".";
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--config", config_path, "JSON config, one block per command");
  app.add_option("--out", out, "Output directory");
  app.add_option("--format", g.format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}));

  for (const auto& name : cli::command_names()) app.add_subcommand(name)->fallthrough();

  std::size_t n = 0;
  std::string params_path;
  auto* sample = app.get_subcommand("sample");
  auto* n_opt = sample->add_option("--n", n, "Number of incomes");
  auto* params_opt = sample->add_option("--params", params_path, "MixtureParams JSON file");

  std::string data, init_path, freeze;
  double h_floor = 0.0;
  auto* fit = app.get_subcommand("fit");
  auto* data_opt = fit->add_option("--data", data, "Income sample or histogram CSV");
  auto* init_opt = fit->add_option("--init", init_path, "Initial MixtureParams JSON file");
  auto* freeze_opt = fit->add_option("--freeze", freeze, "Comma-separated parameters held fixed");
  auto* floor_opt = fit->add_option("--h-floor", h_floor, "Ignore bins below this income");

  std::string bins, grid;
  double mean = 0.0;
  auto* entropy = app.get_subcommand("oracle-entropy");
  auto* bins_opt = entropy->add_option("--bins", bins, "Comma-separated wage values");
  auto* grid_opt = entropy->add_option("--grid", grid, "lo,hi,n equally spaced wage values");
  auto* mean_opt = entropy->add_option("--mean", mean, "Mean wage constraint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::config_error;
  }
  g.out = out;
  const std::string command = app.get_subcommands().front()->get_name();

  json block = json::object();
  try {
    if (!config_path.empty()) block = cli::load_config_block(config_path, command);
    if (!block.is_object()) throw cli::ConfigError("config block for " + command + " must be an object");
    if (*n_opt) block["n"] = n;
    if (*params_opt) block["params"] = json::parse(incomelab::io::read_file(params_path));
    if (*data_opt) block["data"] = data;
    if (*init_opt) block["init"] = json::parse(incomelab::io::read_file(init_path));
    if (*freeze_opt) block["freeze"] = split_list(freeze);
    if (*floor_opt) block["h_floor"] = h_floor;
    if (*bins_opt) block["bins"] = numbers(bins);
    if (*grid_opt) {
      const json v = numbers(grid);
      if (v.size() != 3) throw cli::ConfigError("--grid expects lo,hi,n");
      block["grid"] = {{"lo", v[0]}, {"hi", v[1]}, {"n", static_cast<std::size_t>(v[2].get<double>())}};
    }
    if (*mean_opt) block["mean"] = mean;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::config_error;
  }
  return cli::run_command(command, g, block);
}
