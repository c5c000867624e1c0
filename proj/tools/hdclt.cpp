// Command-line frontend. Exit codes: 0 ok, 1 bad config / domain error,
// 2 resource cap exceeded.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include "hdclt/harness/commands.hpp"

namespace {

using hdclt::harness::json;

json read_config(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hdclt::config_error("--config", "cannot read " + path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is an offset; report a line for humans
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw hdclt::config_error("line " + std::to_string(line), e.what());
  }
}

std::optional<unsigned> env_workers() {
  const char* s = std::getenv("HDCLT_WORKERS");
  if (!s || !*s) return std::nullopt;
  try {
    const long v = std::stol(s);
    if (v < 1) throw std::invalid_argument("");
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw hdclt::config_error("HDCLT_WORKERS", "must be a positive integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and simulated Gaussian-approximation error for high-dimensional sums"};
  app.set_version_flag("--version", std::string(hdclt::kVersion));
  app.require_subcommand(1);

  std::string config_path = "-", out_path;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  for (const auto& c : hdclt::harness::kCommands) {
    auto* sub = app.add_subcommand(c.name);
    sub->add_option("--config", config_path, "JSON config file, or - for stdin");
    sub->add_option("--out", out_path, "CSV output path (default: stdout, no manifest)");
    sub->add_option("--workers", workers, "worker threads (falls back to HDCLT_WORKERS)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "RNG seed, overrides the config");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto cmd = hdclt::harness::parse_command(app.get_subcommands().front()->get_name());
    json j = read_config(config_path);
    if (j.is_object()) {
      if (j.contains("command") && j["command"].is_string() && j["command"] != hdclt::harness::to_string(cmd)) {
        throw hdclt::config_error("command", "config says '" + j["command"].get<std::string>() + "'");
      }
      if (!workers) workers = env_workers();
      if (workers) j["workers"] = *workers;
      if (seed) j["seed"] = *seed;
    }
    const auto cfg = hdclt::harness::parse_config(j, cmd);
    const auto table = hdclt::harness::run_command(cfg);
    if (out_path.empty()) {
      table.write_csv(std::cout);
    } else {
      hdclt::harness::write_outputs(out_path, table, hdclt::harness::manifest_for(cfg));
    }
    return 0;
  } catch (const hdclt::resource_error& e) {
    std::cerr << "error: resource limit: " << e.what() << '\n';
    return 2;
  } catch (const hdclt::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
