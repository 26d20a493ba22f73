#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace brl {

using Json = nlohmann::json;

// Provenance record written next to every output file.  Wall-clock data is
// deliberately absent so repeated runs produce byte-identical trees.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::string scenario_hash;
  std::string scenario_canonical;
  long long seed = 0;
  int threads = 1;
  std::vector<std::string> outputs;  // file names written by the run
  Json summary;                      // resolved options and headline numbers
};

Json manifest_json(const RunManifest& m);

std::string tool_version();

// dump(2) with a trailing newline; doubles use the shortest round-trip form.
std::string dump_json(const Json& j);

void write_text_file(const std::string& path, const std::string& text);

// CSV with %.17g cells.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

// Full command-line driver on argv[1:].  Returns the process exit code:
// 0 success, 2 scenario/usage errors, 3 numerical failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace brl
