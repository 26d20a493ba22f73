#include <string>
#include <vector>

#include "brl/report.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return brl::run_cli(args);
}
