#include <vector>

#include "dyncausal/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dyncausal::run_cli(std::move(args));
}
