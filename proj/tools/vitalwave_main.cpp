#include <vector>

#include "vitalwave/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vitalwave::cli::run(args);
}
