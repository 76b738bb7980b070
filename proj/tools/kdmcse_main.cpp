#include <string>
#include <vector>

#include "kdmcse/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kdmcse::cli::run(std::move(args));
}
