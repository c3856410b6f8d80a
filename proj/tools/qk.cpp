#include <string>
#include <vector>

#include "qkernel/cli.hpp"

int main(int argc, char** argv) {
  return qkernel::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
