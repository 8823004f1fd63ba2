#include <string>
#include <vector>

#include "rsub/cli.hpp"

int main(int argc, char** argv) {
  return rsub::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
