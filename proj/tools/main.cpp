#include <string>
#include <vector>

#include "gwcusum/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gwcusum::cli_main(args);
}
