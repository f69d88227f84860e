#include <vector>

#include "sdvc/run.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sdvc::run(args);
}
