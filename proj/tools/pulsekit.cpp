#include <iostream>
#include <string>
#include <vector>

#include "pulsekit/runner.hpp"

int main(int argc, char** argv) {
  return pulsekit::runner::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
