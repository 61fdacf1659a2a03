#include "pmuevent/cli.hpp"

int main(int argc, char** argv) {
  return pmuevent::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
