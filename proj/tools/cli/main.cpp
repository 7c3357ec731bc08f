#include <iostream>
#include <string>
#include <vector>

#include "cli/run_config.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  auto parsed = mvfbm::cli::parse_config(args);
  if (auto* exit = std::get_if<mvfbm::cli::ParseExit>(&parsed)) {
    (exit->status == 0 ? std::cout : std::cerr) << exit->message << '\n';
    return exit->status;
  }
  return mvfbm::cli::dispatch(std::get<mvfbm::cli::RunConfig>(parsed), std::cout, std::cerr).status;
}
