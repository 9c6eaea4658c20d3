#include <string>
#include <vector>

#include "cryonoise/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cryonoise::cli::run_cli(std::move(args));
}
